"""Independent high-precision values for the separatrix and Melnikov tests."""
import mpmath as mp

mp.mp.dps = 40


def kernel_integral(omega):
    f = lambda t: mp.cos(omega * t) / (1 + t * t) ** 2
    if omega == 0:
        return 2 * mp.quad(f, [0, mp.inf])
    return 2 * mp.quadosc(f, [0, mp.inf], omega=omega)


def melnikov(k, nuI0, Vk):
    return -Vk / 2 * kernel_integral(k * nuI0)


def one_sided(u, omega):
    # int_{-inf}^{u} (1+s^2)^-2 e^{i omega (s-u)} ds
    re = mp.quadosc(lambda s: mp.cos(omega * (s - u)) / (1 + s * s) ** 2, [-mp.inf, u], omega=abs(omega))
    im = mp.quadosc(lambda s: mp.sin(omega * (s - u)) / (1 + s * s) ** 2, [-mp.inf, u], omega=abs(omega))
    return mp.mpc(re, im)


if __name__ == "__main__":
    print("kernel(0)", mp.nstr(kernel_integral(0), 20), "pi/2", mp.nstr(mp.pi / 2, 20))
    print("L1(5)", mp.nstr(melnikov(1, 5, mp.mpf("0.03")), 20))
    print("L2(3)", mp.nstr(melnikov(2, 3, mp.mpf("0.004")), 20))
    print("L1(4)", mp.nstr(melnikov(1, 4, mp.mpf("0.03")), 20))
    for u in (-2.0, 0.3):
        print("one_sided(u=%g, omega=4)" % u, mp.nstr(one_sided(u, 4), 20))
    print("phi0(1)", mp.nstr(-mp.mpf(1) / 4 + mp.pi / 8, 20))
