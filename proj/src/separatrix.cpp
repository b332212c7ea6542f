#include "surfchaos/separatrix.hpp"

#include <cmath>
#include <numbers>

#include "surfchaos/errors.hpp"
#include "surfchaos/quadrature.hpp"

namespace surfchaos {

namespace {

constexpr double pi = std::numbers::pi;
constexpr std::size_t max_segments = 20'000'000;

double kernel(double t) {
    const double d = 1.0 + t * t;
    return 1.0 / (d * d);
}

double kernel_prime(double t) {
    const double d = 1.0 + t * t;
    return -4.0 * t / (d * d * d);
}

std::complex<double> kernel(std::complex<double> s) {
    const auto d = 1.0 + s * s;
    return 1.0 / (d * d);
}

// (-i sgn) int_0^inf f(x0 + i sgn t) e^{-|omega| t} dt for x0 <= -1: the tail of the
// one-sided integral rotated into the half-plane where e^{-i omega tau} decays.
std::complex<double> rotated_tail(double x0, double omega, double rel_tol) {
    const double w = std::abs(omega);
    const double sgn = omega > 0 ? 1.0 : -1.0;
    auto h = [&](double t) { return kernel(std::complex<double>(x0, sgn * t)) * std::exp(-w * t); };
    CompensatedSum<std::complex<double>> sum;
    double err = 0.0;
    double a = 0.0, b = std::min(1.0, 1.0 / w);
    const double fmax = 1.0 / ((1.0 + x0 * x0) * (1.0 + x0 * x0));
    for (int n = 0; n < 200; ++n) {
        const auto r = adaptive_gk(h, a, b, std::min(1e-13, rel_tol * 1e-2), 12);
        sum.add(r.value);
        err += r.error;
        const double bound = fmax * std::exp(-w * b) / w;
        if (bound < 1e-2 * rel_tol * std::abs(sum.value())) break;
        a = b;
        b *= 2.0;
    }
    if (err > rel_tol * std::abs(sum.value()))
        throw QuadratureError("rotated tail integral did not converge", std::abs(sum.value()), err);
    return std::complex<double>(0.0, -sgn) * sum.value();
}

// int_{-inf}^{u} f(s) e^{i omega (s - u)} ds = int_0^inf f(u - tau) e^{-i omega tau} dtau, f = q_h^4,
// omega != 0. Real segment [0, T0] with T0 = u + 1, rotated contour beyond (no pole is crossed
// since Re(u - tau) <= -1 there).
std::complex<double> one_sided(double u, double omega, double rel_tol) {
    if (u <= -1.0) return rotated_tail(u, omega, rel_tol);
    const double T0 = u + 1.0;
    const double half = std::numbers::pi / std::abs(omega);
    const int n = std::max(1, static_cast<int>(std::ceil(T0 / half)));
    auto g = [&](double tau) {
        return kernel(u - tau) * std::complex<double>(std::cos(omega * tau), -std::sin(omega * tau));
    };
    CompensatedSum<std::complex<double>> sum;
    double err = 0.0;
    for (int j = 0; j < n; ++j) {
        const auto r = adaptive_gk(g, T0 * j / n, T0 * (j + 1) / n, std::min(1e-13, rel_tol * 1e-2), 12);
        sum.add(r.value);
        err += r.error;
    }
    sum.add(std::complex<double>(std::cos(omega * T0), -std::sin(omega * T0)) * rotated_tail(-1.0, omega, rel_tol));
    if (err > rel_tol * std::abs(sum.value()))
        throw QuadratureError("one-sided Melnikov integral did not converge", std::abs(sum.value()), err);
    return sum.value();
}

}  // namespace

double q_h(double u) { return 1.0 / std::sqrt(1.0 + u * u); }
double p_h(double u) { return u / (1.0 + u * u); }
double phi0(double u) { return -u / (2.0 * (u * u + 1.0)) + 0.5 * std::atan(u); }
double dphi0(double u) {
    const double p = p_h(u);
    return p * p;
}

SeparatrixPoint separatrix_point(double u) { return {u, q_h(u), p_h(u), phi0(u)}; }

McGeheeState gamma0(double u, double theta) { return {q_h(u), p_h(u), theta, 0.0}; }

MelnikovCoefficient melnikov_coeff_closed(int k, double nuI0, const CorrugationSeries& series) {
    if (!(nuI0 > 0)) throw DomainError("melnikov_coeff_closed: nuI0 must be positive");
    MelnikovCoefficient c;
    c.k = k;
    c.method = MelnikovMethod::closed_form;
    if (k == 0) {
        c.value = 0.0;
        return c;
    }
    const double ak = std::abs(k);
    c.value = -(pi * series.coefficient(k) / 4.0) * std::exp(-ak * nuI0) * (ak * nuI0 + 1.0);
    return c;
}

KernelIntegral separatrix_kernel_integral(double omega, double rel_tol) {
    const double w = std::abs(omega);
    const double seg_tol = std::min(1e-13, rel_tol * 1e-2);
    KernelIntegral out;
    CompensatedSum<double> sum;
    double gk_err = 0.0;
    if (w == 0.0) {
        double a = 0.0, b = 1.0;
        for (std::size_t n = 0; n < 200; ++n) {
            const auto r = adaptive_gk([](double t) { return kernel(t); }, a, b, seg_tol);
            sum.add(2.0 * r.value);
            gk_err += 2.0 * r.error;
            const double bound = 2.0 / (3.0 * b * b * b);
            if (bound < 1e-2 * rel_tol * sum.value()) {
                if (gk_err > rel_tol * sum.value())
                    throw QuadratureError("kernel integral: segment errors exceed target", sum.value(), gk_err);
                out.value = sum.value();
                out.error_estimate = gk_err + bound;
                out.cutoff = b;
                return out;
            }
            a = b;
            b *= 2.0;
        }
        throw QuadratureError("kernel integral did not converge", sum.value(), gk_err);
    }
    const double half = pi / w;
    auto f = [w](double t) { return kernel(t) * std::cos(w * t); };
    for (std::size_t n = 0; n < max_segments; ++n) {
        const double a = n * half, b = (n + 1) * half;
        const auto r = adaptive_gk(f, a, b, seg_tol);
        sum.add(2.0 * r.value);
        gk_err += 2.0 * r.error;
        if (b < 1.0) continue;
        const double bound = 2.0 * 2.0 * std::abs(kernel_prime(b)) / (w * w);
        if (bound < 1e-2 * rel_tol * std::abs(sum.value())) {
            if (gk_err > rel_tol * std::abs(sum.value()))
                throw QuadratureError("kernel integral: segment errors exceed target", sum.value(), gk_err);
            out.value = sum.value();
            out.error_estimate = gk_err + bound;
            out.cutoff = b;
            return out;
        }
    }
    throw QuadratureError("kernel integral did not converge", sum.value(), gk_err);
}

MelnikovCoefficient melnikov_coeff_quadrature(int k, double nuI0, const CorrugationSeries& series,
                                              double rel_tol) {
    if (!(nuI0 >= 0)) throw DomainError("melnikov_coeff_quadrature: nuI0 must be non-negative");
    MelnikovCoefficient c;
    c.k = k;
    c.method = MelnikovMethod::quadrature;
    const auto Vk = series.coefficient(k);
    if (Vk == 0.0) {
        c.value = 0.0;
        return c;
    }
    const auto I = separatrix_kernel_integral(k * nuI0, rel_tol);
    c.value = -(Vk / 2.0) * I.value;
    c.error_estimate = std::abs(Vk / 2.0) * I.error_estimate;
    return c;
}

double melnikov_potential(double u, double theta, double nuI0, const CorrugationSeries& series) {
    std::complex<double> s = 0.0;
    const int N = series.order();
    for (int k = -N; k <= N; ++k) {
        if (k == 0) continue;
        const auto L = melnikov_coeff_closed(k, nuI0, series).value;
        s += L * std::polar(1.0, k * (theta - nuI0 * u));
    }
    return s.real();
}

double melnikov_potential_dtheta(double u, double theta, double nuI0, const CorrugationSeries& series) {
    std::complex<double> s = 0.0;
    const int N = series.order();
    for (int k = -N; k <= N; ++k) {
        if (k == 0) continue;
        const auto L = melnikov_coeff_closed(k, nuI0, series).value;
        s += std::complex<double>(0.0, k) * L * std::polar(1.0, k * (theta - nuI0 * u));
    }
    return s.real();
}

std::complex<double> L_out_plus_mode(int k, double u, double nuI0, const CorrugationSeries& series,
                                     double rel_tol) {
    const auto Vk = series.coefficient(k);
    if (k == 0 || Vk == 0.0) return 0.0;
    return -(Vk / 2.0) * one_sided(u, k * nuI0, rel_tol);
}

double L_out_plus(double u, double theta, double nuI0, const CorrugationSeries& series, double rel_tol) {
    std::complex<double> s = 0.0;
    const int N = series.order();
    for (int k = -N; k <= N; ++k)
        if (k != 0) s += L_out_plus_mode(k, u, nuI0, series, rel_tol) * std::polar(1.0, k * theta);
    return s.real();
}

double L_out_minus(double u, double theta, double nuI0, const CorrugationSeries& series, double rel_tol) {
    // (V^[k]/2) int_u^inf f(s) e^{ik nuI0 (s-u)} ds, by reflection of the one-sided integral.
    std::complex<double> s = 0.0;
    const int N = series.order();
    for (int k = -N; k <= N; ++k) {
        const auto Vk = series.coefficient(k);
        if (k == 0 || Vk == 0.0) continue;
        s += (Vk / 2.0) * one_sided(-u, -k * nuI0, rel_tol) * std::polar(1.0, k * theta);
    }
    return s.real();
}

}  // namespace surfchaos
