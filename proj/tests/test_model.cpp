#include <cmath>
#include <numbers>
#include <random>

#include "catch_amalgamated.hpp"
#include "surfchaos/errors.hpp"
#include "surfchaos/model.hpp"

using namespace surfchaos;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("corrugation potential values") {
    const auto V = CorrugationSeries::physical();
    CHECK_THAT(potential_V(0.0, V), WithinAbs(0.068, 1e-16));
    CHECK_THAT(potential_V(pi / 2, V), WithinAbs(-0.008, 1e-16));
    CHECK(potential_V(1.234, CorrugationSeries::cosine({0.0, 0.0})) == 0.0);
    CHECK(V.even());
}

TEST_CASE("corrugation Fourier coefficients") {
    const auto V = CorrugationSeries::physical();
    CHECK(fourier_coeff_V(0, V) == 0.0);
    CHECK_THAT(fourier_coeff_V(1, V).real(), WithinAbs(0.03, 1e-17));
    CHECK_THAT(fourier_coeff_V(-2, V).real(), WithinAbs(0.004, 1e-17));
    CHECK(fourier_coeff_V(-2, V) == fourier_coeff_V(2, V));
    CHECK(fourier_coeff_V(3, V) == 0.0);

    // Synthesis from coefficients reproduces V, including sine terms.
    CorrugationSeries S;
    S.cosines = {0.1, -0.02, 0.005};
    S.sines = {0.03, 0.0, -0.01};
    for (double th : {0.0, 0.7, 2.9, 5.1}) {
        std::complex<double> s = 0.0;
        for (int k = -3; k <= 3; ++k) s += S.coefficient(k) * std::polar(1.0, k * th);
        CHECK_THAT(s.real(), WithinAbs(S.value(th), 1e-15));
        CHECK_THAT(s.imag(), WithinAbs(0.0, 1e-15));
    }
}

TEST_CASE("primitive and derivatives of V") {
    CorrugationSeries S;
    S.cosines = {0.06, 0.008, 0.001};
    S.sines = {0.0, 0.002, 0.0};
    const double h = 1e-5;
    for (double th : {0.3, 1.9, 4.4}) {
        CHECK_THAT((S.primitive(th + h) - S.primitive(th - h)) / (2 * h), WithinAbs(S.value(th), 1e-10));
        CHECK_THAT((S.value(th + h) - S.value(th - h)) / (2 * h), WithinAbs(S.derivative(th), 1e-10));
        CHECK_THAT((S.derivative(th + h) - S.derivative(th - h)) / (2 * h),
                   WithinAbs(S.second_derivative(th), 1e-9));
    }
}

TEST_CASE("nu from physical constants") {
    CHECK_THAT(nu_from_physical(3.6, 1.05), WithinRel(11.051879175935, 1e-11));
    CHECK_THAT(nu_from_physical(4 * pi, 1.0), WithinRel(1.0, 1e-15));
    CHECK_THAT(nu_from_physical(7.2, 1.05), WithinRel(11.051879175935 / 4, 1e-11));
    CHECK_THROWS_AS(nu_from_physical(-1.0, 1.0), DomainError);
}

TEST_CASE("parameter validation") {
    PhysicalParams p;
    p.D = -1;
    CHECK_THROWS_AS(p.validate(), DomainError);
    auto m = ModelParams::from_nuI0(5.0);
    CHECK_THAT(m.nuI0(), WithinRel(5.0, 1e-15));
    m.nu *= 1.0 + 1e-9;
    CHECK_THROWS_AS(m.validate(), DomainError);
    CHECK_THROWS_AS(ModelParams::from_nuI0(-1.0), DomainError);
}

TEST_CASE("Cartesian Hamiltonian examples") {
    PhysicalParams flat;
    flat.corrugation = CorrugationSeries::cosine({0.0});
    PhysicalParams phys;
    CHECK(hamiltonian_cartesian({0.0, std::numeric_limits<double>::infinity(), 0.0, 0.0}, phys) == 0.0);
    CHECK_THAT(hamiltonian_cartesian({0.0, 0.0, 0.0, 0.0}, flat), WithinRel(-flat.D, 1e-15));
    CHECK_THAT(hamiltonian_cartesian({0.0, 0.0, 0.0, 0.0}, phys), WithinRel(-phys.D + phys.D * 0.068, 1e-15));
}

TEST_CASE("McGehee transform") {
    const auto params = ModelParams::from_nuI0(5.0);
    CHECK_THAT(to_mcgehee({0.0, 0.0, 0.0, 0.0}, params).q, WithinRel(1.0 / std::sqrt(2.0), 1e-15));
    const auto inf = to_mcgehee({0.0, std::numeric_limits<double>::infinity(), 0.0, 0.0}, params);
    CHECK(inf.q == 0.0);
    CHECK(inf.p == 0.0);
    CHECK_THROWS_AS(from_mcgehee({-0.1, 0.0, 0.0, 0.0}, params), DomainError);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> zd(-0.5, 6.0), pd(-30.0, 30.0), xd(0.0, 3.5);
    for (int i = 0; i < 200; ++i) {
        const CartesianState c{xd(rng), zd(rng), pd(rng) + 100.0, pd(rng)};
        const auto back = from_mcgehee(to_mcgehee(c, params), params);
        CHECK_THAT(back.z, WithinRel(c.z, 1e-14));
        CHECK_THAT(back.pz, WithinRel(c.pz, 1e-14));
        CHECK_THAT(back.px, WithinRel(c.px, 1e-14));
        CHECK_THAT(back.x, WithinAbs(c.x, 1e-14));
    }
}

TEST_CASE("McGehee Hamiltonian examples") {
    auto params = ModelParams::from_nuI0(5.0);
    const double level = 0.5 * params.nu * params.I0 * params.I0;
    CHECK_THAT(hamiltonian_mcgehee({0, 0, 1.3, 0}, params).H, WithinRel(level, 1e-15));
    const double th = 0.4;
    CHECK_THAT(hamiltonian_mcgehee({1, 0, th, 0}, params).H,
               WithinRel(level + potential_V(th, params.physical.corrugation) / 2, 1e-14));
    params.epsilon = 0.0;
    const McGeheeState s{0.7, 0.2, 2.0, 0.01};
    const auto h = hamiltonian_mcgehee(s, params);
    CHECK(h.H == h.H0);
    CHECK(h.H1 == 0.0);
}

TEST_CASE("McGehee vector field examples") {
    const auto params = ModelParams::from_nuI0(5.0);
    const auto d = vector_field_mcgehee({0.0, 0.3, 1.0, 0.02}, params);
    CHECK(d.q == 0.0);
    CHECK(d.p == 0.0);
    CHECK(d.J == 0.0);
    CHECK_THAT(d.theta, WithinRel(params.nu * (params.I0 + 0.02), 1e-15));

    // V'(0) = 0 for the even physical series.
    const auto e = vector_field_mcgehee({1.0, 0.0, 0.0, 0.0}, params);
    CHECK_THAT(e.p, WithinRel(1.0 + 2.0 * 0.068, 1e-15));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const McGeheeState s{std::abs(u(rng)), u(rng), 3.0 * u(rng), 0.1 * u(rng)};
        const auto f = vector_field_mcgehee(s, params);
        const auto fr = vector_field_mcgehee(reversor(s), params);
        const auto sf = reversor(f);
        CHECK(fr.q == -sf.q);
        CHECK(fr.p == -sf.p);
        CHECK(fr.theta == -sf.theta);
        CHECK(fr.J == -sf.J);
        CHECK(vector_field_mcgehee({0.0, s.p, s.theta, s.J}, params).q == 0.0);
    }
}

TEST_CASE("Cartesian field and pushforward") {
    PhysicalParams flat;
    flat.corrugation = CorrugationSeries::cosine({0.0});
    CHECK(vector_field_cartesian({0.3, 0.2, 1.0, 2.0}, flat).px == 0.0);
    PhysicalParams phys;
    CHECK(std::abs(vector_field_cartesian({0.3, 40.0, 1.0, 2.0}, phys).pz) < 1e-15);

    const auto params = ModelParams::from_nuI0(6.0, 0.7);
    const auto eff = params.effective_physical();
    const auto tc = transform_constants(params.physical);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> q(0.05, 0.9), u(-1.0, 1.0), th(0.0, 6.0);
    for (int i = 0; i < 500; ++i) {
        const McGeheeState s{q(rng), u(rng), th(rng), 0.2 * u(rng)};
        const auto c = from_mcgehee(s, params);
        const auto dc = vector_field_cartesian(c, eff);
        // Chain rule of the transform.
        const double dq = -0.5 * params.physical.alpha * s.q * dc.z;
        const double dp = dc.pz / tc.B;
        const double dth = 2 * pi * dc.x / params.physical.a;
        const double dJ = dc.px / tc.C;
        const auto f = vector_field_mcgehee(s, params);
        const double c0 = tc.time_scale;
        CHECK_THAT(dq, WithinAbs(c0 * f.q, 1e-10 * std::max(1.0, std::abs(c0 * f.q))));
        CHECK_THAT(dp, WithinAbs(c0 * f.p, 1e-10 * std::max(1.0, std::abs(c0 * f.p))));
        CHECK_THAT(dth, WithinRel(c0 * f.theta, 1e-10));
        CHECK_THAT(dJ, WithinAbs(c0 * f.J, 1e-10 * std::max(1.0, std::abs(c0 * f.J))));
    }
}

TEST_CASE("energy exactness between coordinate systems") {
    const auto params = ModelParams::from_nuI0(4.5, 1.0);
    const auto eff = params.effective_physical();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> q(0.0, 1.2), u(-1.0, 1.0), th(0.0, 6.28);
    for (int i = 0; i < 1000; ++i) {
        const McGeheeState s{q(rng), u(rng), th(rng), 0.3 * u(rng)};
        const double H = hamiltonian_mcgehee(s, params).H;
        const double Hc = hamiltonian_cartesian(from_mcgehee(s, params), eff);
        CHECK_THAT(Hc / (8.0 * params.physical.D), WithinAbs(H, 1e-12 * std::max(1.0, std::abs(H))));
    }
}

namespace {

// omega(xi, eta) = xi_th eta_J - xi_J eta_th - (xi_q eta_p - xi_p eta_q)/q
double omega_form(double q, const double* x, const double* y) {
    return x[2] * y[3] - x[3] * y[2] - (x[0] * y[1] - x[1] * y[0]) / q;
}

}  // namespace

TEST_CASE("averaging change") {
    const auto params = ModelParams::from_nuI0(6.0);
    // Q = 0 is the identity.
    const McGeheeState z{0.0, 0.3, 1.2, -0.1};
    const auto r0 = averaging_change(z, params).original;
    CHECK(r0.p == z.p);
    CHECK(r0.J == z.J);
    CHECK(r0.theta == z.theta);

    // Transformed H1 equals its closed form and has no O(1) angle term.
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0), th(0.0, 6.28);
    for (int i = 0; i < 200; ++i) {
        const McGeheeState s{u(rng), u(rng), th(rng), u(rng)};
        const auto r = averaging_change(s, params);
        CHECK_THAT(r.H1_tilde, WithinAbs(r.H1_tilde_formula, 1e-13));
    }

    // Symplectic defect of the change w.r.t. the b-symplectic form.
    for (int i = 0; i < 50; ++i) {
        const McGeheeState s{0.2 + 0.7 * std::abs(u(rng)), u(rng), th(rng), 0.5 * u(rng)};
        double Jac[4][4];
        auto map = [&](const double* x) {
            const auto o = averaging_change({x[0], x[1], x[2], x[3]}, params).original;
            return std::array<double, 4>{o.q, o.p, o.theta, o.J};
        };
        const double x0[4] = {s.q, s.p, s.theta, s.J};
        for (int j = 0; j < 4; ++j) {
            auto column = [&](double h) {
                double xp[4], xm[4];
                std::copy(x0, x0 + 4, xp);
                std::copy(x0, x0 + 4, xm);
                xp[j] += h;
                xm[j] -= h;
                const auto fp = map(xp), fm = map(xm);
                std::array<double, 4> c;
                for (int k = 0; k < 4; ++k) c[k] = (fp[k] - fm[k]) / (2 * h);
                return c;
            };
            const auto c1 = column(1e-3), c2 = column(5e-4);
            for (int k = 0; k < 4; ++k) Jac[k][j] = (4 * c2[k] - c1[k]) / 3;
        }
        double defect = 0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                double ea[4] = {0, 0, 0, 0}, eb[4] = {0, 0, 0, 0};
                ea[a] = 1;
                eb[b] = 1;
                double xa[4], xb[4];
                for (int k = 0; k < 4; ++k) {
                    xa[k] = Jac[k][a];
                    xb[k] = Jac[k][b];
                }
                const double pulled = omega_form(s.q, xa, xb);
                defect = std::max(defect, std::abs(pulled - omega_form(s.q, ea, eb)));
            }
        CHECK(defect < 1e-10);
    }
}
