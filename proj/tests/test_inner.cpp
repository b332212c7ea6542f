#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <numbers>

#include "surfchaos/errors.hpp"
#include "surfchaos/inner.hpp"

using namespace surfchaos;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;
const cplx I(0.0, 1.0);

ModelParams inner_params(double eps, CorrugationSeries series = CorrugationSeries::physical()) {
    PhysicalParams phys;
    phys.corrugation = std::move(series);
    return ModelParams::from_nuI0(8, eps, phys);
}

const InnerSolution& solved(double eps) {
    static std::map<double, InnerSolution> cache;
    auto it = cache.find(eps);
    if (it == cache.end()) it = cache.emplace(eps, solve_inner(inner_params(eps))).first;
    return it->second;
}

}  // namespace

TEST_CASE("leading inner term") {
    CHECK(std::abs(T0(-I) - (-I / 4.0)) < 1e-16);
    CHECK(std::abs(T0(2.0) - (-1.0 / 8)) < 1e-16);
    CHECK_THROWS_AS(T0(0.0), DomainError);
}

TEST_CASE("inner potentials vanish for a flat surface") {
    const auto flat = CorrugationSeries::cosine({});
    CHECK(L_in_plus(cplx(1.0, -12.0), 0.4, flat) == cplx(0.0));
    CHECK(L_in_minus(cplx(1.0, -12.0), 0.4, flat) == cplx(0.0));
}

TEST_CASE("inner potential decays like the inverse square along a ray") {
    const auto s = CorrugationSeries::physical();
    const double beta = 20.0 * kPi / 180.0;
    std::vector<double> lx, ly;
    for (double r : {20.0, 50.0, 100.0, 300.0, 1000.0, 3000.0}) {
        const cplx v = cplx(0.0, -10.0) - r * std::polar(1.0, beta);
        lx.push_back(std::log(std::abs(v)));
        ly.push_back(std::log(std::abs(L_in_plus(v, 0.3, s))));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i] / lx.size();
        my += ly[i] / ly.size();
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    CHECK_THAT(-sxy / sxx, WithinAbs(2.0, 0.05));
}

TEST_CASE("jump of the inner potential is the inner Melnikov potential") {
    const auto s = CorrugationSeries::cosine({0.7, -0.2, 0.05});
    for (double x : {-3.0, 0.0, 2.5})
        for (int k = -3; k <= 3; ++k) {
            const cplx v(x, -30.0);
            const cplx expected = k >= 1 ? -kPi * k * s.coefficient(k) / 4.0 * std::exp(-I * static_cast<double>(k) * v) : 0.0;
            const cplx got = L_in_jump_mode(k, v, s);
            if (k >= 1)
                CHECK(std::abs(got - expected) <= 1e-6 * std::abs(expected) + 1e-30 * std::abs(L_in_plus_mode(k, v, s)));
            else
                CHECK(std::abs(got) <= 1e-25);
        }
}

TEST_CASE("inner potentials satisfy the conjugation symmetry") {
    const auto s = CorrugationSeries::physical();
    for (cplx v : {cplx(-5.0, -11.0), cplx(3.0, -15.0), cplx(0.0, -10.0)})
        for (double th : {0.0, 0.7, 2.0}) {
            const cplx lhs = L_in_minus(v, th, s);
            const cplx rhs = -std::conj(L_in_plus(-std::conj(v), -th, s));
            CHECK(std::abs(lhs - rhs) <= 1e-14 * std::abs(lhs));
        }
}

TEST_CASE("flat surface gives the bare inner solution") {
    const auto sol = solve_inner(inner_params(0.0), 4);
    for (const auto& ln : sol.lines)
        for (std::size_t j = 0; j < ln.x.size(); j += 97)
            for (int k = -4; k <= 4; ++k) {
                CHECK(ln.T2.at(j, k) == cplx(0.0));
                CHECK(ln.L.at(j, k) == cplx(0.0));
            }
    CHECK(sol.equation_residual() < 1e-14);
}

TEST_CASE("inner solution converges and satisfies the inner equation") {
    const auto& sol = solved(1e-3);
    CHECK(sol.residual <= 1e-20);
    CHECK(sol.contraction < 0.9);
    CHECK(sol.equation_residual() < 1e-13);
    // Grid potential against the standalone quadrature.
    const auto& ln = sol.lines.front();
    for (std::size_t j = 0; j < ln.x.size(); j += 733)
        for (int k = 1; k <= 2; ++k) {
            const cplx q = L_in_plus_mode(k, ln.v(j), sol.series);
            CHECK(std::abs(ln.L.at(j, k) - q) <= 1e-11 * std::abs(q));
        }
}

TEST_CASE("second-order part is bounded by the squared potential size") {
    const auto& a = solved(1e-3);
    const auto& b = solved(1e-2);
    CHECK(a.K1 > 0);
    CHECK_THAT(b.K1, WithinRel(a.K1, 0.01));
    CHECK_THAT(b.theta_V / a.theta_V, WithinRel(10.0, 1e-9));
}

TEST_CASE("conjugate sheet closes under double conjugation") {
    const auto& sol = solved(1e-3);
    const auto& ln = sol.lines[2];
    for (double x : {-2.0, 0.0, 1.0}) {
        const std::size_t j = ln.node(x), jm = ln.node(-x);
        const auto plus = sol.plus_modes(2, j);
        // -conj(T-(-conj v)) at mode k.
        const auto minus_reflected = sol.minus_modes(2, jm);
        for (int k = -sol.modes; k <= sol.modes; ++k)
            CHECK(-std::conj(minus_reflected[k + sol.modes]) == plus[k + sol.modes]);
    }
}

TEST_CASE("nonpositive modes of the inner difference decay with depth") {
    const auto d = extract_fk(solved(1e-3), -2, 1);
    for (std::size_t i = 0; i < d.k.size(); ++i) {
        if (d.k[i] > 0) continue;
        const auto& a = d.delta_abs[i];
        CHECK(a.back() < a.front());
        CHECK(a.back() < 1e-12 * std::abs(d.f.back()));
    }
}

TEST_CASE("first inner splitting constant at small epsilon") {
    const double eps = 1e-3;
    const auto sol = solve_inner(inner_params(eps, CorrugationSeries::cosine({1.0})));
    const auto d = extract_fk(sol, 1, 1);
    CHECK_THAT(d.f[0].real() / eps, WithinRel(-kPi / 8, 0.05));
    CHECK(d.imag_f1 <= 1e-3 * std::abs(d.f[0]));
    CHECK(d.error[0] < 1e-6 * std::abs(d.f[0]));
}

TEST_CASE("splitting constant is insensitive to mode truncation") {
    const auto p = inner_params(1.0);
    const double f8 = extract_fk(solve_inner(p, 8), 1, 1).f[0].real();
    const double f16 = extract_fk(solve_inner(p, 16), 1, 1).f[0].real();
    CHECK(std::abs(f16 - f8) < 1e-8 * std::abs(f8));
}

TEST_CASE("deviation from the inner Melnikov value scales with the squared potential size") {
    auto K = [](double eps) {
        const auto& sol = solved(eps);
        const double f1 = extract_fk(sol, 1, 1).f[0].real();
        const double kappa0 = 10.0;
        const double dev = std::abs(f1 + kPi * sol.series.coefficient(1).real() / 4.0);
        return dev * std::pow(kappa0, 3) / (sol.theta_V * sol.theta_V * std::exp(kappa0));
    };
    CHECK_THAT(K(5e-3), WithinRel(K(1e-2), 0.02));
}

TEST_CASE("epsilon scan of the first splitting constant") {
    const auto scan = f1_epsilon_scan({1e-3, 2e-3, 4e-3}, inner_params(1.0));
    CHECK(std::abs(scan.slope) > 0);
    CHECK(std::isfinite(scan.slope));
    const double r1 = scan.quadratic_residual[1] / scan.quadratic_residual[0];
    const double r2 = scan.quadratic_residual[2] / scan.quadratic_residual[1];
    CHECK_THAT(r1, WithinRel(4.0, 0.1));
    CHECK_THAT(r2, WithinRel(4.0, 0.1));

    const auto d = extract_fk(solved(1.0), 1, 1);
    CHECK(std::abs(d.f[0]) > 10 * d.error[0]);
    CHECK_THROWS_AS(f1_epsilon_scan({0.0, 1e-3}, inner_params(1.0)), DomainError);
}

TEST_CASE("inner solver rejects lines too close to the singularity") {
    InnerOptions opt;
    opt.depths = {5.0};
    opt.kappa = 5.0;
    CHECK_THROWS_AS(solve_inner(inner_params(1e-3), 8, 1e-20, opt), DomainError);
    CHECK_THROWS_AS(solve_inner(ModelParams::from_nuI0(8, 200.0), 8), NonContraction);
}
