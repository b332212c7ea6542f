#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <numbers>

#include "surfchaos/errors.hpp"
#include "surfchaos/manifolds.hpp"
#include "surfchaos/separatrix.hpp"

using namespace surfchaos;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

const SplittingRun& sheets(double nuI0, double eps) {
    static std::map<std::pair<double, double>, SplittingRun> cache;
    auto key = std::make_pair(nuI0, eps);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, compute_sheets(ModelParams::from_nuI0(nuI0, eps))).first;
    return it->second;
}

// sup over nodes of sum_k |Phi1_k - eps L+_k|, and of sum_k |eps L+_k|.
std::pair<double, double> distance_to_first_order(const ManifoldGraph& g, double eps, int stride) {
    const auto series = g.params.physical.corrugation;
    double d = 0.0, l = 0.0;
    for (std::size_t j = 0; j < g.u.size(); j += stride) {
        double dj = 0.0, lj = 0.0;
        for (int k = -g.modes; k <= g.modes; ++k) {
            cplx L = 0.0;
            if (k != 0 && std::abs(k) <= series.order()) L = eps * L_out_plus_mode(k, g.u[j], g.params.nuI0(), series);
            dj += std::abs(g.phi.at(j, k) - L);
            lj += std::abs(L);
        }
        d = std::max(d, dj);
        l = std::max(l, lj);
    }
    return {d, l};
}

}  // namespace

TEST_CASE("unperturbed graph vanishes after one iteration") {
    const auto g = solve_hj_unstable(ModelParams::from_nuI0(6, 0.0), -0.2, 8);
    CHECK(g.iterations == 1);
    CHECK(g.sup_norm() == 0.0);
}

TEST_CASE("first Picard iterate is the one-sided outer potential") {
    const double eps = 1e-4;
    HJOptions one;
    one.max_iterations = 1;
    const auto g = solve_hj_unstable(ModelParams::from_nuI0(6, eps), -0.2, 8, 1e-14, one);
    const auto [d, l] = distance_to_first_order(g, eps, 5);
    CHECK(d < 1e-8 * l);
}

TEST_CASE("graph departs from the first-order term at second order in epsilon") {
    const auto a = distance_to_first_order(solve_hj_unstable(ModelParams::from_nuI0(6, 1e-4), -0.2, 8), 1e-4, 3);
    const auto b = distance_to_first_order(solve_hj_unstable(ModelParams::from_nuI0(6, 2e-4), -0.2, 8), 2e-4, 3);
    CHECK_THAT(b.first / a.first, WithinRel(4.0, 0.02));
    // Seeding region
    const auto c = distance_to_first_order(solve_hj_unstable(ModelParams::from_nuI0(6, 1e-4), -1.0, 8), 1e-4, 3);
    CHECK(c.first <= 1e-6 * c.second);
}

TEST_CASE("converged graph satisfies the Hamilton-Jacobi equation") {
    const double tol = 1e-14;
    const auto g = solve_hj_unstable(ModelParams::from_nuI0(6, 1e-3), -0.2, 8, tol);
    CHECK(g.residual <= tol);
    CHECK(g.contraction < 0.9);
    double worst = 0.0;
    for (double u = -150.0; u < -0.2; u += 0.0731)
        for (double th = 0.0; th < 2 * kPi; th += 0.61) worst = std::max(worst, std::abs(g.energy_defect(u, th)));
    CHECK(worst < 1e-13);
    // Boundary condition at -infinity.
    CHECK(std::abs(g.Phi1(-199.0, 0.3)) < 1e-12);
    CHECK(std::abs(g.dPhi1_du(-199.0, 0.3) / p_h(-199.0)) < 1e-10);
}

TEST_CASE("stable graph is the reversed unstable graph for even corrugation") {
    const auto P = ModelParams::from_nuI0(5, 1e-3);
    const auto gu = solve_hj_unstable(P, -0.2, 8);
    const auto gs = solve_hj_stable(P, 0.2, 8);
    for (double u : {0.25, 0.8, 3.0, 17.5})
        for (double th : {0.0, 1.1, 4.0}) {
            CHECK_THAT(gs.Phi1(u, th), WithinAbs(-gu.Phi1(-u, -th), 1e-15));
            CHECK_THAT(gs.dPhi1_dtheta(u, th), WithinAbs(gu.dPhi1_dtheta(-u, -th), 1e-15));
        }
}

TEST_CASE("graph solver rejects bad inputs") {
    CHECK_THROWS_AS(solve_hj_unstable(ModelParams::from_nuI0(6, 1e-3), -0.1, 8), DomainError);
    CHECK_THROWS_AS(solve_hj_unstable(ModelParams::from_nuI0(4, 10.0), -0.2, 8), NonContraction);
    const auto g = solve_hj_unstable(ModelParams::from_nuI0(6, 1e-3), -1.0, 4);
    CHECK_THROWS_AS(g.Phi1(-0.5, 0.0), DomainError);
}

TEST_CASE("initial conditions on the unstable graph") {
    const std::vector<double> th{0.0, 0.9, 2.5, 5.0};
    const auto g0 = solve_hj_unstable(ModelParams::from_nuI0(6, 0.0), -0.2, 4);
    for (const auto& s : unstable_initial_conditions(g0, -3.0, th)) {
        const auto ref = gamma0(-3.0, s.theta);
        CHECK(s.q == ref.q);
        CHECK(s.p == ref.p);
        CHECK(s.J == 0.0);
    }
    const auto P = ModelParams::from_nuI0(6, 1.0);
    const auto g = solve_hj_unstable(P, -0.2, 8);
    for (const auto& s : unstable_initial_conditions(g, -2.0, th))
        CHECK_THAT(hamiltonian_mcgehee(s, P).H, WithinAbs(0.5 * P.nu * P.I0 * P.I0, 1e-12));

    auto deviation = [](double nuI0) {
        const auto gg = solve_hj_unstable(ModelParams::from_nuI0(nuI0, 1.0), -0.2, 8);
        double d = 0.0;
        for (double t = 0.0; t < 2 * kPi; t += 0.05) {
            const auto s = graph_point(gg, -3.0, t);
            d = std::max({d, std::abs(s.p - p_h(-3.0)), std::abs(s.J)});
        }
        return d;
    };
    const double d8 = deviation(8), d16 = deviation(16);
    CHECK(d8 <= 2.0 * d16 * 2.0);
    CHECK(d8 > d16);
}

TEST_CASE("globalized unperturbed sheet is the separatrix") {
    const auto P = ModelParams::from_nuI0(5, 0.0);
    const auto g = solve_hj_unstable(P, -0.2, 8);
    const auto un = globalize(seed_fibers(g, -3.0, 17), P, {-1.0, 0.5, 1.5});
    for (std::size_t l = 0; l < un.levels.size(); ++l) {
        const double ph = p_h(un.levels[l]);
        for (std::size_t f = 0; f < 17; ++f) {
            CHECK_THAT(un.P[l][f], WithinAbs(ph * ph, 1e-10));
            CHECK_THAT(un.J[l][f], WithinAbs(0.0, 1e-10));
        }
    }
}

TEST_CASE("globalized sheets stay on the energy level and respect the reversor") {
    const auto& run = sheets(5, 1e-4);
    CHECK(run.unstable.energy_error < 1e-9);

    // Independent stable sheet followed backwards from the stable graph.
    const auto P = ModelParams::from_nuI0(5, 1e-4);
    const auto gs = solve_hj_stable(P, 0.2, 8);
    GlobalizeOptions back;
    back.backward = true;
    const auto st = globalize(seed_fibers(gs, 3.0, 17), P, {0.5, 1.0, 1.5}, back);
    CHECK(st.energy_error < 1e-9);
    for (double u : {0.5, 1.0, 1.5}) {
        const auto li = st.level_index(u), lr = run.stable.level_index(u);
        for (double th = 0.0; th < 2 * kPi; th += 0.3) {
            CHECK_THAT(st.J_at(li, th), WithinAbs(run.stable.J_at(lr, th), 1e-9));
            CHECK_THAT(st.P_at(li, th), WithinAbs(run.stable.P_at(lr, th), 1e-9));
        }
    }
}

TEST_CASE("splitting below noise is rejected") {
    const auto& run = sheets(5, 0.0);
    CHECK_THROWS_AS(measure_splitting(run.unstable, run.stable, 1.0, 1), SignalBelowNoise);
    const auto s = measure_splitting(run.unstable, run.stable, 1.0, 1, false);
    CHECK(s.ampJ < 10 * s.noise_floor);
}

TEST_CASE("first harmonic of the splitting follows the Melnikov prediction") {
    const double eps = 1e-4;
    const auto& run = sheets(4, eps);
    const double L1 = std::abs(melnikov_coeff_closed(1, 4, CorrugationSeries::physical()).value);
    for (double u : {0.5, 1.0, 1.5}) {
        const auto s = measure_splitting(run.unstable, run.stable, u, 1);
        CHECK_THAT(s.ampJ, WithinRel(2 * eps * L1, 0.03));
        CHECK(s.ampJ >= 0);
        CHECK(s.phaseJ > -kPi);
        CHECK(s.phaseJ <= kPi);
    }
}

TEST_CASE("splitting is linear in epsilon") {
    const auto a = measure_splitting(sheets(5, 5e-5).unstable, sheets(5, 5e-5).stable, 1.0, 1);
    const auto b = measure_splitting(sheets(5, 1e-4).unstable, sheets(5, 1e-4).stable, 1.0, 1);
    CHECK_THAT(b.ampJ / a.ampJ, WithinAbs(2.0, 1e-3));
}

TEST_CASE("two transverse homoclinics per period near the predicted phases") {
    const double nuI0 = 5;
    const auto& run = sheets(nuI0, 1e-4);
    const auto r = find_homoclinics(run.unstable, run.stable, 1.0);
    REQUIRE(r.theta.size() == 2);
    CHECK(r.slope[0] * r.slope[1] < 0);
    for (double th : r.theta) CHECK(std::abs(std::remainder(th - nuI0 * 1.0, kPi)) <= 2.0 / nuI0);

    SplittingOptions fine;
    fine.globalize.fit_modes = 10;
    fine.globalize.integrator.rel_tol = 1e-13;
    fine.globalize.integrator.abs_tol = 1e-14;
    const auto run2 = compute_sheets(ModelParams::from_nuI0(nuI0, 1e-4), fine);
    const auto r2 = find_homoclinics(run2.unstable, run2.stable, 1.0);
    REQUIRE(r2.theta.size() == 2);
    for (int i = 0; i < 2; ++i) CHECK_THAT(r2.theta[i], WithinAbs(r.theta[i], 1e-6));
}

TEST_CASE("splitting depends on the characteristic variable") {
    const auto& run = sheets(8, 1e-4);
    std::vector<cplx> c;
    double amp = 0.0;
    for (double u : run.unstable.levels) {
        if (u <= 0) continue;
        const auto s = measure_splitting(run.unstable, run.stable, u, 1);
        c.push_back(std::polar(s.ampJ, s.phaseJ));
        amp = std::max(amp, s.ampJ);
    }
    cplx mean = 0.0;
    for (auto z : c) mean += z / static_cast<double>(c.size());
    double var = 0.0;
    for (auto z : c) var = std::max(var, std::abs(z - mean));
    CHECK(var <= 0.2 * amp);
}

TEST_CASE("action difference generates the momentum difference") {
    const double nuI0 = 5;
    const auto& run = sheets(nuI0, 1e-4);
    const auto& un = run.unstable;
    const auto& st = run.stable;
    const int M = (static_cast<int>(un.Phi_modes[0].size()) - 1) / 2;
    auto dPhi1 = [&](double u) {
        return un.Phi_modes[un.level_index(u)][M + 1] - st.Phi_modes[st.level_index(u)][M + 1];
    };
    const double h = 0.1, u = 1.0;
    const cplx d = (-dPhi1(u + 2 * h) + 8.0 * dPhi1(u + h) - 8.0 * dPhi1(u - h) + dPhi1(u - 2 * h)) / (12 * h);
    const cplx dP = un.P_modes[un.level_index(u)][M + 1] - st.P_modes[st.level_index(u)][M + 1];
    CHECK(std::abs(d - dP) <= 0.05 * std::abs(dP));
}

TEST_CASE("scaling fit recovers exact laws") {
    std::vector<SplittingSample> s;
    for (double x : {4.0, 5.0, 6.0, 7.0, 8.0}) {
        SplittingSample a;
        a.nuI0 = x;
        a.ampJ = 3e-4 * std::pow(x, 1.3) * std::exp(-0.9 * x);
        s.push_back(a);
    }
    const auto fit = fit_scaling(s);
    CHECK_THAT(fit.rho, WithinAbs(0.9, 1e-10));
    CHECK_THAT(fit.sigma, WithinAbs(1.3, 1e-9));
    CHECK_THAT(fit.c, WithinAbs(std::log(3e-4), 1e-9));
    CHECK(std::abs(fit.cov[1][1]) < 1e-18);
    CHECK(fit.nuI0_min == 4.0);
    CHECK(fit.nuI0_max == 8.0);
    s.resize(3);
    CHECK_THROWS_AS(fit_scaling(s), DomainError);
}
