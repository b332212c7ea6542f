#include <cmath>
#include <numbers>
#include <random>

#include "catch_amalgamated.hpp"
#include "surfchaos/flows.hpp"
#include "surfchaos/separatrix.hpp"

using namespace surfchaos;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("separatrix closed form") {
    CHECK(q_h(0.0) == 1.0);
    CHECK(p_h(0.0) == 0.0);
    CHECK_THAT(q_h(1.0), WithinRel(1.0 / std::sqrt(2.0), 1e-15));
    CHECK_THAT(p_h(1.0), WithinRel(0.5, 1e-15));
    for (double u : {-3.0, -0.4, 0.9, 7.0}) {
        CHECK_THAT(q_h(u) * q_h(u) * (1 + u * u), WithinRel(1.0, 1e-15));
        // p_h = -q_h'/q_h
        const double h = 1e-6;
        const double dq = (q_h(u + h) - q_h(u - h)) / (2 * h);
        CHECK_THAT(-dq / q_h(u), WithinAbs(p_h(u), 1e-9));
    }
}

TEST_CASE("separatrix flow equivariance") {
    const auto params = ModelParams::from_nuI0(5.0, 0.0);
    for (double u : {-2.0, 0.5}) {
        const double th = 0.7, t = 3.0;
        const auto tr = integrate_mcgehee(gamma0(u, th), 0.0, t, params);
        const auto target = gamma0(u + t, th + params.nuI0() * t);
        CHECK_THAT(tr.back()[0], WithinAbs(target.q, 1e-10));
        CHECK_THAT(tr.back()[1], WithinAbs(target.p, 1e-10));
        CHECK_THAT(tr.back()[2], WithinAbs(target.theta, 1e-10));
        CHECK_THAT(tr.back()[3], WithinAbs(0.0, 1e-10));
    }
}

TEST_CASE("generating function") {
    CHECK(phi0(0.0) == 0.0);
    CHECK_THAT(phi0(1e12), WithinAbs(pi / 4, 1e-11));
    // mpmath: -1/4 + pi/8
    CHECK_THAT(phi0(1.0), WithinAbs(0.14269908169872415481, 1e-15));
    for (double u : {-5.0, -0.3, 0.2, 2.5}) {
        const double h = 1e-5;
        CHECK_THAT((phi0(u + h) - phi0(u - h)) / (2 * h), WithinAbs(p_h(u) * p_h(u), 1e-10));
    }
    // Unperturbed HJ: H0(q_h, dphi0/p_h, theta, 0) = nuI0^2/2 (the p^2/2 - q^2/2 + q^4/2 part vanishes).
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ud(-20.0, 20.0);
    for (int i = 0; i < 100; ++i) {
        const double u = ud(rng);
        if (std::abs(u) < 1e-3) continue;
        const double q = q_h(u), p = dphi0(u) / p_h(u);
        CHECK(std::abs(0.5 * p * p - 0.5 * q * q + 0.5 * q * q * q * q) <= 1e-12);
    }
}

TEST_CASE("Melnikov coefficients in closed form") {
    const auto V = CorrugationSeries::physical();
    CHECK(melnikov_coeff_closed(0, 5.0, V).value == 0.0);
    // mpmath quadrature of -(V1/2) int q_h^4 e^{i 5 t} dt.
    CHECK_THAT(melnikov_coeff_closed(1, 5.0, V).value.real(), WithinRel(-0.0009525548156671933529, 1e-13));
    CHECK(melnikov_coeff_closed(-2, 5.0, V).value == melnikov_coeff_closed(2, 5.0, V).value);
    CHECK_THROWS_AS(melnikov_coeff_closed(1, 0.0, V), DomainError);
}

TEST_CASE("Melnikov quadrature oracle") {
    const auto V = CorrugationSeries::physical();
    CHECK_THAT(separatrix_kernel_integral(0.0).value, WithinRel(pi / 2, 1e-10));
    CHECK_THAT(melnikov_coeff_quadrature(1, 5.0, V).value.real(),
               WithinRel(melnikov_coeff_closed(1, 5.0, V).value.real(), 1e-8));
    CHECK_THAT(melnikov_coeff_quadrature(2, 3.0, V).value.real(), WithinRel(-0.000054510607397993186494, 1e-8));
    for (int w = 1; w <= 10; ++w) {
        const double exact = pi / 2 * std::exp(-w) * (1.0 + w);
        CHECK_THAT(separatrix_kernel_integral(w, 1e-11).value, WithinRel(exact, 1e-9));
    }
}

TEST_CASE("one-sided outer potential") {
    const auto V = CorrugationSeries::physical();
    // mpmath: int_{-inf}^{u} q_h^4(s) e^{4i(s-u)} ds
    const std::complex<double> at_m2(0.0032412194035307047631, -0.0085317394583882293789);
    const std::complex<double> at_03(-0.031032668779617246468, -0.32834727846401034249);
    const auto Vk = V.coefficient(1);
    const auto m1 = L_out_plus_mode(1, -2.0, 4.0, V);
    const auto m2 = L_out_plus_mode(1, 0.3, 4.0, V);
    CHECK(std::abs(m1 - (-Vk / 2.0) * at_m2) <= 1e-12 * std::abs(m1));
    CHECK(std::abs(m2 - (-Vk / 2.0) * at_03) <= 1e-12 * std::abs(m2));

    CHECK(std::abs(L_out_plus(-200.0, 0.4, 4.0, V)) < 1e-9);
    CHECK_THAT(L_out_plus(0.3, 1.0, 4.0, V) - L_out_minus(0.3, 1.0, 4.0, V),
               WithinAbs(melnikov_potential(0.3, 1.0, 4.0, V), 1e-8 * 1e-3));
    for (double u : {-1.0, 0.8})
        for (double th : {0.1, 2.0})
            CHECK_THAT(L_out_minus(u, th, 4.0, V), WithinAbs(-L_out_plus(-u, -th, 4.0, V), 1e-14));

    double mean = 0;
    const int n = 64;
    for (int j = 0; j < n; ++j) mean += L_out_plus(0.5, 2 * pi * j / n, 4.0, V) / n;
    CHECK(std::abs(mean) < 1e-10);
}

TEST_CASE("Melnikov zeros near theta - nuI0 u = 0, pi") {
    const auto V = CorrugationSeries::physical();
    const double nuI0 = 5.0, u = 0.7;
    const double bound = std::abs(melnikov_coeff_closed(2, nuI0, V).value / melnikov_coeff_closed(1, nuI0, V).value);
    for (double base : {0.0, pi}) {
        const double th = base + nuI0 * u;
        const double d1 = melnikov_potential_dtheta(u, th, nuI0, V);
        const double scale = std::abs(melnikov_coeff_closed(1, nuI0, V).value);
        CHECK(std::abs(d1) <= 4 * bound * scale + 1e-18);
    }
}
