#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "surfchaos/errors.hpp"
#include "surfchaos/modes.hpp"

using namespace surfchaos;
using Catch::Matchers::WithinAbs;

namespace {
const cplx I(0.0, 1.0);

// Exact solution of phi' + i w phi = cos x with phi(x0) = phi0.
cplx cos_driven(double x, double x0, double w, cplx phi0) {
    auto part = [&](double s) {
        return std::exp(I * s) / (2.0 * I * (1.0 + w)) + std::exp(-I * s) / (2.0 * I * (w - 1.0));
    };
    return part(x) + std::exp(-I * w * (x - x0)) * (phi0 - part(x0));
}
}  // namespace

TEST_CASE("exponential integrator matches the exact Duhamel solution") {
    const double h = 0.05, x0 = -3.0;
    const std::size_t n = 400;
    std::vector<cplx> F(n), phi(n);
    for (std::size_t j = 0; j < n; ++j) F[j] = std::cos(x0 + h * j);
    for (double w : {0.0, 2.0, -3.5, 12.0}) {
        ExpIntegrator integ(h, w);
        const cplx phi0(0.3, -0.1);
        integ.solve(F.data(), 1, n, phi0, phi.data());
        double err = 0.0;
        for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(phi[j] - cos_driven(x0 + h * j, x0, w, phi0)));
        INFO("omega " << w);
        CHECK(err < 1e-10);
    }
}

TEST_CASE("exponential integrator converges at sixth order") {
    auto run = [](double h) {
        const std::size_t n = static_cast<std::size_t>(std::lround(4.0 / h)) + 1;
        std::vector<cplx> F(n), phi(n);
        for (std::size_t j = 0; j < n; ++j) F[j] = std::cos(h * j);
        ExpIntegrator(h, 5.0).solve(F.data(), 1, n, 0.0, phi.data());
        return std::abs(phi.back() - cos_driven(4.0, 0.0, 5.0, 0.0));
    };
    const double e1 = run(0.4), e2 = run(0.2);
    CHECK(e1 / e2 > 40.0);
}

TEST_CASE("exponential integrator needs six nodes and a positive step") {
    CHECK_THROWS_AS(ExpIntegrator(0.0, 1.0), DomainError);
    std::vector<cplx> F(5), phi(5);
    CHECK_THROWS_AS(ExpIntegrator(0.1, 1.0).solve(F.data(), 1, 5, 0.0, phi.data()), DomainError);
}

TEST_CASE("truncated convolution is the product of Fourier series") {
    const int M = 4;
    std::vector<cplx> a(2 * M + 1), b(2 * M + 1), c(2 * M + 1);
    for (int k = -2; k <= 2; ++k) {
        a[k + M] = cplx(0.3 * k + 0.1, 0.05 * k * k);
        b[k + M] = cplx(-0.2 + 0.1 * k, 0.07 * k);
    }
    convolve(a.data(), b.data(), M, c.data());
    for (double th : {0.0, 0.7, 2.9, -1.3}) {
        const cplx prod = fourier_eval(a.data(), M, th) * fourier_eval(b.data(), M, th);
        CHECK(std::abs(fourier_eval(c.data(), M, th) - prod) < 1e-14);
    }
}

TEST_CASE("six-point Lagrange interpolation is exact for quintics") {
    auto f = [](double x) { return 1 - 2 * x + 0.5 * x * x * x - 0.1 * std::pow(x, 5); };
    const double x0 = -1.0, h = 0.3;
    const std::size_t n = 12;
    for (double x : {-1.0, -0.95, 0.4, 2.0, 2.3}) {
        std::array<double, 6> w;
        const std::size_t base = lagrange6(x, x0, h, n, w);
        double v = 0.0;
        for (int m = 0; m < 6; ++m) v += w[m] * f(x0 + h * (base + m));
        CHECK_THAT(v, WithinAbs(f(x), 1e-12));
    }
}

TEST_CASE("trigonometric fit recovers a trigonometric polynomial from irregular samples") {
    const int M = 3;
    auto f = [](double t) { return 0.4 + std::cos(t) - 0.3 * std::sin(2 * t) + 0.05 * std::cos(3 * t + 0.2); };
    std::vector<double> th, v;
    for (int i = 0; i < 2 * M + 1; ++i) {
        const double t = 2 * std::numbers::pi * i / (2 * M + 1) + 0.1 * std::sin(3.0 * i) + 6.0;
        th.push_back(t);
        v.push_back(f(t));
    }
    const auto c = trig_fit(th, v, M);
    CHECK(std::abs(c[M] - 0.4) < 1e-13);
    CHECK(std::abs(c[M + 1] - 0.5) < 1e-13);
    CHECK(std::abs(c[M + 2] - cplx(0.0, 0.15)) < 1e-13);
    CHECK(std::abs(c[M - 2] - cplx(0.0, -0.15)) < 1e-13);
    CHECK(std::abs(fourier_eval(c.data(), M, 1.234).real() - f(1.234)) < 1e-13);
    CHECK_THROWS_AS(trig_fit({0.0, 1.0}, {1.0, 2.0}, 1), DomainError);
}
