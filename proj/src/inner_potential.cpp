#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/multiprecision/complex128.hpp>
#include <boost/multiprecision/float128.hpp>

#include "surfchaos/errors.hpp"
#include "surfchaos/inner.hpp"

namespace surfchaos {

namespace {

using quad = boost::multiprecision::float128;
using cquad = boost::multiprecision::complex128;

cquad to_q(cplx z) { return cquad(quad(z.real()), quad(z.imag())); }
cplx to_d(const cquad& z) { return {static_cast<double>(z.real()), static_cast<double>(z.imag())}; }

// int_0^inf (v + tau d)^-2 e^{i k d tau} dtau, d = +-1, along tau = t e^{i psi}.
cquad ray_integral(int k, cplx v, int d) {
    if (v == cplx(0.0)) throw DomainError("inner potential: pole at v = 0");
    if (k == 0) return cquad(1) / (quad(d) * to_q(v));
    const double dir = d * (k > 0 ? 1.0 : -1.0);  // sign of the rotation that gives decay
    // Angle of the pole seen from v, measured from the integration direction.
    const double beta = std::arg(-v / static_cast<double>(d));
    double phi = std::numbers::pi / 4;
    if (dir * beta >= 0 && std::abs(beta) <= phi) {
        if (beta == 0.0) throw DomainError("inner potential: path crosses the pole");
        phi = 0.5 * std::abs(beta);
    }
    const double psi = dir * phi;
    const cquad rot = cquad(boost::multiprecision::cos(quad(psi)), boost::multiprecision::sin(quad(psi)));
    const cquad vq = to_q(v);
    const cquad step = quad(d) * rot;
    const cquad ikd = cquad(quad(0), quad(k * d));
    const double lambda = std::abs(k) * std::sin(phi);

    const auto& x = boost::math::quadrature::gauss<quad, 20>::abscissa();
    const auto& w = boost::math::quadrature::gauss<quad, 20>::weights();
    auto f = [&](const quad& t) {
        const cquad s = vq + t * step;
        return exp(ikd * t * rot) / (s * s);
    };
    cquad sum(0);
    double t = 0.0;
    const double t_end = 90.0 / lambda;
    while (t < t_end) {
        const double dist = std::abs(v + t * std::polar(1.0, psi) * static_cast<double>(d));
        const double width = std::min(2.0 / std::abs(k), 0.3 * std::max(dist, 1.0));
        const quad a = t, b = t + width;
        const quad mid = (a + b) / 2, half = (b - a) / 2;
        cquad panel(0);
        for (std::size_t i = 0; i < x.size(); ++i)
            panel += x[i] == 0 ? w[i] * f(mid) : w[i] * (f(mid + half * x[i]) + f(mid - half * x[i]));
        sum += panel * half;
        t += width;
    }
    return rot * sum;
}

}  // namespace

cplx T0(cplx v) {
    if (v == cplx(0.0)) throw DomainError("T0: pole at v = 0");
    return -1.0 / (4.0 * v);
}

cplx L_in_plus_mode(int k, cplx v, const CorrugationSeries& series) {
    const cplx Vk = series.coefficient(k);
    if (Vk == cplx(0.0)) return 0.0;
    return to_d(to_q(Vk / 8.0) * ray_integral(k, v, -1));
}

cplx L_in_minus_mode(int k, cplx v, const CorrugationSeries& series) {
    const cplx Vk = series.coefficient(k);
    if (Vk == cplx(0.0)) return 0.0;
    return to_d(-to_q(Vk / 8.0) * ray_integral(k, v, +1));
}

cplx L_in_jump_mode(int k, cplx v, const CorrugationSeries& series) {
    const cplx Vk = series.coefficient(k);
    if (Vk == cplx(0.0)) return 0.0;
    return to_d(to_q(Vk / 8.0) * (ray_integral(k, v, -1) + ray_integral(k, v, +1)));
}

cplx L_in_plus(cplx v, double theta, const CorrugationSeries& series) {
    cplx s = 0.0;
    const int N = series.order();
    for (int k = -N; k <= N; ++k) s += L_in_plus_mode(k, v, series) * std::polar(1.0, k * theta);
    return s;
}

cplx L_in_minus(cplx v, double theta, const CorrugationSeries& series) {
    cplx s = 0.0;
    const int N = series.order();
    for (int k = -N; k <= N; ++k) s += L_in_minus_mode(k, v, series) * std::polar(1.0, k * theta);
    return s;
}

}  // namespace surfchaos
