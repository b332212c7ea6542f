#include "surfchaos/modes.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "surfchaos/errors.hpp"

namespace surfchaos {

void convolve(const cplx* a, const cplx* b, int M, cplx* out) {
    for (int k = -M; k <= M; ++k) {
        cplx s = 0.0;
        const int lo = std::max(-M, k - M), hi = std::min(M, k + M);
        for (int j = lo; j <= hi; ++j) s += a[j + M] * b[k - j + M];
        out[k + M] = s;
    }
}

cplx fourier_eval(const cplx* c, int M, double theta) {
    cplx s = 0.0;
    for (int k = -M; k <= M; ++k) s += c[k + M] * std::polar(1.0, k * theta);
    return s;
}

cplx fourier_eval(const cplx* c, int M, cplx theta) {
    cplx s = 0.0;
    const cplx i(0.0, 1.0);
    for (int k = -M; k <= M; ++k) s += c[k + M] * std::exp(i * static_cast<double>(k) * theta);
    return s;
}

ExpIntegrator::ExpIntegrator(double h, double omega) : h_(h), omega_(omega) {
    if (!(h > 0)) throw DomainError("ExpIntegrator: step must be positive");
    decay_ = std::polar(1.0, -omega * h);
    const auto& nodes = boost::math::quadrature::gauss<double, 10>::abscissa();
    const auto& wts = boost::math::quadrature::gauss<double, 10>::weights();
    // Expand the symmetric rule to the full set of points on [0, h].
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double x = nodes[i], w = wts[i];
        pts.push_back({0.5 * h * (1.0 + x), 0.5 * h * w});
        if (x != 0.0) pts.push_back({0.5 * h * (1.0 - x), 0.5 * h * w});
    }
    for (int s = 0; s < 5; ++s) {
        for (int m = 0; m < 6; ++m) {
            cplx acc = 0.0;
            for (const auto& [xi, w] : pts) {
                double l = 1.0;
                const double x = xi / h;
                for (int r = 0; r < 6; ++r)
                    if (r != m) l *= (x - (r - s)) / static_cast<double>(m - r);
                acc += w * l * std::polar(1.0, -omega * (h - xi));
            }
            weights_[s][m] = acc;
        }
    }
}

void ExpIntegrator::solve(const cplx* F, std::size_t stride, std::size_t n, cplx phi0, cplx* phi) const {
    if (n < 6) throw DomainError("ExpIntegrator: need at least 6 nodes");
    phi[0] = phi0;
    cplx cur = phi0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const std::size_t first = std::min<std::size_t>(j >= 2 ? j - 2 : 0, n - 6);
        const int s = static_cast<int>(j - first);
        const auto& w = weights_[s];
        cplx acc = decay_ * cur;
        for (int m = 0; m < 6; ++m) acc += w[m] * F[(first + m) * stride];
        cur = acc;
        phi[(j + 1) * stride] = cur;
    }
}

std::size_t lagrange6(double x, double x0, double h, std::size_t n, std::array<double, 6>& w) {
    if (n < 6) throw DomainError("lagrange6: need at least 6 nodes");
    const double r = (x - x0) / h;
    long base = static_cast<long>(std::floor(r)) - 2;
    base = std::clamp<long>(base, 0, static_cast<long>(n) - 6);
    const double t = r - base;
    for (int m = 0; m < 6; ++m) {
        double l = 1.0;
        for (int q = 0; q < 6; ++q)
            if (q != m) l *= (t - q) / static_cast<double>(m - q);
        w[m] = l;
    }
    return static_cast<std::size_t>(base);
}

std::vector<cplx> trig_fit(const std::vector<double>& theta, const std::vector<double>& values, int M) {
    const std::size_t n = theta.size();
    if (values.size() != n || n < static_cast<std::size_t>(2 * M + 1))
        throw DomainError("trig_fit: need at least 2M+1 samples");
    Eigen::MatrixXd A(n, 2 * M + 1);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
        A(i, 0) = 1.0;
        for (int k = 1; k <= M; ++k) {
            A(i, 2 * k - 1) = std::cos(k * theta[i]);
            A(i, 2 * k) = std::sin(k * theta[i]);
        }
        b(i) = values[i];
    }
    const Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
    std::vector<cplx> c(2 * M + 1);
    c[M] = x(0);
    for (int k = 1; k <= M; ++k) {
        c[M + k] = cplx(x(2 * k - 1), -x(2 * k)) / 2.0;
        c[M - k] = cplx(x(2 * k - 1), x(2 * k)) / 2.0;
    }
    return c;
}

}  // namespace surfchaos
