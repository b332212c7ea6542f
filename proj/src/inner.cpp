#include "surfchaos/inner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "surfchaos/errors.hpp"

namespace surfchaos {

namespace {

const cplx kI(0.0, 1.0);

// Least-squares polynomial in 1/y of the given degree; returns the constant term.
cplx extrapolate(const std::vector<double>& y, const std::vector<cplx>& val, int degree) {
    const int n = static_cast<int>(y.size());
    Eigen::MatrixXd A(n, degree + 1);
    Eigen::VectorXd br(n), bi(n);
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d <= degree; ++d) A(i, d) = std::pow(1.0 / y[i], d);
        br(i) = val[i].real();
        bi(i) = val[i].imag();
    }
    const auto qr = A.colPivHouseholderQr();
    return {qr.solve(br)(0), qr.solve(bi)(0)};
}

struct Extrapolated {
    cplx value;
    double error;
};

Extrapolated richardson(const std::vector<double>& y, const std::vector<cplx>& val) {
    if (y.size() >= 3) {
        const cplx hi = extrapolate(y, val, 2), lo = extrapolate(y, val, 1);
        return {hi, std::abs(hi - lo)};
    }
    if (y.size() == 2) {
        const cplx hi = extrapolate(y, val, 1);
        return {hi, std::abs(hi - val.front())};
    }
    return {val.front(), std::abs(val.front())};
}

}  // namespace

std::size_t InnerLine::node(double xx) const {
    const double h = x[1] - x[0];
    const long j = std::lround((xx - x.front()) / h);
    if (j < 0 || j >= static_cast<long>(x.size()) || std::abs(x[j] - xx) > 1e-9 * h)
        throw DomainError("InnerLine: x is not a grid node");
    return static_cast<std::size_t>(j);
}

std::vector<cplx> InnerSolution::plus_modes(std::size_t line, std::size_t j) const {
    const auto& ln = lines.at(line);
    std::vector<cplx> out(2 * modes + 1);
    for (int k = -modes; k <= modes; ++k) out[k + modes] = ln.L.at(j, k) + ln.T2.at(j, k);
    out[modes] += T0(ln.v(j));
    return out;
}

std::vector<cplx> InnerSolution::minus_modes(std::size_t line, std::size_t j) const {
    const auto& ln = lines.at(line);
    const std::size_t jm = ln.node(-ln.x[j]);
    // T-(v, theta) = -conj(T+(-conj v, -theta)): mode k maps to -conj of mode k.
    auto p = plus_modes(line, jm);
    for (auto& c : p) c = -std::conj(c);
    return p;
}

cplx InnerSolution::T_plus(std::size_t line, std::size_t j, double theta) const {
    const auto m = plus_modes(line, j);
    return fourier_eval(m.data(), modes, theta);
}

cplx InnerSolution::T_minus(std::size_t line, std::size_t j, double theta) const {
    const auto m = minus_modes(line, j);
    return fourier_eval(m.data(), modes, theta);
}

double InnerSolution::equation_residual() const {
    static const double c[7] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};
    const int M = modes, W = 2 * M + 1;
    double worst = 0.0;
    std::vector<cplx> T(W), D(W), a(W), A(W), B(W);
    for (std::size_t l = 0; l < lines.size(); ++l) {
        const auto& ln = lines[l];
        const double h = ln.x[1] - ln.x[0];
        for (std::size_t j = 3; j + 3 < ln.x.size(); ++j) {
            const cplx v = ln.v(j);
            T = plus_modes(l, j);
            std::fill(D.begin(), D.end(), 0.0);
            for (int m = -3; m <= 3; ++m) {
                if (m == 0) continue;
                const auto Tm = plus_modes(l, j + m);
                for (int k = 0; k < W; ++k) D[k] += c[m + 3] * Tm[k] / h;
            }
            for (int k = -M; k <= M; ++k) a[k + M] = kI * static_cast<double>(k) * T[k + M];
            convolve(a.data(), a.data(), M, A.data());
            convolve(D.data(), D.data(), M, B.data());
            double s = 0.0;
            for (int k = -M; k <= M; ++k) {
                cplx e = a[k + M] + 0.5 * nu * A[k + M] + 2.0 * v * v * B[k + M] - series.coefficient(k) / (8.0 * v * v);
                if (k == 0) e -= 1.0 / (8.0 * v * v);
                s += std::abs(e);
            }
            worst = std::max(worst, s);
        }
    }
    return worst;
}

InnerSolution solve_inner(const ModelParams& params, int M, double tol, const InnerOptions& opt) {
    params.validate();
    if (M < 1) throw DomainError("solve_inner: need at least one mode");
    if (opt.depths.empty()) throw DomainError("solve_inner: no depths");
    for (double y : opt.depths)
        if (!(y >= opt.kappa) || !(opt.kappa >= 10.0))
            throw DomainError("solve_inner: lines must stay at distance >= kappa >= 10 from the origin");
    if (!(opt.x_far < -50.0) || !(opt.x_near > 2.0)) throw DomainError("solve_inner: bad x-range");

    InnerSolution sol;
    sol.nu = params.nu;
    sol.series = params.effective_series();
    sol.modes = M;
    if (!sol.series.even()) throw DomainError("solve_inner: the conjugate sheet needs an even corrugation");

    const int W = 2 * M + 1;
    const double hmax = std::min(opt.max_step, std::numbers::pi / (8.0 * M));
    const double h = 1.0 / std::ceil(1.0 / hmax);
    const std::size_t n = static_cast<std::size_t>(std::lround((opt.x_near - opt.x_far) / h)) + 1;
    const double nu = sol.nu;

    std::vector<ExpIntegrator> integ;
    for (int k = -M; k <= M; ++k) integ.emplace_back(h, static_cast<double>(k));
    std::vector<cplx> Vk(W);
    for (int k = -M; k <= M; ++k) Vk[k + M] = sol.series.coefficient(k);

    for (double y : opt.depths) {
        InnerLine ln;
        ln.depth = y;
        ln.x.resize(n);
        for (std::size_t j = 0; j < n; ++j) ln.x[j] = opt.x_near - h * static_cast<double>(n - 1 - j);
        ln.L = ModeTable(n, M);
        ln.dL = ModeTable(n, M);
        ln.T2 = ModeTable(n, M);
        ln.dT2 = ModeTable(n, M);
        ModeTable F(n, M);
        for (std::size_t j = 0; j < n; ++j) {
            const cplx v = ln.v(j);
            for (int k = 0; k < W; ++k) F.row(j)[k] = Vk[k] / (8.0 * v * v);
        }
        for (int k = -M; k <= M; ++k) {
            const int c = k + M;
            if (Vk[c] == cplx(0.0)) continue;
            integ[c].solve(F.row(0) + c, W, n, L_in_plus_mode(k, ln.v(0), sol.series), ln.L.row(0) + c);
            for (std::size_t j = 0; j < n; ++j)
                ln.dL.at(j, k) = F.at(j, k) - kI * static_cast<double>(k) * ln.L.at(j, k);
        }
        sol.lines.push_back(std::move(ln));
    }

    const std::size_t nl = sol.lines.size();
    std::vector<ModeTable> F(nl, ModeTable(n, M)), Fn(nl, ModeTable(n, M));
    std::vector<cplx> a(W), b(W), A(W), B(W);
    auto source = [&](std::vector<ModeTable>& out) {
        for (std::size_t l = 0; l < nl; ++l) {
            const auto& ln = sol.lines[l];
            for (std::size_t j = 0; j < n; ++j) {
                const cplx v = ln.v(j);
                for (int k = -M; k <= M; ++k) {
                    const int c = k + M;
                    a[c] = kI * static_cast<double>(k) * (ln.L.row(j)[c] + ln.T2.row(j)[c]);
                    b[c] = ln.dL.row(j)[c] + ln.dT2.row(j)[c];
                }
                convolve(a.data(), a.data(), M, A.data());
                convolve(b.data(), b.data(), M, B.data());
                cplx* o = out[l].row(j);
                for (int c = 0; c < W; ++c) o[c] = -0.5 * nu * A[c] - 2.0 * v * v * B[c];
            }
        }
    };

    source(F);
    double sup_F = 0.0;
    for (const auto& t : F)
        for (std::size_t j = 0; j < n; ++j)
            for (int c = 0; c < W; ++c) sup_F = std::max(sup_F, std::abs(t.row(j)[c]));
    const double floor = 1e-15 * sup_F;

    double prev = -1.0;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        for (std::size_t l = 0; l < nl; ++l) {
            auto& ln = sol.lines[l];
            const cplx v0 = ln.v(0);
            for (int k = -M; k <= M; ++k) {
                const int c = k + M;
                const cplx* Fc = F[l].row(0) + c;
                cplx t0;
                if (k == 0) {
                    t0 = -v0 * Fc[0] / 3.0;
                } else {
                    const double w = k;
                    const cplx d1 = (-25.0 * Fc[0] + 48.0 * Fc[W] - 36.0 * Fc[2 * W] + 16.0 * Fc[3 * W] -
                                     3.0 * Fc[4 * W]) / (12.0 * h);
                    t0 = Fc[0] / (kI * w) + d1 / (w * w);
                }
                integ[c].solve(Fc, W, n, t0, ln.T2.row(0) + c);
                for (std::size_t j = 0; j < n; ++j)
                    ln.dT2.at(j, k) = F[l].at(j, k) - kI * static_cast<double>(k) * ln.T2.at(j, k);
            }
        }
        source(Fn);
        double res = 0.0;
        for (std::size_t l = 0; l < nl; ++l)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (int c = 0; c < W; ++c) s += std::abs(Fn[l].row(j)[c] - F[l].row(j)[c]);
                res = std::max(res, s);
            }
        std::swap(F, Fn);
        sol.iterations = it;
        sol.residual = res;
        sol.residual_history.push_back(res);
        if (prev > 100 * floor && res > 100 * floor) {
            sol.contraction = res / prev;
            if (sol.contraction >= 0.9)
                throw NonContraction("solve_inner: Picard iteration not contracting", sol.residual_history);
        }
        if (res <= tol || res <= floor) break;
        prev = res;
    }

    // Weighted sup norms over nodes with |v| >= kappa, strip weight 1.
    auto norm = [&](auto getter, int r) {
        double total = 0.0;
        for (int k = -M; k <= M; ++k) {
            double s = 0.0;
            for (const auto& ln : sol.lines)
                for (std::size_t j = 0; j < n; ++j) {
                    const cplx v = ln.v(j);
                    if (std::abs(v) < opt.kappa) continue;
                    s = std::max(s, std::pow(std::abs(v), r) * std::abs(getter(ln, j, k)));
                }
            total += s;
        }
        return total;
    };
    auto L = [](const InnerLine& ln, std::size_t j, int k) { return ln.L.at(j, k); };
    auto dthL = [](const InnerLine& ln, std::size_t j, int k) { return static_cast<double>(k) * ln.L.at(j, k); };
    auto dvL = [](const InnerLine& ln, std::size_t j, int k) { return ln.dL.at(j, k); };
    auto T2 = [](const InnerLine& ln, std::size_t j, int k) { return ln.T2.at(j, k); };
    auto dthT2 = [](const InnerLine& ln, std::size_t j, int k) { return static_cast<double>(k) * ln.T2.at(j, k); };
    auto dvT2 = [](const InnerLine& ln, std::size_t j, int k) { return ln.dT2.at(j, k); };
    const double nL = norm(L, 2), nthL = norm(dthL, 2), nvL = norm(dvL, 3);
    sol.theta_V = std::sqrt(nL * nL + nthL * nthL + nvL * nvL);
    sol.T2_norm = norm(T2, 3) + norm(dvT2, 4) + norm(dthT2, 4);
    sol.K1 = sol.theta_V > 0 ? sol.T2_norm / (sol.theta_V * sol.theta_V) : 0.0;
    return sol;
}

InnerDifference extract_fk(const InnerSolution& sol, int k_min, int k_max) {
    if (k_min > k_max || k_max > sol.modes || k_min < -sol.modes) throw DomainError("extract_fk: bad mode range");
    InnerDifference out;
    for (const auto& ln : sol.lines) out.depths.push_back(ln.depth);
    // The potential part of T+ - T- is taken from the quad-precision jump; only T2 comes from
    // the grid, which keeps the grid roundoff relative to the smaller T2.
    auto delta = [&](std::size_t l, double x, int k) {
        const auto& ln = sol.lines[l];
        const std::size_t j = ln.node(x), jm = ln.node(-x);
        return L_in_jump_mode(k, ln.v(j), sol.series) + ln.T2.at(j, k) + std::conj(ln.T2.at(jm, k));
    };

    for (int k = k_min; k <= k_max; ++k) {
        std::vector<double> ys;
        std::vector<cplx> vals;
        std::vector<cplx> raw;
        std::vector<double> dabs;
        for (std::size_t l = 0; l < sol.lines.size(); ++l) {
            const double y = sol.lines[l].depth;
            const cplx d = delta(l, 0.0, k);
            const cplx r = d * std::exp(static_cast<double>(k) * y);
            raw.push_back(r);
            dabs.push_back(std::abs(d));
            // Beyond e^{-22} the difference is below double resolution of T.
            if (k >= 1 && k * y <= 22.0) {
                ys.push_back(y);
                vals.push_back(r);
            }
        }
        out.k.push_back(k);
        out.raw.push_back(raw);
        out.delta_abs.push_back(dabs);
        if (k >= 1) {
            if (ys.empty()) {
                ys.push_back(sol.lines.front().depth);
                vals.push_back(raw.front());
            }
            const auto e = richardson(ys, vals);
            if (k == 1 && !(e.error <= std::abs(e.value))) throw ExtrapolationError("extract_fk: extrapolation diverges");
            out.f.push_back(e.value);
            out.error.push_back(e.error);
        } else {
            out.f.push_back(0.0);
            out.error.push_back(dabs.back());
        }
    }

    if (k_min <= 1 && k_max >= 1) {
        for (double x : {1.0, 2.0}) {
            std::vector<double> ys;
            std::vector<cplx> vals;
            for (std::size_t l = 0; l < sol.lines.size(); ++l) {
                const double y = sol.lines[l].depth;
                ys.push_back(y);
                vals.push_back(delta(l, x, 1) * std::exp(kI * cplx(x, -y)));
            }
            out.imag_f1 = std::max(out.imag_f1, std::abs(richardson(ys, vals).value.imag()));
        }
    }
    return out;
}

F1Scan f1_epsilon_scan(const std::vector<double>& epsilons, const ModelParams& base, int modes,
                       const InnerOptions& opt) {
    if (epsilons.size() < 2) throw DomainError("f1_epsilon_scan: need at least two epsilon values");
    F1Scan scan;
    scan.epsilon = epsilons;
    std::sort(scan.epsilon.begin(), scan.epsilon.end());
    for (double e : scan.epsilon) {
        if (!(e > 0 && e <= 1)) throw DomainError("f1_epsilon_scan: epsilon must lie in (0, 1]");
        ModelParams p = base;
        p.epsilon = e;
        const auto d = extract_fk(solve_inner(p, modes, 1e-20, opt), 1, 1);
        scan.f1.push_back(d.f[0].real());
        scan.error.push_back(d.error[0]);
    }
    const double e1 = scan.epsilon[0], e2 = scan.epsilon[1];
    const double r1 = scan.f1[0] / e1, r2 = scan.f1[1] / e2;
    scan.slope = r1 - (r2 - r1) / (e2 - e1) * e1;
    for (std::size_t i = 0; i < scan.epsilon.size(); ++i)
        scan.quadratic_residual.push_back(scan.f1[i] - scan.epsilon[i] * scan.slope);
    return scan;
}

}  // namespace surfchaos
