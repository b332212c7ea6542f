#include "surfchaos/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>

#include "surfchaos/errors.hpp"
#include "surfchaos/separatrix.hpp"

namespace surfchaos {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

double wrap_angle(double x) {
    double r = std::fmod(x, 2 * kPi);
    if (r < 0) r += 2 * kPi;
    return r;
}

double wrap_phase(double x) {
    double r = std::remainder(x, 2 * kPi);
    if (r <= -kPi) r += 2 * kPi;
    return r;
}

// Sum of modes k = -M..M at theta, real part.
double eval_real(const cplx* c, int M, double theta) { return fourier_eval(c, M, theta).real(); }

// Solves in w = sign * u where the graph decays as w -> -inf:
//   d/dw g_k + i sign k nuI0 g_k = sign F_k(g).
ManifoldGraph solve_hj(const ModelParams& params, Sheet sheet, double edge, int M, double tol,
                       const HJOptions& opt) {
    params.validate();
    if (M < 1) throw DomainError("solve_hj: need at least one theta mode");
    if (!(opt.step > 0) || !(opt.far > 10)) throw DomainError("solve_hj: bad grid options");
    const double sgn = sheet == Sheet::unstable ? 1.0 : -1.0;
    const double w_max = sgn * edge;
    if (!(w_max <= -0.2)) throw DomainError("solve_hj: graph edge must satisfy |u| >= 0.2 on its side");

    const double h = opt.step;
    const std::size_t n = static_cast<std::size_t>(std::ceil((w_max + opt.far) / h)) + 1;
    const int W = 2 * M + 1;
    const double nuI0 = params.nuI0(), nu = params.nu;
    const CorrugationSeries series = params.effective_series();

    std::vector<double> w(n), q4(n), inv_ph2(n);
    for (std::size_t j = 0; j < n; ++j) {
        w[j] = w_max - h * static_cast<double>(n - 1 - j);
        const double qh = q_h(w[j]), ph = p_h(w[j]);
        q4[j] = qh * qh * qh * qh;
        inv_ph2[j] = 1.0 / (ph * ph);
    }
    std::vector<cplx> Vk(W);
    for (int k = -M; k <= M; ++k) Vk[k + M] = series.coefficient(k);

    ModeTable g(n, M), dg(n, M), F(n, M), Fn(n, M);
    std::vector<cplx> a(W), A(W), B(W);
    auto source = [&](ModeTable& out) {
        for (std::size_t j = 0; j < n; ++j) {
            const cplx* gj = g.row(j);
            const cplx* dj = dg.row(j);
            for (int k = -M; k <= M; ++k) a[k + M] = kI * static_cast<double>(k) * gj[k + M];
            convolve(a.data(), a.data(), M, A.data());
            convolve(dj, dj, M, B.data());
            cplx* o = out.row(j);
            for (int k = 0; k < W; ++k)
                o[k] = sgn * (-0.5 * q4[j] * Vk[k] - 0.5 * nu * A[k] - 0.5 * inv_ph2[j] * B[k]);
        }
    };

    std::vector<ExpIntegrator> integ;
    for (int k = -M; k <= M; ++k) integ.emplace_back(h, sgn * k * nuI0);

    ManifoldGraph graph;
    graph.sheet = sheet;
    graph.params = params;
    graph.modes = M;

    source(F);
    double sup_F = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (int k = 0; k < W; ++k) sup_F = std::max(sup_F, std::abs(F.row(j)[k]));
    const double floor = 1e-15 * std::max(1.0, sup_F);

    double prev = -1.0;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        for (int k = -M; k <= M; ++k) {
            const int c = k + M;
            const double omega = integ[c].omega();
            const cplx* Fc = F.row(0) + c;
            // Asymptotic value at the far edge.
            cplx g0;
            if (k == 0) {
                g0 = -w[0] * Fc[0] / 7.0;
            } else {
                const cplx d1 = (-25.0 * Fc[0] + 48.0 * Fc[W] - 36.0 * Fc[2 * W] + 16.0 * Fc[3 * W] -
                                 3.0 * Fc[4 * W]) / (12.0 * h);
                g0 = Fc[0] / (kI * omega) + d1 / (omega * omega);
            }
            integ[c].solve(Fc, W, n, g0, g.row(0) + c);
            for (std::size_t j = 0; j < n; ++j) dg.at(j, k) = F.at(j, k) - kI * omega * g.at(j, k);
        }
        source(Fn);
        double res = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < W; ++k) s += std::abs(Fn.row(j)[k] - F.row(j)[k]);
            res = std::max(res, s);
        }
        std::swap(F, Fn);
        graph.iterations = it;
        graph.residual_history.push_back(res);
        graph.residual = res;
        if (prev > 100 * floor && res > 100 * floor) {
            graph.contraction = res / prev;
            if (graph.contraction >= 0.9) throw NonContraction("solve_hj: Picard iteration not contracting", graph.residual_history);
        }
        if (res <= tol || res <= floor) break;
        prev = res;
    }

    // Store in increasing physical u.
    graph.u.resize(n);
    graph.phi = ModeTable(n, M);
    graph.dphi = ModeTable(n, M);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = sheet == Sheet::unstable ? j : n - 1 - j;
        graph.u[j] = sgn * w[src];
        for (int k = -M; k <= M; ++k) {
            graph.phi.at(j, k) = g.at(src, k);
            graph.dphi.at(j, k) = sgn * dg.at(src, k);
        }
    }
    return graph;
}

struct Interp {
    std::size_t base;
    std::array<double, 6> w;
};

Interp locate(const ManifoldGraph& g, double u) {
    const double h = g.u[1] - g.u[0];
    if (u < g.u.front() - 1e-9 * h || u > g.u.back() + 1e-9 * h)
        throw DomainError("ManifoldGraph: u outside the graph range");
    Interp ip;
    ip.base = lagrange6(u, g.u.front(), h, g.u.size(), ip.w);
    return ip;
}

std::vector<cplx> interp_modes(const ModeTable& t, const Interp& ip) {
    const int W = t.width();
    std::vector<cplx> out(W, 0.0);
    for (int m = 0; m < 6; ++m) {
        const cplx* r = t.row(ip.base + m);
        for (int k = 0; k < W; ++k) out[k] += ip.w[m] * r[k];
    }
    return out;
}

}  // namespace

std::vector<cplx> ManifoldGraph::phi_modes(double uu) const { return interp_modes(phi, locate(*this, uu)); }

double ManifoldGraph::Phi1(double uu, double theta) const {
    return eval_real(phi_modes(uu).data(), modes, theta);
}

double ManifoldGraph::dPhi1_du(double uu, double theta) const {
    const auto c = interp_modes(dphi, locate(*this, uu));
    return eval_real(c.data(), modes, theta);
}

double ManifoldGraph::dPhi1_dtheta(double uu, double theta) const {
    auto c = phi_modes(uu);
    for (int k = -modes; k <= modes; ++k) c[k + modes] *= kI * static_cast<double>(k);
    return eval_real(c.data(), modes, theta);
}

double ManifoldGraph::energy_defect(double uu, double theta) const {
    const McGeheeState s = graph_point(*this, uu, theta);
    return hamiltonian_mcgehee(s, params).H - 0.5 * params.nu * params.I0 * params.I0;
}

double ManifoldGraph::sup_norm() const {
    double best = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        double s = 0.0;
        for (int k = 0; k < phi.width(); ++k) s += std::abs(phi.row(j)[k]);
        best = std::max(best, s);
    }
    return best;
}

ManifoldGraph solve_hj_unstable(const ModelParams& params, double u_max, int theta_modes, double tol,
                                const HJOptions& opt) {
    return solve_hj(params, Sheet::unstable, u_max, theta_modes, tol, opt);
}

ManifoldGraph solve_hj_stable(const ModelParams& params, double u_min, int theta_modes, double tol,
                              const HJOptions& opt) {
    return solve_hj(params, Sheet::stable, u_min, theta_modes, tol, opt);
}

McGeheeState graph_point(const ManifoldGraph& graph, double u, double theta) {
    const double ph = p_h(u);
    McGeheeState s;
    s.q = q_h(u);
    s.p = ph + graph.dPhi1_du(u, theta) / ph;
    s.theta = theta;
    s.J = graph.dPhi1_dtheta(u, theta);
    return s;
}

std::vector<McGeheeState> unstable_initial_conditions(const ManifoldGraph& graph, double u0,
                                                      const std::vector<double>& thetas) {
    if (graph.sheet != Sheet::unstable) throw DomainError("unstable_initial_conditions: need the unstable sheet");
    std::vector<McGeheeState> out;
    out.reserve(thetas.size());
    for (double th : thetas) out.push_back(graph_point(graph, u0, th));
    return out;
}

std::vector<Seed> seed_fibers(const ManifoldGraph& graph, double u0, int fibers) {
    if (fibers < 3) throw DomainError("seed_fibers: need at least 3 fibers");
    std::vector<Seed> out;
    for (int i = 0; i < fibers; ++i) {
        const double th = 2 * kPi * i / fibers;
        Seed s;
        s.state = graph_point(graph, u0, th);
        s.action = phi0(u0) + graph.Phi1(u0, th);
        out.push_back(s);
    }
    return out;
}

std::size_t SheetSamples::level_index(double u) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (std::abs(levels[i] - u) <= 1e-12 * std::max(1.0, std::abs(u))) return i;
    throw DomainError("SheetSamples: level not sampled");
}

double SheetSamples::P_at(std::size_t l, double th) const {
    const int M = (static_cast<int>(P_modes[l].size()) - 1) / 2;
    return eval_real(P_modes[l].data(), M, th);
}
double SheetSamples::J_at(std::size_t l, double th) const {
    const int M = (static_cast<int>(J_modes[l].size()) - 1) / 2;
    return eval_real(J_modes[l].data(), M, th);
}
double SheetSamples::Phi_at(std::size_t l, double th) const {
    const int M = (static_cast<int>(Phi_modes[l].size()) - 1) / 2;
    return eval_real(Phi_modes[l].data(), M, th);
}

SheetSamples globalize(const std::vector<Seed>& seeds, const ModelParams& params, std::vector<double> levels,
                       const GlobalizeOptions& opt) {
    params.validate();
    if (levels.empty()) throw DomainError("globalize: no levels");
    std::sort(levels.begin(), levels.end());
    for (double l : levels)
        if (l == 0.0) throw DomainError("globalize: level u = 0 is the turning point");
    const std::size_t nf = seeds.size();
    if (nf < static_cast<std::size_t>(2 * opt.fit_modes + 1))
        throw DomainError("globalize: need at least 2*fit_modes+1 fibers");

    const double nu = params.nu, I0 = params.I0;
    const Field<5> field = [params, nu, I0](double, const Vec<5>& y, Vec<5>& dy) {
        const McGeheeState d = vector_field_mcgehee({y[0], y[1], y[2], y[3]}, params);
        dy = {d.q, d.p, d.theta, d.J, y[1] * y[1] + nu * y[3] * (I0 + y[3])};
    };
    std::vector<Section<5>> sections;
    for (double l : levels) {
        const double ql = q_h(l);
        const int dir = (l < 0 ? +1 : -1) * (opt.backward ? -1 : 1);
        const double sgn = l < 0 ? -1.0 : 1.0;
        sections.push_back({[ql](double, const Vec<5>& y) { return y[0] - ql; }, dir,
                            [sgn](double, const Vec<5>& y) { return sgn * y[1] > 0; }});
    }

    const std::size_t nl = levels.size();
    SheetSamples out;
    out.sheet = opt.backward ? Sheet::stable : Sheet::unstable;
    out.params = params;
    out.levels = levels;
    out.rel_tol = opt.integrator.rel_tol;
    out.theta.assign(nl, std::vector<double>(nf));
    out.P = out.J = out.Phi = out.theta;
    const double H_target = 0.5 * nu * I0 * I0;

    for (std::size_t f = 0; f < nf; ++f) {
        const McGeheeState& s0 = seeds[f].state;
        const Vec<5> y0{s0.q, s0.p, s0.theta, s0.J, seeds[f].action};
        std::vector<bool> seen(nl, false);
        std::size_t count = 0;
        auto on_event = [&](const SectionEvent<5>& ev) {
            const std::size_t l = ev.section;
            if (seen[l]) return true;
            seen[l] = true;
            ++count;
            out.theta[l][f] = ev.y[2];
            out.P[l][f] = ev.y[1] * p_h(levels[l]);
            out.J[l][f] = ev.y[3];
            out.Phi[l][f] = ev.y[4];
            const double H = hamiltonian_mcgehee({ev.y[0], ev.y[1], ev.y[2], ev.y[3]}, params).H;
            out.energy_error = std::max(out.energy_error, std::abs(H - H_target));
            return count < nl;
        };
        find_events<5>(field, y0, 0.0, opt.backward ? -opt.max_time : opt.max_time, sections, on_event, opt.integrator);
        if (count < nl) throw CoverageGap("globalize: a fiber missed a u-level");
    }

    const int M = opt.fit_modes;
    for (std::size_t l = 0; l < nl; ++l) {
        out.P_modes.push_back(trig_fit(out.theta[l], out.P[l], M));
        out.J_modes.push_back(trig_fit(out.theta[l], out.J[l], M));
        out.Phi_modes.push_back(trig_fit(out.theta[l], out.Phi[l], M));
        std::vector<double> ang;
        for (double t : out.theta[l]) ang.push_back(wrap_angle(t));
        std::sort(ang.begin(), ang.end());
        double gap = ang.front() + 2 * kPi - ang.back();
        for (std::size_t i = 1; i < ang.size(); ++i) gap = std::max(gap, ang[i] - ang[i - 1]);
        out.max_gap = std::max(out.max_gap, gap);
    }
    if (out.max_gap > kPi) throw CoverageGap("globalize: arrival angles leave a gap wider than pi");
    return out;
}

SheetSamples reflect_sheet(const SheetSamples& un) {
    SheetSamples st = un;
    st.sheet = Sheet::stable;
    const std::size_t nl = un.levels.size();
    auto flip = [](const std::vector<cplx>& c, double sign) {
        std::vector<cplx> r(c.rbegin(), c.rend());
        for (auto& x : r) x *= sign;
        return r;
    };
    for (std::size_t l = 0; l < nl; ++l) {
        const std::size_t src = nl - 1 - l;
        st.levels[l] = -un.levels[src];
        st.theta[l] = un.theta[src];
        for (auto& t : st.theta[l]) t = -t;
        st.P[l] = un.P[src];
        st.J[l] = un.J[src];
        st.Phi[l] = un.Phi[src];
        for (auto& v : st.Phi[l]) v = -v;
        st.P_modes[l] = flip(un.P_modes[src], 1.0);
        st.J_modes[l] = flip(un.J_modes[src], 1.0);
        st.Phi_modes[l] = flip(un.Phi_modes[src], -1.0);
    }
    return st;
}

double noise_floor(const SheetSamples& a, const SheetSamples& b) {
    return std::max(a.energy_error, b.energy_error) + 10.0 * std::max(a.rel_tol, b.rel_tol);
}

namespace {

std::vector<cplx> difference(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    if (a.size() != b.size()) throw DomainError("sheet fits use different mode counts");
    std::vector<cplx> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

}  // namespace

SplittingSample measure_splitting(const SheetSamples& un, const SheetSamples& st, double u, int k,
                                  bool require_signal) {
    const std::size_t lu = un.level_index(u), ls = st.level_index(u);
    const auto dJ = difference(un.J_modes[lu], st.J_modes[ls]);
    const auto dP = difference(un.P_modes[lu], st.P_modes[ls]);
    const int M = (static_cast<int>(dJ.size()) - 1) / 2;
    if (k < 0 || k > M) throw DomainError("measure_splitting: harmonic outside the fitted range");

    SplittingSample s;
    s.nuI0 = un.params.nuI0();
    s.epsilon = un.params.epsilon;
    s.u = u;
    s.k = k;
    const double factor = k == 0 ? 1.0 : 2.0;
    const cplx shift = std::polar(1.0, k * s.nuI0 * u);
    s.ampJ = factor * std::abs(dJ[k + M]);
    s.phaseJ = wrap_phase(std::arg(dJ[k + M] * shift));
    s.ampP = factor * std::abs(dP[k + M]);
    s.phaseP = wrap_phase(std::arg(dP[k + M] * shift));
    s.noise_floor = noise_floor(un, st);

    double sum = 0.0;
    int n = 0;
    for (std::size_t l = 0; l < un.levels.size(); ++l) {
        for (std::size_t m = 0; m < st.levels.size(); ++m) {
            if (std::abs(un.levels[l] - st.levels[m]) > 1e-12) continue;
            sum += (un.Phi_modes[l][M] - st.Phi_modes[m][M]).real();
            ++n;
        }
    }
    s.lambda0 = n ? sum / n : 0.0;
    if (require_signal && s.ampJ < 10.0 * s.noise_floor)
        throw SignalBelowNoise("measure_splitting: splitting below the noise floor", s.ampJ, s.noise_floor);
    return s;
}

HomoclinicRoots find_homoclinics(const SheetSamples& un, const SheetSamples& st, double u) {
    const std::size_t lu = un.level_index(u), ls = st.level_index(u);
    const auto dP = difference(un.P_modes[lu], st.P_modes[ls]);
    const int M = (static_cast<int>(dP.size()) - 1) / 2;
    auto g = [&](double th) { return eval_real(dP.data(), M, th); };
    auto dg = [&](double th) {
        cplx s = 0.0;
        for (int k = -M; k <= M; ++k) s += kI * static_cast<double>(k) * dP[k + M] * std::polar(1.0, k * th);
        return s.real();
    };
    const int samples = 1440;
    HomoclinicRoots out;
    double ta = 0.0, ga = g(ta);
    for (int i = 1; i <= samples; ++i) {
        const double tb = 2 * kPi * i / samples;
        const double gb = g(tb);
        if ((ga < 0 && gb >= 0) || (ga > 0 && gb <= 0)) {
            double root = tb;
            if (gb != 0.0) {
                std::uintmax_t iters = 100;
                auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-15; };
                const auto r = boost::math::tools::toms748_solve(g, ta, tb, ga, gb, tol, iters);
                root = 0.5 * (r.first + r.second);
            }
            if (root < 2 * kPi) {
                out.theta.push_back(root);
                out.slope.push_back(dg(root));
            }
        }
        ta = tb;
        ga = gb;
    }
    if (out.theta.size() != 2) throw RootCountError("find_homoclinics: expected two roots per period", out.theta);
    return out;
}

ScalingFit fit_scaling(const std::vector<SplittingSample>& samples) {
    const std::size_t n = samples.size();
    if (n < 4) throw DomainError("fit_scaling: need at least 4 samples");
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd b(n);
    ScalingFit fit;
    fit.nuI0_min = fit.nuI0_max = samples.front().nuI0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = samples[i].nuI0;
        if (!(samples[i].ampJ > 0)) throw DomainError("fit_scaling: amplitudes must be positive");
        A(i, 0) = 1.0;
        A(i, 1) = -x;
        A(i, 2) = std::log(x);
        b(i) = std::log(samples[i].ampJ);
        fit.nuI0_min = std::min(fit.nuI0_min, x);
        fit.nuI0_max = std::max(fit.nuI0_max, x);
    }
    const Eigen::Matrix3d AtA = A.transpose() * A;
    const Eigen::Vector3d x = AtA.ldlt().solve(A.transpose() * b);
    fit.c = x(0);
    fit.rho = x(1);
    fit.sigma = x(2);
    const Eigen::VectorXd r = b - A * x;
    fit.residuals.assign(r.data(), r.data() + n);
    const double s2 = n > 3 ? r.squaredNorm() / static_cast<double>(n - 3) : 0.0;
    const Eigen::Matrix3d cov = s2 * AtA.inverse();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) fit.cov[i][j] = cov(i, j);
    return fit;
}

SplittingRun compute_sheets(const ModelParams& params, const SplittingOptions& opt) {
    if (!params.physical.corrugation.even())
        throw DomainError("compute_sheets: the reversor construction needs an even corrugation");
    SplittingRun run;
    run.graph = solve_hj_unstable(params, opt.graph_u_max, opt.modes, opt.hj_tol);
    const auto seeds = seed_fibers(run.graph, opt.seed_u, 2 * opt.globalize.fit_modes + 1);
    std::vector<double> levels;
    for (double l : opt.levels) {
        if (!(l > 0)) throw DomainError("compute_sheets: levels must be positive");
        levels.push_back(l);
        levels.push_back(-l);
    }
    run.unstable = globalize(seeds, params, levels, opt.globalize);
    run.stable = reflect_sheet(run.unstable);
    return run;
}

}  // namespace surfchaos
