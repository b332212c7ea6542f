#include "surfchaos/horseshoe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "surfchaos/errors.hpp"
#include "horseshoe_detail.hpp"
#include "surfchaos/manifolds.hpp"

namespace surfchaos {

namespace detail {

CorrugationSeries rotated_series(const CorrugationSeries& V, double ref) {
    CorrugationSeries out = V;
    for (std::size_t i = 0; i < V.cosines.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        const double c = std::cos(n * ref), s = std::sin(n * ref);
        out.cosines[i] = V.cosines[i] * c + V.sines[i] * s;
        out.sines[i] = -V.cosines[i] * s + V.sines[i] * c;
    }
    return out;
}

ReducedFlow::ReducedFlow(const ModelParams& params, double ref)
    : nu(params.nu), I0(params.I0), V(rotated_series(params.effective_series(), ref)) {
    for (std::size_t i = 0; i < V.cosines.size(); ++i)
        escape_scale += (std::abs(V.cosines[i]) + std::abs(V.sines[i])) * (2.0 + static_cast<double>(i));
    escape_scale *= 4.0 * (1.0 + nu * I0);
}

}  // namespace detail

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBounce = 0.70710678118654752;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Landing angles carry ~1e-6 of integration noise; strip ends sit on y' = +-delta.
constexpr double kEdgeSlack = 1e-5;

using detail::ReducedFlow;

auto tight_tol() {
    return [](double a, double b) { return std::abs(b - a) <= 4e-16 * std::max(std::abs(a), std::abs(b)); };
}

template <class F>
double bracket_root(F&& f, double lo, double hi, double flo, double fhi) {
    std::uintmax_t it = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tight_tol(), it);
    return 0.5 * (r.first + r.second);
}

}  // namespace

double level_action(double q, double p, double theta, const ModelParams& params) {
    return ReducedFlow(params, 0.0).action(q, p, theta);
}

ReducedState reduce_poincare_cartan(const McGeheeState& s, const ModelParams& params) {
    const ReducedFlow R(params, 0.0);
    const double J = R.action(s.q, s.p, s.theta);
    if (std::abs(J - s.J) > 1e-8 * std::max(1.0, std::abs(J)))
        throw DomainError("state is not on the energy level of the periodic orbit");
    Vec<3> dy;
    R(s.theta, {s.q, s.p, 0.0}, dy);
    return {s.q, s.p, s.theta, -J, dy[0], dy[1]};
}

ChartPoint chart_coords(double q, double p) {
    const double s = detail::chart_s(q);
    return {0.5 * (s - p), 0.5 * (s + p)};
}

namespace {

template <class T>
std::array<T, 2> chart_inverse(T u, T v) {
    const T s = u + v;
    if (!(s >= 0 && s <= T(0.5))) throw DomainError("chart point outside 0 <= u + v <= 1/2");
    const T q2 = 2 * s * s / (1 + std::sqrt(1 - 4 * s * s));
    return {std::sqrt(q2), v - u};
}

}  // namespace

std::array<double, 2> chart_inverse(double u, double v) { return chart_inverse<double>(u, v); }

double LocalChart::v_unstable(double theta) const {
    return fourier_eval(unstable_offset.data(), offset_modes, theta).real();
}

double LocalChart::u_stable(double theta) const { return v_unstable(-theta); }

LocalChart build_chart(const ModelParams& params, double a, double delta, int graph_modes) {
    params.validate();
    if (!params.physical.corrugation.even())
        throw DomainError("the local chart uses reversibility and needs an even corrugation");
    if (!(a > 0 && a <= 0.25)) throw DomainError("section radius must lie in (0, 0.25]");
    if (!(delta > 0 && delta < 0.5 * a)) throw DomainError("strip width must satisfy 0 < delta < a/2");
    LocalChart chart;
    chart.params = params;
    chart.a = a;
    chart.delta = delta;
    chart.rho = 2.0 * a;

    const auto graph = solve_hj_unstable(params, -2.0, graph_modes);
    auto offset_at = [&](double theta) {
        auto f = [&](double s) {
            const auto g = graph_point(graph, s, theta);
            return chart_coords(g.q, g.p).u - a;
        };
        const double lo = -60.0, hi = -2.5;
        const double s = bracket_root(f, lo, hi, f(lo), f(hi));
        const auto g = graph_point(graph, s, theta);
        return chart_coords(g.q, g.p).v;
    };
    const int n = 4 * chart.offset_modes;
    std::vector<double> th(n), val(n);
    for (int i = 0; i < n; ++i) {
        th[i] = kTwoPi * i / n;
        val[i] = offset_at(th[i]);
    }
    chart.unstable_offset = trig_fit(th, val, chart.offset_modes);
    for (int i = 0; i < n; i += 2) {
        const double t = kTwoPi * (i + 0.5) / n;
        chart.offset_fit_error = std::max(chart.offset_fit_error, std::abs(chart.v_unstable(t) - offset_at(t)));
    }
    return chart;
}

namespace {

template <class T>
FollowResult follow_impl(const LocalChart& chart, double theta_ref, double v_offset, double tau0, int returns,
                         const ReturnOptions& opt, const OrbitObserver& observer, double sample_step) {
    const ReducedFlow R(chart.params, theta_ref);
    const double a = chart.a;
    const auto qp = chart_inverse<T>(a, static_cast<T>(chart.v_unstable(theta_ref + tau0)) + v_offset);
    const Vec<3, T> y0{qp[0], qp[1], 0};
    Field<3, T> f = [&R](T t, const Vec<3, T>& y, Vec<3, T>& dy) { R(t, y, dy); };

    std::vector<Section<3, T>> secs(2);
    secs[0].g = [a](T, const Vec<3, T>& y) { return (detail::chart_s(y[0]) - y[1]) / 2 - a; };
    secs[0].direction = +1;
    secs[0].accept = [](T, const Vec<3, T>& y) { return y[1] < 0 && y[0] < kBounce; };
    secs[1].g = [a](T, const Vec<3, T>& y) { return (detail::chart_s(y[0]) + y[1]) / 2 - a; };
    secs[1].direction = -1;
    secs[1].accept = [](T, const Vec<3, T>& y) { return y[1] > 0 && y[0] < kBounce; };

    FollowResult out;
    bool incoming = false;
    double tau_last = tau0;
    Landing pending;
    auto on_event = [&](const SectionEvent<3, T>& ev) {
        const T s = detail::chart_s(ev.y[0]);
        const double cu = static_cast<double>((s - ev.y[1]) / 2), cv = static_cast<double>((s + ev.y[1]) / 2);
        const double et = static_cast<double>(ev.t);
        if (ev.section == 1) {
            if (!incoming) {
                incoming = true;
                pending.tau_incoming = et;
                pending.u_offset = cu - chart.u_stable(theta_ref + et);
            }
            return true;
        }
        if (!incoming) return true;
        Landing L = pending;
        L.tau = et;
        L.q = static_cast<double>(ev.y[0]);
        L.p = static_cast<double>(ev.y[1]);
        L.t = static_cast<double>(ev.y[2]);
        L.v_offset = cv - chart.v_unstable(theta_ref + et);
        L.count = static_cast<int>(std::floor((et + kPi) / kTwoPi) - std::floor((tau_last + kPi) / kTwoPi));
        out.landings.push_back(L);
        tau_last = et;
        incoming = false;
        return static_cast<int>(out.landings.size()) < returns;
    };
    auto in_domain = [&](T tau, const Vec<3, T>& y) {
        if (R.escaping(y[0], y[1], tau, a)) {
            out.escaped = true;
            return false;
        }
        if (tau - tau_last > static_cast<T>(opt.max_advance)) {
            out.capped = true;
            return false;
        }
        return true;
    };
    std::function<void(const DenseSegment<3, T>&)> on_step;
    double next_sample = tau0;
    if (observer) {
        if (!(sample_step > 0)) throw DomainError("sample step must be positive");
        observer({tau0, static_cast<double>(y0[0]), static_cast<double>(y0[1]), 0.0});
        next_sample = tau0 + sample_step;
        on_step = [&](const DenseSegment<3, T>& seg) {
            while (next_sample <= seg.t1()) {
                const auto y = seg(static_cast<T>(next_sample));
                observer({next_sample, static_cast<double>(y[0]), static_cast<double>(y[1]), static_cast<double>(y[2])});
                next_sample += sample_step;
            }
        };
    }
    const double t_max = tau0 + (returns + 1) * opt.max_advance;
    find_events<3, T>(f, y0, tau0, t_max, secs, on_event, opt.extended ? opt.extended_integrator : opt.integrator, {},
                      in_domain, on_step);
    return out;
}

}  // namespace

FollowResult follow_returns(const LocalChart& chart, double theta_ref, double v_offset, double tau0, int returns,
                            const ReturnOptions& opt, const OrbitObserver& observer, double sample_step) {
    if (returns < 1) throw DomainError("follow_returns needs at least one return");
    if (opt.extended) return follow_impl<long double>(chart, theta_ref, v_offset, tau0, returns, opt, observer, sample_step);
    return follow_impl<double>(chart, theta_ref, v_offset, tau0, returns, opt, observer, sample_step);
}

LocalPassage local_map(const LocalChart& chart, double u0, double theta0, const ReturnOptions& opt) {
    if (!(u0 > 0 && u0 < chart.rho)) throw DomainError("local map needs 0 < u0 < rho");
    const ReducedFlow R(chart.params, theta0);
    const double a = chart.a;
    const auto qp = chart_inverse(chart.u_stable(theta0) + u0, a);
    Field<3> f = [&R](double t, const Vec<3>& y, Vec<3>& dy) { R(t, y, dy); };
    std::vector<Section<3>> secs(1);
    secs[0].g = [a](double, const Vec<3>& y) { return chart_coords(y[0], y[1]).u - a; };
    secs[0].direction = +1;
    secs[0].accept = [](double, const Vec<3>& y) { return y[1] < 0 && y[0] < kBounce; };
    bool left = false;
    auto in_domain = [&](double tau, const Vec<3>& y) {
        const auto c = chart_coords(y[0], y[1]);
        if (std::abs(c.u) > chart.rho || std::abs(c.v) > chart.rho || R.escaping(y[0], y[1], tau, a) ||
            tau > opt.max_advance)
            left = true;
        return !left;
    };
    const auto run = find_events<3>(f, {qp[0], qp[1], 0.0}, 0.0, 2.0 * opt.max_advance, secs,
                                    [](const SectionEvent<3>&) { return false; }, opt.integrator, {}, in_domain);
    if (run.events.empty()) throw LeftDomain("local passage left the box before reaching u = a");
    const auto& ev = run.events.front();
    LocalPassage out;
    out.u0 = u0;
    out.theta0 = theta0;
    out.transit = ev.t;
    out.theta1 = theta0 + ev.t;
    out.v1 = chart_coords(ev.y[0], ev.y[1]).v - chart.v_unstable(out.theta1);
    return out;
}

TruncatedPassage truncated_local_map(double u0, double a) {
    if (!(u0 > 0 && u0 < a)) throw DomainError("truncated local map needs 0 < u0 < a");
    // Logarithmic variables keep log u + log v exactly linear.
    Field<2> f = [](double, const Vec<2>& y, Vec<2>& dy) {
        const double s = std::exp(y[0]) + std::exp(y[1]);
        dy[0] = s;
        dy[1] = -s;
    };
    const double target = std::log(a);
    std::vector<Section<2>> secs{{[target](double, const Vec<2>& y) { return y[0] - target; }, +1, nullptr}};
    const double t_max = 10.0 * truncated_transit_exact(u0, a) + 10.0;
    const auto run = find_events<2>(f, {std::log(u0), std::log(a)}, 0.0, t_max, secs,
                                    [](const SectionEvent<2>&) { return false; }, {1e-14, 1e-14});
    if (run.events.empty()) throw LeftDomain("truncated passage did not reach u = a");
    return {std::exp(run.events.front().y[1]), run.events.front().t};
}

double truncated_transit_exact(double u0, double a) {
    const double r = std::sqrt(u0 * a);
    return (std::atan(a / r) - std::atan(u0 / r)) / r;
}

LambdaLemmaFit lambda_lemma_fit(const LocalChart& chart, const std::vector<double>& u0, double theta0,
                                const ReturnOptions& opt) {
    if (u0.size() < 3) throw DomainError("lambda lemma fit needs at least three starting offsets");
    LambdaLemmaFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double u : u0) {
        const auto L = local_map(chart, u, theta0, opt);
        if (!(L.v1 > 0)) throw DomainError("local passage landed on the wrong side of the unstable manifold");
        fit.u0.push_back(u);
        fit.v1.push_back(L.v1);
        fit.transit.push_back(L.transit);
        const double x = std::log(u), y = std::log(L.v1);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        fit.Ca = std::max(fit.Ca, std::abs(y / x - 1.0));
        const auto T = truncated_local_map(u, chart.a);
        fit.truncated_error = std::max(fit.truncated_error, std::abs(T.v1 - u) / u);
    }
    const double n = static_cast<double>(u0.size());
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    // transit = A u^-gamma + B, relative least squares; A and B are linear for fixed gamma.
    auto solve_AB = [&](double g, double& A, double& B) {
        double m00 = 0, m01 = 0, m11 = 0, r0 = 0, r1 = 0;
        for (std::size_t i = 0; i < fit.u0.size(); ++i) {
            const double w = 1.0 / fit.transit[i];
            const double x = std::pow(fit.u0[i], -g) * w;
            m00 += x * x;
            m01 += x * w;
            m11 += w * w;
            r0 += x;
            r1 += w;
        }
        const double det = m00 * m11 - m01 * m01;
        A = (r0 * m11 - r1 * m01) / det;
        B = (m00 * r1 - m01 * r0) / det;
        double ss = 0;
        for (std::size_t i = 0; i < fit.u0.size(); ++i) {
            const double e = (A * std::pow(fit.u0[i], -g) + B) / fit.transit[i] - 1.0;
            ss += e * e;
        }
        return ss;
    };
    const auto best = boost::math::tools::brent_find_minima(
        [&](double g) {
            double A, B;
            return solve_AB(g, A, B);
        },
        0.05, 1.5, 40);
    fit.gamma = best.first;
    solve_AB(fit.gamma, fit.A, fit.B);
    for (std::size_t i = 0; i < fit.u0.size(); ++i)
        fit.fit_residual = std::max(
            fit.fit_residual, std::abs((fit.A * std::pow(fit.u0[i], -fit.gamma) + fit.B) / fit.transit[i] - 1.0));
    return fit;
}

GlobalArrival global_map(const LocalChart& chart, double v_offset, double theta, const ReturnOptions& opt) {
    const ReducedFlow R(chart.params, theta);
    const double a = chart.a;
    const auto qp = chart_inverse(a, chart.v_unstable(theta) + v_offset);
    Field<3> f = [&R](double t, const Vec<3>& y, Vec<3>& dy) { R(t, y, dy); };
    std::vector<Section<3>> secs(1);
    secs[0].g = [a](double, const Vec<3>& y) { return chart_coords(y[0], y[1]).v - a; };
    secs[0].direction = -1;
    secs[0].accept = [](double, const Vec<3>& y) { return y[1] > 0 && y[0] < kBounce; };
    const double budget = 500.0;
    auto in_domain = [&](double tau, const Vec<3>& y) { return !R.escaping(y[0], y[1], tau, a) && y[0] < 2.0; };
    const auto run = find_events<3>(f, {qp[0], qp[1], 0.0}, 0.0, budget, secs,
                                    [](const SectionEvent<3>&) { return false; }, opt.integrator, {}, in_domain);
    if (run.events.empty()) throw ExcursionEscape("excursion did not come back to v = a");
    const auto& ev = run.events.front();
    GlobalArrival out;
    out.theta = theta + ev.t;
    out.q = ev.y[0];
    out.p = ev.y[1];
    out.u_offset = chart_coords(ev.y[0], ev.y[1]).u - chart.u_stable(out.theta);
    return out;
}

HomoclinicFrame homoclinic_frame(const LocalChart& chart, const ReturnOptions& opt) {
    HomoclinicFrame fr;
    auto offset = [&](double th) { return global_map(chart, 0.0, th, opt).u_offset; };
    const int n = 72;
    std::vector<double> th(n + 1), val(n + 1);
    for (int i = 0; i <= n; ++i) {
        th[i] = kTwoPi * i / n;
        val[i] = i == n ? val[0] : offset(th[i]);
    }
    std::vector<double> slopes;
    for (int i = 0; i < n; ++i) {
        if ((val[i] < 0) == (val[i + 1] < 0)) continue;
        const double r = bracket_root(offset, th[i], th[i + 1], val[i], val[i + 1]);
        fr.roots.push_back(r);
        slopes.push_back(val[i + 1] - val[i]);
    }
    if (fr.roots.size() != 2) throw RootCountError("expected two primary homoclinic points", fr.roots);
    const std::size_t pick = slopes[0] > 0 ? 0 : 1;
    if (!(slopes[pick] > 0)) throw RootCountError("primary homoclinic points with equal orientation", fr.roots);
    fr.theta_h = fr.roots[pick];
    fr.fixed_error = std::abs(offset(fr.theta_h));

    auto F = [&](double dv, double dth) {
        const auto g = global_map(chart, dv, fr.theta_h + dth, opt);
        return std::array<double, 2>{g.u_offset, g.theta};
    };
    auto jac = [&](double hv, double ht, double J[2][2]) {
        const auto vp = F(hv, 0), vm = F(-hv, 0), tp = F(0, ht), tm = F(0, -ht);
        for (int i = 0; i < 2; ++i) {
            J[i][0] = (vp[i] - vm[i]) / (2 * hv);
            J[i][1] = (tp[i] - tm[i]) / (2 * ht);
        }
    };
    double J1[2][2], J2[2][2];
    jac(1e-6, 1e-5, J1);
    jac(2.5e-7, 2.5e-6, J2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            fr.jac[i][j] = (16 * J2[i][j] - J1[i][j]) / 15;
            fr.richardson = std::max(fr.richardson, std::abs(J1[i][j] - J2[i][j]) / std::max(std::abs(J2[i][j]), 1e-300));
        }
    fr.nu1 = fr.jac[0][0];
    fr.nu0 = fr.jac[0][1];
    return fr;
}

Horseshoe make_horseshoe(const ModelParams& params, double a, double delta, double aspect, const ReturnOptions& opt) {
    if (!(aspect > 1)) throw DomainError("aspect must exceed 1");
    Horseshoe hs;
    hs.chart = build_chart(params, a, delta);
    hs.frame = homoclinic_frame(hs.chart, opt);
    if (!(std::abs(hs.frame.nu0 * hs.frame.nu1) > 0)) throw DomainError("degenerate homoclinic differential");
    hs.aspect = aspect;
    hs.scale = aspect * std::abs(hs.frame.nu1 / hs.frame.nu0);
    hs.options = opt;
    return hs;
}

ReturnPoint return_map(const Horseshoe& hs, double x, double y) {
    const auto fr = follow_returns(hs.chart, hs.frame.theta_h, x / hs.scale, y, 1, hs.options);
    ReturnPoint r;
    if (fr.landings.empty()) return r;
    const auto& L = fr.landings.front();
    r.returned = true;
    r.tau = L.tau;
    r.count = L.count;
    r.u_offset = L.u_offset;
    r.x = hs.scale * L.v_offset;
    r.y = L.tau - kTwoPi * std::floor((L.tau + kPi) / kTwoPi);
    return r;
}

OperatingPoint select_operating_point(const std::vector<double>& candidates, double epsilon,
                                      const PhysicalParams& physical, double factor) {
    OperatingPoint op;
    for (double nuI0 : candidates) {
        const auto params = ModelParams::from_nuI0(nuI0, epsilon, physical);
        const auto run = compute_sheets(params);
        const auto s = measure_splitting(run.unstable, run.stable, 1.0, 1, false);
        op.tried.push_back(nuI0);
        op.ratios.push_back(s.ampJ / s.noise_floor);
        if (s.ampJ > factor * s.noise_floor) {
            op.nuI0 = nuI0;
            op.ampJ = s.ampJ;
            op.noise = s.noise_floor;
            return op;
        }
    }
    throw SignalBelowNoise("no candidate splitting exceeds the required multiple of the noise floor", 0.0, 0.0);
}

std::optional<StripSection> strip_section(const Horseshoe& hs, int count, double x) {
    const double d = hs.delta();
    auto acc = [&](double y) { return global_map(hs.chart, x / hs.scale, hs.frame.theta_h + y, hs.options).u_offset; };
    const double ga = acc(-d), gb = acc(d);
    if (!(ga < 0 && gb > 0)) return std::nullopt;
    StripSection sec;
    sec.y_acc = bracket_root(acc, -d, d, ga, gb);

    ReturnPoint last;
    auto A = [&](double r, double c) {
        const auto rp = return_map(hs, x, sec.y_acc + r);
        if (!rp.returned) return 1e3;
        last = rp;
        return rp.tau - kTwoPi * count - c;
    };
    // A decreases in r: larger offsets from the accumulation curve return sooner.
    auto solve = [&](double c, double r_hi, double& r_out, ReturnPoint& img) {
        double f_hi = A(r_hi, c);
        if (!(f_hi < 0)) return false;
        double r_lo = r_hi, f_lo = f_hi;
        for (int i = 0; i < 200 && f_lo < 0; ++i) {
            r_hi = r_lo;
            f_hi = f_lo;
            r_lo *= 0.5;
            f_lo = A(r_lo, c);
        }
        if (!(f_lo > 0) || f_lo >= 1e3) {
            // refine the escaping end towards the returning side
            for (int i = 0; i < 200 && f_lo >= 1e3; ++i) {
                const double r_mid = 0.5 * (r_lo + r_hi);
                const double f_mid = A(r_mid, c);
                if (f_mid < 0) {
                    r_hi = r_mid;
                    f_hi = f_mid;
                } else {
                    r_lo = r_mid;
                    f_lo = f_mid;
                }
            }
        }
        if (!(f_lo > 0 && f_hi < 0)) return false;
        r_out = bracket_root([&](double r) { return A(r, c); }, r_lo, r_hi, f_lo, f_hi);
        A(r_out, c);
        img = last;
        return img.returned;
    };
    double r_minus = 0, r_plus = 0;
    if (!solve(-d, d - sec.y_acc, r_minus, sec.hi)) return std::nullopt;
    if (!solve(+d, r_minus, r_plus, sec.lo)) return std::nullopt;
    sec.y_lo = sec.y_acc + r_plus;
    sec.y_hi = sec.y_acc + r_minus;
    return sec;
}

const Strip& StripFamily::strip(int symbol) const {
    for (const auto& s : strips)
        if (s.symbol == symbol) return s;
    throw DomainError("symbol outside the verified window");
}

bool StripFamily::has(int symbol) const {
    return std::any_of(strips.begin(), strips.end(), [symbol](const Strip& s) { return s.symbol == symbol; });
}

StripFamily build_strips(const Horseshoe& hs, int n_min, int n_max, int samples) {
    if (!(n_min >= 1 && n_max >= n_min)) throw DomainError("symbol window must satisfy 1 <= n_min <= n_max");
    if (samples < 3) throw DomainError("strip tracing needs at least three abscissae");
    const double d = hs.delta();
    auto inside = [&](const ReturnPoint& r) {
        return r.returned && std::abs(r.x) <= d && std::abs(r.y) <= d + kEdgeSlack;
    };
    auto contained = [&](int m) {
        for (double x : {-d, 0.0, d}) {
            const auto s = strip_section(hs, m, x);
            if (!s || !inside(s->lo) || !inside(s->hi) || s->y_lo < -d || s->y_hi > d) return false;
        }
        return true;
    };
    // Seed the search where the image abscissa reaches the rectangle edge at x = 0.
    auto offset = [&](double y) { return global_map(hs.chart, 0.0, hs.frame.theta_h + y, hs.options).u_offset; };
    const double g_lo = offset(-d), g_hi = offset(d);
    if (!(g_lo < 0 && g_hi > 0)) throw DomainError("accumulation curve does not cross the rectangle");
    const double y_acc = bracket_root(offset, -d, d, g_lo, g_hi);
    auto g = [&](double y) { return hs.scale * offset(y) - d; };
    const double y_edge = bracket_root(g, y_acc, d, g(y_acc), g(d));
    const auto edge = return_map(hs, 0.0, y_edge);
    if (!edge.returned) throw DomainError("rectangle edge does not return");
    int m = static_cast<int>(std::floor(edge.tau / kTwoPi));
    while (m > 1 && contained(m - 1)) --m;
    int tries = 0;
    while (!contained(m)) {
        if (++tries > 400) throw DomainError("no strip fully inside the rectangle");
        ++m;
    }
    StripFamily fam;
    fam.first_count = m;

    for (int sym = n_min; sym <= n_max; ++sym) {
        Strip st;
        st.symbol = sym;
        st.count = fam.first_count + sym - 1;
        st.image_x_min = kInf;
        st.image_x_max = -kInf;
        auto note = [&](const ReturnPoint& r) {
            if (!inside(r))
                throw DomainError("image of strip " + std::to_string(sym) + " leaves the rectangle at (" +
                                  std::to_string(r.x) + ", " + std::to_string(r.y) + ")");
            st.image_x_min = std::min(st.image_x_min, r.x);
            st.image_x_max = std::max(st.image_x_max, r.x);
        };
        for (int i = 0; i < samples; ++i) {
            const double x = -d + 2 * d * i / (samples - 1);
            const auto s = strip_section(hs, st.count, x);
            if (!s || s->y_lo < -d || s->y_hi > d)
                throw DomainError("strip " + std::to_string(sym) + " is not a full horizontal strip");
            note(s->lo);
            note(s->hi);
            st.x.push_back(x);
            st.y_lo.push_back(s->y_lo);
            st.y_hi.push_back(s->y_hi);
            st.y_acc.push_back(s->y_acc);
            st.hausdorff = std::max(st.hausdorff, s->y_hi - s->y_acc);
        }
        for (int side = 0; side < 2; ++side) {
            const std::size_t i = side == 0 ? 0 : st.x.size() - 1;
            auto& ys = side == 0 ? st.left_y : st.right_y;
            auto& xs = side == 0 ? st.left_x : st.right_x;
            for (int j = 0; j <= 10; ++j) {
                const auto r = return_map(hs, st.x[i], st.y_lo[i] + (st.y_hi[i] - st.y_lo[i]) * j / 10.0);
                note(r);
                ys.push_back(r.y);
                xs.push_back(r.x);
            }
            for (std::size_t j = 1; j < ys.size(); ++j)
                st.mu_v = std::max(st.mu_v, std::abs((xs[j] - xs[j - 1]) / (ys[j] - ys[j - 1])));
        }
        for (std::size_t i = 1; i < st.x.size(); ++i) {
            const double dx = st.x[i] - st.x[i - 1];
            st.mu_h = std::max({st.mu_h, std::abs((st.y_lo[i] - st.y_lo[i - 1]) / dx),
                                std::abs((st.y_hi[i] - st.y_hi[i - 1]) / dx)});
        }
        fam.mu_h = std::max(fam.mu_h, st.mu_h);
        fam.mu_v = std::max(fam.mu_v, st.mu_v);
        fam.strips.push_back(std::move(st));
    }

    for (std::size_t i = 0; i < fam.strips.size(); ++i)
        for (std::size_t j = i + 1; j < fam.strips.size(); ++j) {
            const auto& A = fam.strips[i];
            const auto& B = fam.strips[j];
            const std::string pair = std::to_string(A.symbol) + " and " + std::to_string(B.symbol);
            for (std::size_t k = 0; k < A.x.size(); ++k)
                if (A.y_lo[k] <= B.y_hi[k] && B.y_lo[k] <= A.y_hi[k])
                    throw StripOverlap("horizontal strips " + pair + " overlap", A.symbol, B.symbol);
            if (A.image_x_min <= B.image_x_max && B.image_x_min <= A.image_x_max)
                throw StripOverlap("vertical strips " + pair + " overlap", A.symbol, B.symbol);
        }
    fam.monotone = true;
    for (std::size_t i = 1; i < fam.strips.size(); ++i)
        if (!(fam.strips[i].hausdorff < fam.strips[i - 1].hausdorff)) fam.monotone = false;
    return fam;
}

namespace {

using Mat2 = std::array<std::array<double, 2>, 2>;

// Central-difference Jacobian of (x', tau') in the scaled coordinates.
Mat2 return_jacobian(const Horseshoe& hs, double x, double y, double h) {
    auto F = [&](double xx, double yy) {
        const auto r = return_map(hs, xx, yy);
        if (!r.returned) throw ExcursionEscape("finite-difference neighbour did not return");
        return std::array<double, 2>{r.x, r.tau};
    };
    const auto xp = F(x + h, y), xm = F(x - h, y), yp = F(x, y + h), ym = F(x, y - h);
    Mat2 J;
    for (int i = 0; i < 2; ++i) {
        J[i][0] = (xp[i] - xm[i]) / (2 * h);
        J[i][1] = (yp[i] - ym[i]) / (2 * h);
    }
    return J;
}

std::array<double, 2> apply(const Mat2& J, double a, double b) {
    return {J[0][0] * a + J[0][1] * b, J[1][0] * a + J[1][1] * b};
}

Mat2 inverse(const Mat2& J) {
    const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    if (det == 0.0) throw DomainError("singular return Jacobian");
    return {{{J[1][1] / det, -J[0][1] / det}, {-J[1][0] / det, J[0][0] / det}}};
}

// Minimum stretch of J over the cone |a| <= eta |b| (b-axis cone) when unstable, else
// of J over |b| <= eta |a|.
double cone_stretch(const Mat2& J, double eta, bool vertical) {
    double m = kInf;
    for (int i = 0; i <= 32; ++i) {
        const double t = -eta + 2 * eta * i / 32.0;
        const auto v = vertical ? apply(J, t, 1.0) : apply(J, 1.0, t);
        m = std::min(m, std::hypot(v[0], v[1]) / std::hypot(t, 1.0));
    }
    return m;
}

struct ConeVerdict {
    bool inclusion = false;
    double kappa = kInf;
};

ConeVerdict cone_verdict(const Mat2& J, double eta) {
    ConeVerdict v;
    const auto a = apply(J, eta, 1.0), b = apply(J, -eta, 1.0);
    const bool fwd = std::abs(a[0]) <= eta * std::abs(a[1]) && std::abs(b[0]) <= eta * std::abs(b[1]) &&
                     a[1] * b[1] > 0;
    const Mat2 Ji = inverse(J);
    const auto c = apply(Ji, 1.0, eta), d = apply(Ji, 1.0, -eta);
    const bool bwd = std::abs(c[1]) <= eta * std::abs(c[0]) && std::abs(d[1]) <= eta * std::abs(d[0]) &&
                     c[0] * d[0] > 0;
    v.inclusion = fwd && bwd;
    const double stretch = std::min(cone_stretch(J, eta, true), cone_stretch(Ji, eta, false));
    v.kappa = 1.0 / stretch;
    return v;
}

}  // namespace

ConeReport verify_cones(const Horseshoe& hs, const StripFamily& strips, std::vector<double> eta_grid, int per_strip,
                        double h) {
    if (eta_grid.empty())
        for (int i = 1; i < 20; ++i) eta_grid.push_back(0.05 * i);
    if (!(h > 0)) throw DomainError("finite-difference step must be positive");
    ConeReport rep;
    rep.eta_grid = eta_grid;
    std::vector<Mat2> jacs;
    for (const auto& st : strips.strips) {
        const int nf = (per_strip + static_cast<int>(st.x.size()) - 1) / static_cast<int>(st.x.size());
        for (std::size_t i = 0; i < st.x.size(); ++i)
            for (int j = 0; j < nf; ++j) {
                ConeSample s;
                s.symbol = st.symbol;
                s.x = st.x[i];
                s.y = st.y_lo[i] + (st.y_hi[i] - st.y_lo[i]) * (j + 0.5) / nf;
                const Mat2 Jh = return_jacobian(hs, s.x, s.y, h);
                const Mat2 Jq = return_jacobian(hs, s.x, s.y, 0.25 * h);
                Mat2 J;
                for (int c = 0; c < 2; ++c) {
                    const double dn = std::hypot(Jh[0][c] - Jq[0][c], Jh[1][c] - Jq[1][c]);
                    s.richardson = std::max(s.richardson, dn / std::hypot(Jq[0][c], Jq[1][c]));
                    for (int r = 0; r < 2; ++r) J[r][c] = (16 * Jq[r][c] - Jh[r][c]) / 15;
                }
                for (int r = 0; r < 2; ++r)
                    for (int c = 0; c < 2; ++c) s.jac[r][c] = J[r][c];
                rep.richardson_max = std::max(rep.richardson_max, s.richardson);
                rep.samples.push_back(s);
                jacs.push_back(J);
            }
    }
    rep.total = static_cast<int>(rep.samples.size());
    auto passes = [&](std::size_t k, double eta, double& kappa) {
        const auto v = cone_verdict(jacs[k], eta);
        kappa = v.kappa;
        return v.inclusion && rep.samples[k].richardson <= 0.05 && v.kappa < 1 - eta * eta;
    };
    std::size_t chosen = 0;
    double best = -1;
    bool found = false;
    for (std::size_t e = 0; e < eta_grid.size(); ++e) {
        int ok = 0;
        double kap;
        for (std::size_t k = 0; k < jacs.size(); ++k) ok += passes(k, eta_grid[e], kap);
        const double rate = rep.total ? static_cast<double>(ok) / rep.total : 0.0;
        rep.pass_rates.push_back(rate);
        if (!found && rate >= 0.95) {
            chosen = e;
            found = true;
        }
        if (!found && rate > best) {
            best = rate;
            chosen = e;
        }
    }
    const double eta = eta_grid[chosen];
    rep.eta_u = rep.eta_s = eta;
    for (std::size_t k = 0; k < jacs.size(); ++k) {
        double kap;
        rep.samples[k].pass = passes(k, eta, kap);
        rep.samples[k].expansion = 1.0 / kap;
        if (rep.samples[k].pass) {
            ++rep.passed;
            rep.kappa = std::max(rep.kappa, kap);
        }
    }
    rep.pass_rate = rep.total ? static_cast<double>(rep.passed) / rep.total : 0.0;
    return rep;
}

ExpansionScan expansion_scan(const Horseshoe& hs, double eta, std::vector<double> deltas, double h) {
    if (deltas.size() < 2) throw DomainError("expansion scan needs at least two rectangle sizes");
    ExpansionScan out;
    const double d = hs.delta();
    auto offset = [&](double y) { return global_map(hs.chart, 0.0, hs.frame.theta_h + y, hs.options).u_offset; };
    const double g_lo = offset(-d), g_hi = offset(d);
    const double y_acc = bracket_root(offset, -d, d, g_lo, g_hi);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double dl : deltas) {
        if (!(dl > 0 && dl <= d)) throw DomainError("scan sizes must lie in (0, delta]");
        const double target = dl / hs.scale;
        auto g = [&](double y) { return offset(y) - target; };
        const double y = bracket_root(g, y_acc, d, g(y_acc), g(d));
        const auto J = return_jacobian(hs, 0.0, y, h);
        Mat2 M{{{J[0][0], J[0][1]}, {J[1][0], J[1][1]}}};
        const double e = cone_stretch(M, eta, true);
        out.delta.push_back(dl);
        out.expansion.push_back(e);
        const double lx = std::log(dl), ly = std::log(e);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(deltas.size());
    out.exponent = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
    return out;
}

ReductionCheck compare_reduced_full(const LocalChart& chart, double v_offset, double theta0, int checkpoints,
                                    double tol) {
    if (checkpoints < 1) throw DomainError("need at least one checkpoint");
    const ReducedFlow R(chart.params, theta0);
    const IntegratorConfig cfg{tol, tol};
    ReturnOptions opt;
    opt.integrator = cfg;
    const auto arrival = global_map(chart, v_offset, theta0, opt);
    const double tau1 = arrival.theta - theta0;
    const auto qp = chart_inverse(chart.a, chart.v_unstable(theta0) + v_offset);

    Field<3> fr = [&R](double t, const Vec<3>& y, Vec<3>& dy) { R(t, y, dy); };
    const auto red = integrate<3>(fr, {qp[0], qp[1], 0.0}, 0.0, tau1, cfg);
    Field<4> ff = [&R](double t, const Vec<4>& y, Vec<4>& dy) { R.full(t, y, dy); };
    const double J0 = R.action(qp[0], qp[1], 0.0);
    const double t_end = red.back()[2] * 1.05 + 1.0;
    const auto full = integrate<4>(ff, {qp[0], qp[1], 0.0, J0}, 0.0, t_end, cfg);

    ReductionCheck chk;
    for (int j = 1; j <= checkpoints; ++j) {
        const double tau = tau1 * j / checkpoints;
        std::size_t k = 0;
        while (k < full.segments.size() && full.segments[k](full.segments[k].t1())[2] < tau) ++k;
        if (k == full.segments.size()) throw DomainError("full flow did not reach the checkpoint");
        const auto& seg = full.segments[k];
        auto g = [&](double t) { return seg(t)[2] - tau; };
        const double t = bracket_root(g, seg.t0, seg.t1(), g(seg.t0), g(seg.t1()));
        const auto yf = seg(t);
        const auto yr = red.at(tau);
        chk.tau.push_back(tau);
        chk.max_q = std::max(chk.max_q, std::abs(yf[0] - yr[0]));
        chk.max_p = std::max(chk.max_p, std::abs(yf[1] - yr[1]));
        chk.max_J = std::max(chk.max_J, std::abs(yf[3] - R.action(yr[0], yr[1], tau)));
    }
    return chk;
}

ReturnPoint full_flow_return(const Horseshoe& hs, double x, double y, double tol) {
    const auto& chart = hs.chart;
    const ReducedFlow R(chart.params, hs.frame.theta_h);
    const double a = chart.a;
    const auto qp = chart_inverse(a, chart.v_unstable(hs.frame.theta_h + y) + x / hs.scale);
    const Vec<4> y0{qp[0], qp[1], y, R.action(qp[0], qp[1], y)};
    Field<4> f = [&R](double t, const Vec<4>& z, Vec<4>& dz) { R.full(t, z, dz); };

    std::vector<Section<4>> secs(2);
    secs[0].g = [a](double, const Vec<4>& z) { return chart_coords(z[0], z[1]).u - a; };
    secs[0].direction = +1;
    secs[0].accept = [](double, const Vec<4>& z) { return z[1] < 0 && z[0] < kBounce; };
    secs[1].g = [a](double, const Vec<4>& z) { return chart_coords(z[0], z[1]).v - a; };
    secs[1].direction = -1;
    secs[1].accept = [](double, const Vec<4>& z) { return z[1] > 0 && z[0] < kBounce; };

    ReturnPoint r;
    bool incoming = false;
    auto on_event = [&](const SectionEvent<4>& ev) {
        if (ev.section == 1) {
            if (!incoming) r.u_offset = chart_coords(ev.y[0], ev.y[1]).u - chart.u_stable(hs.frame.theta_h + ev.y[2]);
            incoming = true;
            return true;
        }
        if (!incoming) return true;
        const double tau = ev.y[2];
        r.returned = true;
        r.tau = tau;
        r.count = static_cast<int>(std::floor((tau + kPi) / kTwoPi) - std::floor((y + kPi) / kTwoPi));
        r.x = hs.scale * (chart_coords(ev.y[0], ev.y[1]).v - chart.v_unstable(hs.frame.theta_h + tau));
        r.y = tau - kTwoPi * std::floor((tau + kPi) / kTwoPi);
        return false;
    };
    auto in_domain = [&](double, const Vec<4>& z) {
        return !R.escaping(z[0], z[1], z[2], a) && z[2] - y < hs.options.max_advance;
    };
    // tau advances at nu I0 per unit time to leading order
    const double t_max = 2.0 * hs.options.max_advance / (chart.params.nu * chart.params.I0);
    find_events<4>(f, y0, 0.0, t_max, secs, on_event, {tol, tol}, {}, in_domain);
    return r;
}

}  // namespace surfchaos
