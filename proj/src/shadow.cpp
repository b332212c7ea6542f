#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/toms748_solve.hpp>

#include "surfchaos/errors.hpp"
#include "surfchaos/horseshoe.hpp"

namespace surfchaos {

namespace {

Horseshoe extended(const Horseshoe& hs) {
    Horseshoe hx = hs;
    hx.options.extended = true;
    return hx;
}

// y in the strip of `count` at abscissa x whose image lands at height target.
double pull_back(const Horseshoe& hs, const Horseshoe& hx, int count, double x, double target) {
    const auto sec = strip_section(hs, count, x);
    if (!sec) return std::numeric_limits<double>::quiet_NaN();
    const double mid = 0.5 * (sec->y_lo + sec->y_hi);
    auto f = [&](double y) {
        const auto r = return_map(hx, x, y);
        if (!r.returned || r.count != count) return y < mid ? 1.0 : -1.0;
        return r.y - target;
    };
    double lo = sec->y_lo, hi = sec->y_hi;
    double flo = f(lo), fhi = f(hi);
    if (flo < 0 || fhi > 0) return std::numeric_limits<double>::quiet_NaN();
    std::uintmax_t iters = 100;
    auto tol = [](double a, double b) { return std::abs(b - a) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(a); };
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    return 0.5 * (r.first + r.second);
}

}  // namespace

Recount recount_symbols(const Horseshoe& hs, const StripFamily& strips, const SymbolItinerary& it) {
    Recount rc;
    const double d = hs.delta();
    const std::size_t k = it.nodes.size();
    for (std::size_t j = 0; j < k; ++j) {
        const auto r = full_flow_return(hs, it.nodes[j][0], it.nodes[j][1]);
        if (!r.returned) {
            rc.inside = false;
            break;
        }
        rc.counts.push_back(r.count);
        rc.symbols.push_back(r.count - strips.first_count + 1);
        rc.landings.push_back({r.x, r.y});
        if (std::abs(r.x) > d || std::abs(r.y) > d) rc.inside = false;
        const auto& next = j + 1 < k ? it.nodes[j + 1] : it.landings.back();
        if (j + 1 < k || !it.periodic)
            rc.max_node_error = std::max({rc.max_node_error, std::abs(r.x - next[0]), std::abs(r.y - next[1])});
        else
            rc.max_node_error =
                std::max({rc.max_node_error, std::abs(r.x - it.nodes[0][0]), std::abs(r.y - it.nodes[0][1])});
    }
    return rc;
}

SymbolItinerary shadow_orbit(const Horseshoe& hs, const StripFamily& strips, const std::vector<int>& symbols,
                             std::optional<double> x0, double tol, int max_sweeps) {
    if (symbols.empty()) throw DomainError("empty symbol sequence");
    if (!(tol > 0) || max_sweeps < 1) throw DomainError("shadowing needs tol > 0 and at least one sweep");
    for (int s : symbols)
        if (!strips.has(s)) throw DomainError("symbol " + std::to_string(s) + " outside the verified window");
    const double d = hs.delta();
    const std::size_t k = symbols.size();
    const Horseshoe hx = extended(hs);

    SymbolItinerary it;
    it.symbols = symbols;
    for (int s : symbols) it.counts.push_back(strips.strip(s).count);
    it.periodic = !x0.has_value();

    auto centre = [&](int s) {
        const auto& st = strips.strip(s);
        return 0.5 * (st.image_x_min + st.image_x_max);
    };
    std::vector<double> x(k), y(k, 0.0);
    x[0] = x0 ? *x0 : centre(symbols.back());
    if (!(std::abs(x[0]) <= d)) throw DomainError("start abscissa outside the rectangle");
    for (std::size_t j = 1; j < k; ++j) x[j] = centre(symbols[j - 1]);

    std::vector<ReturnPoint> img(k);
    std::vector<double> res(k);
    auto fail = [&](std::size_t j, const std::string& why) {
        throw SearchExhausted(why, std::vector<int>(symbols.begin(), symbols.begin() + j));
    };
    for (it.sweeps = 1; it.sweeps <= max_sweeps; ++it.sweeps) {
        for (std::size_t j = k; j-- > 0;) {
            const double target = j + 1 < k ? y[j + 1] : (it.periodic ? y[0] : 0.0);
            y[j] = pull_back(hs, hx, it.counts[j], x[j], target);
            if (std::isnan(y[j])) fail(j, "no strip crossing for symbol " + std::to_string(symbols[j]));
        }
        for (std::size_t j = 0; j < k; ++j) {
            img[j] = return_map(hx, x[j], y[j]);
            if (!img[j].returned || img[j].count != it.counts[j]) fail(j, "leg lost its count");
            if (j + 1 < k) res[j] = std::max(std::abs(img[j].x - x[j + 1]), std::abs(img[j].y - y[j + 1]));
        }
        const auto& last = img[k - 1];
        if (it.periodic)
            res[k - 1] = std::max(std::abs(last.x - x[0]), std::abs(last.y - y[0]));
        else
            res[k - 1] = std::max({0.0, std::abs(last.x) - d, std::abs(last.y) - d});
        if (*std::max_element(res.begin(), res.end()) <= tol) break;
        // x carries ~1e-14 of integration noise, so abscissae move only after a failed sweep
        for (std::size_t j = 0; j + 1 < k; ++j) x[j + 1] = img[j].x;
        if (it.periodic) x[0] = last.x;
    }
    if (it.sweeps > max_sweeps) {
        std::size_t j = 0;
        while (j < k && res[j] <= tol) ++j;
        fail(j, "shadowing chain did not settle in " + std::to_string(max_sweeps) + " sweeps");
    }

    for (std::size_t j = 0; j < k; ++j) {
        it.nodes.push_back({x[j], y[j]});
        it.landings.push_back({img[j].x, img[j].y});
        it.residuals.push_back(res[j]);
    }
    it.x0 = x[0];
    it.y0 = y[0];
    const double theta = hs.frame.theta_h + y[0];
    const auto qp = chart_inverse(hs.chart.a, hs.chart.v_unstable(theta) + x[0] / hs.scale);
    it.initial = {qp[0], qp[1], theta, level_action(qp[0], qp[1], theta, hs.chart.params)};
    it.displacement = std::max(std::abs(img[k - 1].x - x[0]), std::abs(img[k - 1].y - y[0]));
    it.achieved = recount_symbols(hs, strips, it).symbols;
    return it;
}

Oscillation oscillatory_demo(const Horseshoe& hs, const StripFamily& strips, int k, double z_ret, double sample_dt) {
    if (k < 1) throw DomainError("need at least one excursion");
    if (!(sample_dt > 0)) throw DomainError("sample step must be positive");
    Oscillation osc;
    osc.z_ret = z_ret;
    if (k > static_cast<int>(strips.strips.size())) throw DomainError("more excursions than verified strips");
    for (int i = 0; i < k; ++i) osc.symbols.push_back(strips.strips[i].symbol);
    osc.itinerary = shadow_orbit(hs, strips, osc.symbols);
    const auto& it = osc.itinerary;

    const auto& params = hs.chart.params;
    const auto tc = transform_constants(params.physical);
    const double step = sample_dt * tc.time_scale * params.nuI0();
    ReturnOptions opt = hs.options;
    opt.extended = true;

    // Legs are glued at the nodes; theta shifts by whole turns and time is carried over.
    std::vector<OrbitPoint> pts;
    double tau_shift = 0, t_shift = 0;
    for (int j = 0; j < k; ++j) {
        const auto& node = it.nodes[j];
        const bool last = j + 1 == k;
        std::vector<OrbitPoint> leg;
        const auto fr = follow_returns(hs.chart, hs.frame.theta_h, node[0] / hs.scale, node[1], last ? 2 : 1, opt,
                                       [&](const OrbitPoint& o) { leg.push_back(o); }, step);
        if (fr.landings.empty()) throw DomainError("orbit lost an excursion on re-integration");
        const auto& L = fr.landings.front();
        std::size_t end = leg.size();
        if (!last) {
            end = std::upper_bound(leg.begin(), leg.end(), L.tau, [](double t, const OrbitPoint& o) { return t < o.tau; }) -
                  leg.begin();
        } else {
            // Keep everything up to the wall bounce that follows the last landing.
            for (std::size_t i = 1; i + 1 < leg.size(); ++i)
                if (leg[i].tau > L.tau && leg[i].q >= leg[i - 1].q && leg[i].q >= leg[i + 1].q) {
                    end = i + 1;
                    break;
                }
        }
        for (std::size_t i = 0; i < end; ++i) {
            auto o = leg[i];
            o.tau += tau_shift;
            o.t += t_shift;
            pts.push_back(o);
        }
        if (!last) {
            tau_shift += L.tau - it.nodes[j + 1][1];
            t_shift += L.t;
        }
    }

    for (const auto& o : pts) {
        const double theta = hs.frame.theta_h + o.tau;
        const McGeheeState m{o.q, o.p, theta, level_action(o.q, o.p, theta, params)};
        const auto c = from_mcgehee(m, params);
        osc.orbit.push_back({o.t / tc.time_scale, c.x, c.z, c.px, c.pz});
    }

    const auto& orb = osc.orbit;
    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < orb.size(); ++i)
        if (orb[i].z > orb[i - 1].z && orb[i].z >= orb[i + 1].z) peaks.push_back(i);
    for (std::size_t n = 0; n < peaks.size(); ++n) {
        const std::size_t i = peaks[n];
        const double z0 = orb[i - 1].z, z1 = orb[i].z, z2 = orb[i + 1].z;
        const double den = z0 - 2 * z1 + z2;
        const double s = den != 0 ? 0.5 * (z0 - z2) / den : 0.0;
        osc.z_max.push_back(z1 - 0.25 * (z0 - z2) * s);
        osc.t_max.push_back(orb[i].t + s * (orb[i + 1].t - orb[i].t));
        const std::size_t stop = n + 1 < peaks.size() ? peaks[n + 1] : orb.size();
        double zmin = std::numeric_limits<double>::infinity();
        for (std::size_t j = i; j < stop; ++j) zmin = std::min(zmin, orb[j].z);
        osc.z_min_after.push_back(zmin);
    }
    osc.increasing = static_cast<int>(osc.z_max.size()) == k;
    for (std::size_t n = 1; n < osc.z_max.size(); ++n)
        if (!(osc.z_max[n] > osc.z_max[n - 1])) osc.increasing = false;
    osc.returns = !osc.z_min_after.empty() &&
                  std::all_of(osc.z_min_after.begin(), osc.z_min_after.end(), [&](double z) { return z <= z_ret; });
    return osc;
}

}  // namespace surfchaos
