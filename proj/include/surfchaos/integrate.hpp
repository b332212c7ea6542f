#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "surfchaos/dop853_tableau.hpp"
#include "surfchaos/errors.hpp"

namespace surfchaos {

template <std::size_t N, class T = double>
using Vec = std::array<T, N>;

template <std::size_t N, class T = double>
using Field = std::function<void(T, const Vec<N, T>&, Vec<N, T>&)>;

template <std::size_t N, class T = double>
using ScalarFn = std::function<T(T, const Vec<N, T>&)>;

template <class X>
using NoDeduce = std::type_identity_t<X>;

struct IntegratorConfig {
    double rel_tol = 1e-12;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;
    // Nonzero: no error control, constant step of this size.
    double fixed_step = 0.0;
    bool dense_output = true;
    std::int64_t max_steps = 50'000'000;

    // floor scales with the working precision: 1e-15 in double
    void validate(double floor = 1e-15) const {
        if (!(rel_tol >= floor && rel_tol <= 1e-3) || !(abs_tol >= floor && abs_tol <= 1e-3))
            throw DomainError("integrator tolerances outside [precision floor, 1e-3]");
        if (!(max_step > 0)) throw DomainError("max_step must be positive");
        if (fixed_step < 0) throw DomainError("fixed_step must be non-negative");
    }
};

// Seventh-order continuous extension on [t0, t0 + h].
template <std::size_t N, class T = double>
struct DenseSegment {
    T t0 = 0;
    T h = 0;
    std::array<Vec<N, T>, 8> r{};

    T t1() const { return t0 + h; }

    Vec<N, T> operator()(T t) const {
        const T s = (t - t0) / h;
        const T s1 = 1 - s;
        Vec<N, T> y;
        for (std::size_t i = 0; i < N; ++i) {
            const T a = r[4][i] + s * (r[5][i] + s1 * (r[6][i] + s * r[7][i]));
            y[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * a)));
        }
        return y;
    }
};

template <class T>
constexpr double tolerance_floor() {
    return 1e-15 * static_cast<double>(std::numeric_limits<T>::epsilon() / std::numeric_limits<double>::epsilon());
}

template <std::size_t N, class T = double>
class Dop853 {
public:
    using V = Vec<N, T>;

    Dop853(Field<N, T> f, T t0, const V& y0, const IntegratorConfig& cfg)
        : f_(std::move(f)), cfg_(cfg), t_(t0), y_(y0) {
        cfg_.validate(tolerance_floor<T>());
        eval(t_, y_, dy_);
    }

    T t() const { return t_; }
    const V& y() const { return y_; }
    const V& dydt() const { return dy_; }
    T t_prev() const { return t_prev_; }
    const V& y_prev() const { return y_prev_; }
    std::int64_t evaluations() const { return evaluations_; }
    std::int64_t accepted_steps() const { return accepted_; }
    std::int64_t rejected_steps() const { return rejected_; }

    // Advances by one accepted step without passing t_end. Returns false when t() == t_end.
    bool step(T t_end) {
        if (t_ == t_end) return false;
        const T dir = t_end > t_ ? 1 : -1;
        if (h_ == 0) h_ = dir * initial_step(dir);
        if ((h_ > 0) != (dir > 0)) h_ = -h_;
        bool last_rejected = false;
        const T max_step = static_cast<T>(cfg_.max_step);
        for (;;) {
            if (accepted_ + rejected_ >= cfg_.max_steps)
                throw StepUnderflow("integrator exceeded max_steps", static_cast<double>(t_));
            T h = cfg_.fixed_step > 0 ? dir * static_cast<T>(cfg_.fixed_step) : h_;
            h = dir * std::min<T>(std::abs(h), max_step);
            bool reaches_end = false;
            if (std::abs(h) >= std::abs(t_end - t_) - static_cast<T>(1e-12) * std::max<T>(1, std::abs(t_))) {
                h = t_end - t_;
                reaches_end = true;
            }
            if (std::abs(h) < static_cast<T>(1e-14) * std::max<T>(1, std::abs(t_)))
                throw StepUnderflow("step size underflow", static_cast<double>(t_));

            V y_new;
            const double err = stages(t_, y_, dy_, h, y_new, cfg_.fixed_step == 0.0);
            if (cfg_.fixed_step > 0 || err <= 1.0) {
                ++accepted_;
                t_prev_ = t_;
                y_prev_ = y_;
                dy_prev_ = dy_;
                h_last_ = h;
                t_ = reaches_end ? t_end : t_ + h;
                y_ = y_new;
                eval(t_, y_, dy_);
                dense_ready_ = false;
                if (cfg_.fixed_step == 0.0) {
                    double fac = std::pow(err, 0.125) / safe;
                    fac = std::clamp(fac, 1.0 / fac_grow, 1.0 / fac_shrink);
                    T hnew = h / static_cast<T>(fac);
                    if (last_rejected) hnew = dir * std::min(std::abs(hnew), std::abs(h));
                    if (!reaches_end || std::abs(hnew) < std::abs(h_)) h_ = hnew;
                }
                return true;
            }
            ++rejected_;
            last_rejected = true;
            const double fac = std::min(1.0 / fac_shrink, std::pow(err, 0.125) / safe);
            h_ = h / static_cast<T>(fac);
        }
    }

    // Dense output of the last accepted step.
    const DenseSegment<N, T>& dense() {
        if (!dense_ready_) build_dense();
        return dense_;
    }

    // One untruncated step of size h from the previous accepted point.
    V restep(T h) {
        V y_new;
        stages_from_prev(h, y_new);
        return y_new;
    }

private:
    static constexpr double safe = 0.9;
    static constexpr double fac_shrink = 0.333;
    static constexpr double fac_grow = 6.0;

    Field<N, T> f_;
    IntegratorConfig cfg_;
    T t_;
    V y_;
    V dy_{};
    T t_prev_ = 0;
    V y_prev_{};
    V dy_prev_{};
    T h_ = 0;
    T h_last_ = 0;
    std::array<V, 13> k_{};  // stages 1..12 of the last attempt, index 0 unused
    DenseSegment<N, T> dense_{};
    bool dense_ready_ = false;
    std::int64_t evaluations_ = 0;
    std::int64_t accepted_ = 0;
    std::int64_t rejected_ = 0;

    void eval(T t, const V& y, V& out) {
        f_(t, y, out);
        ++evaluations_;
    }

    double norm_scaled(const V& v, const V& y) const {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = cfg_.abs_tol + cfg_.rel_tol * static_cast<double>(std::abs(y[i]));
            const double r = static_cast<double>(v[i]) / sk;
            s += r * r;
        }
        return std::sqrt(s / N);
    }

    T initial_step(T dir) {
        if (cfg_.initial_step > 0) return static_cast<T>(cfg_.initial_step);
        if (cfg_.fixed_step > 0) return static_cast<T>(cfg_.fixed_step);
        const double d0 = norm_scaled(y_, y_);
        const double d1 = norm_scaled(dy_, y_);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, cfg_.max_step);
        V y1, f1;
        for (std::size_t i = 0; i < N; ++i) y1[i] = y_[i] + dir * static_cast<T>(h0) * dy_[i];
        eval(t_ + dir * static_cast<T>(h0), y1, f1);
        V diff;
        for (std::size_t i = 0; i < N; ++i) diff[i] = f1[i] - dy_[i];
        const double d2 = norm_scaled(diff, y_) / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 8.0);
        return static_cast<T>(std::min({100.0 * h0, h1, cfg_.max_step}));
    }

    void stages_from_prev(T h, V& y_new) {
        std::array<V, 13> saved = k_;
        stages(t_prev_, y_prev_, dy_prev_, h, y_new, false);
        k_ = saved;
    }

    // Computes the 12 stages; returns the scaled error norm when requested.
    double stages(T t, const V& y, const V& f0, T h, V& y_new, bool want_error) {
        using namespace dop853;
        auto& k = k_;
        k[1] = f0;
        V w;
        auto combine = [&](auto&& coeff) {
            for (std::size_t i = 0; i < N; ++i) w[i] = y[i] + h * coeff(i);
        };
        auto at = [&](double c) { return t + static_cast<T>(c) * h; };
        combine([&](std::size_t i) { return a21 * k[1][i]; });
        eval(at(c2), w, k[2]);
        combine([&](std::size_t i) { return a31 * k[1][i] + a32 * k[2][i]; });
        eval(at(c3), w, k[3]);
        combine([&](std::size_t i) { return a41 * k[1][i] + a43 * k[3][i]; });
        eval(at(c4), w, k[4]);
        combine([&](std::size_t i) { return a51 * k[1][i] + a53 * k[3][i] + a54 * k[4][i]; });
        eval(at(c5), w, k[5]);
        combine([&](std::size_t i) { return a61 * k[1][i] + a64 * k[4][i] + a65 * k[5][i]; });
        eval(at(c6), w, k[6]);
        combine([&](std::size_t i) {
            return a71 * k[1][i] + a74 * k[4][i] + a75 * k[5][i] + a76 * k[6][i];
        });
        eval(at(c7), w, k[7]);
        combine([&](std::size_t i) {
            return a81 * k[1][i] + a84 * k[4][i] + a85 * k[5][i] + a86 * k[6][i] + a87 * k[7][i];
        });
        eval(at(c8), w, k[8]);
        combine([&](std::size_t i) {
            return a91 * k[1][i] + a94 * k[4][i] + a95 * k[5][i] + a96 * k[6][i] + a97 * k[7][i] +
                   a98 * k[8][i];
        });
        eval(at(c9), w, k[9]);
        combine([&](std::size_t i) {
            return a101 * k[1][i] + a104 * k[4][i] + a105 * k[5][i] + a106 * k[6][i] +
                   a107 * k[7][i] + a108 * k[8][i] + a109 * k[9][i];
        });
        eval(at(c10), w, k[10]);
        combine([&](std::size_t i) {
            return a111 * k[1][i] + a114 * k[4][i] + a115 * k[5][i] + a116 * k[6][i] +
                   a117 * k[7][i] + a118 * k[8][i] + a119 * k[9][i] + a1110 * k[10][i];
        });
        eval(at(c11), w, k[11]);
        combine([&](std::size_t i) {
            return a121 * k[1][i] + a124 * k[4][i] + a125 * k[5][i] + a126 * k[6][i] +
                   a127 * k[7][i] + a128 * k[8][i] + a129 * k[9][i] + a1210 * k[10][i] +
                   a1211 * k[11][i];
        });
        eval(t + h, w, k[12]);

        V incr;
        for (std::size_t i = 0; i < N; ++i) {
            incr[i] = b1 * k[1][i] + b6 * k[6][i] + b7 * k[7][i] + b8 * k[8][i] + b9 * k[9][i] +
                      b10 * k[10][i] + b11 * k[11][i] + b12 * k[12][i];
            y_new[i] = y[i] + h * incr[i];
        }
        if (!want_error) return 0.0;

        double err5 = 0.0, err3 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = cfg_.abs_tol + cfg_.rel_tol * static_cast<double>(std::max(std::abs(y[i]), std::abs(y_new[i])));
            const double e3 = static_cast<double>(incr[i] - e31 * k[1][i] - e32 * k[9][i] - e33 * k[12][i]);
            const double e5 = static_cast<double>(e51 * k[1][i] + e56 * k[6][i] + e57 * k[7][i] + e58 * k[8][i] +
                                                  e59 * k[9][i] + e510 * k[10][i] + e511 * k[11][i] +
                                                  e512 * k[12][i]);
            err3 += (e3 / sk) * (e3 / sk);
            err5 += (e5 / sk) * (e5 / sk);
        }
        double deno = err5 + 0.01 * err3;
        if (deno <= 0.0) deno = 1.0;
        return std::abs(static_cast<double>(h)) * err5 * std::sqrt(1.0 / (N * deno));
    }

    void build_dense() {
        using namespace dop853;
        const auto& k = k_;
        const T h = h_last_;
        const V& y0 = y_prev_;
        const V& f13 = dy_;
        auto& r = dense_.r;
        dense_.t0 = t_prev_;
        dense_.h = h;
        for (std::size_t i = 0; i < N; ++i) {
            r[0][i] = y0[i];
            r[1][i] = y_[i] - y0[i];
            r[2][i] = h * k[1][i] - r[1][i];
            r[3][i] = r[1][i] - h * f13[i] - r[2][i];
            r[4][i] = d41 * k[1][i] + d46 * k[6][i] + d47 * k[7][i] + d48 * k[8][i] + d49 * k[9][i] +
                      d410 * k[10][i] + d411 * k[11][i] + d412 * k[12][i];
            r[5][i] = d51 * k[1][i] + d56 * k[6][i] + d57 * k[7][i] + d58 * k[8][i] + d59 * k[9][i] +
                      d510 * k[10][i] + d511 * k[11][i] + d512 * k[12][i];
            r[6][i] = d61 * k[1][i] + d66 * k[6][i] + d67 * k[7][i] + d68 * k[8][i] + d69 * k[9][i] +
                      d610 * k[10][i] + d611 * k[11][i] + d612 * k[12][i];
            r[7][i] = d71 * k[1][i] + d76 * k[6][i] + d77 * k[7][i] + d78 * k[8][i] + d79 * k[9][i] +
                      d710 * k[10][i] + d711 * k[11][i] + d712 * k[12][i];
        }
        V w, k14, k15, k16;
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y0[i] + h * (a141 * k[1][i] + a147 * k[7][i] + a148 * k[8][i] + a149 * k[9][i] +
                                a1410 * k[10][i] + a1411 * k[11][i] + a1412 * k[12][i] +
                                a1413 * f13[i]);
        eval(t_prev_ + static_cast<T>(c14) * h, w, k14);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y0[i] + h * (a151 * k[1][i] + a156 * k[6][i] + a157 * k[7][i] + a158 * k[8][i] +
                                a1511 * k[11][i] + a1512 * k[12][i] + a1513 * f13[i] +
                                a1514 * k14[i]);
        eval(t_prev_ + static_cast<T>(c15) * h, w, k15);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y0[i] + h * (a161 * k[1][i] + a166 * k[6][i] + a167 * k[7][i] + a168 * k[8][i] +
                                a169 * k[9][i] + a1613 * f13[i] + a1614 * k14[i] + a1615 * k15[i]);
        eval(t_prev_ + static_cast<T>(c16) * h, w, k16);
        for (std::size_t i = 0; i < N; ++i) {
            r[4][i] = h * (r[4][i] + d413 * f13[i] + d414 * k14[i] + d415 * k15[i] + d416 * k16[i]);
            r[5][i] = h * (r[5][i] + d513 * f13[i] + d514 * k14[i] + d515 * k15[i] + d516 * k16[i]);
            r[6][i] = h * (r[6][i] + d613 * f13[i] + d614 * k14[i] + d615 * k15[i] + d616 * k16[i]);
            r[7][i] = h * (r[7][i] + d713 * f13[i] + d714 * k14[i] + d715 * k15[i] + d716 * k16[i]);
        }
        dense_ready_ = true;
    }
};

template <std::size_t N, class T = double>
struct Trajectory {
    std::vector<T> t;
    std::vector<Vec<N, T>> y;
    std::vector<DenseSegment<N, T>> segments;  // empty unless dense output was requested
    std::int64_t evaluations = 0;

    const Vec<N, T>& front() const { return y.front(); }
    const Vec<N, T>& back() const { return y.back(); }

    // Dense interpolation; requires dense output.
    Vec<N, T> at(T time) const {
        if (segments.empty()) throw DomainError("trajectory has no dense output");
        const bool forward = t.back() >= t.front();
        auto it = std::lower_bound(segments.begin(), segments.end(), time,
                                   [forward](const DenseSegment<N, T>& s, T v) {
                                       return forward ? s.t1() < v : s.t1() > v;
                                   });
        if (it == segments.end()) --it;
        return (*it)(time);
    }
};

template <std::size_t N, class T = double>
Trajectory<N, T> integrate(const NoDeduce<Field<N, T>>& f, const NoDeduce<Vec<N, T>>& y0, NoDeduce<T> t0,
                           NoDeduce<T> t1, const IntegratorConfig& cfg = {}) {
    Dop853<N, T> rk(f, t0, y0, cfg);
    Trajectory<N, T> tr;
    tr.t.push_back(t0);
    tr.y.push_back(y0);
    while (rk.step(t1)) {
        tr.t.push_back(rk.t());
        tr.y.push_back(rk.y());
        if (cfg.dense_output) tr.segments.push_back(rk.dense());
    }
    tr.evaluations = rk.evaluations();
    return tr;
}

template <std::size_t N, class T = double>
struct SectionEvent {
    T t = 0;
    Vec<N, T> y{};
    int direction = 0;  // +1 rising, -1 falling
    std::size_t section = 0;
};

template <std::size_t N, class T = double>
struct Section {
    ScalarFn<N, T> g;
    int direction = 0;  // 0 = both
    // Optional filter on the located crossing.
    std::function<bool(T, const Vec<N, T>&)> accept;
};

template <std::size_t N, class T = double>
struct EventRun {
    std::vector<SectionEvent<N, T>> events;
    T t_end = 0;
    Vec<N, T> y_end{};
    bool stopped_by_callback = false;
    bool left_domain = false;
    std::int64_t evaluations = 0;
};

struct EventOptions {
    int interior_samples = 4;
    double polish_tol = 1e-12;
    int polish_iterations = 12;
};

namespace detail {

template <std::size_t N, class T>
bool locate_root(Dop853<N, T>& rk, const DenseSegment<N, T>& seg, const ScalarFn<N, T>& g, T ta, T tb, T ga,
                 T gb, const EventOptions& opt, SectionEvent<N, T>& ev) {
    auto gd = [&](T t) { return g(t, seg(t)); };
    std::uintmax_t iters = 100;
    const T eps4 = 2 * std::numeric_limits<T>::epsilon();
    auto tol = [eps4](T a, T b) { return std::abs(b - a) <= eps4 * std::max<T>(1, std::abs(a)); };
    T lo = std::min(ta, tb), hi = std::max(ta, tb);
    T glo = ta < tb ? ga : gb, ghi = ta < tb ? gb : ga;
    T ts;
    if (glo == 0)
        ts = lo;
    else if (ghi == 0)
        ts = hi;
    else {
        auto r = boost::math::tools::toms748_solve(gd, lo, hi, glo, ghi, tol, iters);
        ts = (r.first + r.second) / 2;
    }
    // Secant polish on the exact (re-stepped) solution.
    const T t_base = rk.t_prev();
    auto gx = [&](T t) { return g(t, rk.restep(t - t_base)); };
    T t_a = ts;
    T g_a = gx(t_a);
    T best_t = t_a, best_g = g_a;
    T dt = static_cast<T>(1e-7) * std::max<T>(std::abs(seg.h), static_cast<T>(1e-300));
    T t_b = std::clamp(t_a + dt, lo, hi);
    if (t_b == t_a) t_b = std::clamp(t_a - dt, lo, hi);
    T g_b = gx(t_b);
    const T polish = static_cast<T>(opt.polish_tol);
    for (int it = 0; it < opt.polish_iterations && std::abs(best_g) > polish * static_cast<T>(1e-3); ++it) {
        if (std::abs(g_b) < std::abs(best_g)) {
            best_g = g_b;
            best_t = t_b;
        }
        if (g_b == g_a) break;
        const T t_c = std::clamp(t_b - g_b * (t_b - t_a) / (g_b - g_a), lo, hi);
        if (t_c == t_b) break;
        t_a = t_b;
        g_a = g_b;
        t_b = t_c;
        g_b = gx(t_b);
    }
    if (std::abs(g_b) < std::abs(best_g)) {
        best_g = g_b;
        best_t = t_b;
    }
    ev.t = best_t;
    ev.y = rk.restep(best_t - t_base);
    ev.direction = (ghi > glo) == (tb > ta) ? +1 : -1;
    return std::abs(best_g) <= polish;
}

}  // namespace detail

// Integrates from t0 towards t_max reporting crossings of the sections in time order.
// on_event returns false to stop. in_domain (optional) is checked after every step;
// on_step (optional) sees each accepted step's dense segment before its events.
template <std::size_t N, class T = double>
EventRun<N, T> find_events(const NoDeduce<Field<N, T>>& f, const NoDeduce<Vec<N, T>>& y0, NoDeduce<T> t0,
                           NoDeduce<T> t_max, const std::vector<Section<N, T>>& sections,
                           const NoDeduce<std::function<bool(const SectionEvent<N, T>&)>>& on_event,
                           const IntegratorConfig& cfg = {}, const EventOptions& opt = {},
                           const NoDeduce<std::function<bool(T, const Vec<N, T>&)>>& in_domain = nullptr,
                           const NoDeduce<std::function<void(const DenseSegment<N, T>&)>>& on_step = nullptr) {
    Dop853<N, T> rk(f, t0, y0, cfg);
    EventRun<N, T> run;
    std::vector<T> g_prev(sections.size());
    for (std::size_t s = 0; s < sections.size(); ++s) g_prev[s] = sections[s].g(t0, y0);
    const int M = std::max(1, opt.interior_samples);

    while (rk.step(t_max)) {
        const auto& seg = rk.dense();
        if (on_step) on_step(seg);
        std::vector<SectionEvent<N, T>> hits;
        for (std::size_t s = 0; s < sections.size(); ++s) {
            const auto& sec = sections[s];
            T ta = seg.t0, ga = g_prev[s];
            for (int j = 1; j <= M; ++j) {
                const T tb = j == M ? rk.t() : seg.t0 + seg.h * j / M;
                const T gb = j == M ? sec.g(tb, rk.y()) : sec.g(tb, seg(tb));
                const bool change = (ga < 0 && gb >= 0) || (ga > 0 && gb <= 0);
                if (change && !(ga == 0)) {
                    const int dir = gb > ga ? +1 : -1;
                    if (sec.direction == 0 || sec.direction == dir) {
                        SectionEvent<N, T> ev;
                        detail::locate_root(rk, seg, sec.g, ta, tb, ga, gb, opt, ev);
                        ev.direction = dir;
                        ev.section = s;
                        if (!sec.accept || sec.accept(ev.t, ev.y)) hits.push_back(ev);
                    }
                }
                ta = tb;
                ga = gb;
            }
            g_prev[s] = ga;
        }
        std::sort(hits.begin(), hits.end(), [&](const auto& a, const auto& b) {
            return (seg.h > 0) ? a.t < b.t : a.t > b.t;
        });
        for (const auto& ev : hits) {
            run.events.push_back(ev);
            if (on_event && !on_event(ev)) {
                run.stopped_by_callback = true;
                run.t_end = ev.t;
                run.y_end = ev.y;
                run.evaluations = rk.evaluations();
                return run;
            }
        }
        if (in_domain && !in_domain(rk.t(), rk.y())) {
            run.left_domain = true;
            break;
        }
    }
    run.t_end = rk.t();
    run.y_end = rk.y();
    run.evaluations = rk.evaluations();
    return run;
}

// Crossings of one section; stops after `count` events or at t_max.
template <std::size_t N, class T = double>
EventRun<N, T> section_crossings(const NoDeduce<Field<N, T>>& f, const NoDeduce<Vec<N, T>>& y0, NoDeduce<T> t0,
                                 NoDeduce<T> t_max, const NoDeduce<ScalarFn<N, T>>& g, int direction,
                                 std::size_t count, const IntegratorConfig& cfg = {}, const EventOptions& opt = {}) {
    std::vector<Section<N, T>> secs{{g, direction, nullptr}};
    std::size_t seen = 0;
    return find_events<N, T>(
        f, y0, t0, t_max, secs, [&](const SectionEvent<N, T>&) { return ++seen < count; }, cfg, opt);
}

}  // namespace surfchaos
