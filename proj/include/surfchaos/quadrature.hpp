#pragma once

#include <cmath>
#include <complex>
#include <type_traits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "surfchaos/errors.hpp"

namespace surfchaos {

// Neumaier compensated sum for real or complex terms.
template <class T>
class CompensatedSum {
public:
    void add(const T& x) {
        if constexpr (std::is_same_v<T, std::complex<double>>) {
            re_.add(x.real());
            im_.add(x.imag());
        } else {
            const double t = sum_ + x;
            if (std::abs(sum_) >= std::abs(x))
                comp_ += (sum_ - t) + x;
            else
                comp_ += (x - t) + sum_;
            sum_ = t;
        }
    }
    T value() const {
        if constexpr (std::is_same_v<T, std::complex<double>>)
            return {re_.value(), im_.value()};
        else
            return sum_ + comp_;
    }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
    struct Part {
        double s = 0.0, c = 0.0;
        void add(double x) {
            const double t = s + x;
            if (std::abs(s) >= std::abs(x))
                c += (s - t) + x;
            else
                c += (x - t) + s;
            s = t;
        }
        double value() const { return s + c; }
    };
    Part re_, im_;
};

template <class T>
struct QuadResult {
    T value{};
    double error = 0.0;
};

namespace detail {

// Single 15-point rule on [a, b]; Boost reports the error of the rule on [-1, 1].
template <class F>
auto gk15(F& f, double a, double b) -> QuadResult<decltype(f(a))> {
    using T = decltype(f(a));
    double err = 0.0;
    const T v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err);
    return {v, err * 0.5 * std::abs(b - a)};
}

template <class F>
auto gk_bisect(F& f, double a, double b, const QuadResult<decltype(f(a))>& whole, double abs_tol, unsigned depth)
    -> QuadResult<decltype(f(a))> {
    if (depth == 0 || whole.error <= abs_tol) return whole;
    const double mid = 0.5 * (a + b);
    const auto l = gk15(f, a, mid);
    const auto r = gk15(f, mid, b);
    const auto lr = gk_bisect(f, a, mid, l, 0.5 * abs_tol, depth - 1);
    const auto rr = gk_bisect(f, mid, b, r, 0.5 * abs_tol, depth - 1);
    return {lr.value + rr.value, lr.error + rr.error};
}

}  // namespace detail

// Adaptive 15-point Gauss-Kronrod bisection on a finite interval. The caller judges the
// returned error estimate against its global target.
template <class F>
auto adaptive_gk(F&& f, double a, double b, double rel_tol, unsigned max_depth = 6)
    -> QuadResult<decltype(f(a))> {
    const auto whole = detail::gk15(f, a, b);
    const double tol = std::max(rel_tol * std::abs(whole.value), 1e-300);
    return detail::gk_bisect(f, a, b, whole, tol, max_depth);
}

}  // namespace surfchaos
