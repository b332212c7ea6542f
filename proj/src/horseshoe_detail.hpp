#pragma once

#include <algorithm>
#include <cmath>

#include "surfchaos/errors.hpp"
#include "surfchaos/integrate.hpp"
#include "surfchaos/model.hpp"

namespace surfchaos::detail {

// Series re-expanded about ref so that V(ref + tau) is evaluated at small tau.
CorrugationSeries rotated_series(const CorrugationSeries& V, double ref);

template <class T>
T series_value(const CorrugationSeries& V, T theta) {
    T v = 0;
    for (std::size_t i = 0; i < V.cosines.size(); ++i) {
        const T n = static_cast<T>(i + 1);
        v += V.cosines[i] * std::cos(n * theta);
        if (V.sines[i] != 0.0) v += V.sines[i] * std::sin(n * theta);
    }
    return v;
}

template <class T>
T chart_s(T q) {
    return q * std::sqrt(std::max<T>(0, 1 - q * q));
}

// Flow on the energy level with tau = theta - ref as time; state (q, p, t).
struct ReducedFlow {
    double nu, I0;
    CorrugationSeries V;
    double escape_scale = 0.0;

    ReducedFlow(const ModelParams& params, double ref);

    template <class T>
    T G(T q, T p, T tau) const {
        const T q2 = q * q;
        const T q4 = q2 * q2;
        return p * p / 2 - q2 / 2 + q4 / 2 + q4 * series_value(V, tau) / 2;
    }

    template <class T>
    T action(T q, T p, T tau) const {
        const T g = G(q, p, tau);
        const T disc = I0 * I0 - 2 * g / nu;
        if (!(disc > 0)) throw DomainError("no level point with positive angular velocity");
        return -2 * g / nu / (I0 + std::sqrt(disc));
    }

    template <class T>
    void operator()(T tau, const Vec<3, T>& y, Vec<3, T>& dy) const {
        const T q = y[0], p = y[1];
        const T q2 = q * q;
        const T q4 = q2 * q2;
        const T Vt = series_value(V, tau);
        const T g = p * p / 2 - q2 / 2 + q4 / 2 + q4 * Vt / 2;
        const T disc = I0 * I0 - 2 * g / nu;
        if (!(disc > 0)) throw DomainError("reduced flow left the region nu (I0 + J) > 0");
        const T w = 1 / (nu * std::sqrt(disc));
        dy[0] = -q * p * w;
        dy[1] = (-q2 + 2 * q4 + 2 * q4 * Vt) * w;
        dy[2] = w;
    }

    // Heading out with too much energy to come back.
    template <class T>
    bool escaping(T q, T p, T tau, double a) const {
        if (!(p > 0) || !(q < a / 2) || !(chart_s(q) + p < 2 * a)) return false;
        const T q4 = q * q * q * q;
        return G(q, p, tau) > escape_scale * q4;
    }

    // Full field in physical time, state (q, p, tau, J).
    template <class T>
    void full(T, const Vec<4, T>& y, Vec<4, T>& dy) const {
        const T q = y[0], p = y[1];
        const T q2 = q * q;
        const T q4 = q2 * q2;
        T dV = 0;
        for (std::size_t i = 0; i < V.cosines.size(); ++i) {
            const T n = static_cast<T>(i + 1);
            dV += n * (V.sines[i] * std::cos(n * y[2]) - V.cosines[i] * std::sin(n * y[2]));
        }
        dy[0] = -q * p;
        dy[1] = -q2 + 2 * q4 + 2 * q4 * series_value(V, y[2]);
        dy[2] = nu * (I0 + y[3]);
        dy[3] = -q4 * dV / 2;
    }
};

}  // namespace surfchaos::detail
