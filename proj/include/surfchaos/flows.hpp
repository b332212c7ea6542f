#pragma once

#include "surfchaos/integrate.hpp"
#include "surfchaos/model.hpp"

namespace surfchaos {

using State4 = Vec<4>;

inline State4 to_vec(const McGeheeState& s) { return {s.q, s.p, s.theta, s.J}; }
inline McGeheeState to_state(const State4& v) { return {v[0], v[1], v[2], v[3]}; }

Field<4> mcgehee_field(const ModelParams& params);

// Max relative |H(t) - H(0)| over trajectory samples (absolute when H(0) = 0).
double energy_drift(const Trajectory<4>& traj, const ModelParams& params);

Trajectory<4> integrate_mcgehee(const McGeheeState& s0, double t0, double t1, const ModelParams& params,
                                const IntegratorConfig& cfg = {});

}  // namespace surfchaos
