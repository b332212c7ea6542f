#include "surfchaos/flows.hpp"

#include <cmath>

namespace surfchaos {

Field<4> mcgehee_field(const ModelParams& params) {
    return [params](double, const State4& y, State4& dy) {
        dy = to_vec(vector_field_mcgehee(to_state(y), params));
    };
}

double energy_drift(const Trajectory<4>& traj, const ModelParams& params) {
    if (traj.y.empty()) return 0.0;
    const double H0 = hamiltonian_mcgehee(to_state(traj.y.front()), params).H;
    const double scale = H0 == 0.0 ? 1.0 : std::abs(H0);
    double drift = 0.0;
    for (const auto& y : traj.y)
        drift = std::max(drift, std::abs(hamiltonian_mcgehee(to_state(y), params).H - H0) / scale);
    return drift;
}

Trajectory<4> integrate_mcgehee(const McGeheeState& s0, double t0, double t1, const ModelParams& params,
                                const IntegratorConfig& cfg) {
    return integrate<4>(mcgehee_field(params), to_vec(s0), t0, t1, cfg);
}

}  // namespace surfchaos
