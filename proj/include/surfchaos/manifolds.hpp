#pragma once

#include <vector>

#include "surfchaos/integrate.hpp"
#include "surfchaos/model.hpp"
#include "surfchaos/modes.hpp"

namespace surfchaos {

enum class Sheet { unstable, stable };

struct HJOptions {
    double step = 0.02;
    double far = 200.0;  // grid reaches |u| = far on the asymptotic side
    int max_iterations = 50;
};

// Phi = Phi0 + Phi1 with Phi1 stored as Fourier modes on a uniform u-grid.
struct ManifoldGraph {
    Sheet sheet = Sheet::unstable;
    ModelParams params;
    int modes = 0;
    std::vector<double> u;  // increasing
    ModeTable phi;          // Phi1 modes
    ModeTable dphi;         // d/du Phi1 modes
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> residual_history;
    double contraction = 0.0;  // last successive-difference ratio

    double Phi1(double u, double theta) const;
    double dPhi1_du(double u, double theta) const;
    double dPhi1_dtheta(double u, double theta) const;
    std::vector<cplx> phi_modes(double u) const;
    // H - nuI0^2/2 at the point of the graph.
    double energy_defect(double u, double theta) const;
    double sup_norm() const;  // sup over nodes of sum_k |Phi1_k|
};

// Picard iteration of the fixed-point form of the Hamilton-Jacobi equation from u = -far.
ManifoldGraph solve_hj_unstable(const ModelParams& params, double u_max, int theta_modes, double tol = 1e-14,
                                const HJOptions& opt = {});
// Same equation with the boundary condition at u = +far.
ManifoldGraph solve_hj_stable(const ModelParams& params, double u_min, int theta_modes, double tol = 1e-14,
                              const HJOptions& opt = {});

McGeheeState graph_point(const ManifoldGraph& graph, double u, double theta);
std::vector<McGeheeState> unstable_initial_conditions(const ManifoldGraph& graph, double u0,
                                                      const std::vector<double>& thetas);

struct Seed {
    McGeheeState state;
    double action = 0.0;  // Phi at the seed
};
std::vector<Seed> seed_fibers(const ManifoldGraph& graph, double u0, int fibers);

struct GlobalizeOptions {
    int fit_modes = 8;
    double max_time = 60.0;
    bool backward = false;  // stable seeds are followed in reverse time
    IntegratorConfig integrator = {1e-12, 1e-13};
};

// Per level of u: raw fiber arrivals plus trigonometric fits in theta.
struct SheetSamples {
    Sheet sheet = Sheet::unstable;
    ModelParams params;
    std::vector<double> levels;
    std::vector<std::vector<double>> theta, P, J, Phi;
    std::vector<std::vector<cplx>> P_modes, J_modes, Phi_modes;
    double energy_error = 0.0;  // max |H - nuI0^2/2| over samples
    double max_gap = 0.0;       // largest angular gap between arrivals
    double rel_tol = 1e-12;

    std::size_t level_index(double u) const;
    double P_at(std::size_t level, double theta) const;
    double J_at(std::size_t level, double theta) const;
    double Phi_at(std::size_t level, double theta) const;
};

// Integrates each seed with the action as an extra component and records arrivals at the
// u-levels (signed) through q = q_h(u), branch chosen by the sign of p.
SheetSamples globalize(const std::vector<Seed>& seeds, const ModelParams& params, std::vector<double> levels,
                       const GlobalizeOptions& opt = {});

// Stable sheet from the unstable one via the reversor: levels are negated.
SheetSamples reflect_sheet(const SheetSamples& unstable);

struct SplittingSample {
    double nuI0 = 0, epsilon = 0, u = 0;
    int k = 1;
    double ampJ = 0, phaseJ = 0, ampP = 0, phaseP = 0;
    double noise_floor = 0;
    double lambda0 = 0;  // mean of Phi+ - Phi-
};

double noise_floor(const SheetSamples& a, const SheetSamples& b);

// Harmonic k of J+ - J- and P+ - P- at level u; phases relative to theta - nuI0 u.
SplittingSample measure_splitting(const SheetSamples& unstable, const SheetSamples& stable, double u, int k,
                                  bool require_signal = true);

struct HomoclinicRoots {
    std::vector<double> theta;  // in [0, 2pi)
    std::vector<double> slope;
};
HomoclinicRoots find_homoclinics(const SheetSamples& unstable, const SheetSamples& stable, double u);

struct ScalingFit {
    double rho = 0, sigma = 0, c = 0;
    double cov[3][3] = {};
    std::vector<double> residuals;
    double nuI0_min = 0, nuI0_max = 0;
};
ScalingFit fit_scaling(const std::vector<SplittingSample>& samples);

// HJ solve, seeding, globalization and reflection in one call.
struct SplittingOptions {
    int modes = 8;
    double seed_u = -3.0;
    double graph_u_max = -0.2;
    std::vector<double> levels = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
    double hj_tol = 1e-14;
    GlobalizeOptions globalize;
};
struct SplittingRun {
    ManifoldGraph graph;
    SheetSamples unstable, stable;
};
SplittingRun compute_sheets(const ModelParams& params, const SplittingOptions& opt = {});

}  // namespace surfchaos
