#pragma once

#include <complex>
#include <vector>

#include "surfchaos/model.hpp"
#include "surfchaos/modes.hpp"

namespace surfchaos {

// Leading singular part of the inner unknown: -1/(4v).
cplx T0(cplx v);

// Mode k of the one-sided inner potentials, evaluated in quad precision along a rotated ray:
//   plus:  (V^[k]/8) int_{-inf}^{v} s^-2 e^{ik(s-v)} ds
//   minus: -(V^[k]/8) int_{v}^{+inf} s^-2 e^{ik(s-v)} ds
cplx L_in_plus_mode(int k, cplx v, const CorrugationSeries& series);
cplx L_in_minus_mode(int k, cplx v, const CorrugationSeries& series);
// plus - minus, with the subtraction done before rounding to double.
cplx L_in_jump_mode(int k, cplx v, const CorrugationSeries& series);

cplx L_in_plus(cplx v, double theta, const CorrugationSeries& series);
cplx L_in_minus(cplx v, double theta, const CorrugationSeries& series);

struct InnerOptions {
    std::vector<double> depths = {10, 12, 14, 16, 18, 20};  // lines Im v = -depth
    double x_far = -400.0;
    double x_near = 4.0;
    double max_step = 0.05;
    int max_iterations = 50;
    double kappa = 10.0;  // norms are taken over nodes with |v| >= kappa
};

// T+ = T0 + L_in + T2 on horizontal lines; modes of L_in and T2 plus their v-derivatives.
struct InnerLine {
    double depth = 0.0;
    std::vector<double> x;
    ModeTable L, dL, T2, dT2;

    cplx v(std::size_t j) const { return {x[j], -depth}; }
    std::size_t node(double xx) const;
};

struct InnerSolution {
    double nu = 0.0;
    CorrugationSeries series;  // already scaled by epsilon
    int modes = 0;
    std::vector<InnerLine> lines;
    int iterations = 0;
    double residual = 0.0;  // Picard residual, sup over nodes of sum_k
    std::vector<double> residual_history;
    double contraction = 0.0;
    double theta_V = 0.0;
    double T2_norm = 0.0;  // |T2|_3 + |dT2/dv|_4 + |dT2/dtheta|_4
    double K1 = 0.0;       // T2_norm / theta_V^2

    // Modes of T+ (including T0) and of T- = -conj(T+(-conj v, -theta)) at a node.
    std::vector<cplx> plus_modes(std::size_t line, std::size_t j) const;
    std::vector<cplx> minus_modes(std::size_t line, std::size_t j) const;
    cplx T_plus(std::size_t line, std::size_t j, double theta) const;
    cplx T_minus(std::size_t line, std::size_t j, double theta) const;
    // Sup of the inner-equation residual with v-derivatives from finite differences.
    double equation_residual() const;
};

InnerSolution solve_inner(const ModelParams& params, int modes = 8, double tol = 1e-20,
                          const InnerOptions& opt = {});

struct InnerDifference {
    std::vector<int> k;
    std::vector<cplx> f;             // extrapolated f_k
    std::vector<double> error;       // extrapolation error estimate
    std::vector<double> depths;
    std::vector<std::vector<cplx>> raw;   // per k, per depth: Delta^[k](-i y) e^{ik(-i y)}
    std::vector<std::vector<double>> delta_abs;  // per k, per depth: |Delta^[k](-i y)|
    double imag_f1 = 0.0;            // from off-axis points x != 0
};

InnerDifference extract_fk(const InnerSolution& sol, int k_min, int k_max);

struct F1Scan {
    std::vector<double> epsilon;
    std::vector<double> f1;
    std::vector<double> error;
    double slope = 0.0;  // d f1 / d epsilon at 0
    std::vector<double> quadratic_residual;  // f1 - epsilon * slope
};

F1Scan f1_epsilon_scan(const std::vector<double>& epsilons, const ModelParams& base, int modes = 8,
                       const InnerOptions& opt = {});

}  // namespace surfchaos
