#pragma once

#include <complex>
#include <string>

#include "surfchaos/model.hpp"

namespace surfchaos {

struct SeparatrixPoint {
    double u = 0, q_h = 0, p_h = 0, phi0 = 0;
};

double q_h(double u);
double p_h(double u);
double phi0(double u);
// d/du phi0 = p_h^2
double dphi0(double u);
SeparatrixPoint separatrix_point(double u);
McGeheeState gamma0(double u, double theta);

enum class MelnikovMethod { closed_form, quadrature };

struct MelnikovCoefficient {
    int k = 0;
    std::complex<double> value;
    MelnikovMethod method = MelnikovMethod::closed_form;
    double error_estimate = 0.0;
};

MelnikovCoefficient melnikov_coeff_closed(int k, double nuI0, const CorrugationSeries& series);
MelnikovCoefficient melnikov_coeff_quadrature(int k, double nuI0, const CorrugationSeries& series,
                                              double rel_tol = 1e-10);

// int_{-inf}^{inf} e^{i omega t} / (1 + t^2)^2 dt by segmented quadrature with a bounded tail.
struct KernelIntegral {
    double value = 0.0;
    double error_estimate = 0.0;
    double cutoff = 0.0;
};
KernelIntegral separatrix_kernel_integral(double omega, double rel_tol = 1e-10);

// L(u, theta) = sum_k L^[k] e^{ik(theta - nuI0 u)}
double melnikov_potential(double u, double theta, double nuI0, const CorrugationSeries& series);
double melnikov_potential_dtheta(double u, double theta, double nuI0, const CorrugationSeries& series);

// Mode k of the one-sided potential: -(V^[k]/2) int_{-inf}^{u} q_h^4(s) e^{ik nuI0 (s-u)} ds.
std::complex<double> L_out_plus_mode(int k, double u, double nuI0, const CorrugationSeries& series,
                                     double rel_tol = 1e-12);
double L_out_plus(double u, double theta, double nuI0, const CorrugationSeries& series,
                  double rel_tol = 1e-12);
double L_out_minus(double u, double theta, double nuI0, const CorrugationSeries& series,
                   double rel_tol = 1e-12);

}  // namespace surfchaos
