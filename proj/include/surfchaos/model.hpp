#pragma once

#include <complex>
#include <vector>

namespace surfchaos {

// V(theta) = sum_n r_n cos(n theta) + s_n sin(n theta), n = 1..N.
struct CorrugationSeries {
    std::vector<double> cosines;
    std::vector<double> sines;

    static CorrugationSeries physical();
    static CorrugationSeries cosine(std::vector<double> r);

    int order() const;
    bool even() const;
    bool zero() const;
    CorrugationSeries scaled(double factor) const;
    void validate() const;

    double value(double theta) const;
    double derivative(double theta) const;
    double second_derivative(double theta) const;
    // Zero-mean primitive W with W' = V.
    double primitive(double theta) const;
    std::complex<double> coefficient(int k) const;
};

double potential_V(double theta, const CorrugationSeries& series);
std::complex<double> fourier_coeff_V(int k, const CorrugationSeries& series);

struct PhysicalParams {
    double D = 6.35;
    double a = 3.6;
    double alpha = 1.05;
    double m = 4.002602;
    CorrugationSeries corrugation = CorrugationSeries::physical();

    void validate() const;
};

double nu_from_physical(const PhysicalParams& physical);
double nu_from_physical(double a, double alpha);

struct ModelParams {
    PhysicalParams physical;
    double nu = 0.0;
    double I0 = 0.0;
    double epsilon = 1.0;

    static ModelParams from_nuI0(double nuI0, double epsilon = 1.0, PhysicalParams physical = {});
    static ModelParams from_I0(double I0, double epsilon = 1.0, PhysicalParams physical = {});

    double nuI0() const { return nu * I0; }
    // Corrugation including the epsilon multiplier.
    CorrugationSeries effective_series() const { return physical.corrugation.scaled(epsilon); }
    // Physical parameters whose corrugation already carries epsilon.
    PhysicalParams effective_physical() const;
    void validate() const;
};

struct CartesianState {
    double x = 0, z = 0, px = 0, pz = 0;
};

struct McGeheeState {
    double q = 0, p = 0, theta = 0, J = 0;
};

struct TransformConstants {
    double A = 2.0;
    double B = 0.0;
    double C = 0.0;
    // d/dt_physical = time_scale * d/dt_rescaled
    double time_scale = 0.0;
};

TransformConstants transform_constants(const PhysicalParams& physical);

// theta is reduced to [0, 2pi); z = +inf maps to q = 0.
McGeheeState to_mcgehee(const CartesianState& s, const ModelParams& params);
// Unwrapped theta maps to an unwrapped x.
CartesianState from_mcgehee(const McGeheeState& s, const ModelParams& params);

double hamiltonian_cartesian(const CartesianState& s, const PhysicalParams& physical);

struct HamiltonianParts {
    double H0 = 0, H1 = 0, H = 0;
};

HamiltonianParts hamiltonian_mcgehee(const McGeheeState& s, const ModelParams& params);
McGeheeState vector_field_mcgehee(const McGeheeState& s, const ModelParams& params);
CartesianState vector_field_cartesian(const CartesianState& s, const PhysicalParams& physical);

// (q, p, theta, J) -> (q, -p, -theta, J)
McGeheeState reversor(const McGeheeState& s);

// Near-identity change removing the O(1) angle dependence of H1.
struct AveragingResult {
    McGeheeState original;  // (q, p, theta, J) image of the new coordinates
    double H = 0;           // H evaluated at the image
    double H0 = 0;          // H0 in the new coordinates
    double H1_tilde = 0;    // H - H0
    double H1_tilde_formula = 0;
};

AveragingResult averaging_change(const McGeheeState& new_coords, const ModelParams& params);

}  // namespace surfchaos
