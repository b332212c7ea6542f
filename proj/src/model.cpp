#include "surfchaos/model.hpp"

#include <cmath>
#include <numbers>

#include "surfchaos/errors.hpp"

namespace surfchaos {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double reduce_angle(double theta) {
    double r = std::fmod(theta, two_pi);
    if (r < 0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

}  // namespace

CorrugationSeries CorrugationSeries::physical() { return cosine({0.06, 0.008}); }

CorrugationSeries CorrugationSeries::cosine(std::vector<double> r) {
    CorrugationSeries s;
    s.sines.assign(r.size(), 0.0);
    s.cosines = std::move(r);
    return s;
}

int CorrugationSeries::order() const { return static_cast<int>(cosines.size()); }

bool CorrugationSeries::even() const {
    for (double s : sines)
        if (s != 0.0) return false;
    return true;
}

bool CorrugationSeries::zero() const {
    for (double c : cosines)
        if (c != 0.0) return false;
    return even();
}

CorrugationSeries CorrugationSeries::scaled(double factor) const {
    CorrugationSeries out = *this;
    for (double& c : out.cosines) c *= factor;
    for (double& s : out.sines) s *= factor;
    return out;
}

void CorrugationSeries::validate() const {
    if (cosines.empty()) throw DomainError("corrugation series needs order N >= 1");
    if (sines.size() != cosines.size())
        throw DomainError("corrugation series: cosine and sine lists differ in length");
    for (double c : cosines)
        if (!std::isfinite(c)) throw DomainError("corrugation coefficient not finite");
    for (double s : sines)
        if (!std::isfinite(s)) throw DomainError("corrugation coefficient not finite");
}

double CorrugationSeries::value(double theta) const {
    double v = 0.0;
    for (std::size_t i = 0; i < cosines.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        v += cosines[i] * std::cos(n * theta);
        if (sines[i] != 0.0) v += sines[i] * std::sin(n * theta);
    }
    return v;
}

double CorrugationSeries::derivative(double theta) const {
    double v = 0.0;
    for (std::size_t i = 0; i < cosines.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        v += -n * cosines[i] * std::sin(n * theta);
        if (sines[i] != 0.0) v += n * sines[i] * std::cos(n * theta);
    }
    return v;
}

double CorrugationSeries::second_derivative(double theta) const {
    double v = 0.0;
    for (std::size_t i = 0; i < cosines.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        v += -n * n * cosines[i] * std::cos(n * theta);
        if (sines[i] != 0.0) v += -n * n * sines[i] * std::sin(n * theta);
    }
    return v;
}

double CorrugationSeries::primitive(double theta) const {
    double v = 0.0;
    for (std::size_t i = 0; i < cosines.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        v += cosines[i] * std::sin(n * theta) / n;
        if (sines[i] != 0.0) v += -sines[i] * std::cos(n * theta) / n;
    }
    return v;
}

std::complex<double> CorrugationSeries::coefficient(int k) const {
    if (k == 0) return 0.0;
    const int n = std::abs(k);
    if (n > order()) return 0.0;
    const double r = cosines[n - 1];
    const double s = sines[n - 1];
    // r cos + s sin = (r - i s)/2 e^{i n t} + (r + i s)/2 e^{-i n t}
    return k > 0 ? std::complex<double>(r / 2, -s / 2) : std::complex<double>(r / 2, s / 2);
}

double potential_V(double theta, const CorrugationSeries& series) { return series.value(theta); }

std::complex<double> fourier_coeff_V(int k, const CorrugationSeries& series) {
    return series.coefficient(k);
}

void PhysicalParams::validate() const {
    if (!(D > 0) || !(a > 0) || !(alpha > 0) || !(m > 0))
        throw DomainError("physical parameters D, a, alpha, m must be positive");
    if (!std::isfinite(D) || !std::isfinite(a) || !std::isfinite(alpha) || !std::isfinite(m))
        throw DomainError("physical parameters must be finite");
    corrugation.validate();
}

double nu_from_physical(double a, double alpha) {
    if (!(a > 0) || !(alpha > 0)) throw DomainError("nu_from_physical: a and alpha must be positive");
    const double r = 4.0 * std::numbers::pi / (a * alpha);
    return r * r;
}

double nu_from_physical(const PhysicalParams& physical) {
    return nu_from_physical(physical.a, physical.alpha);
}

ModelParams ModelParams::from_nuI0(double nuI0, double epsilon, PhysicalParams physical) {
    ModelParams p;
    p.physical = std::move(physical);
    p.nu = nu_from_physical(p.physical);
    p.I0 = nuI0 / p.nu;
    p.epsilon = epsilon;
    p.validate();
    return p;
}

ModelParams ModelParams::from_I0(double I0, double epsilon, PhysicalParams physical) {
    ModelParams p;
    p.physical = std::move(physical);
    p.nu = nu_from_physical(p.physical);
    p.I0 = I0;
    p.epsilon = epsilon;
    p.validate();
    return p;
}

PhysicalParams ModelParams::effective_physical() const {
    PhysicalParams out = physical;
    out.corrugation = effective_series();
    return out;
}

void ModelParams::validate() const {
    physical.validate();
    const double expected = nu_from_physical(physical);
    if (std::abs(nu - expected) > 1e-12 * expected)
        throw DomainError("stored nu inconsistent with (a, alpha)");
    if (!(nu * I0 > 0)) throw DomainError("nu*I0 must be positive");
    if (!std::isfinite(epsilon)) throw DomainError("epsilon must be finite");
}

TransformConstants transform_constants(const PhysicalParams& physical) {
    TransformConstants c;
    const double aa = physical.a * physical.alpha;
    const double k = 8.0 * std::numbers::pi / aa;
    c.C = std::sqrt(2.0 * physical.m * physical.D) * k;
    c.B = aa * c.C / (4.0 * std::numbers::pi);
    c.time_scale = physical.a * physical.alpha * physical.alpha * c.C /
                   (8.0 * std::numbers::pi * physical.m);
    return c;
}

McGeheeState to_mcgehee(const CartesianState& s, const ModelParams& params) {
    const auto c = transform_constants(params.physical);
    McGeheeState out;
    if (std::isinf(s.z) && s.z > 0)
        out.q = 0.0;
    else
        out.q = std::sqrt(std::exp(-params.physical.alpha * s.z) / c.A);
    out.p = s.pz / c.B;
    out.theta = reduce_angle(two_pi * s.x / params.physical.a);
    out.J = s.px / c.C - params.I0;
    return out;
}

CartesianState from_mcgehee(const McGeheeState& s, const ModelParams& params) {
    if (s.q < 0) throw DomainError("from_mcgehee: q must be non-negative");
    const auto c = transform_constants(params.physical);
    CartesianState out;
    out.z = s.q == 0.0 ? std::numeric_limits<double>::infinity()
                       : -std::log(c.A * s.q * s.q) / params.physical.alpha;
    out.x = params.physical.a * s.theta / two_pi;
    out.pz = c.B * s.p;
    out.px = c.C * (params.I0 + s.J);
    return out;
}

double hamiltonian_cartesian(const CartesianState& s, const PhysicalParams& physical) {
    const double kinetic = (s.px * s.px + s.pz * s.pz) / (2.0 * physical.m);
    if (std::isinf(s.z) && s.z > 0) return kinetic;
    const double e = std::exp(-physical.alpha * s.z);
    const double theta = two_pi * s.x / physical.a;
    return kinetic + physical.D * e * (e - 2.0) + physical.D * e * e * physical.corrugation.value(theta);
}

HamiltonianParts hamiltonian_mcgehee(const McGeheeState& s, const ModelParams& params) {
    const double I = params.I0 + s.J;
    const double q2 = s.q * s.q;
    const double q4 = q2 * q2;
    HamiltonianParts h;
    h.H0 = 0.5 * (params.nu * I * I + s.p * s.p) - 0.5 * q2 + 0.5 * q4;
    h.H1 = params.epsilon == 0.0 ? 0.0
                                 : 0.5 * params.epsilon * q4 * params.physical.corrugation.value(s.theta);
    h.H = h.H0 + h.H1;
    return h;
}

McGeheeState vector_field_mcgehee(const McGeheeState& s, const ModelParams& params) {
    const double q2 = s.q * s.q;
    const double q4 = q2 * q2;
    const auto& V = params.physical.corrugation;
    McGeheeState d;
    d.q = -s.q * s.p;
    d.p = -q2 + 2.0 * q4;
    d.theta = params.nu * (params.I0 + s.J);
    d.J = 0.0;
    if (params.epsilon != 0.0) {
        d.p += 2.0 * params.epsilon * q4 * V.value(s.theta);
        d.J = -0.5 * params.epsilon * q4 * V.derivative(s.theta);
    }
    return d;
}

CartesianState vector_field_cartesian(const CartesianState& s, const PhysicalParams& physical) {
    CartesianState d;
    d.x = s.px / physical.m;
    d.z = s.pz / physical.m;
    if (std::isinf(s.z) && s.z > 0) return d;
    const double e = std::exp(-physical.alpha * s.z);
    const double k = two_pi / physical.a;
    const double theta = k * s.x;
    const double V = physical.corrugation.value(theta);
    d.px = -physical.D * e * e * physical.corrugation.derivative(theta) * k;
    d.pz = 2.0 * physical.alpha * physical.D * (e * e - e) + 2.0 * physical.alpha * physical.D * e * e * V;
    return d;
}

McGeheeState reversor(const McGeheeState& s) { return {s.q, -s.p, -s.theta, s.J}; }

AveragingResult averaging_change(const McGeheeState& n, const ModelParams& params) {
    const auto& V = params.physical.corrugation;
    const double nuI0 = params.nuI0();
    const double A = params.epsilon * V.primitive(n.theta) / (2.0 * nuI0);
    const double dA = params.epsilon * V.value(n.theta) / (2.0 * nuI0);
    const double Q4 = n.q * n.q * n.q * n.q;

    AveragingResult r;
    r.original = {n.q, n.p + 4.0 * A * Q4, n.theta, n.J - dA * Q4};
    r.H = hamiltonian_mcgehee(r.original, params).H;
    ModelParams flat = params;
    flat.epsilon = 0.0;
    r.H0 = hamiltonian_mcgehee(n, flat).H;
    r.H1_tilde = r.H - r.H0;
    r.H1_tilde_formula = Q4 * (4.0 * A * n.p - params.nu * n.J * dA) +
                         Q4 * Q4 * (0.5 * params.nu * dA * dA + 8.0 * A * A);
    return r;
}

}  // namespace surfchaos
