#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "surfchaos/integrate.hpp"
#include "surfchaos/model.hpp"
#include "surfchaos/modes.hpp"

namespace surfchaos {

// Reduced flow on the level H = nuI0^2/2 with theta as the evolution variable.
struct ReducedState {
    double q = 0, p = 0, theta = 0;
    double K = 0;           // -J on the level set
    double dq = 0, dp = 0;  // d/dtheta
};

// J completing (q, p, theta) to a level point with nu (I0 + J) > 0.
double level_action(double q, double p, double theta, const ModelParams& params);
// The J of the input is checked against the level set, not used.
ReducedState reduce_poincare_cartan(const McGeheeState& s, const ModelParams& params);

// u = (s(q) - p)/2, v = (s(q) + p)/2 with s(q) = q sqrt(1 - q^2): the unperturbed
// manifolds become the axes and uv is conserved at epsilon = 0.
struct ChartPoint {
    double u = 0, v = 0;
};
ChartPoint chart_coords(double q, double p);
std::array<double, 2> chart_inverse(double u, double v);  // (q, p), q <= 1/sqrt(2)

// Sections u = a (outgoing) and v = a (incoming), with the manifold offsets on them.
struct LocalChart {
    ModelParams params;
    double a = 0.1;
    double delta = 0.04;
    double rho = 0.2;  // local box |u|, |v| <= rho
    int offset_modes = 16;
    std::vector<cplx> unstable_offset;  // v of the unstable manifold on u = a, in theta
    double offset_fit_error = 0.0;

    double v_unstable(double theta) const;
    double u_stable(double theta) const;  // v_unstable(-theta) by reversibility
};

LocalChart build_chart(const ModelParams& params, double a = 0.1, double delta = 0.04, int graph_modes = 8);

struct ReturnOptions {
    IntegratorConfig integrator{1e-14, 1e-14};
    // long double arithmetic for the shadowing chain
    bool extended = false;
    IntegratorConfig extended_integrator{1e-18, 1e-18};
    double max_advance = 2.0e4;  // theta budget per return
};

// A crossing of u = a after a passage near the periodic orbit.
struct Landing {
    double tau = 0;  // theta - theta_ref
    double q = 0, p = 0, t = 0;
    double v_offset = 0;       // v - v_unstable
    double tau_incoming = 0;   // preceding crossing of v = a
    double u_offset = 0;       // u - u_stable there
    int count = 0;             // crossings of theta_ref + pi (mod 2pi) since the previous landing
};

struct FollowResult {
    std::vector<Landing> landings;
    bool escaped = false;
    bool capped = false;
};

struct OrbitPoint {
    double tau = 0, q = 0, p = 0, t = 0;
};
using OrbitObserver = std::function<void(const OrbitPoint&)>;

// Starts on u = a at theta_ref + tau0 with v = v_unstable + v_offset and follows the reduced
// flow through `returns` landings. The observer, if given, receives samples every
// `sample_step` in theta.
FollowResult follow_returns(const LocalChart& chart, double theta_ref, double v_offset, double tau0, int returns,
                            const ReturnOptions& opt = {}, const OrbitObserver& observer = nullptr,
                            double sample_step = 0.05);

struct LocalPassage {
    double u0 = 0, theta0 = 0;
    double v1 = 0, theta1 = 0;
    double transit = 0;  // theta1 - theta0
};
// From v = a with u = u_stable + u0 to u = a.
LocalPassage local_map(const LocalChart& chart, double u0, double theta0, const ReturnOptions& opt = {});

// u' = u(u + v), v' = -v(u + v) from (u0, a) to u = a.
struct TruncatedPassage {
    double v1 = 0, time = 0;
};
TruncatedPassage truncated_local_map(double u0, double a);
double truncated_transit_exact(double u0, double a);

struct LambdaLemmaFit {
    std::vector<double> u0, v1, transit;
    double slope = 0;  // d log v1 / d log u0
    double Ca = 0;     // max |log v1 / log u0 - 1|
    double gamma = 0, A = 0, B = 0;  // transit = A u0^-gamma + B
    double fit_residual = 0;         // max relative transit misfit
    double truncated_error = 0;      // max |v1 - u0|/u0 of the truncated model
};
LambdaLemmaFit lambda_lemma_fit(const LocalChart& chart, const std::vector<double>& u0, double theta0 = 0.0,
                                const ReturnOptions& opt = {});

struct GlobalArrival {
    double u_offset = 0;
    double theta = 0;
    double q = 0, p = 0;
};
// From u = a with v = v_unstable + v_offset to the next crossing of v = a.
GlobalArrival global_map(const LocalChart& chart, double v_offset, double theta, const ReturnOptions& opt = {});

struct HomoclinicFrame {
    double theta_h = 0;
    std::vector<double> roots;  // zeros of the arrival offset along the unstable manifold
    // d(u_offset, theta1)/d(v_offset, theta) at the homoclinic point
    double jac[2][2] = {};
    double nu0 = 0;  // d u_offset / d theta
    double nu1 = 0;  // d u_offset / d v_offset
    double fixed_error = 0;
    double richardson = 0;
};
HomoclinicFrame homoclinic_frame(const LocalChart& chart, const ReturnOptions& opt = {});

// Return map in scaled coordinates x = scale * v_offset, y = theta - theta_h on the
// rectangle |x|, |y| <= delta.
struct Horseshoe {
    LocalChart chart;
    HomoclinicFrame frame;
    double aspect = 4.0;
    double scale = 0.0;
    ReturnOptions options;

    double delta() const { return chart.delta; }
};
Horseshoe make_horseshoe(const ModelParams& params, double a = 0.1, double delta = 0.04, double aspect = 4.0,
                         const ReturnOptions& opt = {});

struct ReturnPoint {
    bool returned = false;
    double x = 0, y = 0;  // landing, y reduced to (-pi, pi]
    double tau = 0;       // unwrapped landing theta - theta_h
    int count = 0;
    double u_offset = 0;
};
ReturnPoint return_map(const Horseshoe& hs, double x, double y);

struct OperatingPoint {
    double nuI0 = 0, ampJ = 0, noise = 0;
    std::vector<double> tried, ratios;
};
// First candidate whose first-harmonic splitting exceeds factor x the noise floor.
OperatingPoint select_operating_point(const std::vector<double>& candidates = {4, 5, 6, 8}, double epsilon = 1.0,
                                      const PhysicalParams& physical = {}, double factor = 1e3);

// y-interval of the horizontal strip with absolute count `count` at abscissa x.
struct StripSection {
    double y_lo = 0, y_hi = 0, y_acc = 0;
    ReturnPoint lo, hi;  // images of the endpoints
};
std::optional<StripSection> strip_section(const Horseshoe& hs, int count, double x);

struct Strip {
    int symbol = 0;  // 1 = first strip fully inside the rectangle
    int count = 0;   // absolute period count
    std::vector<double> x, y_lo, y_hi, y_acc;
    // images of the edges x = -delta and x = +delta
    std::vector<double> left_y, left_x, right_y, right_x;
    double image_x_min = 0, image_x_max = 0;
    double mu_h = 0, mu_v = 0;
    double hausdorff = 0;  // distance to the accumulation curve y_acc
};

struct StripFamily {
    int first_count = 0;
    std::vector<Strip> strips;
    double mu_h = 0, mu_v = 0;
    bool monotone = false;

    const Strip& strip(int symbol) const;
    bool has(int symbol) const;
};
StripFamily build_strips(const Horseshoe& hs, int n_min = 1, int n_max = 4, int samples = 21);

struct ConeSample {
    double x = 0, y = 0;
    int symbol = 0;
    double jac[2][2] = {};
    double richardson = 0;
    double expansion = 0;  // min stretch over both cones at the reported eta
    bool pass = false;
};

struct ConeReport {
    double eta_u = 0, eta_s = 0, kappa = 0;
    double pass_rate = 0;
    int passed = 0, total = 0;
    double richardson_max = 0;
    std::vector<double> eta_grid, pass_rates;
    std::vector<ConeSample> samples;

    bool h2() const { return kappa > 0 && kappa < 1 - eta_u * eta_s; }
};
ConeReport verify_cones(const Horseshoe& hs, const StripFamily& strips, std::vector<double> eta_grid = {},
                        int per_strip = 200, double h = 1e-7);

// Stretching of the unstable cone at the outermost admissible strip for each rectangle size.
struct ExpansionScan {
    std::vector<double> delta, expansion;
    double exponent = 0;  // -d log expansion / d log delta
};
ExpansionScan expansion_scan(const Horseshoe& hs, double eta, std::vector<double> deltas = {0.04, 0.02, 0.01, 0.005},
                             double h = 1e-7);

// Reduced against full flow at theta checkpoints over one excursion.
struct ReductionCheck {
    std::vector<double> tau;
    double max_q = 0, max_p = 0, max_J = 0;
    double max_diff() const { return std::max({max_q, max_p, max_J}); }
};
ReductionCheck compare_reduced_full(const LocalChart& chart, double v_offset, double theta0, int checkpoints = 8,
                                    double tol = 1e-13);

// The same return computed with the full field in physical time, state (q, p, theta, J).
ReturnPoint full_flow_return(const Horseshoe& hs, double x, double y, double tol = 1e-14);

// One node per excursion on the rectangle; node j lies in the horizontal strip of
// symbol j and its extended-precision image matches node j + 1.
struct SymbolItinerary {
    std::vector<int> symbols, counts;
    std::vector<int> achieved;  // leg-wise recount with the full field
    std::vector<std::array<double, 2>> nodes, landings;
    std::vector<double> residuals;  // landing j against node j + 1; the last one against the rectangle or node 0
    bool periodic = false;
    int sweeps = 0;
    double x0 = 0, y0 = 0;
    McGeheeState initial;
    double displacement = 0;  // last landing against node 0, max norm
};
// x0 given: open chain starting at that abscissa. Otherwise the chain is closed into a periodic orbit.
SymbolItinerary shadow_orbit(const Horseshoe& hs, const StripFamily& strips, const std::vector<int>& symbols,
                             std::optional<double> x0 = {}, double tol = 5e-10, int max_sweeps = 12);

struct Recount {
    std::vector<int> counts, symbols;
    std::vector<std::array<double, 2>> landings;
    double max_node_error = 0;  // full-field landing against the next node
    bool inside = true;         // every landing in the rectangle
};
Recount recount_symbols(const Horseshoe& hs, const StripFamily& strips, const SymbolItinerary& it);

struct CartesianSample {
    double t = 0, x = 0, z = 0, px = 0, pz = 0;
};
struct Oscillation {
    std::vector<int> symbols;
    SymbolItinerary itinerary;
    std::vector<CartesianSample> orbit;
    std::vector<double> t_max, z_max;       // local maxima of z
    std::vector<double> z_min_after;        // lowest z after each maximum, before the next one
    double z_ret = 0;
    bool increasing = false, returns = false;
};
Oscillation oscillatory_demo(const Horseshoe& hs, const StripFamily& strips, int k, double z_ret,
                             double sample_dt = 0.05);

}  // namespace surfchaos
