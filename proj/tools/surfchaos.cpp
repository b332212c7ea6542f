#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "surfchaos/acceptance.hpp"
#include "surfchaos/config.hpp"
#include "surfchaos/errors.hpp"
#include "surfchaos/horseshoe.hpp"
#include "surfchaos/inner.hpp"
#include "surfchaos/manifolds.hpp"
#include "surfchaos/output.hpp"
#include "surfchaos/separatrix.hpp"

using namespace surfchaos;

namespace {

// quadrature oracle tolerance; 1e-10 hits roundoff near k nuI0 = 16
constexpr double kOracleTol = 1e-9;

struct Flags {
    std::string config, out = "out", nuI0, epsilon;
    std::optional<int> kmax, modes, k;
    std::optional<double> tol, z_ret;
};

RunConfig resolve(const Flags& f) {
    RunConfig c;
    if (!f.config.empty()) c = load_config(f.config, c);
    if (!f.nuI0.empty()) {
        c.nuI0 = parse_range(f.nuI0);
        c.I0.reset();
    }
    if (!f.epsilon.empty()) c.epsilon = parse_list(f.epsilon);
    if (f.kmax) c.kmax = *f.kmax;
    if (f.modes) c.modes = *f.modes;
    if (f.tol) c.tol = *f.tol;
    if (f.k) c.k = *f.k;
    if (f.z_ret) c.z_ret = *f.z_ret;
    c.validate();
    return c;
}

std::string line(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return std::string(buf) + "\n";
}

int melnikov(const RunConfig& c, Artifacts& out) {
    Csv csv({"k", "nuI0", "closed_re", "closed_im", "quad_re", "quad_im", "rel_err"});
    for (const auto& p : c.model_params(1.0))
        for (int k = 1; k <= c.kmax; ++k) {
            const auto series = p.physical.corrugation;
            const auto a = melnikov_coeff_closed(k, p.nuI0(), series).value;
            const auto b = melnikov_coeff_quadrature(k, p.nuI0(), series, kOracleTol).value;
            const double rel = a == 0.0 ? std::abs(b) : std::abs(b - a) / std::abs(a);
            csv.row({double(k), p.nuI0(), a.real(), a.imag(), b.real(), b.imag(), rel});
        }
    out.add("melnikov.csv", csv.str());
    return 0;
}

SplittingOptions splitting_options(const RunConfig& c) {
    SplittingOptions o;
    o.modes = c.modes;
    o.globalize.integrator.rel_tol = c.tol;
    o.globalize.integrator.abs_tol = c.tol;
    return o;
}

int splitting(const RunConfig& c, Artifacts& out) {
    Csv csv({"nuI0", "epsilon", "u", "k", "ampJ", "phaseJ", "ampP", "phaseP", "noise_floor"});
    for (double eps : c.epsilon)
        for (const auto& p : c.model_params(eps)) {
            const auto run = compute_sheets(p, splitting_options(c));
            for (double u : run.unstable.levels) {
                if (u <= 0) continue;
                for (int k = 1; k <= c.kmax; ++k) {
                    const auto s = measure_splitting(run.unstable, run.stable, u, k, false);
                    csv.row({p.nuI0(), eps, u, double(k), s.ampJ, s.phaseJ, s.ampP, s.phaseP, s.noise_floor});
                }
            }
        }
    out.add("splitting.csv", csv.str());
    return 0;
}

int sweep(const RunConfig& c, Artifacts& out) {
    if (c.epsilon.size() != 1) throw ConfigError("sweep takes a single epsilon");
    const auto params = c.model_params(c.epsilon[0]);
    if (params.size() < 4) throw ConfigError("sweep needs at least four nuI0 values");
    std::vector<SplittingSample> s;
    for (const auto& p : params) {
        const auto run = compute_sheets(p, splitting_options(c));
        s.push_back(measure_splitting(run.unstable, run.stable, 1.0, 1));
    }
    const auto fit = fit_scaling(s);
    Csv csv({"nuI0", "amp", "rho_fit", "sigma_fit"});
    for (const auto& x : s) csv.row({x.nuI0, x.ampJ, fit.rho, fit.sigma});
    out.add("sweep.csv", csv.str());
    std::cout << line("rho %.6f sigma %.6f", fit.rho, fit.sigma);
    return 0;
}

int inner(const RunConfig& c, Artifacts& out) {
    Csv csv({"epsilon", "k", "f_re", "f_im", "err_est", "theta_V", "residual"});
    for (double eps : c.epsilon) {
        const auto p = c.model_params(eps).front();
        const auto sol = solve_inner(p, c.modes);
        const auto d = extract_fk(sol, 1, c.kmax);
        for (std::size_t i = 0; i < d.k.size(); ++i)
            csv.row({eps, double(d.k[i]), d.f[i].real(), d.f[i].imag(), d.error[i], sol.theta_V, sol.residual});
    }
    out.add("inner.csv", csv.str());
    return 0;
}

struct Shoe {
    OperatingPoint op;
    Horseshoe hs;
    StripFamily strips;
};

Shoe build_shoe(const RunConfig& c, bool explicit_nu) {
    Shoe s;
    const double eps = c.epsilon.front();
    s.op = explicit_nu ? select_operating_point(c.nuI0, eps, c.physical) : select_operating_point({4, 5, 6, 8}, eps, c.physical);
    s.hs = make_horseshoe(ModelParams::from_nuI0(s.op.nuI0, eps, c.physical));
    s.strips = build_strips(s.hs, 2, 5);
    return s;
}

int horseshoe(const RunConfig& c, bool explicit_nu, Artifacts& out) {
    const auto s = build_shoe(c, explicit_nu);
    const auto& hs = s.hs;
    std::string rep;
    rep += line("operating point nuI0 %.4f (splitting %.3e, noise %.3e)", s.op.nuI0, s.op.ampJ, s.op.noise);
    rep += line("section a %.3f, rectangle delta %.3f, x scale %.3f", hs.chart.a, hs.delta(), hs.scale);
    rep += line("homoclinic theta %.12f, fixed error %.2e, nu0 %.6e, nu1 %.6e", hs.frame.theta_h, hs.frame.fixed_error,
                hs.frame.nu0, hs.frame.nu1);
    const auto lf = lambda_lemma_fit(hs.chart, {1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
    rep += line("local passage: Ca %.3e, slope %.6f, transit exponent %.4f", lf.Ca, lf.slope, lf.gamma);
    rep += line("strips: first count %d, mu_h %.3e, mu_v %.3e, monotone %s", s.strips.first_count, s.strips.mu_h,
                s.strips.mu_v, s.strips.monotone ? "yes" : "no");
    Csv strips({"symbol", "count", "x", "y_lo", "y_hi", "y_acc"});
    for (const auto& st : s.strips.strips) {
        rep += line("  symbol %d (count %d): hausdorff %.4e, image x [%.6e, %.6e]", st.symbol, st.count, st.hausdorff,
                    st.image_x_min, st.image_x_max);
        for (std::size_t i = 0; i < st.x.size(); ++i)
            strips.row({double(st.symbol), double(st.count), st.x[i], st.y_lo[i], st.y_hi[i], st.y_acc[i]});
    }
    const auto cones = verify_cones(hs, s.strips);
    rep += line("cones: %d/%d pass (%.2f%%), eta %.3f, kappa %.4e, H2 %s, Richardson max %.2e", cones.passed, cones.total,
                100 * cones.pass_rate, cones.eta_u, cones.kappa, cones.h2() ? "yes" : "no", cones.richardson_max);
    Csv cs({"symbol", "x", "y", "j11", "j12", "j21", "j22", "richardson", "expansion", "pass"});
    for (const auto& x : cones.samples)
        cs.row({double(x.symbol), x.x, x.y, x.jac[0][0], x.jac[0][1], x.jac[1][0], x.jac[1][1], x.richardson,
                x.expansion, x.pass ? 1.0 : 0.0});
    const auto ex = expansion_scan(hs, cones.eta_u);
    rep += line("expansion exponent %.4f", ex.exponent);
    const auto it = shadow_orbit(hs, s.strips, {2, 3, 2});
    std::string got;
    for (int a : it.achieved) got += std::to_string(a) + " ";
    rep += line("itinerary 2 3 2: recounted %s(%d sweeps)", got.c_str(), it.sweeps);
    for (std::size_t j = 0; j < it.nodes.size(); ++j)
        rep += line("  node %zu: x %.15e y %.15e residual %.2e", j, it.nodes[j][0], it.nodes[j][1], it.residuals[j]);
    out.add("horseshoe.txt", rep);
    out.add("strips.csv", strips.str());
    out.add("cones.csv", cs.str());
    std::cout << rep;
    return 0;
}

int oscillate(const RunConfig& c, bool explicit_nu, Artifacts& out) {
    const auto s = build_shoe(c, explicit_nu);
    const auto o = oscillatory_demo(s.hs, s.strips, c.k, c.z_ret, c.sample_dt);
    Csv csv({"t", "x", "z", "px", "pz"});
    SvgSeries zt;
    for (const auto& p : o.orbit) {
        csv.row({p.t, p.x, p.z, p.px, p.pz});
        zt.x.push_back(p.t);
        zt.y.push_back(p.z);
    }
    out.add("orbit.csv", csv.str());
    out.add("orbit.svg", svg_plot({zt}, "height above the surface", "t", "z", {c.z_ret}));
    std::string rep;
    for (std::size_t i = 0; i < o.z_max.size(); ++i)
        rep += line("maximum %zu: t %.6f z %.9f, then down to z %.6f", i + 1, o.t_max[i], o.z_max[i], o.z_min_after[i]);
    rep += line("increasing %s, returns below %.3f %s", o.increasing ? "yes" : "no", o.z_ret, o.returns ? "yes" : "no");
    std::cout << rep;
    return o.increasing && o.returns ? 0 : 1;
}

int verify_all(Artifacts& out) {
    std::string rep;
    bool ok = true;
    for (int i = 1; i <= kCriteria; ++i) {
        const auto r = run_criterion(i);
        const auto l = format_result(r) + "\n";
        std::cout << l << std::flush;
        rep += l;
        ok = ok && r.pass;
    }
    out.add("verify.txt", rep);
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chaotic scattering off a corrugated surface: numerical experiments"};
    app.require_subcommand(1);
    Flags f;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "INI config file")->check(CLI::ExistingFile);
        sub->add_option("--out", f.out, "output directory");
        sub->add_option("--nuI0", f.nuI0, "a:b:step or a single value");
        sub->add_option("--epsilon", f.epsilon, "comma-separated list");
        sub->add_option("--kmax", f.kmax, "highest harmonic");
        sub->add_option("--modes", f.modes, "Fourier modes");
        sub->add_option("--tol", f.tol, "integrator tolerance");
    };
    const char* names[] = {"melnikov", "splitting", "sweep", "inner", "horseshoe", "oscillate", "verify-all"};
    const char* help[] = {"Melnikov coefficients, closed form against quadrature",
                          "splitting harmonics of the globalized manifolds",
                          "exponential law fit over nuI0",
                          "inner equation splitting constants",
                          "return map, strips, cones and a shadowed itinerary",
                          "oscillatory orbit in Cartesian coordinates",
                          "acceptance criteria 1-12"};
    std::vector<CLI::App*> subs;
    for (int i = 0; i < 7; ++i) {
        subs.push_back(app.add_subcommand(names[i], help[i]));
        common(subs.back());
    }
    subs[5]->add_option("--k", f.k, "number of excursions");
    subs[5]->add_option("--zret", f.z_ret, "return height");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 2;
    }

    const auto start = std::chrono::steady_clock::now();
    std::string which;
    for (auto* s : subs)
        if (s->parsed()) which = s->get_name();
    RunConfig cfg;
    try {
        cfg = resolve(f);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    const bool explicit_nu = !f.nuI0.empty();

    Artifacts out;
    int status = 0;
    try {
        if (which == "melnikov") status = melnikov(cfg, out);
        if (which == "splitting") status = splitting(cfg, out);
        if (which == "sweep") status = sweep(cfg, out);
        if (which == "inner") status = inner(cfg, out);
        if (which == "horseshoe") status = horseshoe(cfg, explicit_nu, out);
        if (which == "oscillate") status = oscillate(cfg, explicit_nu, out);
        if (which == "verify-all") status = verify_all(out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << which << " failed: " << e.what() << "\n";
        return 1;
    }

    RunManifest m;
    std::ostringstream cmd;
    for (int i = 0; i < argc; ++i) cmd << (i ? " " : "") << argv[i];
    m.command = cmd.str();
    m.config = cfg.echo();
    m.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        out.commit(f.out, m);
    } catch (const std::exception& e) {
        std::cerr << "cannot write outputs: " << e.what() << "\n";
        return 2;
    }
    std::cout << "wrote " << out.items().size() + 1 << " files to " << f.out << "\n";
    return status;
}
