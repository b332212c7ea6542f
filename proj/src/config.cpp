#include "surfchaos/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "surfchaos/errors.hpp"

namespace surfchaos {

namespace {

double to_number(const std::string& raw, const std::string& what) {
    std::size_t used = 0;
    double v = 0;
    const auto first = raw.find_first_not_of(" \t");
    const auto last = raw.find_last_not_of(" \t");
    if (first == std::string::npos) throw ConfigError(what + ": empty value");
    const std::string s = raw.substr(first, last - first + 1);
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError(what + ": not a number: '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v)) throw ConfigError(what + ": not a number: '" + s + "'");
    return v;
}

int to_int(const std::string& s, const std::string& what) {
    const double v = to_number(s, what);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(what + ": not an integer");
    return static_cast<int>(v);
}

std::string show(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string show(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + show(v[i]);
    return s;
}

}  // namespace

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_number(item, "list '" + s + "'"));
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

std::vector<double> parse_range(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() == 1) return {to_number(parts[0], "range")};
    if (parts.size() != 3) throw ConfigError("range must be a:b:step or a single value: '" + s + "'");
    const double a = to_number(parts[0], "range start"), b = to_number(parts[1], "range end"),
                 h = to_number(parts[2], "range step");
    if (!(h > 0) || b < a) throw ConfigError("range needs step > 0 and end >= start: '" + s + "'");
    const long n = std::lround(std::floor((b - a) / h + 1e-9));
    if (n > 10000) throw ConfigError("range has too many points");
    std::vector<double> out;
    for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * h);
    return out;
}

RunConfig parse_config(const std::string& text, RunConfig base) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.message() + " at line " + std::to_string(e.line()));
    }
    static const std::set<std::string> known[] = {
        {"D", "a", "alpha", "m", "r", "s"},
        {"I0", "nuI0", "epsilon"},
        {"kmax", "modes", "tol", "k", "zret", "sample_dt"},
    };
    const char* sections[] = {"physical", "model", "run"};
    bool r_given = false, s_given = false;
    for (const auto& [name, sub] : tree) {
        int idx = -1;
        for (int i = 0; i < 3; ++i)
            if (name == sections[i]) idx = i;
        if (idx < 0) throw ConfigError("config: unknown section [" + name + "]");
        for (const auto& [key, val] : sub) {
            if (!known[idx].count(key)) throw ConfigError("config: unknown key " + name + "." + key);
            const std::string v = val.data();
            const std::string what = name + "." + key;
            if (idx == 0) {
                auto& ph = base.physical;
                if (key == "D") ph.D = to_number(v, what);
                if (key == "a") ph.a = to_number(v, what);
                if (key == "alpha") ph.alpha = to_number(v, what);
                if (key == "m") ph.m = to_number(v, what);
                if (key == "r") {
                    ph.corrugation.cosines = parse_list(v);
                    r_given = true;
                }
                if (key == "s") {
                    ph.corrugation.sines = parse_list(v);
                    s_given = true;
                }
            } else if (idx == 1) {
                if (key == "I0") base.I0 = to_number(v, what);
                if (key == "nuI0") base.nuI0 = parse_range(v);
                if (key == "epsilon") base.epsilon = parse_list(v);
            } else {
                if (key == "kmax") base.kmax = to_int(v, what);
                if (key == "modes") base.modes = to_int(v, what);
                if (key == "tol") base.tol = to_number(v, what);
                if (key == "k") base.k = to_int(v, what);
                if (key == "zret") base.z_ret = to_number(v, what);
                if (key == "sample_dt") base.sample_dt = to_number(v, what);
            }
        }
    }
    auto& c = base.physical.corrugation;
    if (r_given && !s_given) c.sines.assign(c.cosines.size(), 0.0);
    if (s_given && !r_given) c.cosines.assign(c.sines.size(), 0.0);
    if (c.sines.size() < c.cosines.size()) c.sines.resize(c.cosines.size(), 0.0);
    if (c.cosines.size() < c.sines.size()) c.cosines.resize(c.sines.size(), 0.0);
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

void RunConfig::validate() const {
    try {
        physical.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("physical parameters: ") + e.what());
    }
    if (nuI0.empty() || epsilon.empty()) throw ConfigError("empty nuI0 or epsilon list");
    for (double x : nuI0)
        if (!(x > 0)) throw ConfigError("nuI0 values must be positive");
    if (I0 && !(*I0 > 0)) throw ConfigError("I0 must be positive");
    for (double e : epsilon)
        if (!(e >= 0)) throw ConfigError("epsilon values must be nonnegative");
    if (kmax < 1 || kmax > 64) throw ConfigError("kmax must lie in 1..64");
    if (modes < 1 || modes > 256) throw ConfigError("modes must lie in 1..256");
    if (!(tol >= 1e-15 && tol <= 1e-3)) throw ConfigError("tol must lie in [1e-15, 1e-3]");
    if (k < 1 || k > 4) throw ConfigError("k must lie in 1..4 (the verified strip window)");
    if (!(sample_dt > 0)) throw ConfigError("sample_dt must be positive");
}

std::vector<ModelParams> RunConfig::model_params(double eps) const {
    std::vector<ModelParams> out;
    if (I0) {
        out.push_back(ModelParams::from_I0(*I0, eps, physical));
        return out;
    }
    for (double x : nuI0) out.push_back(ModelParams::from_nuI0(x, eps, physical));
    return out;
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
    return {
        {"physical.D", show(physical.D)},
        {"physical.a", show(physical.a)},
        {"physical.alpha", show(physical.alpha)},
        {"physical.m", show(physical.m)},
        {"physical.r", show(physical.corrugation.cosines)},
        {"physical.s", show(physical.corrugation.sines)},
        {"model.I0", I0 ? show(*I0) : "unset"},
        {"model.nuI0", show(nuI0)},
        {"model.epsilon", show(epsilon)},
        {"run.kmax", std::to_string(kmax)},
        {"run.modes", std::to_string(modes)},
        {"run.tol", show(tol)},
        {"run.k", std::to_string(k)},
        {"run.zret", show(z_ret)},
        {"run.sample_dt", show(sample_dt)},
    };
}

}  // namespace surfchaos
