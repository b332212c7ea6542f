#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "surfchaos/model.hpp"

namespace surfchaos {

// Resolved settings for one CLI run: defaults, then the config file, then flags.
struct RunConfig {
    PhysicalParams physical;
    std::vector<double> nuI0 = {4.0};
    std::optional<double> I0;  // [model] I0 overrides nuI0 when set in the file
    std::vector<double> epsilon = {1.0};
    int kmax = 2;
    int modes = 8;
    double tol = 1e-12;
    int k = 3;            // oscillate: number of excursions
    double z_ret = 8.0;   // oscillate: return height
    double sample_dt = 0.05;

    std::vector<ModelParams> model_params(double eps) const;
    void validate() const;
    // key = value pairs in a fixed order, for the manifest.
    std::vector<std::pair<std::string, std::string>> echo() const;
};

// INI file with [physical], [model], [run] sections; unknown keys are errors.
RunConfig load_config(const std::string& path, RunConfig base = {});
RunConfig parse_config(const std::string& text, RunConfig base = {});

// "a:b:step" (inclusive of b up to rounding) or a single value.
std::vector<double> parse_range(const std::string& s);
// Comma-separated numbers.
std::vector<double> parse_list(const std::string& s);

}  // namespace surfchaos
