#pragma once

#include "fracfront/continuation.hpp"
#include "fracfront/core.hpp"

#include <istream>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fracfront {

/// Resolved run configuration. Keys of the config file match the field names, with
/// `ivp.` prefixing the IVP fields.
struct RunSettings {
    double alpha = 0.75;
    double theta = 0.3;
    Family family = Family::Quadratic;
    /// Non-positive selects the closed-form bound of the family.
    double lipschitz_bound = 0.0;
    double b_initial = 25.0;
    double h = 0.1;
    std::size_t n_max = 8001;
    /// Non-positive selects 1e-8 (1 + sup f).
    double tol_residual = 0.0;
    double tol_g = 1e-6;
    double tol_c = 1e-6;
    double tol_c_cont = 0.025;
    double tol_profile = 0.05;
    int max_doublings = 3;
    /// Tail window; NaN selects [-b/2, -b/10] of the final grid.
    double window_lo = std::numeric_limits<double>::quiet_NaN();
    double window_hi = std::numeric_limits<double>::quiet_NaN();
    double ivp_L = 800.0;
    std::size_t ivp_n = 16384;
    double ivp_dt = 0.05;
    double ivp_T = 400.0;
    std::string output_dir = "out";
    RootFinder root_finder = RootFinder::PinnedContinuation;
};

/// Every key accepted by the config file and by overrides.
const std::vector<std::string>& config_keys();

/// Sets one key; throws ConfigError naming the key for unknown keys or malformed values.
void set_config_value(RunSettings& settings, std::string_view key, std::string_view value);

/// Parses `key = value` lines ('#' starts a comment). Errors name `source` and the line.
RunSettings parse_config(std::istream& in, const std::string& source, RunSettings base = {});
RunSettings load_config(const std::string& path, RunSettings base = {});

/// Applies a `key=value` override.
void apply_override(RunSettings& settings, std::string_view assignment);

nlohmann::ordered_json to_json(const RunSettings& settings);

ProblemSpec make_spec(const RunSettings& settings);
ContinuationOptions make_continuation_options(const RunSettings& settings);

} // namespace fracfront
