#pragma once

#include "netgrowth/lqg.hpp"
#include "netgrowth/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace netgrowth::cli {

/// Usage or configuration problem; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// section -> key -> raw value, as read from the INI file.
using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

struct RoleSpec {
    Family family;
    FunctionSpec::Params params;
};

struct ModelSection {
    RoleSpec f, g, b, c;
    double eta_tilde, eta, rho, lambda_sup, x_initial;
    std::optional<double> eta_sup, c_enter;
};

struct GridSection {
    std::size_t n = 2048;
    double tol = 1e-10;
    std::size_t max_iter = 500;
    std::optional<double> x_hi;
};

struct RunSection {
    std::optional<double> t_end;
    double rtol = 1e-10;
    std::size_t n_out = 501;
    std::optional<double> x0;
    bool start_at_steady = false;
    std::size_t validate_n = 2048;
    std::optional<double> eta_lo, eta_hi;
    std::size_t eta_grid_n = 5;
    std::size_t statics_points = 65;
};

struct LqgSection {
    LqgParams params;
    std::size_t n_paths = 100'000;
    std::optional<double> dt;
    std::optional<double> t_end;
    std::size_t n_records = 10;
    std::size_t n_expected = 101;
    std::uint64_t seed = 0;
};

struct OutputSection {
    std::string directory = ".";
    std::string prefix;
};

struct RunConfig {
    std::optional<ModelSection> model;
    GridSection grid;
    RunSection run;
    std::optional<LqgSection> lqg;
    OutputSection output;
    RawConfig resolved;  ///< every setting after defaults, for the manifest
};

/// Reads an INI file; throws ConfigError on unreadable or malformed input.
RawConfig read_config_file(const std::string& path);

/// Validates keys and value syntax; unknown keys throw ConfigError.
RunConfig parse_config(const RawConfig& raw);

/// Builds the function specs and validates the model (throws ModelError or
/// std::invalid_argument for bad parameter values).
ModelParams make_model(const ModelSection& s);

/// Applies "section.key" = value to a raw config (e.g. "model.b.a").
void apply_override(RawConfig& raw, const std::string& param, const std::string& value);

/// Entry point shared by the executable and the tests. Returns the exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace netgrowth::cli
