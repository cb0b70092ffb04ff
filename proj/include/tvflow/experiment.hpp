#pragma once

#include "tvflow/flow.hpp"
#include "tvflow/grid.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tvflow {

/// Fully resolved experiment description.  The CLI and key=value config files
/// both populate this struct; command-line flags win over file settings.
struct ExperimentConfig {
    std::optional<double> s;          ///< required: fractional index
    double tau = 0.1;
    std::optional<double> lambda;     ///< empty = auto (safety * stability bound)
    double h = 0.1;
    double x_min = -10.0;
    double x_max = 10.0;
    std::optional<long long> steps;   ///< required: outer step count
    long long snapshot_every = 1;
    std::string initial;              ///< required: "f", "g", or a file path
    std::string out = "out";
    bool strict = false;              ///< exit 3 when any inner solve fails to converge
    bool ergodic = false;
    unsigned long long seed = 0;      ///< RNG seed for initial-data noise
    double noise = 0.0;               ///< stddev of Gaussian noise added to u0

    // Inner-solver knobs (also settable via config keys and CLI flags).
    double tol_z = 1e-8;
    double tol_gap = 1e-7;
    long long max_iter = 200000;
    double safety = 0.9;
    bool warm_start = true;
    double extinction_eps = -1.0;
};

/// The benchmark initial profiles on [-10, 10]:
///   f(x) = 20 for |x| <= 2, else 50/|x| - 5   (continuous ramp)
///   g(x) = 20 * indicator(|x| <= 2)           (plateau on zero background)
double initial_f(double x);
double initial_g(double x);

/// Cell-centered periodic grid over [x_min, x_max]: N = (x_max - x_min) / h
/// nodes (which must divide evenly to 1e-9 relative accuracy) at
/// x_j = x_min + (j + 1/2) h.  Throws ConfigError otherwise.
Grid make_grid(double x_min, double x_max, double h);

/// Sample "f"/"g" on the grid, or load a file: either one value per line or
/// CSV rows x,u (optional header).  The sample count must equal grid.n.
/// Gaussian noise (stddev config.noise, mt19937_64 seeded with config.seed)
/// is added when requested.
std::vector<double> build_initial(const ExperimentConfig& config, const Grid& grid);

/// Parse a flat key=value file ('#' comments, blank lines ignored) into
/// settings in file order.  Key validation happens in apply_setting.
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path);

/// Apply one key=value setting to the config; throws ConfigError on unknown
/// keys or unparsable values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Validate, run the flow, and write <out>/snapshots.csv ("t,x,u" long form)
/// and <out>/diagnostics.json.  Returns the process exit code: 0 on success,
/// 2 on configuration errors, 3 when strict mode saw a non-converged inner
/// solve.  Output is deterministic: identical configs produce byte-identical
/// files.
int run(const ExperimentConfig& config);

/// Full command-line entry point (flag parsing + run); lives in the library
/// so tests can drive it in-process.
int cli_main(int argc, const char* const* argv);

} // namespace tvflow
