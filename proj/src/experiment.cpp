#include "tvflow/experiment.hpp"

#include "tvflow/errors.hpp"
#include "tvflow/operators.hpp"
#include "tvflow/prox.hpp"
#include "tvflow/spectral.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <system_error>
#include <utility>

namespace fs = std::filesystem;

namespace tvflow {

namespace {

std::string num_str(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string trim(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t");
    if (begin == std::string::npos)
        return "";
    const auto end = text.find_last_not_of(" \t");
    return text.substr(begin, end - begin + 1);
}

bool try_parse_double(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty())
        return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    if (!try_parse_double(text, v))
        throw ConfigError(key + ": cannot parse '" + text + "' as a number");
    return v;
}

long long parse_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    long long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ConfigError(key + ": cannot parse '" + text + "' as an integer");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1")
        return true;
    if (t == "false" || t == "0")
        return false;
    throw ConfigError(key + ": cannot parse '" + text + "' as a boolean (use true/false/1/0)");
}

// Deterministic uniform in [0,1) and standard Gaussian built directly on the
// raw engine output, so noise realizations do not depend on the standard
// library's distribution implementations.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double gauss(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0)
        u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> load_initial_file(const std::string& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read initial data file: " + path);
    std::vector<double> values;
    std::string line;
    bool allow_header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const std::string t = trim(line);
        if (t.empty())
            continue;
        // Either a bare value per line or CSV "x,u"; the last field is u.
        std::string field = t;
        const auto comma = t.rfind(',');
        if (comma != std::string::npos)
            field = t.substr(comma + 1);
        double v = 0.0;
        if (!try_parse_double(field, v)) {
            if (allow_header) {
                allow_header = false;
                continue;
            }
            throw ConfigError("cannot parse initial data line: '" + line + "' in " + path);
        }
        allow_header = false;
        if (!std::isfinite(v))
            throw ConfigError("initial data file contains a non-finite value: " + path);
        values.push_back(v);
    }
    if (static_cast<int>(values.size()) != grid.n)
        throw ConfigError("initial data file " + path + " has " +
                          std::to_string(values.size()) + " values but the grid has " +
                          std::to_string(grid.n) + " nodes");
    return values;
}

} // namespace

double initial_f(double x) {
    const double a = std::abs(x);
    return a <= 2.0 ? 20.0 : 50.0 / a - 5.0;
}

double initial_g(double x) { return std::abs(x) <= 2.0 ? 20.0 : 0.0; }

Grid make_grid(double x_min, double x_max, double h) {
    if (!std::isfinite(h) || !(h > 0.0))
        throw ConfigError("h must be positive, got " + num_str(h));
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min))
        throw ConfigError("domain must satisfy x_min < x_max, got " + num_str(x_min) + ":" +
                          num_str(x_max));
    const double span = x_max - x_min;
    const long long n = std::llround(span / h);
    if (n < 2)
        throw ConfigError("domain holds fewer than two cells of width h = " + num_str(h));
    if (n > 10'000'000)
        throw ConfigError("grid of " + std::to_string(n) + " nodes is too large");
    if (std::abs(static_cast<double>(n) * h - span) > 1e-9 * std::max(span, 1.0))
        throw ConfigError("h = " + num_str(h) + " does not divide the domain [" + num_str(x_min) +
                          ", " + num_str(x_max) + "] evenly");
    // Cell-centered nodes x_j = x_min + (j + 1/2) h.
    return Grid(static_cast<int>(n), h, x_min + 0.5 * h);
}

std::vector<double> build_initial(const ExperimentConfig& config, const Grid& grid) {
    if (config.noise < 0.0 || !std::isfinite(config.noise))
        throw ConfigError("noise must be non-negative, got " + num_str(config.noise));
    std::vector<double> u(grid.n);
    if (config.initial == "f") {
        for (int j = 0; j < grid.n; ++j)
            u[j] = initial_f(grid.x(j));
    } else if (config.initial == "g") {
        for (int j = 0; j < grid.n; ++j)
            u[j] = initial_g(grid.x(j));
    } else {
        u = load_initial_file(config.initial, grid);
    }
    if (config.noise > 0.0) {
        std::mt19937_64 rng(config.seed);
        for (double& x : u)
            x += config.noise * gauss(rng);
    }
    return u;
}

std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file: " + path);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const std::string t = trim(line);
        if (t.empty())
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value, got '" +
                              t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        entries.emplace_back(key, value);
    }
    return entries;
}

void apply_setting(ExperimentConfig& config, const std::string& raw_key,
                   const std::string& value) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "s") {
        config.s = parse_double(key, value);
    } else if (key == "tau") {
        config.tau = parse_double(key, value);
    } else if (key == "lambda") {
        if (trim(value) == "auto")
            config.lambda.reset();
        else
            config.lambda = parse_double(key, value);
    } else if (key == "h") {
        config.h = parse_double(key, value);
    } else if (key == "domain") {
        const std::string t = trim(value);
        const auto colon = t.find(':', 1); // skip a leading '-'
        if (colon == std::string::npos)
            throw ConfigError("domain: expected x_min:x_max, got '" + value + "'");
        config.x_min = parse_double("domain x_min", t.substr(0, colon));
        config.x_max = parse_double("domain x_max", t.substr(colon + 1));
    } else if (key == "steps") {
        config.steps = parse_int(key, value);
    } else if (key == "snapshot_every") {
        config.snapshot_every = parse_int(key, value);
    } else if (key == "initial") {
        config.initial = trim(value);
    } else if (key == "out") {
        config.out = trim(value);
    } else if (key == "strict") {
        config.strict = parse_bool(key, value);
    } else if (key == "ergodic") {
        config.ergodic = parse_bool(key, value);
    } else if (key == "seed") {
        const long long v = parse_int(key, value);
        if (v < 0)
            throw ConfigError("seed must be non-negative");
        config.seed = static_cast<unsigned long long>(v);
    } else if (key == "noise") {
        config.noise = parse_double(key, value);
    } else if (key == "tol_z") {
        config.tol_z = parse_double(key, value);
    } else if (key == "tol_gap") {
        config.tol_gap = parse_double(key, value);
    } else if (key == "max_iter") {
        config.max_iter = parse_int(key, value);
    } else if (key == "safety") {
        config.safety = parse_double(key, value);
    } else if (key == "warm_start") {
        config.warm_start = parse_bool(key, value);
    } else if (key == "extinction_eps") {
        config.extinction_eps = parse_double(key, value);
    } else {
        throw ConfigError("unknown config key: " + raw_key);
    }
}

namespace {

void write_snapshots(const fs::path& path, const Trajectory& traj, const Grid& grid, double tau) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    std::string buf = "t,x,u\n";
    for (const Snapshot& snap : traj.snapshots) {
        const std::string t = num_str(static_cast<double>(snap.step) * tau);
        for (int j = 0; j < grid.n; ++j) {
            buf += t;
            buf += ',';
            buf += num_str(grid.x(j));
            buf += ',';
            buf += num_str(snap.u[j]);
            buf += '\n';
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out)
        throw ConfigError("failed while writing " + path.string());
}

void write_diagnostics(const fs::path& path, const Trajectory& traj, const Grid& grid,
                       const ExperimentConfig& config, const SpectralCache& cache, double bound,
                       double lambda_used) {
    nlohmann::json j;
    j["config"] = {
        {"s", *config.s},
        {"tau", config.tau},
        {"lambda", lambda_used},
        {"h", config.h},
        {"domain", num_str(config.x_min) + ":" + num_str(config.x_max)},
        {"steps", *config.steps},
        {"snapshot_every", config.snapshot_every},
        {"initial", config.initial},
        {"out", config.out},
        {"strict", config.strict},
        {"ergodic", config.ergodic},
        {"seed", config.seed},
        {"noise", config.noise},
        {"tol_z", config.tol_z},
        {"tol_gap", config.tol_gap},
        {"max_iter", config.max_iter},
        {"safety", config.safety},
        {"warm_start", config.warm_start},
        {"extinction_eps", config.extinction_eps},
    };
    j["grid"] = {{"n", grid.n}, {"h", grid.h}, {"x0", grid.x0}};
    j["stability"] = {{"max_lambda", bound}, {"lambda", lambda_used}, {"mu_max", cache.mu_max()}};

    std::vector<double> ts, tvs, speeds, oscs, means, gaps, ergodic_residuals;
    std::vector<long long> inner;
    std::vector<bool> convs;
    for (const StepRecord& rec : traj.records) {
        ts.push_back(rec.t);
        tvs.push_back(rec.tv_phys);
        speeds.push_back(rec.speed);
        oscs.push_back(rec.osc);
        means.push_back(rec.mean);
        gaps.push_back(rec.gap);
        inner.push_back(rec.inner_iterations);
        convs.push_back(rec.converged);
        ergodic_residuals.push_back(rec.ergodic_residual);
    }
    j["steps"] = {
        {"t", ts},           {"tv", tvs},
        {"speed", speeds},   {"osc", oscs},
        {"mean", means},     {"gap", gaps},
        {"inner_iterations", inner},
        {"converged", convs},
    };
    if (config.ergodic)
        j["steps"]["ergodic_residual"] = ergodic_residuals;

    std::vector<long long> snap_steps;
    for (const Snapshot& snap : traj.snapshots)
        snap_steps.push_back(snap.step);
    j["snapshot_steps"] = snap_steps;

    if (traj.extinction_time)
        j["extinction_time"] = *traj.extinction_time;
    else
        j["extinction_time"] = nullptr;
    j["halted_early"] = traj.halted_early;
    j["aborted_nonconverged"] = traj.aborted_nonconverged;

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << "\n";
    if (!out)
        throw ConfigError("failed while writing " + path.string());
}

int run_impl(const ExperimentConfig& config) {
    if (!config.s)
        throw ConfigError("s is required (flag --s or config key s)");
    if (!config.steps)
        throw ConfigError("steps is required (flag --steps or config key steps)");
    if (*config.steps < 1)
        throw ConfigError("steps must be at least 1, got " + std::to_string(*config.steps));
    if (config.initial.empty())
        throw ConfigError("initial is required: f, g, or a file path");

    const Grid grid = make_grid(config.x_min, config.x_max, config.h);
    const SpectralCache cache(grid, *config.s);

    SolverParams solver;
    solver.s = *config.s;
    solver.tau = config.tau;
    solver.lambda = config.lambda;
    solver.tol_z = config.tol_z;
    solver.tol_gap = config.tol_gap;
    solver.max_iter = config.max_iter;
    solver.ergodic = config.ergodic;
    solver.safety = config.safety;
    validate_params(solver, cache);

    const double bound = stability_max_lambda(*config.s, config.tau, cache);
    const double lambda_used = resolve_lambda(solver, cache);

    const std::vector<double> u0 = build_initial(config, grid);

    std::cout << "grid: N = " << grid.n << ", h = " << num_str(grid.h) << ", domain ["
              << num_str(config.x_min) << ", " << num_str(config.x_max) << "]\n";
    std::cout << "stability: max lambda = " << num_str(bound) << ", using lambda = "
              << num_str(lambda_used) << (config.lambda ? "" : " (auto)") << "\n";

    FlowParams flow;
    flow.tau = config.tau;
    flow.steps = *config.steps;
    flow.snapshot_every = config.snapshot_every;
    flow.solver = solver;
    flow.warm_start = config.warm_start;
    flow.extinction_eps = config.extinction_eps;

    const Trajectory traj = evolve(u0, flow, cache);

    fs::path dir(config.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory " + config.out + ": " + ec.message());
    write_snapshots(dir / "snapshots.csv", traj, grid, config.tau);
    write_diagnostics(dir / "diagnostics.json", traj, grid, config, cache, bound, lambda_used);

    long long total_inner = 0;
    long long nonconverged = 0;
    for (const StepRecord& rec : traj.records) {
        total_inner += rec.inner_iterations;
        if (!rec.converged)
            ++nonconverged;
    }
    std::cout << "run complete: " << (traj.records.size() - 1) << " steps, " << total_inner
              << " inner iterations";
    if (traj.extinction_time)
        std::cout << ", extinct at t = " << num_str(*traj.extinction_time);
    if (nonconverged > 0)
        std::cout << ", " << nonconverged << (nonconverged == 1 ? " step" : " steps")
                  << " hit max_iter";
    std::cout << "; outputs in " << config.out << "\n";

    if (config.strict && nonconverged > 0) {
        std::cerr << "strict mode: " << nonconverged
                  << (nonconverged == 1 ? " inner solve" : " inner solves")
                  << " did not converge\n";
        return 3;
    }
    return 0;
}

} // namespace

int run(const ExperimentConfig& config) {
    try {
        return run_impl(config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Total variation gradient flow in H^{-s} on a periodic 1D grid"};
    app.get_formatter()->column_width(28);
    // Keep only the long help flag: the default short alias -h would collide
    // with the --h grid-spacing option.
    app.set_help_flag("--help", "print usage and exit");

    std::string config_path, lambda_text, domain_text, initial_text, out_text;
    double s = 0.0, tau = 0.0, h = 0.0, noise = 0.0, tol_z = 0.0, tol_gap = 0.0, safety = 0.0,
           extinction_eps = 0.0;
    long long steps = 0, snapshot_every = 0, max_iter = 0;
    unsigned long long seed = 0;
    bool strict = false, ergodic = false, warm_start = true;

    app.add_option("--config", config_path, "key=value config file (flags win over it)");
    app.add_option("--s", s, "fractional index in [0, 1]");
    app.add_option("--tau", tau, "implicit time step");
    app.add_option("--lambda", lambda_text, "dual step size: a number or 'auto'");
    app.add_option("--h", h, "grid spacing");
    app.add_option("--domain", domain_text, "domain as x_min:x_max (use --domain=-10:10)");
    app.add_option("--steps", steps, "number of implicit steps");
    app.add_option("--snapshot-every", snapshot_every, "store every k-th state");
    app.add_option("--initial", initial_text, "initial data: f, g, or a file path");
    app.add_option("--out", out_text, "output directory");
    app.add_flag("--strict", strict, "exit 3 if any inner solve fails to converge");
    app.add_flag("--ergodic", ergodic, "track ergodic dual averages");
    app.add_option("--seed", seed, "RNG seed for initial-data noise");
    app.add_option("--noise", noise, "stddev of Gaussian noise added to the initial data");
    app.add_option("--tol-z", tol_z, "sup-norm increment tolerance (0 disables)");
    app.add_option("--tol-gap", tol_gap, "relative duality-gap tolerance (0 disables)");
    app.add_option("--max-iter", max_iter, "inner iteration cap");
    app.add_option("--safety", safety, "fraction of the stability bound used for auto lambda");
    app.add_option("--warm-start", warm_start, "reuse the dual variable across steps (1/0)");
    app.add_option("--extinction-eps", extinction_eps,
                   "oscillation threshold for early stopping (<= 0 selects auto)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    ExperimentConfig config;
    try {
        if (app.count("--config"))
            for (const auto& [key, value] : parse_config_file(config_path))
                apply_setting(config, key, value);
        if (app.count("--s"))
            config.s = s;
        if (app.count("--tau"))
            config.tau = tau;
        if (app.count("--lambda"))
            apply_setting(config, "lambda", lambda_text);
        if (app.count("--h"))
            config.h = h;
        if (app.count("--domain"))
            apply_setting(config, "domain", domain_text);
        if (app.count("--steps"))
            config.steps = steps;
        if (app.count("--snapshot-every"))
            config.snapshot_every = snapshot_every;
        if (app.count("--initial"))
            config.initial = initial_text;
        if (app.count("--out"))
            config.out = out_text;
        if (app.count("--strict"))
            config.strict = true;
        if (app.count("--ergodic"))
            config.ergodic = true;
        if (app.count("--seed"))
            config.seed = seed;
        if (app.count("--noise"))
            config.noise = noise;
        if (app.count("--tol-z"))
            config.tol_z = tol_z;
        if (app.count("--tol-gap"))
            config.tol_gap = tol_gap;
        if (app.count("--max-iter"))
            config.max_iter = max_iter;
        if (app.count("--safety"))
            config.safety = safety;
        if (app.count("--warm-start"))
            config.warm_start = warm_start;
        if (app.count("--extinction-eps"))
            config.extinction_eps = extinction_eps;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return run(config);
}

} // namespace tvflow
