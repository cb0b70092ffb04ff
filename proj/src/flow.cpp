#include "tvflow/flow.hpp"

#include "tvflow/errors.hpp"
#include "tvflow/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tvflow {

namespace {

struct FieldStats {
    double osc = 0.0;
    double mean = 0.0;
};

FieldStats stats_of(const std::vector<double>& u) {
    FieldStats st;
    double lo = u.front(), hi = u.front(), sum = 0.0;
    for (double x : u) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        sum += x;
    }
    st.osc = hi - lo;
    st.mean = sum / static_cast<double>(u.size());
    return st;
}

bool is_extinct(double osc, double eps) { return osc < eps || osc == 0.0; }

} // namespace

Trajectory evolve(const std::vector<double>& u0, const FlowParams& params,
                  const SpectralCache& cache) {
    if (params.steps < 1)
        throw ConfigError("flow needs at least one step, got " + std::to_string(params.steps));
    if (params.snapshot_every < 1)
        throw ConfigError("snapshot_every must be at least 1, got " +
                          std::to_string(params.snapshot_every));
    if (!std::isfinite(params.tau) || !(params.tau > 0.0))
        throw ConfigError("tau must be positive");
    const Grid& grid = cache.grid();
    const int n = grid.n;
    if (static_cast<int>(u0.size()) != n)
        throw ContractViolation("evolve: initial data length " + std::to_string(u0.size()) +
                                " does not match grid size " + std::to_string(n));
    for (double x : u0)
        if (!std::isfinite(x))
            throw ConfigError("initial data must be finite");

    SolverParams solver = params.solver;
    solver.tau = params.tau;
    validate_params(solver, cache);

    std::vector<double> u = u0;
    FieldStats st = stats_of(u);
    const double eps = params.extinction_eps > 0.0 ? params.extinction_eps : 1e-3 * st.osc;

    Trajectory traj;
    traj.records.reserve(static_cast<std::size_t>(params.steps) + 1);

    StepRecord rec0;
    rec0.t = 0.0;
    rec0.tv_phys = tv(u, grid);
    rec0.osc = st.osc;
    rec0.mean = st.mean;
    traj.records.push_back(rec0);
    traj.snapshots.push_back({0, u});

    if (is_extinct(st.osc, eps)) {
        traj.extinction_time = 0.0;
        traj.halted_early = true;
        return traj;
    }

    std::vector<double> z(n, 0.0);
    std::vector<double> diff(n);
    for (long long m = 1; m <= params.steps; ++m) {
        ProxResult res = params.warm_start ? solve_prox(u, solver, cache, z)
                                           : solve_prox(u, solver, cache);
        for (int j = 0; j < n; ++j)
            diff[j] = res.u[j] - u[j];

        StepRecord rec;
        rec.t = static_cast<double>(m) * params.tau;
        rec.speed = hs_norm(cache, diff) / params.tau;
        rec.inner_iterations = res.iterations;
        rec.converged = res.converged;
        rec.gap = res.history.back().gap;
        if (res.ergodic_u) {
            double r = 0.0;
            for (int j = 0; j < n; ++j)
                r = std::max(r, std::abs(res.u[j] - (*res.ergodic_u)[j]));
            rec.ergodic_residual = r;
        }
        u = std::move(res.u);
        if (params.warm_start)
            z = std::move(res.z);
        st = stats_of(u);
        rec.tv_phys = tv(u, grid);
        rec.osc = st.osc;
        rec.mean = st.mean;
        traj.records.push_back(rec);

        const bool extinct = is_extinct(st.osc, eps);
        const bool abort_nc = params.abort_on_nonconverged && !rec.converged;
        const bool scheduled = (m % params.snapshot_every == 0) || m == params.steps;
        if (scheduled || extinct || abort_nc)
            traj.snapshots.push_back({m, u});
        if (extinct) {
            traj.extinction_time = rec.t;
            traj.halted_early = m < params.steps;
            break;
        }
        if (abort_nc) {
            traj.aborted_nonconverged = true;
            break;
        }
    }
    return traj;
}

std::optional<double> detect_extinction(const Trajectory& traj, double eps) {
    if (!std::isfinite(eps) || !(eps > 0.0))
        throw ConfigError("extinction threshold must be positive");
    for (const StepRecord& rec : traj.records)
        if (rec.osc < eps)
            return rec.t;
    return std::nullopt;
}

std::vector<double> discrete_speed(const Trajectory& traj) {
    std::vector<double> speeds;
    if (traj.records.size() < 2)
        return speeds;
    speeds.reserve(traj.records.size() - 1);
    for (std::size_t i = 1; i < traj.records.size(); ++i)
        speeds.push_back(traj.records[i].speed);
    return speeds;
}

} // namespace tvflow
