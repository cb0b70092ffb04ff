#pragma once

#include "tvflow/prox.hpp"

#include <optional>
#include <vector>

namespace tvflow {

/// Parameters of the outer implicit-Euler evolution u^{m+1} = prox(u^m).
struct FlowParams {
    double tau = 0.1;         ///< time step; overrides solver.tau
    long long steps = 1;      ///< number of implicit steps (>= 1)
    long long snapshot_every = 1; ///< store u every k steps (>= 1)
    SolverParams solver;      ///< inner solver settings (tau field ignored)
    bool warm_start = true;   ///< reuse the previous step's dual variable
    bool abort_on_nonconverged = false; ///< stop the flow if an inner solve hits max_iter

    /// Oscillation threshold for extinction: the flow halts once
    /// osc(u) = max(u) - min(u) < eps.  Non-positive selects the default
    /// 1e-3 * osc(u0); a zero-oscillation state always counts as extinct.
    double extinction_eps = -1.0;
};

/// Per-step diagnostics (record m describes the state after m steps; record 0
/// is the initial condition).
struct StepRecord {
    double t = 0.0;            ///< m * tau
    double tv_phys = 0.0;      ///< tv(u)
    double speed = 0.0;        ///< ||u^m - u^{m-1}||_{-s} / tau (0 at m = 0)
    double osc = 0.0;          ///< max(u) - min(u)
    double mean = 0.0;
    long long inner_iterations = 0; ///< dual iterations spent on this step (0 at m = 0)
    bool converged = true;     ///< inner solve met a tolerance (true at m = 0)
    double gap = 0.0;          ///< final duality gap of the inner solve
    double ergodic_residual = 0.0; ///< ||u - ergodic_u||_inf when averaging is on
};

/// Stored state snapshot.
struct Snapshot {
    long long step = 0;
    std::vector<double> u;
};

/// Result of evolve().
struct Trajectory {
    std::vector<StepRecord> records;   ///< one per computed state, including step 0
    std::vector<Snapshot> snapshots;   ///< step 0, every snapshot_every, and the final state
    std::optional<double> extinction_time; ///< first t with osc(u) < eps, if reached
    bool halted_early = false;         ///< true when extinction stopped the loop
    bool aborted_nonconverged = false; ///< true when abort_on_nonconverged fired
};

/// Run the implicit time stepping from u0.  Each step solves the resolvent
/// problem with f = current state; the dual variable is threaded through as a
/// warm start when enabled.  The loop stops after params.steps steps, or
/// earlier on extinction (osc below threshold) or on a non-converged inner
/// solve when abort_on_nonconverged is set.
Trajectory evolve(const std::vector<double>& u0, const FlowParams& params,
                  const SpectralCache& cache);

/// First time t with osc(u(t)) < eps in a recorded trajectory (eps must be
/// positive); nullopt when no recorded state qualifies.
std::optional<double> detect_extinction(const Trajectory& traj, double eps);

/// The per-step speeds ||u^m - u^{m-1}||_{-s} / tau for m >= 1 (empty when the
/// trajectory holds fewer than two states).
std::vector<double> discrete_speed(const Trajectory& traj);

} // namespace tvflow
