#pragma once

#include "tvflow/spectral.hpp"

#include <optional>
#include <vector>

namespace tvflow {

/// Parameters of one implicit (resolvent) step
///   u = argmin  (1/(2 tau)) ||u - f||_{-s}^2 + tv(u),
/// solved through its dual by projected gradient descent on
///   F(z) = (1/(2 tau)) || tau L^s div z + f ||_{-s}^2,  |z_j| <= 1,
/// with u = f + tau L^s div z.
struct SolverParams {
    double s = 0.0;     ///< fractional index in [0, 1]
    double tau = 0.1;   ///< time step (> 0)

    /// Dual step size.  Empty selects safety * stability_max_lambda; an
    /// explicit value must satisfy 0 < lambda < stability_max_lambda.
    std::optional<double> lambda;

    double tol_z = 1e-8;        ///< stop when ||z' - z||_inf < tol_z (0 disables)
    double tol_gap = 1e-7;      ///< stop when gap < tol_gap * (1 + |primal|) (0 disables)
    long long max_iter = 200000;///< hard iteration cap (>= 1)
    bool ergodic = false;       ///< also track weighted running averages
    double safety = 0.9;        ///< fraction of the stability bound for auto lambda, in (0, 1)
    double ergodic_p = 1.0;     ///< averaging exponent, weights (k+1)^{-p}, p in (0.5, 1]
};

/// Largest provably stable dual step size 2 / (tau * mu_max^{s+1}): the dual
/// Hessian is tau L^{s+1}, whose spectral norm is tau * mu_max^{s+1}.
double stability_max_lambda(double s, double tau, const SpectralCache& cache);

/// Throws ConfigError on any invalid field (range checks above, s must match
/// cache.s(), explicit lambda checked against the stability bound with the
/// bound quoted in the message).
void validate_params(const SolverParams& params, const SpectralCache& cache);

/// The step size actually used: explicit value if set, else
/// safety * stability_max_lambda.
double resolve_lambda(const SolverParams& params, const SpectralCache& cache);

/// Energies after each iteration.  Entry k describes the state after k
/// steps; entry 0 is the initial point with z_step_inf = +infinity.
struct IterRecord {
    double dual_energy = 0.0;   ///< F(z)
    /// (1/(2 tau)) ||u - f||_{-s}^2 + sum_j |(grad u)_j| at u = f + tau L^s div z.
    /// The regularizer is the solver-scale J(u) = tv(u) / h that the dual
    /// constraint set pairs with.
    double primal_energy = 0.0;
    double gap = 0.0;           ///< primal + dual - ||f||_{-s}^2 / (2 tau)  (>= 0)
    double z_step_inf = 0.0;    ///< ||z_k - z_{k-1}||_inf (+inf on entry 0)
};

/// Output of solve_prox.
struct ProxResult {
    std::vector<double> u;  ///< primal minimizer f + tau L^s div z
    std::vector<double> z;  ///< final dual variable
    std::vector<double> v;  ///< -L^s div z = (f - u) / tau, the flow velocity
    long long iterations = 0;
    bool converged = false; ///< true iff a tolerance fired before max_iter
    std::vector<IterRecord> history;

    /// Present when SolverParams::ergodic: primal/dual points built from the
    /// weighted average of all iterates z^0..z^K.
    std::optional<std::vector<double>> ergodic_u;
    std::optional<std::vector<double>> ergodic_z;
};

/// One projected-gradient update z' = P(z - lambda grad_z F(z)) where
/// grad_z F(z) = grad(f + tau L^s div z) = grad(u).  Throws DivergenceError
/// if the updated state is non-finite, quoting the stability bound.
std::vector<double> dual_step(const std::vector<double>& z, const std::vector<double>& f,
                              const SolverParams& params, const SpectralCache& cache);

/// Run the dual iteration from z = 0.
ProxResult solve_prox(const std::vector<double>& f, const SolverParams& params,
                      const SpectralCache& cache);

/// Same, warm-started from z_start (projected onto the constraint set first).
ProxResult solve_prox(const std::vector<double>& f, const SolverParams& params,
                      const SpectralCache& cache, const std::vector<double>& z_start);

/// Duality gap of a feasible pair:
///   gap(u, z) = (1/(2 tau)) ||u - f||_{-s}^2 + sum_j |(grad u)_j|
///             + (1/(2 tau)) ||tau L^s div z + f||_{-s}^2 - (1/(2 tau)) ||f||_{-s}^2.
/// Non-negative whenever |z_j| <= 1 and u = f + tau L^s div z; the pair is
/// checked for that consistency and ContractViolation is thrown if it fails.
double duality_gap(const std::vector<double>& u, const std::vector<double>& z,
                   const std::vector<double>& f, const SolverParams& params,
                   const SpectralCache& cache);

/// Incremental weighted average a_K = sum beta_k w_k / sum beta_k with
/// beta_k = (k+1)^{-p}, maintained in O(1) memory:
///   S += beta; a += (beta / S) (w - a).
class ErgodicAverager {
  public:
    explicit ErgodicAverager(double p = 1.0);

    /// Fold in the next iterate (k = number of items added so far).
    void add(const std::vector<double>& w);

    long long count() const { return n_items_; }
    const std::vector<double>& mean() const { return mean_; }

  private:
    double p_ = 1.0;
    long long n_items_ = 0;
    double weight_sum_ = 0.0;
    std::vector<double> mean_;
};

/// Batch form of the same average over an explicit list of iterates, with
/// caller-supplied weights beta_k (must be positive and match the list
/// length).
std::vector<double> ergodic_average(const std::vector<std::vector<double>>& iterates,
                                    const std::vector<double>& beta);

} // namespace tvflow
