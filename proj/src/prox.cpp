#include "tvflow/prox.hpp"

#include "tvflow/errors.hpp"
#include "tvflow/operators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

namespace tvflow {

namespace {

std::string num_str(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

double stability_max_lambda(double s, double tau, const SpectralCache& cache) {
    if (!std::isfinite(tau) || !(tau > 0.0))
        throw ConfigError("tau must be positive, got " + num_str(tau));
    if (!std::isfinite(s) || s < 0.0 || s > 1.0)
        throw ConfigError("fractional index must lie in [0, 1], got " + num_str(s));
    return 2.0 / (tau * std::pow(cache.mu_max(), s + 1.0));
}

void validate_params(const SolverParams& params, const SpectralCache& cache) {
    if (!std::isfinite(params.s) || params.s < 0.0 || params.s > 1.0)
        throw ConfigError("fractional index must lie in [0, 1], got " + num_str(params.s));
    if (params.s != cache.s())
        throw ConfigError("solver s = " + num_str(params.s) +
                          " does not match the spectral cache (built for s = " +
                          num_str(cache.s()) + ")");
    if (!std::isfinite(params.tau) || !(params.tau > 0.0))
        throw ConfigError("tau must be positive, got " + num_str(params.tau));
    if (!(params.tol_z >= 0.0) || !(params.tol_gap >= 0.0))
        throw ConfigError("tolerances must be non-negative");
    if (params.max_iter < 1)
        throw ConfigError("max_iter must be at least 1, got " + std::to_string(params.max_iter));
    if (!(params.safety > 0.0) || !(params.safety < 1.0))
        throw ConfigError("safety must lie in (0, 1), got " + num_str(params.safety));
    if (!(params.ergodic_p > 0.5) || !(params.ergodic_p <= 1.0))
        throw ConfigError("ergodic averaging exponent must lie in (0.5, 1], got " +
                          num_str(params.ergodic_p));
    if (params.lambda) {
        const double lambda = *params.lambda;
        if (!std::isfinite(lambda) || !(lambda > 0.0))
            throw ConfigError("lambda must be positive, got " + num_str(lambda));
        const double bound = stability_max_lambda(params.s, params.tau, cache);
        if (!(lambda < bound))
            throw ConfigError("lambda = " + num_str(lambda) +
                              " violates the stability condition mu_max^{s+1} * lambda * tau < 2; "
                              "the largest stable lambda is " +
                              num_str(bound));
    }
}

double resolve_lambda(const SolverParams& params, const SpectralCache& cache) {
    validate_params(params, cache);
    if (params.lambda)
        return *params.lambda;
    return params.safety * stability_max_lambda(params.s, params.tau, cache);
}

std::vector<double> dual_step(const std::vector<double>& z, const std::vector<double>& f,
                              const SolverParams& params, const SpectralCache& cache) {
    const double lambda = resolve_lambda(params, cache);
    const Grid& grid = cache.grid();
    const int n = grid.n;
    if (static_cast<int>(z.size()) != n || static_cast<int>(f.size()) != n)
        throw ContractViolation("dual_step: vector lengths must match the grid size " +
                                std::to_string(n));
    // u = f + tau L^s div z, then descend the dual energy along its gradient
    // grad(u) and project back onto the box.
    const std::vector<double> d = divergence(z, grid);
    const std::vector<double> m = apply_frac_power(cache, d, FracSign::plus);
    std::vector<double> u(n);
    for (int j = 0; j < n; ++j)
        u[j] = f[j] + params.tau * m[j];
    const std::vector<double> w = grad(u, grid);
    std::vector<double> next(n);
    bool finite = true;
    for (int j = 0; j < n; ++j) {
        next[j] = std::clamp(z[j] - lambda * w[j], -1.0, 1.0);
        finite = finite && std::isfinite(next[j]);
    }
    if (!finite)
        throw DivergenceError(
            "dual step produced non-finite values; step sizes must satisfy "
            "mu_max^{s+1} * lambda * tau < 2 (largest stable lambda = " +
            num_str(stability_max_lambda(params.s, params.tau, cache)) + ")");
    return next;
}

namespace {

// Energy pieces at the current iterate, sharing one operator application:
// with b = grad f and Hz = tau L^{s+1} z,
//   grad u       = b + Hz
//   dual F(z)    = ||f||_{-s}^2/(2 tau) + <b,z> + <z,Hz>/2
//   primal E(u)  = <z,Hz>/2 + sum|grad u|
//   gap          = <z,Hz> + sum|grad u| + <b,z>
// (the fidelity term satisfies ||u-f||_{-s}^2 = tau <z,Hz> since div z is
// mean-zero and L^{-s} L^s restricts to the identity there).
struct Energies {
    double dual = 0.0;
    double primal = 0.0;
    double gap = 0.0;
};

} // namespace

ProxResult solve_prox(const std::vector<double>& f, const SolverParams& params,
                      const SpectralCache& cache) {
    return solve_prox(f, params, cache, std::vector<double>(f.size(), 0.0));
}

ProxResult solve_prox(const std::vector<double>& f, const SolverParams& params,
                      const SpectralCache& cache, const std::vector<double>& z_start) {
    validate_params(params, cache);
    const Grid& grid = cache.grid();
    const int n = grid.n;
    if (static_cast<int>(f.size()) != n)
        throw ContractViolation("solve_prox: data length " + std::to_string(f.size()) +
                                " does not match grid size " + std::to_string(n));
    if (static_cast<int>(z_start.size()) != n)
        throw ContractViolation("solve_prox: warm-start length " + std::to_string(z_start.size()) +
                                " does not match grid size " + std::to_string(n));
    for (double x : f)
        if (!std::isfinite(x))
            throw ConfigError("solve_prox: data contains non-finite values");

    const double tau = params.tau;
    const double lambda =
        params.lambda ? *params.lambda
                      : params.safety * stability_max_lambda(params.s, params.tau, cache);
    const double f_offset = hs_inner(cache, f, f) / (2.0 * tau);
    const std::vector<double> b = grad(f, grid);

    std::vector<double> z = project_ball(z_start);
    std::vector<double> hz(n), gu(n), znext(n);

    const auto refresh = [&](Energies& e) {
        cache.apply_step_operator(z, hz);
        double z_hz = 0.0, b_z = 0.0, sum_abs_gu = 0.0;
        for (int j = 0; j < n; ++j) {
            hz[j] *= tau;
            const double g = b[j] + hz[j];
            gu[j] = g;
            z_hz += z[j] * hz[j];
            b_z += b[j] * z[j];
            sum_abs_gu += std::abs(g);
        }
        e.dual = f_offset + b_z + 0.5 * z_hz;
        e.primal = 0.5 * z_hz + sum_abs_gu;
        e.gap = z_hz + sum_abs_gu + b_z;
    };

    ProxResult res;
    res.history.reserve(static_cast<std::size_t>(
        std::min<long long>(params.max_iter + 1, 1 << 16)));
    ErgodicAverager averager(params.ergodic_p);

    Energies e;
    refresh(e);
    res.history.push_back({e.dual, e.primal, e.gap, std::numeric_limits<double>::infinity()});
    if (params.ergodic)
        averager.add(z);

    long long iterations = 0;
    bool converged = false;
    for (long long k = 1; k <= params.max_iter; ++k) {
        double step_inf = 0.0;
        for (int j = 0; j < n; ++j) {
            const double zj = std::clamp(z[j] - lambda * gu[j], -1.0, 1.0);
            step_inf = std::max(step_inf, std::abs(zj - z[j]));
            znext[j] = zj;
        }
        z.swap(znext);
        refresh(e);
        iterations = k;
        res.history.push_back({e.dual, e.primal, e.gap, step_inf});
        if (params.ergodic)
            averager.add(z);
        // NaN hides from the max() above, but poisons every energy dot.
        if (!std::isfinite(e.dual))
            throw DivergenceError(
                "dual iteration produced non-finite values at iteration " + std::to_string(k) +
                "; step sizes must satisfy mu_max^{s+1} * lambda * tau < 2 "
                "(largest stable lambda = " +
                num_str(stability_max_lambda(params.s, params.tau, cache)) + ")");
        // A tolerance of zero disables its criterion; the explicit guards also
        // keep a cancellation-negative gap from firing a "disabled" check.
        if (params.tol_z > 0.0 && step_inf < params.tol_z) {
            converged = true;
            break;
        }
        if (params.tol_gap > 0.0 && e.gap < params.tol_gap * (1.0 + std::abs(e.primal))) {
            converged = true;
            break;
        }
    }

    res.iterations = iterations;
    res.converged = converged;

    const std::vector<double> d = divergence(z, grid);
    std::vector<double> m(n);
    cache.apply_pow(d, FracSign::plus, m);
    res.v.resize(n);
    res.u.resize(n);
    for (int j = 0; j < n; ++j) {
        res.v[j] = -m[j];
        res.u[j] = f[j] - tau * res.v[j];
    }

    if (params.ergodic) {
        res.ergodic_z = averager.mean();
        const std::vector<double> dbar = divergence(*res.ergodic_z, grid);
        std::vector<double> mbar(n);
        cache.apply_pow(dbar, FracSign::plus, mbar);
        std::vector<double> ubar(n);
        for (int j = 0; j < n; ++j)
            ubar[j] = f[j] + tau * mbar[j];
        res.ergodic_u = std::move(ubar);
    }

    res.z = std::move(z);
    return res;
}

double duality_gap(const std::vector<double>& u, const std::vector<double>& z,
                   const std::vector<double>& f, const SolverParams& params,
                   const SpectralCache& cache) {
    validate_params(params, cache);
    const Grid& grid = cache.grid();
    const int n = grid.n;
    if (static_cast<int>(u.size()) != n || static_cast<int>(z.size()) != n ||
        static_cast<int>(f.size()) != n)
        throw ContractViolation("duality_gap: vector lengths must match the grid size " +
                                std::to_string(n));
    const double tau = params.tau;

    const std::vector<double> d = divergence(z, grid);
    std::vector<double> m(n);
    cache.apply_pow(d, FracSign::plus, m);

    double worst = 0.0, f_inf = 0.0, m_inf = 0.0;
    for (int j = 0; j < n; ++j) {
        worst = std::max(worst, std::abs(u[j] - (f[j] + tau * m[j])));
        f_inf = std::max(f_inf, std::abs(f[j]));
        m_inf = std::max(m_inf, std::abs(m[j]));
    }
    if (!(worst <= 1e-9 * (1.0 + f_inf + tau * m_inf)))
        throw ContractViolation(
            "duality_gap: inconsistent pair, ||u - (f + tau L^s div z)||_inf = " + num_str(worst));

    std::vector<double> diff(n), w(n);
    for (int j = 0; j < n; ++j) {
        diff[j] = u[j] - f[j];
        w[j] = tau * m[j] + f[j];
    }
    const double fidelity = hs_inner(cache, diff, diff) / (2.0 * tau);
    const std::vector<double> gu = grad(u, grid);
    double j_u = 0.0;
    for (int j = 0; j < n; ++j)
        j_u += std::abs(gu[j]);
    const double dual = hs_inner(cache, w, w) / (2.0 * tau);
    const double offset = hs_inner(cache, f, f) / (2.0 * tau);
    return fidelity + j_u + dual - offset;
}

ErgodicAverager::ErgodicAverager(double p) : p_(p) {
    if (!(p > 0.5) || !(p <= 1.0))
        throw ConfigError("ergodic averaging exponent must lie in (0.5, 1], got " + num_str(p));
}

void ErgodicAverager::add(const std::vector<double>& w) {
    if (n_items_ == 0)
        mean_.assign(w.size(), 0.0);
    else if (w.size() != mean_.size())
        throw ContractViolation("ergodic averager: iterate length changed from " +
                                std::to_string(mean_.size()) + " to " + std::to_string(w.size()));
    const double beta = std::pow(static_cast<double>(n_items_) + 1.0, -p_);
    weight_sum_ += beta;
    const double c = beta / weight_sum_;
    for (std::size_t j = 0; j < mean_.size(); ++j)
        mean_[j] += c * (w[j] - mean_[j]);
    ++n_items_;
}

std::vector<double> ergodic_average(const std::vector<std::vector<double>>& iterates,
                                    const std::vector<double>& beta) {
    if (iterates.empty())
        throw ContractViolation("ergodic_average: no iterates");
    if (beta.size() != iterates.size())
        throw ContractViolation("ergodic_average: " + std::to_string(beta.size()) +
                                " weights for " + std::to_string(iterates.size()) + " iterates");
    std::vector<double> mean(iterates.front().size(), 0.0);
    double weight_sum = 0.0;
    for (std::size_t k = 0; k < iterates.size(); ++k) {
        if (!(beta[k] > 0.0))
            throw ContractViolation("ergodic_average: weights must be positive");
        if (iterates[k].size() != mean.size())
            throw ContractViolation("ergodic_average: iterate lengths differ");
        weight_sum += beta[k];
        const double c = beta[k] / weight_sum;
        for (std::size_t j = 0; j < mean.size(); ++j)
            mean[j] += c * (iterates[k][j] - mean[j]);
    }
    return mean;
}

} // namespace tvflow
