#pragma once

#include "tvflow/grid.hpp"

#include <complex>
#include <vector>

namespace tvflow {

/// Discrete Fourier coefficients with the convention
///   u_hat_k = sum_{j=0}^{N-1} u_j exp(-2 pi i j k / N),
/// the inverse transform carrying the 1/N factor.
struct Spectrum {
    std::vector<std::complex<double>> coeff;

    int size() const { return static_cast<int>(coeff.size()); }
};

/// Forward transform of a real vector (direct O(N^2) summation with a
/// precomputed twiddle table).
Spectrum dft(const std::vector<double>& u);

/// Same, but checks length(u) == grid.n first.
Spectrum dft(const std::vector<double>& u, const Grid& grid);

/// Inverse transform of a spectrum that must represent a real vector.
/// Imaginary parts below 1e-10 relative to the coefficient scale are
/// discarded; larger residues raise InternalError.
std::vector<double> idft(const Spectrum& spec);

/// Eigenvalues mu_j of the periodic second-difference matrix L = grad^T grad,
/// obtained as the DFT of its first row (2/h^2 on the diagonal, -1/h^2 at
/// offsets +-1 mod N, accumulated when N = 2).  mu_0 = 0 exactly and
/// mu_j = (4/h^2) sin^2(pi j / N); returned values are real, non-negative and
/// symmetric (mu_j = mu_{N-j}).
std::vector<double> laplacian_eigenvalues(const Grid& grid);

/// Which power of L to apply: L^{+s} or the pseudo-inverse power L^{-s}.
enum class FracSign { plus, minus };

/// Precomputed spectral data for one (grid, s) pair: the Laplacian spectrum,
/// its +-s powers, and real convolution kernels realizing L^{+s}, L^{-s} and
/// the solver's step operator L^{s+1}.  The zero eigenvalue is treated as a
/// pseudo-inverse: both signs annihilate the mean component.  Immutable after
/// construction and safe to share across threads.
class SpectralCache {
  public:
    /// Build for a grid and fractional index s.  s in [0,1] is the solver
    /// range; values up to 4 are accepted so that composed powers (semigroup
    /// identities) can be evaluated directly.
    SpectralCache(const Grid& grid, double s);

    const Grid& grid() const { return grid_; }
    double s() const { return s_; }
    const std::vector<double>& mu() const { return mu_; }
    const std::vector<double>& mu_pow_s() const { return mu_pow_s_; }
    const std::vector<double>& mu_pow_neg_s() const { return mu_pow_neg_s_; }
    double mu_max() const { return mu_max_; }

    /// out = L^{+s} u or L^{-s} u (pseudo-inverse; output has zero mean).
    /// Exact fast paths: s = 0 -> mean-zero projection, s = 1 (plus sign) ->
    /// second-difference stencil; otherwise circulant convolution with the
    /// cached kernel.  out must not alias u.
    void apply_pow(const std::vector<double>& u, FracSign sign, std::vector<double>& out) const;

    /// out = L^{s+1} z, the circulant composition grad o L^s o grad^T used by
    /// one dual solver iteration (equal symbols: mu_k * mu_k^s).
    void apply_step_operator(const std::vector<double>& z, std::vector<double>& out) const;

  private:
    void require_length(const std::vector<double>& u) const;

    Grid grid_;
    double s_ = 0.0;
    double mu_max_ = 0.0;
    std::vector<double> mu_;            // Laplacian eigenvalues
    std::vector<double> mu_pow_s_;      // mu^s, entry 0 forced to 0
    std::vector<double> mu_pow_neg_s_;  // mu^{-s}, entry 0 forced to 0
    // Real circulant kernels stored doubled (length 2N, k[t] = k[t mod N]) so
    // the convolution inner loop needs no index wrap.
    std::vector<double> kern_s_;        // kernel of L^{+s}
    std::vector<double> kern_neg_s_;    // kernel of L^{-s}
    std::vector<double> kern_step_;     // kernel of L^{s+1}
};

/// result_hat_k = mu_k^{+-s} u_hat_k with the k = 0 term set to zero; the
/// result is real with zero mean.
std::vector<double> apply_frac_power(const SpectralCache& cache, const std::vector<double>& u,
                                     FracSign sign);

/// H^{-s} inner product (u, v)_{-s} = (1/N) sum_{k != 0} mu_k^{-s} u_hat_k conj(v_hat_k),
/// evaluated as <L^{-s} u, v> in real arithmetic.  Means of u and v do not
/// contribute (pseudo-inverse convention).
double hs_inner(const SpectralCache& cache, const std::vector<double>& u,
                const std::vector<double>& v);

/// sqrt(hs_inner(u, u)), clamped at zero against round-off.
double hs_norm(const SpectralCache& cache, const std::vector<double>& u);

} // namespace tvflow
