#include "tvflow/spectral.hpp"

#include "tvflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace tvflow {

namespace {

// Twiddle table w[m] = exp(sign * 2 pi i m / n).
std::vector<std::complex<double>> twiddles(int n, double sign) {
    std::vector<std::complex<double>> w(n);
    for (int m = 0; m < n; ++m)
        w[m] = std::polar(1.0, sign * 2.0 * std::numbers::pi * m / n);
    return w;
}

// Compensated complex accumulator; keeps the direct O(N^2) transforms
// accurate enough for the 10-epsilon round-trip contract.
struct KahanSum {
    std::complex<double> sum{0.0, 0.0};
    std::complex<double> comp{0.0, 0.0};

    void add(std::complex<double> term) {
        const std::complex<double> y = term - comp;
        const std::complex<double> t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

// out_j = sum_i kern2[n + j - i] * u_i for a doubled kernel of length 2n.
void conv_circ(const std::vector<double>& kern2, const std::vector<double>& u,
               std::vector<double>& out) {
    const int n = static_cast<int>(u.size());
    const double* k2 = kern2.data();
    const double* uv = u.data();
    for (int j = 0; j < n; ++j) {
        const double* krow = k2 + n + j;
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += krow[-i] * uv[i];
        out[j] = acc;
    }
}

// Doubled, index-symmetrized real kernel whose circulant has the given real
// symbol: kern[j] = (1/N) sum_k symbol_k exp(2 pi i j k / N).
std::vector<double> kernel_from_symbol(const std::vector<double>& symbol) {
    Spectrum spec;
    spec.coeff.assign(symbol.begin(), symbol.end());
    std::vector<double> kern = idft(spec);
    const int n = static_cast<int>(kern.size());
    for (int j = 1; 2 * j <= n; ++j) {
        const double avg = 0.5 * (kern[j] + kern[n - j]);
        kern[j] = avg;
        kern[n - j] = avg;
    }
    std::vector<double> doubled(2 * n);
    for (int t = 0; t < 2 * n; ++t)
        doubled[t] = kern[t % n];
    return doubled;
}

} // namespace

Spectrum dft(const std::vector<double>& u) {
    const int n = static_cast<int>(u.size());
    Spectrum spec;
    spec.coeff.resize(n);
    if (n == 0)
        return spec;
    const auto w = twiddles(n, -1.0);
    for (int k = 0; k < n; ++k) {
        KahanSum acc;
        int idx = 0;
        for (int j = 0; j < n; ++j) {
            acc.add(u[j] * w[idx]);
            idx += k;
            if (idx >= n)
                idx -= n;
        }
        spec.coeff[k] = acc.sum;
    }
    return spec;
}

Spectrum dft(const std::vector<double>& u, const Grid& grid) {
    if (static_cast<int>(u.size()) != grid.n)
        throw ConfigError("dft: vector length " + std::to_string(u.size()) +
                          " does not match grid size " + std::to_string(grid.n));
    return dft(u);
}

std::vector<double> idft(const Spectrum& spec) {
    const int n = spec.size();
    std::vector<double> out(n);
    if (n == 0)
        return out;
    const auto w = twiddles(n, +1.0);
    double scale = 0.0;
    for (const auto& c : spec.coeff)
        scale += std::abs(c);
    scale /= n;
    for (int j = 0; j < n; ++j) {
        KahanSum acc;
        int idx = 0;
        for (int k = 0; k < n; ++k) {
            acc.add(spec.coeff[k] * w[idx]);
            idx += j;
            if (idx >= n)
                idx -= n;
        }
        const std::complex<double> value = acc.sum / static_cast<double>(n);
        if (std::abs(value.imag()) > 1e-10 * scale)
            throw InternalError("idft: imaginary residue " + std::to_string(value.imag()) +
                                " exceeds 1e-10 of coefficient scale; spectrum is not that of a "
                                "real vector");
        out[j] = value.real();
    }
    return out;
}

std::vector<double> laplacian_eigenvalues(const Grid& grid) {
    const int n = grid.n;
    const double q = 1.0 / (grid.h * grid.h);
    // First row of grad^T grad, accumulated so that N = 2 (where the +-1
    // offsets coincide) comes out right.
    std::vector<double> row(n, 0.0);
    row[0] += 2.0 * q;
    row[grid.wrap(1)] -= q;
    row[grid.wrap(-1)] -= q;
    const Spectrum spec = dft(row);
    double max_abs = 0.0;
    for (const auto& c : spec.coeff)
        max_abs = std::max(max_abs, std::abs(c));
    std::vector<double> mu(n);
    for (int k = 0; k < n; ++k) {
        if (std::abs(spec.coeff[k].imag()) > 1e-12 * max_abs)
            throw InternalError("laplacian spectrum has a non-real entry at mode " +
                                std::to_string(k));
        mu[k] = spec.coeff[k].real();
    }
    if (std::abs(mu[0]) > 1e-12 * max_abs)
        throw InternalError("laplacian zero mode is not annihilated");
    mu[0] = 0.0;
    for (int k = 1; 2 * k <= n; ++k) {
        const double avg = 0.5 * (mu[k] + mu[n - k]);
        mu[k] = avg;
        mu[n - k] = avg;
    }
    for (double& v : mu)
        v = std::max(v, 0.0);
    return mu;
}

SpectralCache::SpectralCache(const Grid& grid, double s) : grid_(grid), s_(s) {
    if (!std::isfinite(s) || s < 0.0 || s > 4.0)
        throw ConfigError("fractional index must lie in [0, 4], got " + std::to_string(s));
    mu_ = laplacian_eigenvalues(grid_);
    mu_max_ = *std::max_element(mu_.begin(), mu_.end());
    const int n = grid_.n;
    mu_pow_s_.assign(n, 0.0);
    mu_pow_neg_s_.assign(n, 0.0);
    std::vector<double> step_symbol(n, 0.0);
    for (int k = 1; k < n; ++k) {
        mu_pow_s_[k] = std::pow(mu_[k], s_);
        mu_pow_neg_s_[k] = std::pow(mu_[k], -s_);
        step_symbol[k] = std::pow(mu_[k], s_ + 1.0);
    }
    kern_s_ = kernel_from_symbol(mu_pow_s_);
    kern_neg_s_ = kernel_from_symbol(mu_pow_neg_s_);
    kern_step_ = kernel_from_symbol(step_symbol);
}

void SpectralCache::require_length(const std::vector<double>& u) const {
    if (static_cast<int>(u.size()) != grid_.n)
        throw ContractViolation("vector length " + std::to_string(u.size()) +
                                " does not match grid size " + std::to_string(grid_.n));
}

namespace {

// out = (2 u_j - u_{j-1} - u_{j+1}) / h^2, the circulant grad^T grad stencil.
void second_difference(const std::vector<double>& u, double h, std::vector<double>& out) {
    const int n = static_cast<int>(u.size());
    const double q = 1.0 / (h * h);
    for (int j = 0; j < n; ++j) {
        const double um = u[j == 0 ? n - 1 : j - 1];
        const double up = u[j + 1 == n ? 0 : j + 1];
        out[j] = q * (2.0 * u[j] - um - up);
    }
}

void subtract_mean(const std::vector<double>& u, std::vector<double>& out) {
    const int n = static_cast<int>(u.size());
    double mean = 0.0;
    for (double x : u)
        mean += x;
    mean /= n;
    for (int j = 0; j < n; ++j)
        out[j] = u[j] - mean;
}

} // namespace

void SpectralCache::apply_pow(const std::vector<double>& u, FracSign sign,
                              std::vector<double>& out) const {
    require_length(u);
    out.resize(grid_.n);
    if (s_ == 0.0) {
        subtract_mean(u, out); // L^0 is the mean-zero projector for both signs
        return;
    }
    if (s_ == 1.0 && sign == FracSign::plus) {
        second_difference(u, grid_.h, out);
        return;
    }
    conv_circ(sign == FracSign::plus ? kern_s_ : kern_neg_s_, u, out);
}

void SpectralCache::apply_step_operator(const std::vector<double>& z,
                                        std::vector<double>& out) const {
    require_length(z);
    out.resize(grid_.n);
    if (s_ == 0.0) {
        second_difference(z, grid_.h, out); // L^1
        return;
    }
    if (s_ == 1.0) {
        std::vector<double> tmp(grid_.n);
        second_difference(z, grid_.h, tmp); // L^2
        second_difference(tmp, grid_.h, out);
        return;
    }
    conv_circ(kern_step_, z, out);
}

std::vector<double> apply_frac_power(const SpectralCache& cache, const std::vector<double>& u,
                                     FracSign sign) {
    std::vector<double> out;
    cache.apply_pow(u, sign, out);
    return out;
}

double hs_inner(const SpectralCache& cache, const std::vector<double>& u,
                const std::vector<double>& v) {
    if (u.size() != v.size())
        throw ContractViolation("hs_inner: length mismatch " + std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()));
    const int n = cache.grid().n;
    if (static_cast<int>(u.size()) != n)
        throw ContractViolation("hs_inner: vector length " + std::to_string(u.size()) +
                                " does not match grid size " + std::to_string(n));
    if (cache.s() == 0.0) {
        double mu = 0.0, mv = 0.0;
        for (int j = 0; j < n; ++j) {
            mu += u[j];
            mv += v[j];
        }
        mu /= n;
        mv /= n;
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
            acc += (u[j] - mu) * (v[j] - mv);
        return acc;
    }
    std::vector<double> lu;
    cache.apply_pow(u, FracSign::minus, lu);
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
        acc += lu[j] * v[j];
    return acc;
}

double hs_norm(const SpectralCache& cache, const std::vector<double>& u) {
    return std::sqrt(std::max(hs_inner(cache, u, u), 0.0));
}

} // namespace tvflow
