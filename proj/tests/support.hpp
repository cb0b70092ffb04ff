#pragma once

// Shared helpers for the test binaries: a deterministic RNG that does not
// depend on the standard library's distribution implementations, small dense
// linear-algebra oracles, and vector utilities.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace testsup {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double a, double b) {
    return a + (b - a) * uniform01(rng);
}

inline std::vector<double> random_vec(std::mt19937_64& rng, int n, double a = -1.0,
                                      double b = 1.0) {
    std::vector<double> u(n);
    for (double& x : u)
        x = uniform(rng, a, b);
    return u;
}

inline std::vector<double> random_mean_zero(std::mt19937_64& rng, int n, double a = -1.0,
                                            double b = 1.0) {
    std::vector<double> u = random_vec(rng, n, a, b);
    double mean = 0.0;
    for (double x : u)
        mean += x;
    mean /= n;
    for (double& x : u)
        x -= mean;
    return u;
}

inline double linf(const std::vector<double>& a) {
    double m = 0.0;
    for (double x : a)
        m = std::max(m, std::abs(x));
    return m;
}

inline double linf_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        acc += a[j] * b[j];
    return acc;
}

inline double l2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline double mean_of(const std::vector<double>& a) {
    double m = 0.0;
    for (double x : a)
        m += x;
    return m / static_cast<double>(a.size());
}

// ---- dense oracles ----

using Mat = std::vector<std::vector<double>>;

inline Mat zeros(int rows, int cols) { return Mat(rows, std::vector<double>(cols, 0.0)); }

// Dense periodic forward-difference matrix: (G u)_j = (u_{j+1} - u_j) / h.
inline Mat grad_matrix(int n, double h) {
    Mat g = zeros(n, n);
    for (int j = 0; j < n; ++j) {
        g[j][(j + 1) % n] += 1.0 / h;
        g[j][j] -= 1.0 / h;
    }
    return g;
}

inline Mat transpose(const Mat& a) {
    const int rows = static_cast<int>(a.size());
    const int cols = static_cast<int>(a.front().size());
    Mat t = zeros(cols, rows);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            t[j][i] = a[i][j];
    return t;
}

inline Mat matmul(const Mat& a, const Mat& b) {
    const int rows = static_cast<int>(a.size());
    const int inner = static_cast<int>(b.size());
    const int cols = static_cast<int>(b.front().size());
    Mat c = zeros(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < inner; ++k) {
            const double aik = a[i][k];
            for (int j = 0; j < cols; ++j)
                c[i][j] += aik * b[k][j];
        }
    return c;
}

inline std::vector<double> matvec(const Mat& a, const std::vector<double>& x) {
    const int rows = static_cast<int>(a.size());
    std::vector<double> y(rows, 0.0);
    for (int i = 0; i < rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j)
            acc += a[i][j] * x[j];
        y[i] = acc;
    }
    return y;
}

// I - (1/n) 1 1^T, the mean-zero projector.
inline Mat mean_zero_projector(int n) {
    Mat p = zeros(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            p[i][j] = (i == j ? 1.0 : 0.0) - 1.0 / n;
    return p;
}

// Solve A x = b by LU with partial pivoting (A and b copied).
inline std::vector<double> lu_solve(Mat a, std::vector<double> b) {
    const int n = static_cast<int>(a.size());
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col]))
                pivot = row;
        if (a[pivot][col] == 0.0)
            throw std::runtime_error("lu_solve: singular matrix");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int row = col + 1; row < n; ++row) {
            const double factor = a[row][col] / a[col][col];
            a[row][col] = 0.0;
            for (int j = col + 1; j < n; ++j)
                a[row][j] -= factor * a[col][j];
            b[row] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int row = n - 1; row >= 0; --row) {
        double acc = b[row];
        for (int j = row + 1; j < n; ++j)
            acc -= a[row][j] * x[j];
        x[row] = acc / a[row][row];
    }
    return x;
}

} // namespace testsup
