#include "tvflow/operators.hpp"

#include "tvflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tvflow {

namespace {

void require_length(const std::vector<double>& u, const Grid& grid, const char* what) {
    if (static_cast<int>(u.size()) != grid.n)
        throw ContractViolation(std::string(what) + ": vector length " +
                                std::to_string(u.size()) + " does not match grid size " +
                                std::to_string(grid.n));
}

} // namespace

std::vector<double> grad(const std::vector<double>& u, const Grid& grid) {
    require_length(u, grid, "grad");
    const int n = grid.n;
    std::vector<double> g(n);
    for (int j = 0; j < n; ++j)
        g[j] = (u[j + 1 == n ? 0 : j + 1] - u[j]) / grid.h;
    return g;
}

std::vector<double> divergence(const std::vector<double>& z, const Grid& grid) {
    require_length(z, grid, "divergence");
    const int n = grid.n;
    std::vector<double> d(n);
    for (int j = 0; j < n; ++j)
        d[j] = (z[j == 0 ? n - 1 : j - 1] - z[j]) / grid.h;
    return d;
}

double tv(const std::vector<double>& u, const Grid& grid) {
    require_length(u, grid, "tv");
    const int n = grid.n;
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
        acc += std::abs(u[j + 1 == n ? 0 : j + 1] - u[j]);
    return acc;
}

std::vector<double> project_ball(const std::vector<double>& y) {
    std::vector<double> z(y.size());
    for (std::size_t j = 0; j < y.size(); ++j)
        z[j] = std::clamp(y[j], -1.0, 1.0);
    return z;
}

} // namespace tvflow
