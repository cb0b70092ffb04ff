#pragma once

#include "tvflow/errors.hpp"

#include <string>

namespace tvflow {

/// Uniform periodic 1-D grid: nodes x_j = x0 + j*h for j = 0..n-1, with all
/// index arithmetic modulo n (node n is node 0 again).
struct Grid {
    int n = 0;       ///< number of nodes, at least 2
    double h = 1.0;  ///< node spacing, positive
    double x0 = 0.0; ///< coordinate of node 0

    Grid() = default;

    Grid(int n_, double h_, double x0_ = 0.0) : n(n_), h(h_), x0(x0_) {
        if (n < 2)
            throw ConfigError("grid needs at least 2 nodes, got " + std::to_string(n));
        if (!(h > 0.0))
            throw ConfigError("grid spacing must be positive");
    }

    /// Coordinate of node j (j need not be reduced modulo n).
    double x(int j) const { return x0 + j * h; }

    /// Reduce an index into [0, n).
    int wrap(int j) const {
        int m = j % n;
        return m < 0 ? m + n : m;
    }
};

} // namespace tvflow
