#pragma once

#include "tvflow/grid.hpp"

#include <vector>

namespace tvflow {

/// Periodic forward difference, (grad u)_j = (u_{j+1} - u_j) / h with
/// u_N = u_0.
std::vector<double> grad(const std::vector<double>& u, const Grid& grid);

/// Transpose of grad: (div z)_j = (z_{j-1} - z_j) / h with z_{-1} = z_{N-1},
/// so that <grad u, z> = <u, div z> exactly (plain Euclidean dot products).
/// Named divergence to avoid colliding with std::div.
std::vector<double> divergence(const std::vector<double>& z, const Grid& grid);

/// Discrete total variation tv(u) = sum_j |u_{j+1} - u_j| (periodic).  Note
/// this is h * sum |grad u| and carries no further grid factor.
double tv(const std::vector<double>& u, const Grid& grid);

/// Componentwise projection onto the unit interval [-1, 1] (the dual
/// constraint set |z_j| <= 1; in 1D this equals y / max(|y|, 1) per entry).
std::vector<double> project_ball(const std::vector<double>& y);

} // namespace tvflow
