#pragma once

#include "fracfront/core.hpp"

#include <Eigen/Dense>

#include <vector>

namespace fracfront {

/// Discrete (-d_xx)^alpha on the interior nodes 1..n-2 of a grid.
///
/// The represented function is the piecewise-linear interpolant of the node
/// values on [-b, b] continued by the constant exterior states. At node i the
/// integral is split at radius h: the near field uses the second-order
/// regularized integrand (exact for quadratics), the field beyond h integrates
/// the kernel exactly against the hat functions, and the parts beyond +-b are
/// the closed form c_alpha/(2 alpha) R^{-2 alpha}. A correction on the nearest
/// neighbours removes the leading linear-interpolation defect, so the scheme
/// reproduces quadratics exactly on the infinite grid. All off-diagonal
/// couplings are non-positive.
struct OperatorAssembly {
    Grid grid;
    double alpha = 0.0;
    double c_alpha = 0.0;
    double split_radius = 0.0;

    /// (n-2) x (n-2) couplings between interior nodes, diagonal included.
    Eigen::MatrixXd interior_matrix;
    /// Couplings of each interior node to the boundary nodes 0 and n-1 (<= 0).
    Eigen::VectorXd boundary_left;
    Eigen::VectorXd boundary_right;
    /// Coefficients of the exterior states beyond -b and b (<= 0).
    Eigen::VectorXd tail_left;
    Eigen::VectorXd tail_right;

    /// Contribution of the exterior states when the boundary nodes carry them as values.
    Eigen::VectorXd exterior_offset(double left = 0.0, double right = 1.0) const;

    std::size_t interior_size() const noexcept { return grid.size() - 2; }
};

/// Hat-function kernel weights in units of c_alpha h^{-2 alpha}: entry m couples nodes at
/// distance m h. `count` entries are produced (entry 0 is unused and set to 0).
std::vector<double> kernel_weights(double alpha, std::size_t count);

/// Weight of the last cell before a boundary node at distance m h (units of c_alpha h^{-2 alpha}).
double boundary_cell_weight(double alpha, std::size_t m);

/// Sum over cells k >= 1 of the integral of (t-k)(k+1-t) t^{-1-2 alpha} on [k, k+1].
double interpolation_defect(double alpha);

/// Fractional assembly; alpha in (0,1), n >= 16.
OperatorAssembly assemble(const Grid& grid, const ProblemSpec& spec);
OperatorAssembly assemble(const Grid& grid, double alpha);

/// Standard second difference (the alpha = 1 operator -u'').
OperatorAssembly assemble_local_laplacian(const Grid& grid);

/// Discrete operator at the interior nodes (length n-2).
Eigen::VectorXd apply(const OperatorAssembly& assembly, const Profile& p);

/// Same, returned on all n nodes with NaN at the two boundary nodes.
std::vector<double> apply_full(const OperatorAssembly& assembly, const Profile& p);

/// Grid used by `symbol_check` when none is supplied: half-width an odd multiple of
/// pi/(2 xi) (so cos vanishes at the boundary nodes) and spacing h.
Grid symbol_check_grid(double xi, double h, double min_half_width = 60.0);

/// Relative max error of the discrete operator on cos(xi x) against |xi|^{2 alpha} cos(xi x)
/// over the central third of the grid. The grid function vanishes outside [-b, b], so the
/// reference carries the exact contribution of the missing cosine tails (computed by
/// quadrature), leaving only the discretization error. For xi = 0 the absolute error is returned.
double symbol_check(double alpha, double xi, const Grid& grid);
double symbol_check(const ProblemSpec& spec, double xi, const Grid& grid);

/// Closed-form integrals of the operator of a profile over the two exterior half-lines.
/// Returns {integral over x < -b, integral over x > b}.
std::pair<double, double> exterior_operator_integrals(const Profile& p, double alpha, double c_alpha);

} // namespace fracfront
