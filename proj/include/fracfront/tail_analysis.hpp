#pragma once

#include "fracfront/core.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace fracfront {

/// Interval [x_lo, x_hi] of negative abscissae.
struct TailWindow {
    double x_lo = 0.0;
    double x_hi = 0.0;
};

/// [-b/2, -b/10]: clear of the reaction zone and of the boundary layer.
TailWindow default_tail_window(const Grid& grid);

struct TailFit {
    TailWindow window;
    /// value ~ C |x|^{-p}
    double exponent = 0.0;
    double constant = 0.0;
    /// RMS residual of the log-log least squares.
    double residual = 0.0;
    std::size_t points = 0;
    /// Exponent q of the indicator value |x|^q (2 alpha - 1 for phi, 2 alpha for phi').
    double indicator_exponent = 0.0;
    double indicator_sup = 0.0;
    double indicator_inf = 0.0;
};

/// Log-log least squares of value against |x| over the samples inside the window.
/// Needs >= 20 samples spanning >= half a decade; non-positive values are a contract violation.
TailFit fit_tail(std::span<const double> x, std::span<const double> value, TailWindow window,
                 double indicator_exponent);

struct DerivativeLowerBound {
    /// inf over the window of phi'(x) |x|^{2 alpha}
    double m_est = 0.0;
    double inner_inf = 0.0; ///< same infimum over the half of the window nearer the front
    double outer_inf = 0.0; ///< and over the far half
    bool pass = false;
};

/// Passes when m_est > 0 and the infima over the two halves differ by less than 50%.
DerivativeLowerBound verify_derivative_lower_bound(std::span<const double> x, std::span<const double> dphi,
                                                   double alpha, TailWindow window);
DerivativeLowerBound verify_derivative_lower_bound(const FrontSolution& sol, const ProblemSpec& spec,
                                                   TailWindow window);

enum class DominationSide {
    Upper, ///< phi <= phi_eps, the scaled lower-kind power tail
    Lower, ///< phi' >= r phibar_eps on the tail, phibar the upper-kind power tail
};

std::string_view to_string(DominationSide side);

struct DominationReport {
    DominationSide side = DominationSide::Upper;
    double epsilon = 0.0;
    /// Lower side: drift k and radius A of the derivative sub-solution, and the factor r.
    double drift = 0.0;
    double radius = 0.0;
    double r = 0.0;
    /// Interval whose nodes are compared.
    TailWindow checked;
    std::size_t nodes_checked = 0;
    /// Compared nodes where the comparison function is below its constant state 1
    /// (upper side; equals nodes_checked on the lower side).
    std::size_t active_nodes = 0;
    std::size_t violations = 0;
    double worst_x = 0.0;
    /// Smallest (comparison - solution) margin, signed so that negative means violation.
    double worst_margin = 0.0;
    bool passed = false;
};

struct DominationOptions {
    /// Multiplies the epsilon prescribed by the construction.
    double epsilon_factor = 1.0;
    /// Drift fraction handed to derivative_subsolution (lower side). Non-positive picks,
    /// among 0.5 .. 0.95, the widest matching window that leaves a tail to check.
    double drift_fraction = 0.0;
};

/// Upper: epsilon from epsilon^{2 alpha - 1} K = c0 / 2, every node checked.
/// Lower: epsilon from epsilon^{2 alpha - 1} k = c0, r = min phi' / phibar_eps on
/// (-A / epsilon, -1 / epsilon) (phi' interpolated between nodes), checked on the nodes
/// of [-0.9 b, -A / epsilon].
DominationReport check_domination(const FrontSolution& sol, const ProblemSpec& spec, DominationSide side,
                                  const DominationOptions& options = {});

/// Boundedness of phi |x|^{2 alpha - 1} under window extension, and the fits used by
/// the acceptance of the tail bounds.
struct TailBoundsReport {
    TailFit profile_fit;
    TailFit derivative_fit;
    DerivativeLowerBound derivative_bound;
    /// sup of phi |x|^{2 alpha - 1} on [-b/4, -b/10], [-b/2, -b/10], [-0.9 b, -b/10]
    std::vector<double> nested_sups;
    /// max / min of nested_sups
    double sup_variation = 0.0;
    bool upper_bounded = false;
    bool exponent_consistent = false;
    bool passed = false;
};

/// Fits use `window` (default_tail_window when empty); the nested windows always end at -b/10.
TailBoundsReport check_tail_bounds(const FrontSolution& sol, const ProblemSpec& spec,
                                   std::optional<TailWindow> window = std::nullopt);

} // namespace fracfront
