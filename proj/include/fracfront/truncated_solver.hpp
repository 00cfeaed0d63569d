#pragma once

#include "fracfront/core.hpp"
#include "fracfront/fractional_operator.hpp"

#include <functional>
#include <optional>
#include <ostream>
#include <vector>

namespace fracfront {

enum class DriftScheme {
    Upwind,   ///< one-sided by the sign of c; keeps the M-matrix structure
    Centered, ///< second order, for accuracy studies
};

enum class SolveMethod { MonotoneIteration, DampedNewton };

std::string_view to_string(SolveMethod method);

enum class RootFinder {
    /// Newton on the bordered system for (phi, c) with phi(0) pinned (continued in the
    /// pinned value from the c = K solution if no start converges); the root is then
    /// bracketed by two fixed-speed solves at c_b -+ tol_c / 2.
    PinnedContinuation,
    Bisection,
    Brent, ///< bracketing inverse-quadratic steps (TOMS 748 variant)
};

std::string_view to_string(RootFinder finder);
RootFinder parse_root_finder(std::string_view name);

struct SolverOptions {
    /// Max-norm residual target; negative selects 1e-8 (1 + sup f).
    double tol_residual = -1.0;
    /// Envelope gap at which monotone iteration hands over to the Newton polish.
    double tol_envelope = 1e-4;
    int max_iter = 10000;
    /// Consecutive sweeps over which the geometric extrapolation of both envelopes must leave
    /// the gap open before the minimal and maximal solutions are declared distinct.
    int stall_sweeps = 100;
    int max_newton = 40;
    DriftScheme drift = DriftScheme::Upwind;
    /// Called with the interior envelopes before the first sweep (k = 0) and after every sweep.
    std::function<void(int k, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper)> on_sweep;

    double residual_target(double sup_f) const { return tol_residual > 0.0 ? tol_residual : 1e-8 * (1.0 + sup_f); }
};

/// Optional starting data for a fixed-speed solve. `lower` and `upper` must be a
/// discrete sub- and super-solution (on all n nodes, boundary nodes holding the
/// exterior states); `guess` is tried first with Newton.
struct FixedSpeedStart {
    std::optional<std::vector<double>> guess;
    std::optional<std::vector<double>> lower;
    std::optional<std::vector<double>> upper;
};

struct FixedSpeedSolve {
    double speed = 0.0;
    Profile profile;
    double residual_norm = 0.0;
    int iterations = 0;
    int newton_steps = 0;
    SolveMethod method = SolveMethod::MonotoneIteration;
    double envelope_gap = 0.0;
    /// Newton polish diverged; the result is the plain monotone-iteration profile.
    bool newton_failed = false;
    /// The envelopes converged to different limits (gap `envelope_gap`): the minimal and
    /// maximal solutions differ and the maximal one is returned.
    bool multiple_solutions = false;
};

/// Nonlinear problem A phi + c D phi = f(phi) on the interior nodes with exterior states 0 / 1.
struct FixedSpeedProblem {
    const OperatorAssembly& assembly;
    const IgnitionNonlinearity& f;
    double lipschitz = 0.0;
    double sup_f = 0.0;
};

FixedSpeedSolve solve_fixed_speed(double c, const Grid& grid, const ProblemSpec& spec,
                                  const OperatorAssembly& assembly, const SolverOptions& options = {},
                                  const FixedSpeedStart& start = {});
FixedSpeedSolve solve_fixed_speed(double c, const FixedSpeedProblem& problem, const SolverOptions& options = {},
                                  const FixedSpeedStart& start = {});

/// Interior residual A phi + c D phi - f(phi) of a full nodal vector (boundary nodes = exterior states).
std::vector<double> fixed_speed_residual(double c, const FixedSpeedProblem& problem, const std::vector<double>& phi,
                                         DriftScheme drift = DriftScheme::Upwind);

/// Discrete first derivative used by the solver, interior nodes only.
std::vector<double> drift_derivative(const std::vector<double>& phi, double h, double c, DriftScheme drift);

/// Speed bound K: the numerically verified super-solution threshold, raised to the
/// explicit intermediate-region constraint sup f A^{2 alpha} / (2 alpha - 1).
double speed_bound(const ProblemSpec& spec);

struct SpeedBracket {
    double c_low = 0.0;
    double c_high = 0.0;
    double g_low = 0.0;  ///< phi_{c_low}(0) - theta > 0
    double g_high = 0.0; ///< phi_{c_high}(0) - theta < 0
};

struct SpeedTraceRow {
    double speed = 0.0;
    double g = 0.0;
    int iterations = 0;
    int newton_steps = 0;
    double residual = 0.0;
};

struct ShootOptions {
    double tol_g = 1e-6;
    double tol_c = 1e-6;
    int max_steps = 200;
    RootFinder root_finder = RootFinder::PinnedContinuation;
    /// Bracket limit; non-positive selects speed_bound(spec).
    double speed_limit = -1.0;
    /// Expected speed. Bisection and Brent grow their bracket from a narrow window around
    /// it; the pinned solver uses it with `guess` as its first Newton start.
    std::optional<double> hint;
    double hint_width = 0.05;
    /// Profile used as the Newton start (e.g. the previous continuation stage).
    std::optional<std::vector<double>> guess;
    /// Check the signs of g at -K and K even when a hint is given.
    bool check_endpoints = true;
    /// The domain is too small when f(phi) at the last interior node exceeds this fraction
    /// of sup f: the reaction zone then runs into the burned-side boundary. Non-positive disables.
    double reaction_margin = 0.05;
    SolverOptions solver;
};

struct ShootResult {
    FixedSpeedSolve solve;
    double speed = 0.0;
    SpeedBracket bracket;
    std::vector<SpeedTraceRow> trace;
    /// g was non-increasing along every evaluated pair (an observation, not a requirement).
    bool monotone_g = true;
    /// The bracket has width <= tol_c. Otherwise it is [-K, K] (g NaN when the endpoint
    /// solves were skipped): on fine scales the discrete speed oscillates along the
    /// solution branch as nodes cross theta, and the pinned root could not be enclosed
    /// more tightly by fixed-speed solves.
    bool bracket_tight = true;

    void write_trace_csv(std::ostream& os) const;
};

/// Locates c_b in [-K, K] with phi_{c_b}(0) = theta. Throws DomainTooSmall when the
/// bracket endpoints do not give the required signs or the reaction zone reaches x = b.
ShootResult shoot_speed(const Grid& grid, const ProblemSpec& spec, const OperatorAssembly& assembly,
                        const ShootOptions& options = {});
ShootResult shoot_speed(const Grid& grid, const ProblemSpec& spec, double tol_c);

/// Same search for an arbitrary operator (used with the local Laplacian).
ShootResult shoot_speed(const FixedSpeedProblem& problem, double theta, double speed_limit,
                        const ShootOptions& options = {});

} // namespace fracfront
