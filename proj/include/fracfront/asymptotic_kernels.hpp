#pragma once

#include "fracfront/core.hpp"

#include <ostream>
#include <vector>

namespace fracfront {

enum class TailKind {
    Lower, ///< |x|^{-beta} for x < -1, 1 for x >= -1 (beta in (0,1))
    Upper, ///< |x|^{-beta} for x < -1, 0 for x >= -1 (beta > 1)
};

/// Power-tail test function, optionally rescaled (x -> epsilon x) and reflected
/// (x -> 1 - phi(-x)).
struct PowerTailFunction {
    double beta = 0.5;
    TailKind kind = TailKind::Lower;
    double epsilon = 1.0;
    bool reflected = false;

    PowerTailFunction(double beta, TailKind kind, double epsilon = 1.0, bool reflected = false);

    double value(double x) const;
    double slope(double x) const;
};

/// Pointwise value of the power-tail function.
double eval_power_tail(const PowerTailFunction& fn, double x);

/// (-d_xx)^alpha fn(x) + c fn'(x) by adaptive quadrature of the singular integral.
/// The junction point of the underlying function (where it switches to its constant
/// state) is excluded.
double eval_operator_on_tail(const PowerTailFunction& fn, const ProblemSpec& spec, double c, double x);
double eval_operator_on_tail(const PowerTailFunction& fn, double alpha, double c, double x);

/// Two-term expansion of the unscaled, unreflected function at x < -1.
double leading_term(const PowerTailFunction& fn, const ProblemSpec& spec, double c, double x);
double leading_term(const PowerTailFunction& fn, double alpha, double c, double x);

struct ExpansionRow {
    double x = 0.0;
    double evaluated = 0.0;
    double predicted = 0.0;
    double ratio = 0.0;
    double remainder = 0.0;
};

struct ExpansionReport {
    double beta = 0.0;
    TailKind kind = TailKind::Lower;
    double speed = 0.0;
    std::vector<ExpansionRow> rows;
    /// p in |evaluated - predicted| ~ |x|^{-p}, from log-log least squares.
    double remainder_exponent = 0.0;
    /// Smallest |x| beyond which evaluated and predicted share their sign at every row.
    double sign_crossover = 0.0;

    void write_csv(std::ostream& os) const;
};

/// Rows on a logarithmic grid between x_min and x_max (both negative, x_max <= -10,
/// at least one decade apart).
ExpansionReport expansion_report(const PowerTailFunction& fn, const ProblemSpec& spec, double c, double x_min,
                                 double x_max, std::size_t n_points);
ExpansionReport expansion_report(const PowerTailFunction& fn, double alpha, double c, double x_min, double x_max,
                                 std::size_t n_points);

/// Speed above which the lower-kind function with beta = 2 alpha - 1 is a super-solution.
struct SupersolutionThreshold {
    /// c_alpha / (2 alpha (2 alpha - 1)): the far-field requirement.
    double far_field = 0.0;
    /// Matching radius: phi(-A) = theta, so f(phi) = 0 for x <= -A.
    double matching_radius = 0.0;
    /// Smallest speed K with L phi + K phi' >= 0 for x <= -A and >= sup f on (-A, -1).
    double speed = 0.0;
    /// Sample where the requirement on K is largest.
    double binding_x = 0.0;
};

SupersolutionThreshold supersolution_threshold(const ProblemSpec& spec);

/// Upper-kind function with beta = 2 alpha and drift k is a sub-solution of the
/// derivative equation for x <= -A.
struct DerivativeSubsolution {
    double drift = 0.0;
    double radius = 0.0;
};

/// Picks the drift k in (0, far-field threshold) and scans for the radius A beyond which
/// (-d_xx)^alpha phibar + k phibar' <= 0 on samples out to |x| = 1e4.
DerivativeSubsolution derivative_subsolution(const ProblemSpec& spec, double drift_fraction = 0.5);

} // namespace fracfront
