#pragma once

#include "fracfront/error.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fracfront {

/// Reaction-term families. All but `Ramp` vanish outside (theta, 1); `Ramp`
/// and `Zero` exist to exercise the validation failure paths.
enum class Family {
    Quadratic, ///< s (u - theta)(1 - u) on [theta, 1]
    Cubic,     ///< s (u - theta)^2 (1 - u) on [theta, 1]
    Ramp,      ///< s (u - theta) on [theta, 1]; f(1) != 0, not an ignition term
    Zero,      ///< f == 0
};

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

/// Ignition-type reaction term u -> f(u).
class IgnitionNonlinearity {
public:
    IgnitionNonlinearity(Family family, double theta, double scale = 1.0);

    Family family() const noexcept { return family_; }
    double theta() const noexcept { return theta_; }
    double scale() const noexcept { return scale_; }

    double operator()(double u) const noexcept;

    /// Derivative, taken one-sided from the left at the kinks u = theta and u = 1.
    double derivative(double u) const noexcept;

    /// Lipschitz bound of f on [0, 1], known in closed form for every family.
    double lipschitz_bound() const noexcept;

    /// sup f over [0, 1] by dense sampling followed by golden-section refinement.
    double supremum() const;

private:
    Family family_;
    double theta_;
    double scale_;
};

/// Outcome of one condition in `validate_nonlinearity`.
struct ValidationCheck {
    std::string condition;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool all_passed() const;
    const ValidationCheck* find(std::string_view condition) const;
};

/// Thrown by `require_valid` when a reaction term fails a structural check.
class ValidationFailure : public Error {
public:
    ValidationFailure(std::string condition, ValidationReport report);
    const std::string& condition() const noexcept { return condition_; }
    const ValidationReport& report() const noexcept { return report_; }

private:
    std::string condition_;
    ValidationReport report_;
};

/// Names of the structural conditions checked for an ignition term.
namespace conditions {
inline constexpr std::string_view nonnegative = "f >= 0";
inline constexpr std::string_view support = "supp f = [theta,1]";
inline constexpr std::string_view continuity = "f continuous";
inline constexpr std::string_view decreasing_at_one = "f'(1) < 0";
inline constexpr std::string_view nondegenerate = "sup f > 0";
} // namespace conditions

/// Samples f on [-1, 2] and checks the ignition-term conditions.
ValidationReport validate_nonlinearity(const IgnitionNonlinearity& f, std::size_t n_samples = 3001);

/// Same as `validate_nonlinearity` but throws `ValidationFailure` on the first failed check.
void require_valid(const IgnitionNonlinearity& f, std::size_t n_samples = 3001);

/// Constant c_alpha making the singular integral agree with the symbol |xi|^{2 alpha}:
/// c_alpha = 4^alpha Gamma(alpha + 1/2) / (sqrt(pi) |Gamma(-alpha)|).
double normalization_constant(double alpha);

/// The continuous problem: fractional order, reaction term and derived constants.
class ProblemSpec {
public:
    ProblemSpec(double alpha, IgnitionNonlinearity nonlinearity);

    double alpha() const noexcept { return alpha_; }
    double theta() const noexcept { return nonlinearity_.theta(); }
    double c_alpha() const noexcept { return c_alpha_; }
    double sup_f() const noexcept { return sup_f_; }
    double lipschitz() const noexcept { return lipschitz_; }
    const IgnitionNonlinearity& nonlinearity() const noexcept { return nonlinearity_; }

    /// Replaces the closed-form Lipschitz bound (must not be smaller than it).
    ProblemSpec with_lipschitz_bound(double bound) const;

private:
    double alpha_;
    IgnitionNonlinearity nonlinearity_;
    double c_alpha_;
    double sup_f_;
    double lipschitz_;
};

/// Uniform symmetric mesh x_i = (i - mid) h on [-b, b]; 0 is the node `mid`.
class Grid {
public:
    /// n must be odd and >= 3.
    Grid(double half_width, std::size_t n);

    /// Grid with spacing h and half-width round(b/h) h.
    static Grid with_spacing(double half_width, double h);

    double half_width() const noexcept { return b_; }
    double spacing() const noexcept { return h_; }
    std::size_t size() const noexcept { return n_; }
    std::size_t center() const noexcept { return (n_ - 1) / 2; }
    double node(std::size_t i) const noexcept;
    std::vector<double> nodes() const;

    bool operator==(const Grid& other) const noexcept;

private:
    double b_;
    std::size_t n_;
    double h_;
};

/// Node values on a grid plus the constant states prescribed outside [-b, b].
struct Profile {
    Grid grid;
    std::vector<double> values;
    double exterior_left = 0.0;
    double exterior_right = 1.0;

    Profile(Grid g, std::vector<double> v, double left = 0.0, double right = 1.0);

    bool is_nondecreasing(double tol = 0.0) const;
    bool within_exterior_range(double tol = 0.0) const;
    double at_center() const { return values[grid.center()]; }
};

/// One stage of the b -> infinity continuation.
struct ContinuationStage {
    double b = 0.0;
    std::size_t n = 0;
    double speed = 0.0;
    double residual = 0.0;
    double theta_error = 0.0;
    int bracket_evaluations = 0;
    /// Profile samples at x = -2, -1, 0, 1, 2 (a cheap fingerprint of the front core).
    std::vector<double> fingerprint;
    double speed_change = 0.0;
    double profile_change = 0.0;
};

struct DiagnosticsRecord {
    double residual_norm = 0.0;
    double conservation_residual = 0.0;
    double reaction_integral = 0.0;
    double speed_mass_residual = 0.0;
    double gamma0 = 0.0;
    double gamma1 = 1.0;
    bool limits_flat = true;
    double speed_bound = 0.0;
    std::vector<ContinuationStage> history;
    std::vector<std::string> warnings;
};

struct FrontSolution {
    Profile profile;
    double speed = 0.0;
    DiagnosticsRecord diagnostics;
};

/// Centered differences in the interior, one-sided at the two ends.
std::vector<double> derivative(const Profile& p);

/// Linear interpolation of a profile onto another grid; nodes outside the source
/// interval take the source exterior states.
Profile resample(const Profile& p, const Grid& target);

/// Trapezoid rule for samples on a uniform grid.
double trapezoid(std::span<const double> values, double h);

} // namespace fracfront
