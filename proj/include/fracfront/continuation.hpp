#pragma once

#include "fracfront/core.hpp"
#include "fracfront/fractional_operator.hpp"
#include "fracfront/truncated_solver.hpp"

#include <optional>
#include <ostream>
#include <vector>

namespace fracfront {

struct ContinuationOptions {
    double b0 = 25.0;
    double h = 0.1;
    /// Convergence: |c_{b_k} - c_{b_{k-1}}| <= tol_c_cont and the max-norm profile change
    /// on the central half of the previous domain <= tol_profile.
    double tol_c_cont = 0.025;
    double tol_profile = 0.05;
    /// Number of times b may be doubled after the first stage.
    int max_doublings = 3;
    /// Largest node count a stage may use.
    std::size_t n_max = 8001;
    ShootOptions shoot;
};

/// Sequence of truncated solves with b doubling at fixed h.
struct ContinuationRecord {
    std::vector<ContinuationStage> stages;
    bool converged = false;
    /// Last computed stage with its diagnostics (also kept when convergence fails).
    std::optional<FrontSolution> final;
};

/// solve_front did not converge; carries the stages computed so far.
class ContinuationFailure : public Error {
public:
    ContinuationFailure(const std::string& what, ContinuationRecord record)
        : Error(what), record_(std::move(record)) {}
    const ContinuationRecord& record() const noexcept { return record_; }

private:
    ContinuationRecord record_;
};

struct LimitValues {
    double gamma0 = 0.0;
    double gamma1 = 1.0;
    /// Largest variation of the profile across either end slice.
    double variation = 0.0;
    bool flat = true;
    /// f(gamma0) and f(gamma1) both vanish to within the flatness tolerance.
    bool reaction_free = true;
};

/// Doubles b from b0 at fixed spacing h until the recorded speeds and profiles settle.
/// Diagnostics (residual, identities, limit values, history) are filled in on success.
FrontSolution solve_front(const ProblemSpec& spec, const ContinuationOptions& options = {});
FrontSolution solve_front(const ProblemSpec& spec, double b0, double h, double tol_c_cont, double tol_profile);

/// |integral over R of the discrete operator applied to the profile|: trapezoid over the
/// interior nodes plus the exterior contributions in closed form.
double check_conservation(const FrontSolution& sol, const OperatorAssembly& assembly);

/// Trapezoid integral of f(phi) over the grid.
double reaction_integral(const Profile& p, const IgnitionNonlinearity& f);

/// |int f(phi) - c (gamma1 - gamma0)| / |c| with gamma from `limit_values` (not normalized when c = 0).
double check_speed_mass_identity(const FrontSolution& sol, const ProblemSpec& spec);

/// End levels of the truncated profile: the values at the first and last interior nodes.
/// `flat` fails when the values over the outer 5% of interior nodes on either side vary by
/// more than `flatness_tol`.
LimitValues limit_values(const FrontSolution& sol, double flatness_tol = 0.05);
LimitValues limit_values(const FrontSolution& sol, const IgnitionNonlinearity& f, double flatness_tol = 0.05);

/// Residual max-norm of the full equation on the interior nodes.
double equation_residual(const FrontSolution& sol, const ProblemSpec& spec, const OperatorAssembly& assembly);

/// Columns x, phi, dphi, op_value, f_phi at 17 significant digits; op_value is empty
/// at the two boundary nodes.
void write_front_csv(std::ostream& os, const FrontSolution& sol, const ProblemSpec& spec,
                     const OperatorAssembly& assembly);

} // namespace fracfront
