#pragma once

#include "fracfront/core.hpp"
#include "fracfront/truncated_solver.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fracfront {

struct ClassicalOptions {
    /// Also solve the truncated problem with the second-difference Laplacian and compare.
    bool run_pipeline = true;
    double pipeline_b = 30.0;
    double pipeline_h = 0.05;
    DriftScheme pipeline_drift = DriftScheme::Centered;
    /// Half-width of the returned profile samples.
    double sample_half_width = 20.0;
    std::size_t samples = 801;
};

/// Front of -phi'' + c phi' = f(phi) (the local case alpha = 1).
struct ClassicalFront {
    double speed = 0.0;
    double tolerance = 0.0;
    /// |p(theta) - c theta| at the accepted speed, p = phi' as a function of phi.
    double mismatch = 0.0;
    std::vector<double> x;
    std::vector<double> phi;
    /// Max-norm residual of the local equation on the samples by centred differences
    /// (so it carries their O(h^2) error).
    double residual = 0.0;
    bool strictly_increasing = false;

    std::optional<double> pipeline_speed;
    double relative_difference = 0.0;
    /// Pipeline and phase-plane speeds agree within 1%.
    bool agreement = false;
};

/// Shooting in the phase plane (phi, p = phi'): leave phi = 1 along the unstable direction
/// p = |mu_-| (1 - phi), integrate dp/dphi = c - f(phi)/p down to theta and bisect on c
/// until p(theta) = c theta, which joins the exponential tail phi = theta e^{c x}.
ClassicalFront classical_front(const IgnitionNonlinearity& f, double tol = 1e-10,
                               const ClassicalOptions& options = {});

struct IvpRun {
    double alpha = 0.0;
    double L = 0.0;
    std::size_t n_f = 0;
    double dt = 0.0;
    double T = 0.0;
    std::vector<double> times;
    std::vector<double> positions; ///< x_theta(t)
    /// -slope of x_theta(t) over the second half of the run.
    double speed = 0.0;
    /// RMS deviation of x_theta from the fitted line (same half).
    double fit_residual = 0.0;
    double min_value = 0.0;
    double max_value = 1.0;
    /// u stayed non-decreasing in x at every recorded frame after the transient.
    bool monotone = true;
    std::vector<std::string> warnings;

    void write_csv(std::ostream& os) const;
};

struct IvpOptions {
    /// Record x_theta every `record_every` steps.
    int record_every = 10;
    /// Fraction of the run treated as transient for the monotonicity check.
    double transient = 0.5;
};

/// u_t = -(-d_xx)^alpha u + f(u) on [-L, L] from the smoothed step 1/(1 + e^{-x}) shifted so
/// u(0,0) = theta. Strang splitting: diffusion exact in the cosine basis (the even reflection
/// at both ends, cell-centred nodes), reaction by Heun half steps.
IvpRun ivp_speed(const ProblemSpec& spec, double L, std::size_t n_f, double dt, double T,
                 const IvpOptions& options = {});

} // namespace fracfront
