#include "fracfront/oracles.hpp"

#include "fracfront/fractional_operator.hpp"

#include <boost/numeric/odeint.hpp>
#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <numbers>
#include <type_traits>

namespace fracfront {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 2>; // p, x

struct Trajectory {
    bool reached_theta = false;
    double p_theta = 0.0;
    std::vector<double> phi; ///< decreasing from 1 - delta to theta
    std::vector<double> x;   ///< x(phi) with x(1 - delta) = 0
    std::vector<double> p;   ///< phi' along the trajectory
};

/// Integrates (p, x) in phi from 1 - delta down to theta; stops if p reaches 0.
Trajectory shoot_down(const IgnitionNonlinearity& f, double c, double tol, bool keep)
{
    const double theta = f.theta();
    const double slope = f.derivative(1.0); // one-sided, < 0
    const double mu = 0.5 * (c - std::sqrt(c * c - 4.0 * slope));
    constexpr double delta = 1e-7;
    State s{-mu * delta, 0.0};
    double phi = 1.0 - delta;

    auto rhs = [&](const State& y, State& dy, double u) {
        const double p = std::max(y[0], 1e-300);
        dy[0] = c - f(u) / p;
        dy[1] = 1.0 / p;
    };
    auto stepper = odeint::make_controlled(0.01 * tol, 0.01 * tol, odeint::runge_kutta_dopri5<State>());
    Trajectory tr;
    if (keep) {
        tr.phi.push_back(phi);
        tr.x.push_back(0.0);
        tr.p.push_back(s[0]);
    }
    double dphi = -1e-4;
    int guard = 0;
    while (phi > theta && ++guard < 10000000) {
        if (phi + dphi < theta)
            dphi = theta - phi;
        State trial = s;
        double u = phi;
        if (stepper.try_step(rhs, trial, u, dphi) != odeint::success)
            continue;
        if (!(trial[0] > 0.0))
            return tr; // the trajectory hits p = 0 above theta
        s = trial;
        phi = u;
        if (keep) {
            tr.phi.push_back(phi);
            tr.x.push_back(s[1]);
            tr.p.push_back(s[0]);
        }
    }
    tr.reached_theta = phi <= theta;
    tr.p_theta = s[0];
    return tr;
}

/// p(theta) - c theta, negative when the trajectory dies before theta.
double mismatch(const IgnitionNonlinearity& f, double c, double tol)
{
    const auto tr = shoot_down(f, c, tol, false);
    return tr.reached_theta ? tr.p_theta - c * f.theta() : -c * f.theta();
}

} // namespace

ClassicalFront classical_front(const IgnitionNonlinearity& f, double tol, const ClassicalOptions& options)
{
    const double sup = f.supremum();
    if (!(sup > 0.0))
        throw DomainError("no front: f vanishes identically");
    if (!(f.derivative(1.0) < 0.0))
        throw DomainError("classical front needs f'(1) < 0");
    const double theta = f.theta();

    double lo = 0.0, hi = 2.0 * std::sqrt(f.lipschitz_bound()) + 1.0;
    if (!(mismatch(f, lo, tol) > 0.0) || !(mismatch(f, hi, tol) < 0.0))
        throw NumericalError("classical_front: shooting bracket not found");
    while (hi - lo > tol * std::max(1.0, hi)) {
        const double c = 0.5 * (lo + hi);
        (mismatch(f, c, tol) > 0.0 ? lo : hi) = c;
    }

    ClassicalFront out;
    out.speed = 0.5 * (lo + hi);
    out.tolerance = tol;
    const auto tr = shoot_down(f, out.speed, tol, true);
    out.mismatch = std::abs(tr.reached_theta ? tr.p_theta - out.speed * theta : out.speed * theta);

    // x(phi) shifted so that x(theta) = 0; stored increasing in x
    const double shift = tr.x.back();
    std::vector<double> xs, ps, ds;
    for (std::size_t i = tr.x.size(); i-- > 0;) {
        xs.push_back(tr.x[i] - shift);
        ps.push_back(tr.phi[i]);
        ds.push_back(tr.p[i]);
    }
    const double mu = 0.5 * (out.speed - std::sqrt(out.speed * out.speed - 4.0 * f.derivative(1.0)));
    const double half = options.sample_half_width;
    const std::size_t n = std::max<std::size_t>(options.samples, 5);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -half + 2.0 * half * static_cast<double>(i) / static_cast<double>(n - 1);
        double v;
        if (x <= 0.0) {
            v = theta * std::exp(out.speed * x);
        } else if (x >= xs.back()) {
            v = 1.0 - (1.0 - ps.back()) * std::exp(mu * (x - xs.back()));
        } else {
            const auto it = std::upper_bound(xs.begin(), xs.end(), x);
            const auto j = static_cast<std::size_t>(it - xs.begin());
            // cubic Hermite interpolation with the slopes p
            const double dx = xs[j] - xs[j - 1];
            const double t = (x - xs[j - 1]) / dx;
            const double t2 = t * t, t3 = t2 * t;
            v = (2 * t3 - 3 * t2 + 1) * ps[j - 1] + (t3 - 2 * t2 + t) * dx * ds[j - 1] + (-2 * t3 + 3 * t2) * ps[j] +
                (t3 - t2) * dx * ds[j];
        }
        out.x.push_back(x);
        out.phi.push_back(v);
    }
    const double h = out.x[1] - out.x[0];
    out.strictly_increasing = true;
    for (std::size_t i = 1; i < n; ++i)
        if (!(out.phi[i] > out.phi[i - 1]))
            out.strictly_increasing = false;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d2 = (out.phi[i + 1] - 2.0 * out.phi[i] + out.phi[i - 1]) / (h * h);
        const double d1 = (out.phi[i + 1] - out.phi[i - 1]) / (2.0 * h);
        out.residual = std::max(out.residual, std::abs(-d2 + out.speed * d1 - f(out.phi[i])));
    }

    if (options.run_pipeline) {
        const Grid grid = Grid::with_spacing(options.pipeline_b, options.pipeline_h);
        const OperatorAssembly assembly = assemble_local_laplacian(grid);
        const FixedSpeedProblem problem{assembly, f, f.lipschitz_bound(), sup};
        ShootOptions so;
        so.solver.drift = options.pipeline_drift;
        so.tol_c = 1e-8;
        so.check_endpoints = false;
        const auto shot = shoot_speed(problem, theta, hi, so);
        out.pipeline_speed = shot.speed;
        out.relative_difference = std::abs(shot.speed - out.speed) / out.speed;
        out.agreement = out.relative_difference <= 0.01;
    }
    return out;
}

void IvpRun::write_csv(std::ostream& os) const
{
    os << "t,x_theta\n" << std::setprecision(17);
    for (std::size_t i = 0; i < times.size(); ++i)
        os << times[i] << ',' << positions[i] << '\n';
}

IvpRun ivp_speed(const ProblemSpec& spec, double L, std::size_t n_f, double dt, double T, const IvpOptions& options)
{
    if (!(L > 0.0) || n_f < 16 || !(dt > 0.0) || !(T > dt))
        throw ConfigError("ivp_speed: need L > 0, n_f >= 16, dt > 0 and T > dt");
    const auto& f = spec.nonlinearity();
    if (dt * f.lipschitz_bound() > 1.0)
        throw ConfigError("ivp_speed: dt exceeds the explicit reaction stability bound 1 / Lip(f)");

    const double alpha = spec.alpha();
    const double theta = spec.theta();
    const double dx = 2.0 * L / static_cast<double>(n_f);
    const int n = static_cast<int>(n_f);
    std::vector<double> x(n_f);
    for (std::size_t j = 0; j < n_f; ++j)
        x[j] = -L + (static_cast<double>(j) + 0.5) * dx;

    auto* u = fftw_alloc_real(n_f);
    auto* w = fftw_alloc_real(n_f);
    std::unique_ptr<double, void (*)(void*)> hold_u(u, fftw_free), hold_w(w, fftw_free);
    const fftw_plan fwd = fftw_plan_r2r_1d(n, u, w, FFTW_REDFT10, FFTW_ESTIMATE);
    const fftw_plan bwd = fftw_plan_r2r_1d(n, w, u, FFTW_REDFT01, FFTW_ESTIMATE);
    std::unique_ptr<std::remove_pointer_t<fftw_plan>, void (*)(fftw_plan)> hold_f(fwd, fftw_destroy_plan),
        hold_b(bwd, fftw_destroy_plan);

    // cosine modes cos(xi_k (x + L)) with xi_k = pi k / (2 L); DCT-II / DCT-III round trip scales by 2 n
    std::vector<double> decay(n_f);
    for (std::size_t k = 0; k < n_f; ++k) {
        const double xi = std::numbers::pi * static_cast<double>(k) / (2.0 * L);
        decay[k] = std::exp(-std::pow(xi, 2.0 * alpha) * dt) / (2.0 * static_cast<double>(n_f));
    }

    const double x0 = std::log((1.0 - theta) / theta);
    for (std::size_t j = 0; j < n_f; ++j)
        u[j] = 1.0 / (1.0 + std::exp(-(x[j] - x0)));

    auto react = [&](double tau) {
        for (std::size_t j = 0; j < n_f; ++j) {
            const double k1 = f(u[j]);
            const double k2 = f(u[j] + tau * k1);
            u[j] += 0.5 * tau * (k1 + k2);
        }
    };

    IvpRun run;
    run.alpha = alpha;
    run.L = L;
    run.n_f = n_f;
    run.dt = dt;
    run.T = T;
    run.min_value = 0.0;
    run.max_value = 1.0;
    bool warned = false;

    auto level = [&](double t) {
        std::size_t crossings = 0;
        double pos = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t j = 0; j + 1 < n_f; ++j) {
            if (u[j] < theta && u[j + 1] >= theta) {
                if (crossings++ == 0)
                    pos = x[j] + dx * (theta - u[j]) / (u[j + 1] - u[j]);
            }
        }
        if (crossings == 0)
            throw NumericalError("ivp_speed: the theta level set disappeared");
        if (crossings > 1 && t >= options.transient * T && !warned) {
            run.warnings.push_back("level set not unique at t = " + std::to_string(t));
            warned = true;
        }
        if (pos < -0.75 * L || pos > 0.75 * L)
            throw NumericalError("domain exhausted: the front reached the boundary buffer at t = " + std::to_string(t));
        run.times.push_back(t);
        run.positions.push_back(pos);
    };

    const auto steps = static_cast<long>(std::llround(T / dt));
    level(0.0);
    for (long s = 1; s <= steps; ++s) {
        react(0.5 * dt);
        fftw_execute(fwd);
        for (std::size_t k = 0; k < n_f; ++k)
            w[k] *= decay[k];
        fftw_execute(bwd);
        react(0.5 * dt);
        const double t = static_cast<double>(s) * dt;
        if (s % options.record_every == 0 || s == steps) {
            level(t);
            for (std::size_t j = 0; j < n_f; ++j) {
                run.min_value = std::min(run.min_value, u[j]);
                run.max_value = std::max(run.max_value, u[j]);
                if (t >= options.transient * T && j > 0 && u[j] < u[j - 1] - 1e-8)
                    run.monotone = false;
            }
        }
    }

    // least squares over the second half
    double st = 0, sx = 0, stt = 0, stx = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < run.times.size(); ++i) {
        if (run.times[i] < 0.5 * T)
            continue;
        const double t = run.times[i], p = run.positions[i];
        st += t; sx += p; stt += t * t; stx += t * p;
        ++m;
    }
    if (m < 3)
        throw ConfigError("ivp_speed: too few recorded frames in the second half of the run");
    const double mm = static_cast<double>(m);
    const double slope = (mm * stx - st * sx) / (mm * stt - st * st);
    const double icpt = (sx - slope * st) / mm;
    run.speed = -slope;
    double ss = 0.0;
    for (std::size_t i = 0; i < run.times.size(); ++i)
        if (run.times[i] >= 0.5 * T) {
            const double e = run.positions[i] - (icpt + slope * run.times[i]);
            ss += e * e;
        }
    run.fit_residual = std::sqrt(ss / mm);
    return run;
}

} // namespace fracfront
