#include "fracfront/truncated_solver.hpp"

#include "fracfront/asymptotic_kernels.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace fracfront {

std::string_view to_string(SolveMethod method)
{
    return method == SolveMethod::DampedNewton ? "damped-newton" : "monotone-iteration";
}

std::string_view to_string(RootFinder finder)
{
    switch (finder) {
    case RootFinder::PinnedContinuation: return "pinned";
    case RootFinder::Bisection: return "bisection";
    case RootFinder::Brent: return "brent";
    }
    return "?";
}

RootFinder parse_root_finder(std::string_view name)
{
    if (name == "pinned") return RootFinder::PinnedContinuation;
    if (name == "bisection") return RootFinder::Bisection;
    if (name == "brent") return RootFinder::Brent;
    throw ConfigError("unknown root finder '" + std::string(name) + "' (expected pinned, bisection or brent)");
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Interior linear part L phi + e of the residual for speed c.
struct LinearPart {
    MatrixXd matrix;
    VectorXd offset;
};

LinearPart linear_part(double c, const OperatorAssembly& a, DriftScheme drift)
{
    const auto m = static_cast<Eigen::Index>(a.interior_size());
    const double h = a.grid.spacing();
    LinearPart lp{a.interior_matrix, a.exterior_offset(0.0, 1.0)};
    if (drift == DriftScheme::Upwind) {
        const double w = c / h;
        for (Eigen::Index r = 0; r < m; ++r) {
            if (c >= 0.0) {
                lp.matrix(r, r) += w;
                if (r > 0) lp.matrix(r, r - 1) -= w;
            } else {
                lp.matrix(r, r) -= w;
                if (r + 1 < m) lp.matrix(r, r + 1) += w;
                else lp.offset[r] += w; // right boundary node carries 1
            }
        }
    } else {
        const double w = c / (2.0 * h);
        for (Eigen::Index r = 0; r < m; ++r) {
            if (r > 0) lp.matrix(r, r - 1) -= w;
            if (r + 1 < m) lp.matrix(r, r + 1) += w;
            else lp.offset[r] += w;
        }
    }
    return lp;
}

VectorXd interior(const std::vector<double>& full)
{
    return Eigen::Map<const VectorXd>(full.data() + 1, static_cast<Eigen::Index>(full.size() - 2));
}

std::vector<double> to_full(const VectorXd& inner)
{
    std::vector<double> full(static_cast<std::size_t>(inner.size()) + 2);
    full.front() = 0.0;
    full.back() = 1.0;
    std::copy(inner.begin(), inner.end(), full.begin() + 1);
    return full;
}

VectorXd reaction(const IgnitionNonlinearity& f, const VectorXd& u)
{
    return u.unaryExpr([&f](double v) { return f(v); });
}

VectorXd residual_of(const LinearPart& lp, const IgnitionNonlinearity& f, const VectorXd& u)
{
    return lp.matrix * u + lp.offset - reaction(f, u);
}

struct NewtonOutcome {
    bool converged = false;
    VectorXd u;
    double residual = 0.0;
    int steps = 0;
};

/// Newton with Jacobian reuse: a stored factorization is kept while the full step at
/// least halves the residual; otherwise the Jacobian is refreshed and, if needed, the step
/// is damped by backtracking.
NewtonOutcome damped_newton(const LinearPart& lp, const IgnitionNonlinearity& f, VectorXd u, double tol,
                            int max_steps)
{
    NewtonOutcome out;
    VectorXd r = residual_of(lp, f, u);
    double norm = r.lpNorm<Eigen::Infinity>();
    auto factor = [&] {
        MatrixXd jac = lp.matrix;
        for (Eigen::Index i = 0; i < u.size(); ++i)
            jac(i, i) -= f.derivative(u[i]);
        return Eigen::PartialPivLU<MatrixXd>(jac);
    };
    Eigen::PartialPivLU<MatrixXd> lu = factor();
    bool fresh = true;
    while (out.steps < max_steps && norm > tol) {
        ++out.steps;
        const VectorXd delta = lu.solve(-r);
        if (!delta.allFinite())
            break;
        VectorXd trial = u + delta;
        VectorXd rt = residual_of(lp, f, trial);
        double nt = rt.lpNorm<Eigen::Infinity>();
        if (nt <= 0.5 * norm) {
            u = std::move(trial);
            r = std::move(rt);
            norm = nt;
            fresh = false;
            continue;
        }
        if (!fresh) {
            lu = factor();
            fresh = true;
            continue;
        }
        bool accepted = false;
        for (double t = 0.5; t > 1e-6; t *= 0.5) {
            trial = u + t * delta;
            rt = residual_of(lp, f, trial);
            nt = rt.lpNorm<Eigen::Infinity>();
            if (nt < (1.0 - 1e-4 * t) * norm) {
                accepted = true;
                break;
            }
        }
        if (!accepted)
            break;
        u = std::move(trial);
        r = std::move(rt);
        norm = nt;
        lu = factor();
    }
    out.converged = norm <= tol;
    out.u = std::move(u);
    out.residual = norm;
    return out;
}

bool admissible(const VectorXd& u, double tol)
{
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (u[i] < -tol || u[i] > 1.0 + tol)
            return false;
        if (i > 0 && u[i] < u[i - 1] - tol)
            return false;
    }
    return true;
}

double residual_target(const FixedSpeedProblem& p, const SolverOptions& o)
{
    return o.residual_target(p.sup_f);
}

/// Newton from `guess` only; empty when it fails or leaves the admissible set.
std::optional<FixedSpeedSolve> newton_only(double c, const FixedSpeedProblem& problem, const SolverOptions& options,
                                           const std::vector<double>& guess)
{
    const LinearPart lp = linear_part(c, problem.assembly, options.drift);
    auto nt = damped_newton(lp, problem.f, interior(guess), residual_target(problem, options), options.max_newton);
    if (!nt.converged || !admissible(nt.u, 1e-9))
        return std::nullopt;
    return FixedSpeedSolve{c, Profile(problem.assembly.grid, to_full(nt.u), 0.0, 1.0), nt.residual, 0, nt.steps,
                           SolveMethod::DampedNewton, 0.0, false};
}

} // namespace

std::vector<double> drift_derivative(const std::vector<double>& phi, double h, double c, DriftScheme drift)
{
    const std::size_t n = phi.size();
    std::vector<double> d(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (drift == DriftScheme::Centered)
            d[i - 1] = (phi[i + 1] - phi[i - 1]) / (2.0 * h);
        else if (c >= 0.0)
            d[i - 1] = (phi[i] - phi[i - 1]) / h;
        else
            d[i - 1] = (phi[i + 1] - phi[i]) / h;
    }
    return d;
}

std::vector<double> fixed_speed_residual(double c, const FixedSpeedProblem& problem, const std::vector<double>& phi,
                                         DriftScheme drift)
{
    const auto& a = problem.assembly;
    if (phi.size() != a.grid.size())
        throw ContractViolation("fixed_speed_residual: profile length differs from the grid");
    const Profile p(a.grid, phi, 0.0, 1.0);
    const VectorXd op = apply(a, p);
    const auto d = drift_derivative(phi, a.grid.spacing(), c, drift);
    std::vector<double> r(d.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = op[static_cast<Eigen::Index>(i)] + c * d[i] - problem.f(phi[i + 1]);
    return r;
}

FixedSpeedSolve solve_fixed_speed(double c, const Grid& grid, const ProblemSpec& spec,
                                  const OperatorAssembly& assembly, const SolverOptions& options,
                                  const FixedSpeedStart& start)
{
    if (!(grid == assembly.grid))
        throw ContractViolation("solve_fixed_speed: grid differs from the assembled grid");
    const FixedSpeedProblem problem{assembly, spec.nonlinearity(), spec.lipschitz(), spec.sup_f()};
    return solve_fixed_speed(c, problem, options, start);
}

FixedSpeedSolve solve_fixed_speed(double c, const FixedSpeedProblem& problem, const SolverOptions& options,
                                  const FixedSpeedStart& start)
{
    const auto& a = problem.assembly;
    const Grid& grid = a.grid;
    const std::size_t n = grid.size();
    const auto m = static_cast<Eigen::Index>(n - 2);
    const double tol = residual_target(problem, options);
    const auto& f = problem.f;

    auto check_length = [n](const std::optional<std::vector<double>>& v, const char* what) {
        if (v && v->size() != n)
            throw ContractViolation(std::string("solve_fixed_speed: ") + what + " has the wrong length");
    };
    check_length(start.guess, "guess");
    check_length(start.lower, "lower envelope");
    check_length(start.upper, "upper envelope");

    const LinearPart lp = linear_part(c, a, options.drift);

    auto finish = [&](const VectorXd& u, double res, int iters, int newton, SolveMethod method, double gap) {
        FixedSpeedSolve s{c, Profile(grid, to_full(u), 0.0, 1.0), res, iters, newton, method, gap, false};
        return s;
    };

    if (start.guess) {
        auto nt = damped_newton(lp, f, interior(*start.guess), tol, options.max_newton);
        if (nt.converged && admissible(nt.u, 1e-9))
            return finish(nt.u, nt.residual, 0, nt.steps, SolveMethod::DampedNewton, 0.0);
    }

    // envelopes: supplied ones are kept only if they really are sub/super-solutions
    VectorXd lower = VectorXd::Zero(m), upper = VectorXd::Ones(m);
    if (start.lower) {
        const VectorXd cand = interior(*start.lower);
        if ((residual_of(lp, f, cand).array() <= tol).all())
            lower = cand;
    }
    if (start.upper) {
        const VectorXd cand = interior(*start.upper);
        if ((residual_of(lp, f, cand).array() >= -tol).all())
            upper = cand;
    }

    const double lambda = problem.lipschitz;
    MatrixXd shifted = lp.matrix;
    shifted.diagonal().array() += lambda;
    const Eigen::PartialPivLU<MatrixXd> lu(shifted);
    auto sweep = [&](const VectorXd& u) -> VectorXd { return lu.solve(lambda * u + reaction(f, u) - lp.offset); };

    // supplied envelopes are accepted up to the residual tolerance, so allow that much slack
    const double drift_tol = std::max(1e-10, 10.0 * tol / std::max(lambda, 1e-3));
    int iters = 0;
    double gap = (upper - lower).maxCoeff();
    bool stalled = false;
    double change_lo = 0.0, change_up = 0.0;
    int stall_count = 0;
    if (options.on_sweep)
        options.on_sweep(0, lower, upper);
    auto iterate = [&](double target_gap, bool by_residual) {
        while (iters < options.max_iter) {
            if (by_residual) {
                if (residual_of(lp, f, 0.5 * (lower + upper)).lpNorm<Eigen::Infinity>() <= tol)
                    return true;
            } else if (gap <= target_gap) {
                return true;
            }
            VectorXd lo = sweep(lower), up = sweep(upper);
            ++iters;
            if ((lo.array() < lower.array() - drift_tol).any() || (up.array() > upper.array() + drift_tol).any())
                throw InvariantViolation("monotone iteration lost its ordering; the discrete operator is not monotone");
            const double dl = (lo - lower).lpNorm<Eigen::Infinity>(), du = (up - upper).lpNorm<Eigen::Infinity>();
            lower = std::move(lo);
            upper = std::move(up);
            gap = (upper - lower).maxCoeff();
            if (options.on_sweep)
                options.on_sweep(iters, lower, upper);
            // both envelopes converge geometrically but to different limits (the minimal and
            // maximal solutions differ): the remaining travel cannot close the gap
            auto remaining = [](double now, double before) {
                if (now == 0.0) return 0.0;
                if (!(before > 0.0) || now >= before) return std::numeric_limits<double>::infinity();
                const double rho = now / before;
                return now * rho / (1.0 - rho);
            };
            const double rest = remaining(dl, change_lo) + remaining(du, change_up);
            change_lo = dl;
            change_up = du;
            stall_count = !by_residual && gap - rest > 10.0 * target_gap ? stall_count + 1 : 0;
            if (stall_count >= options.stall_sweeps) {
                stalled = true;
                return false;
            }
        }
        return false;
    };

    if (!iterate(options.tol_envelope, false)) {
        if (!stalled)
            throw NumericalError("monotone iteration did not close the envelopes within max_iter", gap);
        auto nt = damped_newton(lp, f, upper, tol, options.max_newton);
        const VectorXd u = nt.converged && admissible(nt.u, 1e-9) ? nt.u : upper;
        auto s = finish(u, residual_of(lp, f, u).lpNorm<Eigen::Infinity>(), iters, nt.steps,
                        SolveMethod::MonotoneIteration, gap);
        s.multiple_solutions = true;
        return s;
    }

    auto nt = damped_newton(lp, f, 0.5 * (lower + upper), tol, options.max_newton);
    if (nt.converged && admissible(nt.u, 1e-9) && (nt.u.array() >= lower.array() - options.tol_envelope).all() &&
        (nt.u.array() <= upper.array() + options.tol_envelope).all())
        return finish(nt.u, nt.residual, iters, nt.steps, SolveMethod::MonotoneIteration, gap);

    // Newton failed: continue the plain iteration
    iterate(0.0, true);
    const VectorXd mid = 0.5 * (lower + upper);
    auto s = finish(mid, residual_of(lp, f, mid).lpNorm<Eigen::Infinity>(), iters, nt.steps,
                    SolveMethod::MonotoneIteration, gap);
    s.newton_failed = true;
    return s;
}

double speed_bound(const ProblemSpec& spec)
{
    const auto th = supersolution_threshold(spec);
    const double s = 2.0 * spec.alpha();
    const double explicit_bound = spec.sup_f() * std::pow(th.matching_radius, s) / (s - 1.0);
    return std::max(th.speed, explicit_bound);
}

void ShootResult::write_trace_csv(std::ostream& os) const
{
    os << "c,g,iterations,newton_steps,residual\n" << std::setprecision(17);
    for (const auto& r : trace)
        os << r.speed << ',' << r.g << ',' << r.iterations << ',' << r.newton_steps << ',' << r.residual << '\n';
}

ShootResult shoot_speed(const Grid& grid, const ProblemSpec& spec, double tol_c)
{
    ShootOptions o;
    o.tol_c = tol_c;
    return shoot_speed(grid, spec, assemble(grid, spec), o);
}

ShootResult shoot_speed(const Grid& grid, const ProblemSpec& spec, const OperatorAssembly& assembly,
                        const ShootOptions& options)
{
    if (!(grid == assembly.grid))
        throw ContractViolation("shoot_speed: grid differs from the assembled grid");
    const FixedSpeedProblem problem{assembly, spec.nonlinearity(), spec.lipschitz(), spec.sup_f()};
    const double limit = options.speed_limit > 0.0 ? options.speed_limit : speed_bound(spec);
    return shoot_speed(problem, spec.theta(), limit, options);
}

namespace {

std::optional<FixedSpeedSolve> pinned_at(const FixedSpeedProblem& pb, const SolverOptions& opts,
                                         const std::vector<double>& guess, double c, double theta);

ShootResult shoot_bracketing(const FixedSpeedProblem& problem, double theta, double speed_limit,
                             const ShootOptions& options)
{
    const Grid& grid = problem.assembly.grid;
    const std::size_t mid = grid.center();

    std::vector<SpeedTraceRow> trace;
    std::map<double, FixedSpeedSolve> cache;

    auto record = [&](FixedSpeedSolve s) {
        const double c = s.speed;
        const double g = s.profile.values[mid] - theta;
        trace.push_back({c, g, s.iterations, s.newton_steps, s.residual_norm});
        cache.insert_or_assign(c, std::move(s));
        return g;
    };

    auto g_of = [&](double c) -> double {
        if (auto it = cache.find(c); it != cache.end())
            return it->second.profile.values[mid] - theta;
        if (cache.empty()) {
            FixedSpeedStart start;
            start.guess = options.guess;
            return record(solve_fixed_speed(c, problem, options.solver, start));
        }

        FixedSpeedStart start;
        auto above = cache.upper_bound(c);
        const FixedSpeedSolve* sub = above != cache.end() ? &above->second : nullptr;
        const FixedSpeedSolve* super = above != cache.begin() ? &std::prev(above)->second : nullptr;
        if (sub) start.lower = sub->profile.values;
        if (super) start.upper = super->profile.values;
        std::vector<double> guess;
        if (sub && super) {
            const double w = (c - super->speed) / (sub->speed - super->speed);
            guess.resize(grid.size());
            for (std::size_t i = 0; i < guess.size(); ++i)
                guess[i] = (1.0 - w) * super->profile.values[i] + w * sub->profile.values[i];
        } else {
            guess = (sub ? sub : super)->profile.values;
        }
        if (auto s = newton_only(c, problem, options.solver, guess))
            return record(std::move(*s));

        // continuation in c from the nearest solved speed
        const FixedSpeedSolve* near = !sub ? super : !super ? sub : (sub->speed - c < c - super->speed ? sub : super);
        double current = near->speed;
        std::vector<double> profile = near->profile.values;
        double step = 0.5 * (c - current);
        while (std::abs(step) > 1e-9 * (1.0 + std::abs(c))) {
            const double next = std::abs(c - current) <= std::abs(step) ? c : current + step;
            auto s = newton_only(next, problem, options.solver, profile);
            if (!s) {
                step *= 0.5;
                continue;
            }
            if (next == c)
                return record(std::move(*s));
            profile = s->profile.values;
            current = next;
            record(std::move(*s));
            step *= 1.5;
        }

        start.guess.reset();
        return record(solve_fixed_speed(c, problem, options.solver, start));
    };

    const double K = speed_limit;
    double lo, hi, glo, ghi;
    auto too_small = [&](const char* which) {
        return DomainTooSmall(std::string("domain too small: no sign change of phi_c(0) - theta at ") + which +
                              " of [-K, K] (K = " + std::to_string(K) +
                              "); the half-width b must exceed the super-solution shift");
    };
    if (options.hint) {
        const double width = options.hint_width * std::max(1.0, std::abs(*options.hint));
        lo = std::clamp(*options.hint - width, -K, K);
        hi = std::clamp(*options.hint + width, -K, K);
        double step = width;
        glo = g_of(lo);
        while (glo <= 0.0 && lo > -K) {
            hi = lo;
            ghi = glo;
            step *= 2.0;
            lo = std::max(lo - step, -K);
            glo = g_of(lo);
        }
        if (glo < 0.0) throw too_small("the lower end");
        ghi = g_of(hi);
        step = width;
        while (ghi >= 0.0 && hi < K) {
            lo = hi;
            glo = ghi;
            step *= 2.0;
            hi = std::min(hi + step, K);
            ghi = g_of(hi);
        }
        if (ghi > 0.0) throw too_small("the upper end");
    } else {
        lo = -K;
        hi = K;
        glo = g_of(lo);
        if (glo < 0.0) throw too_small("the lower end");
        ghi = g_of(hi);
        if (ghi > 0.0) throw too_small("the upper end");
    }
    auto done = [&] { return glo == 0.0 || ghi == 0.0 || hi - lo <= options.tol_c; };

    int steps = 0;
    if (options.root_finder == RootFinder::Brent && !done()) {
        std::uintmax_t max_it = static_cast<std::uintmax_t>(options.max_steps);
        auto stop = [&](double a, double b) { return std::abs(b - a) <= options.tol_c; };
        const auto r = boost::math::tools::toms748_solve(g_of, lo, hi, glo, ghi, stop, max_it);
        steps = static_cast<int>(max_it);
        if (r.first != r.second) {
            lo = r.first;
            hi = r.second;
            glo = g_of(lo);
            ghi = g_of(hi);
        } else {
            lo = hi = r.first;
            glo = ghi = g_of(lo);
        }
    }
    while (!done()) {
        if (++steps > options.max_steps)
            throw NumericalError("shoot_speed: root finder exceeded max_steps", hi - lo);
        const double c = 0.5 * (lo + hi);
        const double g = g_of(c);
        if (g > 0.0) {
            lo = c;
            glo = g;
        } else {
            hi = c;
            ghi = g;
        }
    }
    double best = std::abs(glo) <= std::abs(ghi) ? lo : hi;
    if (std::min(std::abs(glo), std::abs(ghi)) > options.tol_g) {
        // g jumps across the bracket (the fixed-speed solutions are not unique there):
        // the root is the pinned solution between the two ends
        const auto& a = cache.at(lo).profile.values;
        const auto& b = cache.at(hi).profile.values;
        std::vector<double> guess(a.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            guess[i] = 0.5 * (a[i] + b[i]);
        auto pinned = pinned_at(problem, options.solver, guess, 0.5 * (lo + hi), theta);
        if (!pinned)
            throw NumericalError("shoot_speed: phi_c(0) jumps across theta on [" + std::to_string(lo) + ", " +
                                     std::to_string(hi) + "] and no pinned solution was found there",
                                 hi - lo);
        best = pinned->speed;
        record(std::move(*pinned));
    }
    ShootResult result{cache.at(best), best, {lo, hi, glo, ghi}, std::move(trace), true};

    double prev_g = std::numeric_limits<double>::infinity();
    for (const auto& [c, s] : cache) {
        const double g = s.profile.values[mid] - theta;
        if (g > prev_g + 1e-12) result.monotone_g = false;
        prev_g = g;
    }
    return result;
}


VectorXd drift_vector(const VectorXd& u, double h, double c, DriftScheme drift)
{
    const Eigen::Index m = u.size();
    auto at = [&](Eigen::Index i) { return i < 0 ? 0.0 : i >= m ? 1.0 : u[i]; };
    VectorXd d(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (drift == DriftScheme::Centered)
            d[i] = (at(i + 1) - at(i - 1)) / (2.0 * h);
        else if (c >= 0.0)
            d[i] = (at(i) - at(i - 1)) / h;
        else
            d[i] = (at(i + 1) - at(i)) / h;
    }
    return d;
}

/// Residual of the bordered system: the fixed-speed equations and u[pin] - p.
VectorXd pinned_residual(const FixedSpeedProblem& pb, DriftScheme drift, const VectorXd& u, double c,
                         Eigen::Index pin, double p)
{
    const auto& a = pb.assembly;
    const Eigen::Index m = u.size();
    VectorXd r(m + 1);
    r.head(m) = a.interior_matrix * u + a.exterior_offset(0.0, 1.0) +
                c * drift_vector(u, a.grid.spacing(), c, drift) - reaction(pb.f, u);
    r[m] = u[pin] - p;
    return r;
}

struct PinnedOutcome {
    bool converged = false;
    VectorXd u;
    double c = 0.0;
    double residual = 0.0;
    int steps = 0;
};

PinnedOutcome pinned_newton(const FixedSpeedProblem& pb, DriftScheme drift, VectorXd u, double c, Eigen::Index pin,
                            double p, double tol, int max_steps)
{
    const Eigen::Index m = u.size();
    const double h = pb.assembly.grid.spacing();
    PinnedOutcome out;
    VectorXd r = pinned_residual(pb, drift, u, c, pin, p);
    double norm = r.lpNorm<Eigen::Infinity>();
    auto factor = [&] {
        MatrixXd jac(m + 1, m + 1);
        jac.topLeftCorner(m, m) = linear_part(c, pb.assembly, drift).matrix;
        for (Eigen::Index i = 0; i < m; ++i)
            jac(i, i) -= pb.f.derivative(u[i]);
        jac.col(m).head(m) = drift_vector(u, h, c, drift);
        jac.row(m).setZero();
        jac(m, pin) = 1.0;
        return Eigen::PartialPivLU<MatrixXd>(jac);
    };
    Eigen::PartialPivLU<MatrixXd> lu = factor();
    bool fresh = true;
    while (out.steps < max_steps && norm > tol) {
        ++out.steps;
        const VectorXd delta = lu.solve(-r);
        if (!delta.allFinite())
            break;
        auto trial_at = [&](double t, VectorXd& ut, double& ct) {
            ut = u + t * delta.head(m);
            ct = c + t * delta[m];
            return pinned_residual(pb, drift, ut, ct, pin, p);
        };
        VectorXd ut;
        double ct = 0.0;
        VectorXd rt = trial_at(1.0, ut, ct);
        double nt = rt.lpNorm<Eigen::Infinity>();
        if (nt <= 0.5 * norm) {
            u = std::move(ut);
            c = ct;
            r = std::move(rt);
            norm = nt;
            fresh = false;
            continue;
        }
        if (!fresh) {
            lu = factor();
            fresh = true;
            continue;
        }
        bool accepted = false;
        for (double t = 0.5; t > 1e-6; t *= 0.5) {
            rt = trial_at(t, ut, ct);
            nt = rt.lpNorm<Eigen::Infinity>();
            if (nt < (1.0 - 1e-4 * t) * norm) {
                accepted = true;
                break;
            }
        }
        if (!accepted)
            break;
        u = std::move(ut);
        c = ct;
        r = std::move(rt);
        norm = nt;
        lu = factor();
    }
    out.converged = norm <= tol && admissible(u, 1e-9);
    out.u = std::move(u);
    out.c = c;
    out.residual = norm;
    return out;
}

std::optional<FixedSpeedSolve> pinned_at(const FixedSpeedProblem& pb, const SolverOptions& opts,
                                         const std::vector<double>& guess, double c, double theta)
{
    const Grid& grid = pb.assembly.grid;
    const auto pin = static_cast<Eigen::Index>(grid.center()) - 1;
    auto out = pinned_newton(pb, opts.drift, interior(guess), c, pin, theta, residual_target(pb, opts),
                             std::max(opts.max_newton, 30));
    if (!out.converged)
        return std::nullopt;
    FixedSpeedSolve s{out.c, Profile(grid, to_full(out.u), 0.0, 1.0), out.residual, 0, out.steps,
                      SolveMethod::DampedNewton, 0.0, false};
    return s;
}

using TraceSink = std::vector<SpeedTraceRow>;

/// Follows the solution branch in the pinned value u[pin] from (u, c) to p_target.
PinnedOutcome continue_pinned(const FixedSpeedProblem& pb, const SolverOptions& opts, VectorXd u, double c,
                              Eigen::Index pin, double p_target, double theta, TraceSink& trace)
{
    const double tol = residual_target(pb, opts);
    double p = u[pin];
    double step = (p_target - p) / 8.0;
    std::optional<std::pair<VectorXd, double>> previous;
    double p_previous = p;
    int total_steps = 0;
    while (p != p_target) {
        const double p_next = std::abs(p_target - p) <= std::abs(step) ? p_target : p + step;
        VectorXd u0 = u;
        double c0 = c;
        if (previous) {
            const double scale = (p_next - p) / (p - p_previous);
            u0 += scale * (u - previous->first);
            c0 += scale * (c - previous->second);
        }
        auto out = pinned_newton(pb, opts.drift, std::move(u0), c0, pin, p_next, tol, 12);
        total_steps += out.steps;
        if (!out.converged) {
            step *= 0.5;
            if (std::abs(step) < 1e-12)
                throw NumericalError("pinned continuation stalled at phi(0) = " + std::to_string(p), out.residual);
            continue;
        }
        trace.push_back({out.c, out.u[pin] - theta, 0, out.steps, out.residual});
        previous.emplace(std::move(u), c);
        p_previous = p;
        u = std::move(out.u);
        c = out.c;
        p = p_next;
        if (out.steps <= 4)
            step *= 1.6;
    }
    PinnedOutcome done;
    done.converged = true;
    done.u = std::move(u);
    done.c = c;
    done.residual = pinned_residual(pb, opts.drift, done.u, c, pin, p_target).lpNorm<Eigen::Infinity>();
    done.steps = total_steps;
    return done;
}

/// Pinned front phi(0) = theta: Newton from the supplied guess, then from logistic
/// profiles, then by continuation from the c = K solution.
PinnedOutcome pinned_front(const FixedSpeedProblem& pb, double theta, double K, const ShootOptions& options,
                           const std::function<const FixedSpeedSolve&()>& at_K, TraceSink& trace)
{
    const Grid& grid = pb.assembly.grid;
    const auto pin = static_cast<Eigen::Index>(grid.center()) - 1;
    const double tol = residual_target(pb, options.solver);
    const int max_newton = std::max(options.solver.max_newton, 30);

    if (options.guess) {
        auto out = pinned_newton(pb, options.solver.drift, interior(*options.guess), options.hint.value_or(0.0), pin,
                                 theta, tol, max_newton);
        if (out.converged)
            return out;
    }

    // logistic profiles through (0, theta) at a few widths and speeds
    const double shift = std::log(theta / (1.0 - theta));
    const double c_start = options.hint.value_or(std::min(1.0, 0.5 * K));
    for (double width : {2.0, 1.0, 4.0}) {
        for (double c0 : {c_start, 0.25 * c_start, 3.0 * c_start}) {
            VectorXd u(static_cast<Eigen::Index>(grid.size()) - 2);
            for (Eigen::Index i = 0; i < u.size(); ++i)
                u[i] = 1.0 / (1.0 + std::exp(-(grid.node(static_cast<std::size_t>(i) + 1) / width + shift)));
            auto out = pinned_newton(pb, options.solver.drift, std::move(u), c0, pin, theta, tol, max_newton);
            if (out.converged && std::abs(out.c) <= K)
                return out;
        }
    }

    const FixedSpeedSolve& s = at_K();
    return continue_pinned(pb, options.solver, interior(s.profile.values), K, pin, theta, theta, trace);
}

/// Fixed-speed solution at c_target with sign(phi(0) - theta) = sign, found by walking
/// the pinned branch away from theta until its speed passes c_target and finishing with
/// Newton at fixed speed. Empty if the walk does not reach c_target.
std::optional<FixedSpeedSolve> branch_solve(const FixedSpeedProblem& pb, const SolverOptions& opts,
                                            const PinnedOutcome& front, Eigen::Index pin, double theta,
                                            double c_target, double sign)
{
    const double tol = residual_target(pb, opts);
    const Grid& grid = pb.assembly.grid;
    auto fixed_from = [&](const VectorXd& u) -> std::optional<FixedSpeedSolve> {
        const LinearPart lp = linear_part(c_target, pb.assembly, opts.drift);
        auto nt = damped_newton(lp, pb.f, u, 1e-4 * tol, opts.max_newton);
        if (nt.residual > tol || !admissible(nt.u, 1e-9) || sign * (nt.u[pin] - theta) <= 0.0)
            return std::nullopt;
        return FixedSpeedSolve{c_target, Profile(grid, to_full(nt.u), 0.0, 1.0), nt.residual, 0, nt.steps,
                               SolveMethod::DampedNewton, 0.0, false};
    };
    // the branch passes c_target where (c(p) - c_target) changes to this sign
    const double want = c_target < front.c ? -1.0 : 1.0;
    auto passed = [&](double c) { return want * (c - c_target) >= 0.0; };

    PinnedOutcome prev = front;
    double step = 1e-4;
    for (int k = 0; k < 60; ++k) {
        const double p_next = prev.u[pin] + sign * step;
        if (p_next <= 0.0 || p_next >= 1.0 || step < 1e-10)
            return std::nullopt;
        auto next = pinned_newton(pb, opts.drift, prev.u, prev.c, pin, p_next, tol, 20);
        if (!next.converged) {
            step *= 0.5;
            continue;
        }
        if (!passed(next.c)) {
            prev = std::move(next);
            step *= 2.0;
            continue;
        }
        // refine the crossing in p, trying the fixed-speed Newton at each level
        double p_lo = prev.u[pin], p_hi = next.u[pin];
        for (int level = 0; level < 40; ++level) {
            const auto& near = std::abs(prev.c - c_target) < std::abs(next.c - c_target) ? prev : next;
            if (auto s = fixed_from(near.u))
                return s;
            const double pm = 0.5 * (p_lo + p_hi);
            auto mid = pinned_newton(pb, opts.drift, prev.u, prev.c, pin, pm, tol, 20);
            if (!mid.converged)
                return std::nullopt;
            if (passed(mid.c)) {
                next = std::move(mid);
                p_hi = pm;
            } else {
                prev = std::move(mid);
                p_lo = pm;
            }
        }
        return std::nullopt;
    }
    return std::nullopt;
}

ShootResult shoot_pinned(const FixedSpeedProblem& problem, double theta, double K, const ShootOptions& options)
{
    const Grid& grid = problem.assembly.grid;
    const std::size_t mid = grid.center();
    TraceSink trace;
    auto record = [&](const FixedSpeedSolve& s) {
        trace.push_back({s.speed, s.profile.values[mid] - theta, s.iterations, s.newton_steps, s.residual_norm});
    };

    std::optional<FixedSpeedSolve> at_plus;
    auto at_K = [&]() -> const FixedSpeedSolve& {
        if (!at_plus) {
            at_plus = solve_fixed_speed(K, problem, options.solver);
            record(*at_plus);
        }
        return *at_plus;
    };
    auto too_small = [&](const char* which) {
        return DomainTooSmall(std::string("domain too small: no sign change of phi_c(0) - theta at ") + which +
                              " of [-K, K] (K = " + std::to_string(K) +
                              "); the half-width b must exceed the super-solution shift");
    };
    std::optional<FixedSpeedSolve> at_minus;
    if (options.check_endpoints) {
        at_minus = solve_fixed_speed(-K, problem, options.solver);
        record(*at_minus);
        if (at_minus->profile.values[mid] - theta < 0.0) throw too_small("the lower end");
        if (at_K().profile.values[mid] - theta > 0.0) throw too_small("the upper end");
    }

    const auto front = pinned_front(problem, theta, K, options, at_K, trace);
    const double c_star = front.c;
    if (!(std::abs(c_star) <= K))
        throw NumericalError("pinned solve left the speed interval [-K, K]", c_star);

    // bracket c_star by two fixed-speed solves started from the pinned profile
    const std::vector<double> pinned_full = to_full(front.u);
    const auto pin = static_cast<Eigen::Index>(mid) - 1;
    auto side = [&](double c, bool below) -> std::optional<FixedSpeedSolve> {
        auto s = branch_solve(problem, options.solver, front, pin, theta, c, below ? 1.0 : -1.0);
        if (s) record(*s);
        return s;
    };
    const double delta = 0.5 * options.tol_c;
    const auto low = side(c_star - delta, true);
    const auto high = side(c_star + delta, false);
    // when the branch cannot be followed (lattice-scale wiggles of c along the branch),
    // the +-K solves remain the certified bracket (g is NaN if they were skipped)
    SpeedBracket bracket;
    bool tight = false;
    if (low && high) {
        bracket = {low->speed, high->speed, low->profile.values[mid] - theta, high->profile.values[mid] - theta};
        tight = bracket.g_low > 0.0 && bracket.g_high < 0.0;
    }
    if (!tight) {
        bracket = {-K, K, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
        if (at_minus)
            bracket = {-K, K, at_minus->profile.values[mid] - theta, at_K().profile.values[mid] - theta};
    }

    FixedSpeedSolve solve{c_star, Profile(grid, pinned_full, 0.0, 1.0), 0.0, 0, front.steps,
                          SolveMethod::DampedNewton, 0.0, false};
    solve.residual_norm = 0.0;
    for (double v : fixed_speed_residual(c_star, problem, solve.profile.values, options.solver.drift))
        solve.residual_norm = std::max(solve.residual_norm, std::abs(v));
    record(solve);

    ShootResult result{solve, c_star, bracket, std::move(trace), true, tight};
    std::vector<std::pair<double, double>> points;
    for (const auto& row : result.trace)
        points.emplace_back(row.speed, row.g);
    std::sort(points.begin(), points.end());
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].second > points[i - 1].second + 1e-12)
            result.monotone_g = false;
    return result;
}

} // namespace

ShootResult shoot_speed(const FixedSpeedProblem& problem, double theta, double speed_limit,
                        const ShootOptions& options)
{
    if (!(speed_limit > 0.0))
        throw ContractViolation("shoot_speed: speed limit must be positive");
    ShootResult result = options.root_finder == RootFinder::PinnedContinuation
                             ? shoot_pinned(problem, theta, speed_limit, options)
                             : shoot_bracketing(problem, theta, speed_limit, options);
    if (options.reaction_margin > 0.0) {
        const auto& v = result.solve.profile.values;
        const double edge = problem.f(v[v.size() - 2]);
        if (edge > options.reaction_margin * problem.sup_f) {
            std::ostringstream msg;
            msg << "domain too small: the reaction zone reaches the right boundary (f(phi) = " << edge / problem.sup_f
                << " sup f at x = b - h, c_b = " << result.speed << ")";
            throw DomainTooSmall(msg.str());
        }
    }
    return result;
}

} // namespace fracfront
