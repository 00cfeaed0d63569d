#include "fracfront/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace fracfront {

namespace {

double interpolate(const Profile& p, double x)
{
    const Grid& g = p.grid;
    if (x <= -g.half_width()) return x < -g.half_width() ? p.exterior_left : p.values.front();
    if (x >= g.half_width()) return x > g.half_width() ? p.exterior_right : p.values.back();
    const double s = (x + g.half_width()) / g.spacing();
    const auto i = std::min(static_cast<std::size_t>(s), g.size() - 2);
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * p.values[i] + w * p.values[i + 1];
}

std::vector<double> fingerprint(const Profile& p)
{
    std::vector<double> out;
    for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0})
        out.push_back(interpolate(p, x));
    return out;
}

/// Max-norm difference over |x| <= window of the new profile and the interpolated old one.
double profile_change(const Profile& next, const Profile& prev, double window)
{
    double diff = 0.0;
    for (std::size_t i = 0; i < next.grid.size(); ++i) {
        const double x = next.grid.node(i);
        if (std::abs(x) <= window)
            diff = std::max(diff, std::abs(next.values[i] - interpolate(prev, x)));
    }
    return diff;
}

std::string format_stage(const ContinuationStage& s)
{
    std::ostringstream os;
    os << std::setprecision(6) << "b = " << s.b << ": c_b = " << s.speed;
    return os.str();
}

} // namespace

FrontSolution solve_front(const ProblemSpec& spec, double b0, double h, double tol_c_cont, double tol_profile)
{
    ContinuationOptions o;
    o.b0 = b0;
    o.h = h;
    o.tol_c_cont = tol_c_cont;
    o.tol_profile = tol_profile;
    return solve_front(spec, o);
}

FrontSolution solve_front(const ProblemSpec& spec, const ContinuationOptions& options)
{
    if (!(options.b0 > 0.0) || !(options.h > 0.0) || options.h > options.b0)
        throw ConfigError("solve_front: need 0 < h <= b0");
    if (options.max_doublings < 0)
        throw ConfigError("solve_front: max_doublings must be non-negative");

    const double K = options.shoot.speed_limit > 0.0 ? options.shoot.speed_limit : speed_bound(spec);
    ContinuationRecord record;
    std::optional<FrontSolution> current;
    std::optional<OperatorAssembly> assembly;
    std::vector<std::string> warnings;
    bool node_limit = false;

    double b = options.b0;
    for (int stage = 0; stage <= options.max_doublings; ++stage, b *= 2.0) {
        const Grid grid = Grid::with_spacing(b, options.h);
        if (grid.size() > options.n_max) {
            node_limit = true;
            break;
        }
        assembly.emplace(assemble(grid, spec));

        ShootOptions so = options.shoot;
        so.speed_limit = K;
        if (current) {
            so.guess = resample(current->profile, grid).values;
            so.hint = current->speed;
            so.check_endpoints = false;
        }
        ShootResult shot = [&] {
            try {
                return shoot_speed(grid, spec, *assembly, so);
            } catch (const DomainTooSmall& e) {
                if (current || stage == options.max_doublings)
                    throw ContinuationFailure(e.what(), record);
                return ShootResult{FixedSpeedSolve{0.0, Profile(grid, std::vector<double>(grid.size(), 0.0))},
                                   std::numeric_limits<double>::quiet_NaN(), {}, {}, false, false};
            }
        }();
        if (std::isnan(shot.speed))
            continue; // first stage below the minimal domain: double b

        if (!(std::abs(shot.speed) <= K))
            throw InvariantViolation("c_b left [-K, K] at b = " + std::to_string(b));
        if (!shot.bracket_tight)
            warnings.push_back("b = " + std::to_string(b) +
                               ": speed bracket could not be narrowed below [-K, K] by fixed-speed solves");

        ContinuationStage st;
        st.b = grid.half_width();
        st.n = grid.size();
        st.speed = shot.speed;
        st.residual = shot.solve.residual_norm;
        st.theta_error = std::abs(shot.solve.profile.at_center() - spec.theta());
        st.bracket_evaluations = static_cast<int>(shot.trace.size());
        st.fingerprint = fingerprint(shot.solve.profile);
        if (current) {
            st.speed_change = std::abs(shot.speed - current->speed);
            st.profile_change = profile_change(shot.solve.profile, current->profile, 0.5 * current->profile.grid.half_width());
        } else {
            st.speed_change = st.profile_change = std::numeric_limits<double>::quiet_NaN();
        }
        record.stages.push_back(st);
        const bool settled = current && st.speed_change <= options.tol_c_cont && st.profile_change <= options.tol_profile;
        current.emplace(FrontSolution{shot.solve.profile, shot.speed, {}});
        if (settled) {
            record.converged = true;
            break;
        }
    }

    if (!current)
        throw ContinuationFailure("domain too small: no stage produced a front", record);
    FrontSolution sol = std::move(*current);
    auto& d = sol.diagnostics;
    d.history = record.stages;
    d.speed_bound = K;
    d.residual_norm = equation_residual(sol, spec, *assembly);
    d.conservation_residual = check_conservation(sol, *assembly);
    d.reaction_integral = reaction_integral(sol.profile, spec.nonlinearity());
    const auto lv = limit_values(sol, spec.nonlinearity());
    d.gamma0 = lv.gamma0;
    d.gamma1 = lv.gamma1;
    d.limits_flat = lv.flat && lv.reaction_free;
    d.speed_mass_residual = check_speed_mass_identity(sol, spec);
    if (!d.limits_flat)
        warnings.push_back("domain too small: end levels are not flat (variation " + std::to_string(lv.variation) + ")");
    d.warnings = std::move(warnings);
    record.final = sol;

    if (!record.converged) {
        const auto& last = record.stages.back();
        throw ContinuationFailure(std::string("domain too small: continuation did not converge within ") +
                                      (node_limit ? "n_max nodes" : "max_doublings") + " (last stage " +
                                      format_stage(last) + ", |dc| = " + std::to_string(last.speed_change) + ")",
                                  record);
    }
    if (!(sol.speed > 0.0))
        throw InvariantViolation("converged speed is not positive (c0 = " + std::to_string(sol.speed) + ")");
    if (!(sol.profile.is_nondecreasing() && sol.profile.within_exterior_range()))
        throw InvariantViolation("converged profile is not monotone with values in [0,1]");
    return sol;
}

double equation_residual(const FrontSolution& sol, const ProblemSpec& spec, const OperatorAssembly& assembly)
{
    const FixedSpeedProblem problem{assembly, spec.nonlinearity(), spec.lipschitz(), spec.sup_f()};
    double r = 0.0;
    for (double v : fixed_speed_residual(sol.speed, problem, sol.profile.values))
        r = std::max(r, std::abs(v));
    return r;
}

double check_conservation(const FrontSolution& sol, const OperatorAssembly& assembly)
{
    const Profile& p = sol.profile;
    const Eigen::VectorXd op = apply(assembly, p);
    const double h = p.grid.spacing();
    // trapezoid over the interior nodes x_1 .. x_{n-2}
    const double inside = h * (op.sum() - 0.5 * (op[0] + op[op.size() - 1]));
    const auto [left, right] = exterior_operator_integrals(p, assembly.alpha, assembly.c_alpha);
    return std::abs(inside + left + right);
}

double reaction_integral(const Profile& p, const IgnitionNonlinearity& f)
{
    std::vector<double> fv(p.values.size());
    std::transform(p.values.begin(), p.values.end(), fv.begin(), [&](double u) { return f(u); });
    return trapezoid(fv, p.grid.spacing());
}

double check_speed_mass_identity(const FrontSolution& sol, const ProblemSpec& spec)
{
    const auto lv = limit_values(sol, spec.nonlinearity());
    const double mass = reaction_integral(sol.profile, spec.nonlinearity());
    const double defect = std::abs(mass - sol.speed * (lv.gamma1 - lv.gamma0));
    return sol.speed == 0.0 ? defect : defect / std::abs(sol.speed);
}

LimitValues limit_values(const FrontSolution& sol, double flatness_tol)
{
    const Profile& p = sol.profile;
    const std::size_t n = p.values.size();
    if (n < 3)
        throw ContractViolation("limit_values: the profile has no interior nodes");
    const std::size_t k = std::max<std::size_t>(1, n / 20);
    LimitValues out;
    // interior nodes only: the boundary nodes carry the exterior states
    const auto lo = p.values.begin() + 1, hi = p.values.end() - 1;
    out.gamma0 = *lo;
    out.gamma1 = *(hi - 1);
    auto spread = [](auto a, auto b) {
        const auto [mn, mx] = std::minmax_element(a, b);
        return *mx - *mn;
    };
    out.variation = std::max(spread(lo, lo + static_cast<std::ptrdiff_t>(k)), spread(hi - static_cast<std::ptrdiff_t>(k), hi));
    out.flat = out.variation <= flatness_tol;
    return out;
}

LimitValues limit_values(const FrontSolution& sol, const IgnitionNonlinearity& f, double flatness_tol)
{
    LimitValues out = limit_values(sol, flatness_tol);
    const double scale = std::max(f.supremum(), std::numeric_limits<double>::min());
    out.reaction_free = f(out.gamma0) <= flatness_tol * scale && f(out.gamma1) <= flatness_tol * scale;
    return out;
}

void write_front_csv(std::ostream& os, const FrontSolution& sol, const ProblemSpec& spec,
                     const OperatorAssembly& assembly)
{
    const Profile& p = sol.profile;
    const auto op = apply_full(assembly, p);
    const auto dphi = derivative(p);
    const auto& f = spec.nonlinearity();
    os << "x,phi,dphi,op_value,f_phi\n" << std::setprecision(17);
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        os << p.grid.node(i) << ',' << p.values[i] << ',' << dphi[i] << ',';
        if (!std::isnan(op[i]))
            os << op[i];
        os << ',' << f(p.values[i]) << '\n';
    }
}

} // namespace fracfront
