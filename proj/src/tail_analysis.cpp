#include "fracfront/tail_analysis.hpp"

#include "fracfront/asymptotic_kernels.hpp"
#include "fracfront/truncated_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace fracfront {

namespace {

void require_window(TailWindow w)
{
    if (!(w.x_lo < w.x_hi && w.x_hi < 0.0))
        throw ContractViolation("tail window must satisfy x_lo < x_hi < 0");
}

std::vector<std::size_t> nodes_in(std::span<const double> x, TailWindow w)
{
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] >= w.x_lo && x[i] <= w.x_hi)
            idx.push_back(i);
    return idx;
}

double inf_indicator(std::span<const double> x, std::span<const double> v, double q, TailWindow w)
{
    double m = std::numeric_limits<double>::infinity();
    for (auto i : nodes_in(x, w))
        m = std::min(m, v[i] * std::pow(-x[i], q));
    return m;
}

} // namespace

TailWindow default_tail_window(const Grid& grid)
{
    return {-0.5 * grid.half_width(), -0.1 * grid.half_width()};
}

TailFit fit_tail(std::span<const double> x, std::span<const double> value, TailWindow window,
                 double indicator_exponent)
{
    require_window(window);
    if (x.size() != value.size())
        throw ContractViolation("fit_tail: abscissae and values differ in length");
    const auto idx = nodes_in(x, window);
    if (idx.size() < 20)
        throw ContractViolation("fit_tail: fewer than 20 samples in the window");
    double far = 0.0, near = std::numeric_limits<double>::infinity();
    for (auto i : idx) {
        if (!(value[i] > 0.0))
            throw ContractViolation("fit_tail: non-positive value at x = " + std::to_string(x[i]));
        far = std::max(far, -x[i]);
        near = std::min(near, -x[i]);
    }
    if (far / near < std::sqrt(10.0) * (1.0 - 1e-12))
        throw ContractViolation("fit_tail: samples span less than half a decade");

    TailFit fit;
    fit.window = window;
    fit.points = idx.size();
    fit.indicator_exponent = indicator_exponent;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    fit.indicator_sup = -std::numeric_limits<double>::infinity();
    fit.indicator_inf = std::numeric_limits<double>::infinity();
    for (auto i : idx) {
        const double lx = std::log(-x[i]), ly = std::log(value[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        const double ind = value[i] * std::pow(-x[i], indicator_exponent);
        fit.indicator_sup = std::max(fit.indicator_sup, ind);
        fit.indicator_inf = std::min(fit.indicator_inf, ind);
    }
    const double n = static_cast<double>(idx.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    fit.exponent = -slope;
    fit.constant = std::exp(intercept);
    double ss = 0.0;
    for (auto i : idx) {
        const double e = std::log(value[i]) - (intercept + slope * std::log(-x[i]));
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

DerivativeLowerBound verify_derivative_lower_bound(std::span<const double> x, std::span<const double> dphi,
                                                   double alpha, TailWindow window)
{
    require_window(window);
    const double q = 2.0 * alpha;
    // halves split at the geometric midpoint
    const double split = -std::sqrt(window.x_lo * window.x_hi);
    DerivativeLowerBound out;
    out.outer_inf = inf_indicator(x, dphi, q, {window.x_lo, split});
    out.inner_inf = inf_indicator(x, dphi, q, {split, window.x_hi});
    out.m_est = std::min(out.outer_inf, out.inner_inf);
    if (!std::isfinite(out.m_est))
        throw ContractViolation("verify_derivative_lower_bound: no samples in the window");
    const double hi = std::max(out.inner_inf, out.outer_inf);
    out.pass = out.m_est > 0.0 && (hi - out.m_est) < 0.5 * hi;
    return out;
}

DerivativeLowerBound verify_derivative_lower_bound(const FrontSolution& sol, const ProblemSpec& spec,
                                                   TailWindow window)
{
    const auto x = sol.profile.grid.nodes();
    const auto d = derivative(sol.profile);
    return verify_derivative_lower_bound(x, d, spec.alpha(), window);
}

std::string_view to_string(DominationSide side)
{
    return side == DominationSide::Upper ? "upper" : "lower";
}

DominationReport check_domination(const FrontSolution& sol, const ProblemSpec& spec, DominationSide side,
                                  const DominationOptions& options)
{
    if (!(sol.speed > 0.0))
        throw ContractViolation("check_domination needs a positive speed");
    if (!(options.epsilon_factor > 0.0))
        throw ContractViolation("check_domination: epsilon factor must be positive");
    const double alpha = spec.alpha();
    const double beta = 2.0 * alpha - 1.0;
    const Grid& grid = sol.profile.grid;
    const auto x = grid.nodes();
    const auto& phi = sol.profile.values;

    DominationReport rep;
    rep.side = side;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    auto compare = [&](std::size_t i, double margin) {
        ++rep.nodes_checked;
        if (margin < 0.0) ++rep.violations;
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_x = x[i];
        }
    };

    if (side == DominationSide::Upper) {
        const double K = sol.diagnostics.speed_bound > 0.0 ? sol.diagnostics.speed_bound : speed_bound(spec);
        rep.epsilon = options.epsilon_factor * std::pow(0.5 * sol.speed / K, 1.0 / beta);
        const PowerTailFunction bound(beta, TailKind::Lower, rep.epsilon);
        rep.checked = {-grid.half_width(), grid.half_width()};
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double v = bound.value(x[i]);
            if (v < 1.0) ++rep.active_nodes;
            compare(i, v - phi[i]);
        }
    } else {
        const double far_end = -0.9 * grid.half_width();
        auto epsilon_for = [&](const DerivativeSubsolution& s) {
            return options.epsilon_factor * std::pow(sol.speed / s.drift, 1.0 / beta);
        };
        std::optional<DerivativeSubsolution> sub;
        if (options.drift_fraction > 0.0) {
            sub = derivative_subsolution(spec, options.drift_fraction);
        } else {
            // widest matching window (A - 1) / eps that still leaves a tail inside [-0.9 b, -A / eps]
            double best = -1.0;
            for (double fraction : {0.5, 0.6, 0.7, 0.8, 0.9, 0.95}) {
                try {
                    const auto s = derivative_subsolution(spec, fraction);
                    const double eps = epsilon_for(s);
                    const double width = (s.radius - 1.0) / eps;
                    if (-s.radius / eps > 0.5 * far_end && width > best) {
                        best = width;
                        sub = s;
                    }
                } catch (const NumericalError&) {
                }
            }
            if (!sub)
                sub = derivative_subsolution(spec, 0.5);
        }
        rep.drift = sub->drift;
        rep.radius = sub->radius;
        rep.epsilon = epsilon_for(*sub);
        const PowerTailFunction bar(2.0 * alpha, TailKind::Upper, rep.epsilon);
        const auto d = derivative(sol.profile);
        const double a = -sub->radius / rep.epsilon, one = -1.0 / rep.epsilon;
        // r from phi' (interpolated between nodes) on interior points of the matching window
        const double h = grid.spacing();
        auto dphi_at = [&](double xx) {
            const double s = (xx + grid.half_width()) / h;
            const auto i = std::min(static_cast<std::size_t>(s), x.size() - 2);
            const double w = s - static_cast<double>(i);
            return (1.0 - w) * d[i] + w * d[i + 1];
        };
        rep.r = std::numeric_limits<double>::infinity();
        constexpr int probes = 16;
        for (int k = 1; k < probes; ++k) {
            const double xx = a + (one - a) * k / probes;
            rep.r = std::min(rep.r, dphi_at(xx) / bar.value(xx));
        }
        rep.checked = {-0.9 * grid.half_width(), a};
        for (std::size_t i = 1; i + 1 < x.size(); ++i)
            if (x[i] >= rep.checked.x_lo && x[i] <= rep.checked.x_hi)
                compare(i, d[i] - rep.r * bar.value(x[i]));
        rep.active_nodes = rep.nodes_checked;
    }
    if (rep.nodes_checked == 0)
        rep.worst_margin = 0.0;
    rep.passed = rep.violations == 0;
    return rep;
}

TailBoundsReport check_tail_bounds(const FrontSolution& sol, const ProblemSpec& spec, std::optional<TailWindow> window)
{
    const double alpha = spec.alpha();
    const Grid& grid = sol.profile.grid;
    const double b = grid.half_width();
    const auto x = grid.nodes();
    const auto d = derivative(sol.profile);
    const TailWindow w = window.value_or(default_tail_window(grid));
    const double inner = -0.1 * b;

    TailBoundsReport rep;
    rep.profile_fit = fit_tail(x, sol.profile.values, w, 2.0 * alpha - 1.0);
    rep.derivative_fit = fit_tail(x, d, w, 2.0 * alpha);
    rep.derivative_bound = verify_derivative_lower_bound(x, d, alpha, w);
    for (double lo : {-0.25 * b, -0.5 * b, -0.9 * b}) {
        double sup = 0.0;
        for (auto i : nodes_in(x, {lo, inner}))
            sup = std::max(sup, sol.profile.values[i] * std::pow(-x[i], 2.0 * alpha - 1.0));
        rep.nested_sups.push_back(sup);
    }
    const auto [mn, mx] = std::minmax_element(rep.nested_sups.begin(), rep.nested_sups.end());
    rep.sup_variation = *mn > 0.0 ? *mx / *mn : std::numeric_limits<double>::infinity();
    rep.upper_bounded = rep.sup_variation < 2.0;
    rep.exponent_consistent = rep.profile_fit.exponent >= 2.0 * alpha - 1.0 - 0.1;
    rep.passed = rep.upper_bounded && rep.exponent_consistent && rep.derivative_bound.pass;
    return rep;
}

} // namespace fracfront
