#include "fracfront/asymptotic_kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

namespace fracfront {

namespace {

constexpr double quad_tol = 1e-12;

// Adaptive Gauss-Kronrod on [a, b], mapped to [0, 1] (boost's error estimate is unreliable
// on intervals much shorter than 1). Throws with the achieved error if the estimate stays
// above the tolerance relative to the integral's L1 norm.
template <class F>
double integrate(F f, double a, double b)
{
    if (!(b > a))
        return 0.0;
    const double w = b - a;
    auto mapped = [&](double u) { return w * f(a + w * u); };
    double err = 0.0, l1 = 0.0;
    const double v =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(mapped, 0.0, 1.0, 20, quad_tol, &err, &l1);
    if (!std::isfinite(v) || err > 1e-8 * l1 + 1e-300)
        throw NumericalError("power-tail quadrature did not converge on [" + std::to_string(a) + ", " +
                                 std::to_string(b) + "]",
                             err);
    return v;
}

// int_a^inf f over doubling pieces until a piece no longer contributes
template <class F>
double integrate_to_infinity(F f, double a)
{
    double acc = 0.0;
    double lo = a;
    for (int k = 0; k < 400; ++k) {
        const double hi = 2.0 * lo;
        const double piece = integrate(f, lo, hi);
        acc += piece;
        if (k > 4 && std::abs(piece) <= 1e-17 * std::abs(acc))
            return acc;
        lo = hi;
    }
    throw NumericalError("semi-infinite power-tail integral did not settle", std::abs(acc));
}

struct Base {
    double beta;
    TailKind kind;

    double junction_value() const { return kind == TailKind::Lower ? 1.0 : 0.0; }

    double value(double y) const { return y < -1.0 ? std::pow(-y, -beta) : junction_value(); }

    double slope(double y) const { return y < -1.0 ? beta * std::pow(-y, -beta - 1.0) : 0.0; }

    // k-th derivative of |y|^{-beta} for y < 0
    double power_derivative(double y, int k) const
    {
        double c = 1.0;
        for (int j = 0; j < k; ++j)
            c *= beta + j;
        return c * std::pow(-y, -beta - k);
    }

    // (-d_xx)^alpha of the base function at y != -1, without the factor c_alpha
    double operator_value(double alpha, double y) const
    {
        const double s = 2.0 * alpha;
        auto g = [this](double z) { return std::pow(-z, -beta); };

        if (y > -1.0) {
            // flat region: only the power branch z = -1 - t, t > 0 contributes
            const double delta = y + 1.0;
            auto integrand = [&](double t) {
                const double diff = junction_value() - std::pow(1.0 + t, -beta);
                return diff * std::pow(delta + t, -1.0 - s);
            };
            const double first = std::min(delta, 1.0);
            return integrate(integrand, 0.0, first) + integrate_to_infinity(integrand, first);
        }

        const double d = -1.0 - y; // distance to the junction
        const double gy = g(y);
        const double outer = (gy - junction_value()) * std::pow(d, -s) / s;

        const double r = 0.5 * d;
        const double ts = 1e-3 * r;
        // symmetric pairs: 2 g(y) - g(y+t) - g(y-t) = -g'' t^2 - g'''' t^4 / 12 - ...
        const double g2 = power_derivative(y, 2), g4 = power_derivative(y, 4);
        double sym = -g2 * std::pow(ts, 2.0 - s) / (2.0 - s) - g4 * std::pow(ts, 4.0 - s) / (12.0 * (4.0 - s));
        // with tau = t/|y|: 2 - (1-tau)^{-beta} - (1+tau)^{-beta} = -2 [expm1(m) cosh(q) + 2 sinh(q/2)^2],
        // m = -beta log1p(-tau^2)/2, q = beta atanh(tau); free of the O(tau) cancellation
        auto pair = [&](double t) {
            const double tau = t / (-y);
            const double m = -0.5 * beta * std::log1p(-tau * tau);
            const double q = beta * std::atanh(tau);
            const double sh = std::sinh(0.5 * q);
            const double second = -2.0 * gy * (std::expm1(m) * std::cosh(q) + 2.0 * sh * sh);
            return second * std::pow(t, -1.0 - s);
        };
        sym += integrate(pair, ts, 10.0 * ts) + integrate(pair, 10.0 * ts, 100.0 * ts) + integrate(pair, 100.0 * ts, r);

        // one-sided remainders: towards the junction on [r, d], away from it on [r, inf)
        // g(y + t) varies on the unit scale near the junction; split geometrically in the
        // distance u = d - t to it
        auto toward = [&](double u) { return (gy - g(-1.0 - u)) * std::pow(d - u, -1.0 - s); };
        double near_side = 0.0;
        for (double lo = 0.0, hi = std::min(1.0, r); lo < r; lo = hi, hi = std::min(2.0 * hi, r))
            near_side += integrate(toward, lo, hi);
        auto away = [&](double t) { return g(y - t) * std::pow(t, -1.0 - s); };
        const double far_side = gy * std::pow(r, -s) / s - integrate_to_infinity(away, r);

        return outer + sym + near_side + far_side;
    }
};

void check_kind(double beta, TailKind kind)
{
    if (kind == TailKind::Lower && !(beta > 0.0 && beta < 1.0))
        throw DomainError("lower-kind power tail requires beta in (0,1)");
    if (kind == TailKind::Upper && !(beta > 1.0))
        throw DomainError("upper-kind power tail requires beta > 1");
}

} // namespace

PowerTailFunction::PowerTailFunction(double beta_, TailKind kind_, double epsilon_, bool reflected_)
    : beta(beta_), kind(kind_), epsilon(epsilon_), reflected(reflected_)
{
    check_kind(beta, kind);
    if (!(epsilon > 0.0))
        throw DomainError("power-tail scale epsilon must be positive");
}

double PowerTailFunction::value(double x) const
{
    const Base base{beta, kind};
    if (reflected)
        return 1.0 - base.value(-epsilon * x);
    return base.value(epsilon * x);
}

double PowerTailFunction::slope(double x) const
{
    const Base base{beta, kind};
    if (reflected)
        return epsilon * base.slope(-epsilon * x);
    return epsilon * base.slope(epsilon * x);
}

double eval_power_tail(const PowerTailFunction& fn, double x)
{
    return fn.value(x);
}

double eval_operator_on_tail(const PowerTailFunction& fn, const ProblemSpec& spec, double c, double x)
{
    return eval_operator_on_tail(fn, spec.alpha(), c, x);
}

double eval_operator_on_tail(const PowerTailFunction& fn, double alpha, double c, double x)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("fractional order must lie in (0,1)");
    const Base base{fn.beta, fn.kind};
    const double y = (fn.reflected ? -1.0 : 1.0) * fn.epsilon * x;
    if (y == -1.0)
        throw ContractViolation("operator on a power tail is singular at the junction point");
    const double c_alpha = normalization_constant(alpha);
    // phi_eps(x) = phi(eps x) scales the operator by eps^{2 alpha}; reflection flips its sign
    double op = c_alpha * std::pow(fn.epsilon, 2.0 * alpha) * base.operator_value(alpha, y);
    if (fn.reflected)
        op = -op;
    return op + c * fn.slope(x);
}

double leading_term(const PowerTailFunction& fn, const ProblemSpec& spec, double c, double x)
{
    return leading_term(fn, spec.alpha(), c, x);
}

double leading_term(const PowerTailFunction& fn, double alpha, double c, double x)
{
    if (fn.epsilon != 1.0 || fn.reflected)
        throw ContractViolation("leading_term is stated for the unscaled, unreflected function");
    if (!(x < -1.0))
        throw ContractViolation("leading_term requires x < -1");
    const double c_alpha = normalization_constant(alpha);
    const double ax = -x;
    const double drift = c * fn.beta * std::pow(ax, -fn.beta - 1.0);
    if (fn.kind == TailKind::Lower)
        return -c_alpha / (2.0 * alpha) * std::pow(ax, -2.0 * alpha) + drift;
    return -c_alpha / (fn.beta - 1.0) * std::pow(ax, -2.0 * alpha - 1.0) + drift;
}

void ExpansionReport::write_csv(std::ostream& os) const
{
    os << "x,evaluated,predicted,ratio,remainder\n";
    os << std::setprecision(17);
    for (const auto& r : rows)
        os << r.x << ',' << r.evaluated << ',' << r.predicted << ',' << r.ratio << ',' << r.remainder << '\n';
}

ExpansionReport expansion_report(const PowerTailFunction& fn, const ProblemSpec& spec, double c, double x_min,
                                 double x_max, std::size_t n_points)
{
    return expansion_report(fn, spec.alpha(), c, x_min, x_max, n_points);
}

ExpansionReport expansion_report(const PowerTailFunction& fn, double alpha, double c, double x_min, double x_max,
                                 std::size_t n_points)
{
    if (!(x_max <= -10.0) || !(x_min < x_max) || !(x_min / x_max >= 10.0 * (1.0 - 1e-12)))
        throw ContractViolation("expansion_report needs x_max <= -10 and at least a decade of range");
    if (n_points < 2)
        throw ContractViolation("expansion_report needs at least two sample points");

    ExpansionReport report;
    report.beta = fn.beta;
    report.kind = fn.kind;
    report.speed = c;
    const double l0 = std::log(-x_max), l1 = std::log(-x_min);
    for (std::size_t k = 0; k < n_points; ++k) {
        const double x = -std::exp(l0 + (l1 - l0) * static_cast<double>(k) / static_cast<double>(n_points - 1));
        ExpansionRow row;
        row.x = x;
        row.evaluated = eval_operator_on_tail(fn, alpha, c, x);
        row.predicted = leading_term(fn, alpha, c, x);
        row.ratio = row.evaluated / row.predicted;
        row.remainder = row.evaluated - row.predicted;
        report.rows.push_back(row);
    }

    // log|remainder| = a - p log|x|
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t used = 0;
    for (const auto& r : report.rows) {
        if (r.remainder == 0.0)
            continue;
        const double lx = std::log(-r.x), ly = std::log(std::abs(r.remainder));
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++used;
    }
    if (used >= 2) {
        const double nn = static_cast<double>(used);
        report.remainder_exponent = -(nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    }

    report.sign_crossover = -report.rows.back().x;
    for (auto it = report.rows.rbegin(); it != report.rows.rend(); ++it) {
        if (std::signbit(it->evaluated) != std::signbit(it->predicted))
            break;
        report.sign_crossover = -it->x;
    }
    return report;
}

SupersolutionThreshold supersolution_threshold(const ProblemSpec& spec)
{
    const double alpha = spec.alpha();
    const double beta = 2.0 * alpha - 1.0;
    const PowerTailFunction phi(beta, TailKind::Lower);

    SupersolutionThreshold out;
    out.far_field = spec.c_alpha() / (2.0 * alpha * beta);
    out.matching_radius = std::pow(spec.theta(), -1.0 / beta);
    out.speed = out.far_field;
    out.binding_x = -std::numeric_limits<double>::infinity();

    auto required = [&](double ax, bool inside) {
        const double x = -ax;
        const double op = eval_operator_on_tail(phi, alpha, 0.0, x);
        const double target = inside ? spec.sup_f() : 0.0;
        return (target - op) / phi.slope(x);
    };

    const double A = out.matching_radius;
    constexpr int samples = 701;
    for (int k = 0; k < samples; ++k) {
        const double u = -3.0 + 7.0 * k / (samples - 1.0);
        const double ax = 1.0 + std::pow(10.0, u);
        const double need = required(ax, ax < A);
        if (!std::isfinite(need))
            throw NumericalError("super-solution scan produced a non-finite speed requirement");
        if (need > out.speed) {
            out.speed = need;
            out.binding_x = -ax;
        }
    }
    // f(phi) = sup f is allowed up to the matching point itself, where phi' is smallest
    if (A > 1.0) {
        const double need = required(A, true);
        if (need > out.speed) {
            out.speed = need;
            out.binding_x = -A;
        }
    }
    return out;
}

DerivativeSubsolution derivative_subsolution(const ProblemSpec& spec, double drift_fraction)
{
    if (!(drift_fraction > 0.0 && drift_fraction < 1.0))
        throw ContractViolation("drift fraction must lie in (0,1)");
    const double alpha = spec.alpha();
    const PowerTailFunction phibar(2.0 * alpha, TailKind::Upper);
    const double far = spec.c_alpha() / (2.0 * alpha * (2.0 * alpha - 1.0));

    DerivativeSubsolution out;
    out.drift = drift_fraction * far;
    constexpr int samples = 401;
    double radius = -1.0;
    // walk inwards from |x| = 1e4; A is the last point before the inequality first fails
    for (int k = samples - 1; k >= 0; --k) {
        const double u = -3.0 + 7.0 * k / (samples - 1.0);
        const double ax = 1.0 + std::pow(10.0, u);
        const double v = eval_operator_on_tail(phibar, alpha, out.drift, -ax);
        if (v > 0.0)
            break;
        radius = ax;
    }
    if (radius < 0.0)
        throw NumericalError("derivative sub-solution inequality fails at the far end of the scan");
    out.radius = radius;
    return out;
}

} // namespace fracfront
