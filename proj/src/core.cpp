#include "fracfront/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fracfront {

std::string_view to_string(Family family)
{
    switch (family) {
    case Family::Quadratic: return "quadratic";
    case Family::Cubic: return "cubic";
    case Family::Ramp: return "ramp";
    case Family::Zero: return "zero";
    }
    return "unknown";
}

Family parse_family(std::string_view name)
{
    if (name == "quadratic") return Family::Quadratic;
    if (name == "cubic") return Family::Cubic;
    if (name == "ramp") return Family::Ramp;
    if (name == "zero") return Family::Zero;
    throw ConfigError("unknown nonlinearity family '" + std::string(name) +
                      "' (expected quadratic, cubic, ramp or zero)");
}

IgnitionNonlinearity::IgnitionNonlinearity(Family family, double theta, double scale)
    : family_(family), theta_(theta), scale_(scale)
{
    if (!(theta > 0.0 && theta < 1.0))
        throw DomainError("ignition temperature theta must lie in (0,1)");
    if (!(scale >= 0.0) || !std::isfinite(scale))
        throw DomainError("nonlinearity scale must be finite and non-negative");
}

double IgnitionNonlinearity::operator()(double u) const noexcept
{
    if (family_ == Family::Zero || u < theta_ || u > 1.0)
        return 0.0;
    const double d = u - theta_;
    switch (family_) {
    case Family::Quadratic: return scale_ * d * (1.0 - u);
    case Family::Cubic: return scale_ * d * d * (1.0 - u);
    case Family::Ramp: return scale_ * d;
    case Family::Zero: break;
    }
    return 0.0;
}

double IgnitionNonlinearity::derivative(double u) const noexcept
{
    if (family_ == Family::Zero || u <= theta_ || u > 1.0)
        return 0.0;
    const double d = u - theta_;
    switch (family_) {
    case Family::Quadratic: return scale_ * (1.0 + theta_ - 2.0 * u);
    case Family::Cubic: return scale_ * d * (2.0 + theta_ - 3.0 * u);
    case Family::Ramp: return scale_;
    case Family::Zero: break;
    }
    return 0.0;
}

double IgnitionNonlinearity::lipschitz_bound() const noexcept
{
    const double w = 1.0 - theta_;
    switch (family_) {
    case Family::Quadratic: return scale_ * w;
    case Family::Cubic: return scale_ * w * w;
    // the ramp jumps at u = 1; its slope is still the best Lipschitz-type bound
    case Family::Ramp: return scale_;
    case Family::Zero: return 0.0;
    }
    return 0.0;
}

double IgnitionNonlinearity::supremum() const
{
    constexpr std::size_t samples = 2001;
    std::size_t best = 0;
    double best_value = -1.0;
    auto u_at = [&](std::size_t k) { return static_cast<double>(k) / (samples - 1); };
    for (std::size_t k = 0; k < samples; ++k) {
        const double v = (*this)(u_at(k));
        if (v > best_value) {
            best_value = v;
            best = k;
        }
    }
    if (best_value <= 0.0)
        return 0.0;

    double lo = u_at(best == 0 ? 0 : best - 1);
    double hi = u_at(std::min(best + 1, samples - 1));
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi - inv_phi * (hi - lo);
    double b = lo + inv_phi * (hi - lo);
    double fa = (*this)(a), fb = (*this)(b);
    for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
        if (fa > fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = (*this)(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = (*this)(b);
        }
    }
    return std::max({best_value, fa, fb, (*this)(0.5 * (lo + hi))});
}

bool ValidationReport::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(std::string_view condition) const
{
    for (const auto& c : checks)
        if (c.condition == condition)
            return &c;
    return nullptr;
}

ValidationFailure::ValidationFailure(std::string condition, ValidationReport report)
    : Error("nonlinearity fails condition '" + condition + "'"),
      condition_(std::move(condition)), report_(std::move(report))
{
}

ValidationReport validate_nonlinearity(const IgnitionNonlinearity& f, std::size_t n_samples)
{
    if (n_samples < 10)
        throw ContractViolation("validate_nonlinearity needs at least 10 samples");

    const double lo = -1.0, hi = 2.0;
    const double du = (hi - lo) / static_cast<double>(n_samples - 1);
    std::vector<double> u(n_samples), v(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
        u[k] = lo + du * static_cast<double>(k);
        v[k] = f(u[k]);
    }
    const double theta = f.theta();
    auto fmt = [](double x) {
        std::ostringstream os;
        os.precision(6);
        os << x;
        return os.str();
    };

    ValidationReport report;

    {
        double worst = 0.0, where = 0.0;
        for (std::size_t k = 0; k < n_samples; ++k)
            if (v[k] < worst) { worst = v[k]; where = u[k]; }
        report.checks.push_back({std::string(conditions::nonnegative), worst >= 0.0,
                                 worst >= 0.0 ? "" : "f(" + fmt(where) + ") = " + fmt(worst)});
    }
    {
        // zero outside (theta, 1) including both endpoints, evaluated exactly there
        bool ok = f(theta) == 0.0 && f(1.0) == 0.0;
        std::string detail;
        if (!ok)
            detail = "f(theta) = " + fmt(f(theta)) + ", f(1) = " + fmt(f(1.0));
        for (std::size_t k = 0; k < n_samples && ok; ++k) {
            if ((u[k] <= theta || u[k] >= 1.0) && v[k] != 0.0) {
                ok = false;
                detail = "f(" + fmt(u[k]) + ") = " + fmt(v[k]) + " outside [theta,1]";
            }
        }
        report.checks.push_back({std::string(conditions::support), ok, detail});
    }
    {
        const double lip = f.lipschitz_bound();
        double worst = 0.0;
        std::size_t at = 0;
        for (std::size_t k = 1; k < n_samples; ++k) {
            const double excess = std::abs(v[k] - v[k - 1]) - lip * du * (1.0 + 1e-9);
            if (excess > worst) { worst = excess; at = k; }
        }
        // jumps hiding between samples at the support edges
        for (double edge : {theta, 1.0}) {
            const double d = 1e-9;
            const double jump = std::max(std::abs(f(edge) - f(edge - d)), std::abs(f(edge + d) - f(edge)));
            const double excess = jump - lip * d * (1.0 + 1e-6);
            if (excess > worst) { worst = excess; at = 0; }
        }
        const bool ok = worst <= 0.0;
        report.checks.push_back({std::string(conditions::continuity), ok,
                                 ok ? "" : "jump exceeding Lipschitz bound near u = " + fmt(at ? u[at] : 1.0)});
    }
    {
        const double d = 1e-6;
        const double slope = (f(1.0) - f(1.0 - d)) / d;
        report.checks.push_back({std::string(conditions::decreasing_at_one), slope < 0.0,
                                 "one-sided difference " + fmt(slope)});
    }
    {
        const double sup = f.supremum();
        report.checks.push_back({std::string(conditions::nondegenerate), sup > 0.0, "sup f = " + fmt(sup)});
    }
    return report;
}

void require_valid(const IgnitionNonlinearity& f, std::size_t n_samples)
{
    auto report = validate_nonlinearity(f, n_samples);
    for (const auto& c : report.checks)
        if (!c.passed)
            throw ValidationFailure(c.condition, report);
}

double normalization_constant(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("normalization_constant: alpha must lie in (0,1)");
    // Gamma(-alpha) = Gamma(1 - alpha) / (-alpha) avoids evaluating Gamma at a negative argument
    const double gamma_neg = std::tgamma(1.0 - alpha) / alpha;
    return std::pow(4.0, alpha) * std::tgamma(alpha + 0.5) / (std::sqrt(std::numbers::pi) * gamma_neg);
}

ProblemSpec::ProblemSpec(double alpha, IgnitionNonlinearity nonlinearity)
    : alpha_(alpha), nonlinearity_(nonlinearity)
{
    if (!(alpha > 0.5 && alpha < 1.0))
        throw DomainError("fractional order alpha must lie strictly inside (1/2, 1)");
    c_alpha_ = normalization_constant(alpha);
    sup_f_ = nonlinearity_.supremum();
    lipschitz_ = nonlinearity_.lipschitz_bound();
}

ProblemSpec ProblemSpec::with_lipschitz_bound(double bound) const
{
    if (!(bound >= lipschitz_))
        throw ConfigError("lipschitz_bound override is smaller than the family's Lipschitz constant");
    ProblemSpec copy = *this;
    copy.lipschitz_ = bound;
    return copy;
}

Grid::Grid(double half_width, std::size_t n) : b_(half_width), n_(n)
{
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw ConfigError("grid half-width must be positive");
    if (n < 3 || n % 2 == 0)
        throw ConfigError("grid node count must be odd and at least 3 so that 0 is a node");
    h_ = 2.0 * half_width / static_cast<double>(n - 1);
}

Grid Grid::with_spacing(double half_width, double h)
{
    if (!(h > 0.0) || !(half_width >= h))
        throw ConfigError("grid spacing must be positive and not exceed the half-width");
    const auto mid = static_cast<std::size_t>(std::llround(half_width / h));
    return Grid(static_cast<double>(mid) * h, 2 * mid + 1);
}

double Grid::node(std::size_t i) const noexcept
{
    return (static_cast<double>(i) - static_cast<double>(center())) * h_;
}

std::vector<double> Grid::nodes() const
{
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i)
        x[i] = node(i);
    return x;
}

bool Grid::operator==(const Grid& other) const noexcept
{
    return n_ == other.n_ && b_ == other.b_;
}

Profile::Profile(Grid g, std::vector<double> v, double left, double right)
    : grid(g), values(std::move(v)), exterior_left(left), exterior_right(right)
{
    if (values.size() != grid.size())
        throw ContractViolation("profile has " + std::to_string(values.size()) + " values for a grid of " +
                                std::to_string(grid.size()) + " nodes");
}

bool Profile::is_nondecreasing(double tol) const
{
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] < values[i - 1] - tol)
            return false;
    return true;
}

bool Profile::within_exterior_range(double tol) const
{
    const double lo = std::min(exterior_left, exterior_right) - tol;
    const double hi = std::max(exterior_left, exterior_right) + tol;
    return std::all_of(values.begin(), values.end(), [&](double v) { return v >= lo && v <= hi; });
}

std::vector<double> derivative(const Profile& p)
{
    const auto n = p.values.size();
    const double h = p.grid.spacing();
    std::vector<double> d(n);
    const auto& v = p.values;
    for (std::size_t i = 1; i + 1 < n; ++i)
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    d[0] = (v[1] - v[0]) / h;
    d[n - 1] = (v[n - 1] - v[n - 2]) / h;
    return d;
}

Profile resample(const Profile& p, const Grid& target)
{
    const double b = p.grid.half_width();
    const double h = p.grid.spacing();
    const std::size_t n = p.grid.size();
    std::vector<double> out(target.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double x = target.node(i);
        if (x < -b) {
            out[i] = p.exterior_left;
        } else if (x > b) {
            out[i] = p.exterior_right;
        } else {
            const double t = (x + b) / h;
            const auto k = std::min(static_cast<std::size_t>(t), n - 2);
            const double w = t - static_cast<double>(k);
            out[i] = (1.0 - w) * p.values[k] + w * p.values[k + 1];
        }
    }
    out.front() = p.exterior_left;
    out.back() = p.exterior_right;
    return Profile(target, std::move(out), p.exterior_left, p.exterior_right);
}

double trapezoid(std::span<const double> values, double h)
{
    if (values.size() < 2)
        return 0.0;
    double s = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i)
        s += values[i];
    return s * h;
}

} // namespace fracfront
