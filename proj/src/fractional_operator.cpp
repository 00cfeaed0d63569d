#include "fracfront/fractional_operator.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace fracfront {

namespace {

using boost::math::quadrature::gauss;

// int_k^{k+1} w(t) t^{-1-s} dt for a smooth weight w; the integrand is analytic on the cell
template <class W>
double cell_integral(double s, double k, W w)
{
    return gauss<double, 20>::integrate([&](double t) { return w(t) * std::pow(t, -1.0 - s); }, k, k + 1.0);
}

// weight of the left endpoint of cell [k, k+1]
double left_hat(double s, double k)
{
    return cell_integral(s, k, [k](double t) { return k + 1.0 - t; });
}

// weight of the right endpoint of cell [k, k+1]
double right_hat(double s, double k)
{
    return cell_integral(s, k, [k](double t) { return t - k; });
}

void require_order(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("fractional order must lie in (0,1)");
}

double near_field_weight(double alpha)
{
    const double s = 2.0 * alpha;
    const double near = 1.0 / (2.0 - s);
    // the defect correction is dropped where it would flip the sign (small alpha only)
    return near - std::min(interpolation_defect(alpha), near);
}

} // namespace

double interpolation_defect(double alpha)
{
    require_order(alpha);
    const double s = 2.0 * alpha;
    constexpr int cells = 4000;
    double sum = 0.0;
    for (int k = cells; k >= 1; --k) {
        const double kk = k;
        sum += cell_integral(s, kk, [kk](double t) { return (t - kk) * (kk + 1.0 - t); });
    }
    // remaining cells behave like (1/6)(k+1/2)^{-1-s}; midpoint-rule tail
    sum += std::pow(cells + 1.0, -s) / (6.0 * s);
    return sum;
}

std::vector<double> kernel_weights(double alpha, std::size_t count)
{
    require_order(alpha);
    const double s = 2.0 * alpha;
    std::vector<double> w(count, 0.0);
    if (count > 1)
        w[1] = left_hat(s, 1.0) + near_field_weight(alpha);
    for (std::size_t m = 2; m < count; ++m) {
        const double mm = static_cast<double>(m);
        w[m] = left_hat(s, mm) + right_hat(s, mm - 1.0);
    }
    return w;
}

double boundary_cell_weight(double alpha, std::size_t m)
{
    require_order(alpha);
    if (m == 0)
        throw ContractViolation("boundary_cell_weight: distance must be positive");
    if (m == 1)
        return near_field_weight(alpha);
    return right_hat(2.0 * alpha, static_cast<double>(m) - 1.0);
}

Eigen::VectorXd OperatorAssembly::exterior_offset(double left, double right) const
{
    return left * (boundary_left + tail_left) + right * (boundary_right + tail_right);
}

OperatorAssembly assemble(const Grid& grid, const ProblemSpec& spec)
{
    return assemble(grid, spec.alpha());
}

OperatorAssembly assemble(const Grid& grid, double alpha)
{
    require_order(alpha);
    const std::size_t n = grid.size();
    if (n < 16)
        throw ConfigError("grid too small to separate near, mid and far fields (need n >= 16)");

    const double s = 2.0 * alpha;
    const double h = grid.spacing();
    const double c_alpha = normalization_constant(alpha);
    const double scale = c_alpha * std::pow(h, -s);
    const std::size_t m = n - 2;

    const auto w = kernel_weights(alpha, n);
    std::vector<double> edge(n, 0.0);
    for (std::size_t d = 1; d < n; ++d)
        edge[d] = boundary_cell_weight(alpha, d);

    OperatorAssembly a{grid, alpha, c_alpha, h, Eigen::MatrixXd::Zero(m, m), Eigen::VectorXd(m),
                       Eigen::VectorXd(m), Eigen::VectorXd(m), Eigen::VectorXd(m)};

    // prefix sums of the Toeplitz weights give each row's coupling total in O(1)
    std::vector<double> prefix(n, 0.0);
    for (std::size_t d = 1; d < n; ++d)
        prefix[d] = prefix[d - 1] + w[d];

    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t i = r + 1; // grid index
        const std::size_t to_left = i;          // distance to node 0
        const std::size_t to_right = n - 1 - i; // distance to node n-1
        for (std::size_t c = 0; c < m; ++c)
            if (c != r)
                a.interior_matrix(r, c) = -scale * w[r > c ? r - c : c - r];
        a.boundary_left[r] = -scale * edge[to_left];
        a.boundary_right[r] = -scale * edge[to_right];
        a.tail_left[r] = -scale * std::pow(static_cast<double>(to_left), -s) / s;
        a.tail_right[r] = -scale * std::pow(static_cast<double>(to_right), -s) / s;
        const double couplings = prefix[to_left - 1] + prefix[to_right - 1];
        a.interior_matrix(r, r) = scale * couplings - a.boundary_left[r] - a.boundary_right[r] -
                                  a.tail_left[r] - a.tail_right[r];
    }
    return a;
}

OperatorAssembly assemble_local_laplacian(const Grid& grid)
{
    const std::size_t n = grid.size();
    if (n < 5)
        throw ConfigError("grid too small for the local Laplacian");
    const double h2 = grid.spacing() * grid.spacing();
    const std::size_t m = n - 2;
    OperatorAssembly a{grid, 1.0, 1.0, grid.spacing(), Eigen::MatrixXd::Zero(m, m),
                       Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m),
                       Eigen::VectorXd::Zero(m)};
    for (std::size_t r = 0; r < m; ++r) {
        a.interior_matrix(r, r) = 2.0 / h2;
        if (r > 0) a.interior_matrix(r, r - 1) = -1.0 / h2;
        if (r + 1 < m) a.interior_matrix(r, r + 1) = -1.0 / h2;
    }
    a.boundary_left[0] = -1.0 / h2;
    a.boundary_right[m - 1] = -1.0 / h2;
    return a;
}

Eigen::VectorXd apply(const OperatorAssembly& assembly, const Profile& p)
{
    if (!(p.grid == assembly.grid))
        throw ContractViolation("apply: profile grid differs from the assembled grid");
    const std::size_t n = p.grid.size();
    const Eigen::Map<const Eigen::VectorXd> interior(p.values.data() + 1, static_cast<Eigen::Index>(n - 2));
    return assembly.interior_matrix * interior + assembly.boundary_left * p.values.front() +
           assembly.boundary_right * p.values.back() + assembly.tail_left * p.exterior_left +
           assembly.tail_right * p.exterior_right;
}

std::vector<double> apply_full(const OperatorAssembly& assembly, const Profile& p)
{
    const Eigen::VectorXd inner = apply(assembly, p);
    std::vector<double> out(p.grid.size(), std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index r = 0; r < inner.size(); ++r)
        out[static_cast<std::size_t>(r) + 1] = inner[r];
    return out;
}

namespace {

// Same discretization as `assemble` without storing the matrix; used for the large
// grids of the symbol check. Returns interior values.
std::vector<double> apply_matrix_free(double alpha, const Profile& p)
{
    const Grid& grid = p.grid;
    const std::size_t n = grid.size();
    const double s = 2.0 * alpha;
    const double scale = normalization_constant(alpha) * std::pow(grid.spacing(), -s);
    const auto w = kernel_weights(alpha, n);
    const auto& v = p.values;
    std::vector<double> out(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 1; j + 1 < n; ++j)
            if (j != i)
                acc += w[i > j ? i - j : j - i] * (v[i] - v[j]);
        const std::size_t dl = i, dr = n - 1 - i;
        acc += boundary_cell_weight(alpha, dl) * (v[i] - v.front());
        acc += boundary_cell_weight(alpha, dr) * (v[i] - v.back());
        acc += std::pow(static_cast<double>(dl), -s) / s * (v[i] - p.exterior_left);
        acc += std::pow(static_cast<double>(dr), -s) / s * (v[i] - p.exterior_right);
        out[i - 1] = scale * acc;
    }
    return out;
}

} // namespace

Grid symbol_check_grid(double xi, double h, double min_half_width)
{
    if (xi == 0.0)
        return Grid::with_spacing(min_half_width, h);
    const double target = min_half_width / std::min(std::abs(xi), 1.0);
    const double quarter = std::numbers::pi / (2.0 * std::abs(xi));
    auto k = static_cast<long>(std::ceil(target / quarter));
    if (k % 2 == 0)
        ++k;
    const double b = static_cast<double>(k) * quarter;
    const auto mid = static_cast<std::size_t>(std::ceil(b / h));
    return Grid(b, 2 * mid + 1);
}

namespace {

/// int_b^inf cos(xi y) (y - d)^{-1-2 alpha} dy for b > d: Gauss on half periods, then the
/// asymptotic expansion by repeated integration by parts.
double cosine_tail(double xi, double alpha, double b, double d)
{
    using boost::math::quadrature::gauss;
    const double s = 1.0 + 2.0 * alpha;
    auto g = [&](double y) { return std::pow(y - d, -s); };
    auto integrand = [&](double y) { return std::cos(xi * y) * g(y); };
    const double half_period = std::numbers::pi / xi;
    constexpr int pieces = 128;
    double total = 0.0;
    for (int k = 0; k < pieces; ++k)
        total += gauss<double, 30>::integrate(integrand, b + k * half_period, b + (k + 1) * half_period);
    const double y = b + pieces * half_period;
    const double r = y - d;
    const double g0 = std::pow(r, -s);
    const double g1 = -s * g0 / r;
    const double g2 = -(s + 1.0) * g1 / r;
    const double g3 = -(s + 2.0) * g2 / r;
    const double sn = std::sin(xi * y), cs = std::cos(xi * y);
    total += -sn * g0 / xi - cs * g1 / (xi * xi) + sn * g2 / (xi * xi * xi) + cs * g3 / (xi * xi * xi * xi);
    return total;
}

} // namespace

double symbol_check(double alpha, double xi, const Grid& grid)
{
    const std::size_t n = grid.size();
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i)
        u[i] = std::cos(xi * grid.node(i));
    const double exterior = xi == 0.0 ? 1.0 : 0.0;
    const Profile p(grid, u, exterior, exterior);
    const auto out = apply_matrix_free(alpha, p);
    const double symbol = std::pow(std::abs(xi), 2.0 * alpha);
    const double c_alpha = normalization_constant(alpha);
    const double b = grid.half_width();

    double err = 0.0, ref = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double x = grid.node(i);
        if (std::abs(x) > b / 3.0)
            continue;
        // the grid function is cos only on [-b, b]; add back what the missing exterior contributes
        double expected = symbol * u[i];
        if (xi != 0.0)
            expected += c_alpha * (cosine_tail(std::abs(xi), alpha, b, x) + cosine_tail(std::abs(xi), alpha, b, -x));
        err = std::max(err, std::abs(out[i - 1] - expected));
        ref = std::max(ref, std::abs(symbol * u[i]));
    }
    return xi == 0.0 ? err : err / ref;
}

double symbol_check(const ProblemSpec& spec, double xi, const Grid& grid)
{
    return symbol_check(spec.alpha(), xi, grid);
}

std::pair<double, double> exterior_operator_integrals(const Profile& p, double alpha, double c_alpha)
{
    const double s = 2.0 * alpha;
    if (!(s > 1.0))
        throw DomainError("exterior operator integrals diverge for alpha <= 1/2");
    const auto& v = p.values;
    if (v.front() != p.exterior_left || v.back() != p.exterior_right)
        throw ContractViolation("exterior integrals need boundary node values equal to the exterior states");

    const Grid& g = p.grid;
    const double h = g.spacing();
    const double b = g.half_width();
    const std::size_t n = g.size();
    const double far = std::pow(2.0 * b, 1.0 - s) / (s - 1.0);

    // int over [-b, b] of (e - u(z)) w^{-s} dz, w the distance to the chosen end; the linear
    // interpolant vanishes at w = 0 so the first cell is integrated in closed form
    auto side = [&](bool right) {
        const double e = right ? p.exterior_right : p.exterior_left;
        double acc = 0.0;
        for (std::size_t c = 0; c + 1 < n; ++c) {
            // cell c spans distances [c h, (c+1) h] from the end
            const double g0 = e - (right ? v[n - 1 - c] : v[c]);
            const double g1 = e - (right ? v[n - 2 - c] : v[c + 1]);
            if (c == 0) {
                // g(w) = g1 w / h
                acc += g1 / h * std::pow(h, 2.0 - s) / (2.0 - s);
            } else {
                const double w0 = static_cast<double>(c) * h;
                acc += gauss<double, 10>::integrate(
                    [&](double w) { return (g0 + (g1 - g0) * (w - w0) / h) * std::pow(w, -s); }, w0, w0 + h);
            }
        }
        return acc;
    };

    const double left = c_alpha / s * ((p.exterior_left - p.exterior_right) * far + side(false));
    const double right = c_alpha / s * ((p.exterior_right - p.exterior_left) * far + side(true));
    return {left, right};
}

} // namespace fracfront
