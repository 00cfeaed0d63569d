#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// A function on the line: `u` on [lo, hi], constant states outside, kinks listed so the
/// quadrature never integrates across one.
struct LineFunction {
    std::function<double(double)> u;
    double lo = -1.0;
    double hi = 1.0;
    double left = 0.0;
    double right = 1.0;
    std::vector<double> kinks;

    double operator()(double x) const
    {
        if (x < lo) return left;
        if (x > hi) return right;
        return u(x);
    }
};

/// c_alpha from the symbol of cos: 1 / int_0^inf 2 (1 - cos y) y^{-1-2 alpha} dy, the
/// oscillatory integral summed period by period with the remainder in closed form.
inline double normalization_by_quadrature(double alpha)
{
    using boost::math::quadrature::gauss_kronrod;
    const double two_pi = 2.0 * M_PI;
    auto g = [alpha](double y) { return 2.0 * (1.0 - std::cos(y)) * std::pow(y, -1.0 - 2.0 * alpha); };
    // near 0: 2 (1 - cos y) = y^2 - y^4 / 12 + y^6 / 360 - ...
    const double d = 1e-2;
    double total = std::pow(d, 2 - 2 * alpha) / (2 - 2 * alpha) - std::pow(d, 4 - 2 * alpha) / (12 * (4 - 2 * alpha)) +
                   std::pow(d, 6 - 2 * alpha) / (360 * (6 - 2 * alpha));
    total += gauss_kronrod<double, 61>::integrate(g, d, two_pi, 15, 1e-14);
    const int periods = 4000;
    for (int k = 1; k < periods; ++k)
        total += gauss_kronrod<double, 61>::integrate(g, k * two_pi, (k + 1) * two_pi, 15, 1e-14);
    // beyond R = 2 pi periods: 2 R^{-2a} / (2a) minus the cosine part, whose integration by parts
    // gives 2 (1 + 2a) cos R R^{-2-2a} to leading order (sin R = 0, cos R = 1)
    const double R = periods * two_pi;
    total += std::pow(R, -2 * alpha) / alpha - 2.0 * (1 + 2 * alpha) * std::pow(R, -2 - 2 * alpha);
    return 1.0 / total;
}

/// c_alpha int_0^inf (2 u(x) - u(x + t) - u(x - t)) t^{-1-2 alpha} dt by adaptive Gauss-Kronrod
/// between the kinks; the first `delta` uses the second-order Taylor term of u at x.
inline double pv_operator(const LineFunction& fn, double alpha, double c_alpha, double x, double delta = 1e-3)
{
    using boost::math::quadrature::gauss_kronrod;
    const double ux = fn(x);
    auto integrand = [&](double t) { return (2.0 * ux - fn(x + t) - fn(x - t)) * std::pow(t, -1.0 - 2.0 * alpha); };

    const double e = delta;
    const double upp = (fn(x + e) - 2.0 * ux + fn(x - e)) / (e * e);
    double total = -upp * std::pow(delta, 2.0 - 2.0 * alpha) / (2.0 - 2.0 * alpha);

    const double far = std::max(std::abs(x - fn.lo), std::abs(fn.hi - x));
    std::vector<double> cuts = {delta, far};
    for (double k : fn.kinks) cuts.push_back(std::abs(x - k));
    cuts.push_back(std::abs(x - fn.lo));
    cuts.push_back(std::abs(fn.hi - x));
    for (double t = delta; t < far; t *= 2.0) cuts.push_back(t);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](double t) { return t < delta || t > far; }), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += gauss_kronrod<double, 61>::integrate(integrand, cuts[i], cuts[i + 1], 12, 1e-10);
    // both sides in their constant states beyond `far`
    total += (2.0 * ux - fn.left - fn.right) * std::pow(far, -2.0 * alpha) / (2.0 * alpha);
    return c_alpha * total;
}

} // namespace oracle
