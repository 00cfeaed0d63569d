#include "fracfront/core.hpp"
#include "fracfront/fractional_operator.hpp"

#include "pv_quadrature.hpp"

#include "approx.hpp"

#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

using namespace fracfront;

TEST_CASE("normalization constant at alpha = 1/2 is 1/pi")
{
    CHECK(normalization_constant(0.5) == rel(1.0 / M_PI).epsilon(1e-14));
    CHECK(oracle::normalization_by_quadrature(0.5) == rel(1.0 / M_PI).epsilon(1e-8));
}

TEST_CASE("normalization constant agrees with the quadrature of the cosine symbol")
{
    for (double a : {0.55, 0.6, 0.75, 0.9, 0.95})
        CHECK(normalization_constant(a) == rel(oracle::normalization_by_quadrature(a)).epsilon(1e-8));
}

TEST_CASE("alpha = 0.75: c_alpha value and symbol cross-check on a refined grid")
{
    const double c = normalization_constant(0.75);
    CHECK(c == rel(oracle::normalization_by_quadrature(0.75)).epsilon(1e-9));
    MESSAGE("c_0.75 = " << c);
    const double err = symbol_check(0.75, 1.0, symbol_check_grid(1.0, 0.003125, 15.0));
    MESSAGE("symbol_check error at h = 0.003125: " << err);
    CHECK(err < 1e-6);
}

TEST_CASE("normalization identity holds as alpha -> 1")
{
    for (double a : {0.9, 0.99, 0.999, 0.9999}) {
        const double lhs = normalization_constant(a) * std::abs(boost::math::tgamma(-a)) * std::sqrt(M_PI) /
                           (std::pow(4.0, a) * boost::math::tgamma(a + 0.5));
        CHECK(lhs == rel(1.0).epsilon(1e-13));
    }
}

TEST_CASE("normalization constant rejects alpha outside (0, 1)")
{
    CHECK_THROWS_AS(normalization_constant(0.0), DomainError);
    CHECK_THROWS_AS(normalization_constant(1.0), DomainError);
}

TEST_CASE("default family values")
{
    const IgnitionNonlinearity f(Family::Quadratic, 0.3);
    CHECK(f(0.3) == 0.0);
    CHECK(f(1.0) == 0.0);
    CHECK(f(0.65) == rel(0.1225).epsilon(1e-15));
    CHECK(f(0.1) == 0.0);
    CHECK(f(1.2) == 0.0);
    const IgnitionNonlinearity g(Family::Cubic, 0.3);
    CHECK(g(0.65) == rel(0.35 * 0.35 * 0.35).epsilon(1e-15));
}

TEST_CASE("supremum and Lipschitz bound of the families")
{
    const IgnitionNonlinearity f(Family::Quadratic, 0.3);
    CHECK(f.supremum() == rel(0.1225).epsilon(1e-10));
    // cubic: maximum of (u - t)^2 (1 - u) at u = (2 + t) / 3
    const IgnitionNonlinearity g(Family::Cubic, 0.3);
    const double u = (2.0 + 0.3) / 3.0;
    CHECK(g.supremum() == rel((u - 0.3) * (u - 0.3) * (1 - u)).epsilon(1e-10));
    for (const auto* fn : {&f, &g}) {
        double worst = 0.0;
        for (int k = 0; k < 2000; ++k) {
            const double a = k / 2000.0, b = (k + 1) / 2000.0;
            worst = std::max(worst, std::abs((*fn)(b) - (*fn)(a)) / (b - a));
        }
        CHECK(worst <= fn->lipschitz_bound() * (1 + 1e-12));
    }
}

TEST_CASE("default family passes every ignition check")
{
    const auto report = validate_nonlinearity(IgnitionNonlinearity(Family::Quadratic, 0.3));
    CHECK(report.all_passed());
    CHECK(validate_nonlinearity(IgnitionNonlinearity(Family::Cubic, 0.3)).all_passed());
    CHECK_NOTHROW(require_valid(IgnitionNonlinearity(Family::Quadratic, 0.3)));
}

TEST_CASE("a ramp without the (1 - u) factor fails the support check")
{
    const IgnitionNonlinearity f(Family::Ramp, 0.3);
    const auto report = validate_nonlinearity(f);
    CHECK_FALSE(report.all_passed());
    REQUIRE(report.find(conditions::support) != nullptr);
    CHECK_FALSE(report.find(conditions::support)->passed);
    try {
        require_valid(f);
        FAIL("require_valid accepted the ramp");
    } catch (const ValidationFailure& e) {
        CHECK(e.condition() == conditions::support);
    }
}

TEST_CASE("f == 0 is nonnegative but degenerate")
{
    const auto report = validate_nonlinearity(IgnitionNonlinearity(Family::Zero, 0.3));
    REQUIRE(report.find(conditions::nonnegative) != nullptr);
    CHECK(report.find(conditions::nonnegative)->passed);
    REQUIRE(report.find(conditions::nondegenerate) != nullptr);
    CHECK_FALSE(report.find(conditions::nondegenerate)->passed);
}

TEST_CASE("grid has 0 as its centre node")
{
    const Grid g = Grid::with_spacing(25.0, 0.1);
    CHECK(g.size() == 501);
    CHECK(g.node(g.center()) == 0.0);
    CHECK(g.node(0) == rel(-25.0));
    CHECK(g.spacing() == rel(0.1));
    CHECK_THROWS(Grid(1.0, 4));
}

TEST_CASE("problem spec derived constants")
{
    const ProblemSpec spec(0.75, IgnitionNonlinearity(Family::Quadratic, 0.3));
    CHECK(spec.c_alpha() == normalization_constant(0.75));
    CHECK(spec.sup_f() == rel(0.1225).epsilon(1e-10));
    CHECK_THROWS_AS(ProblemSpec(0.5, IgnitionNonlinearity(Family::Quadratic, 0.3)), DomainError);
    CHECK_THROWS(spec.with_lipschitz_bound(0.1));
    CHECK(spec.with_lipschitz_bound(5.0).lipschitz() == 5.0);
}

TEST_CASE("resample, derivative and trapezoid")
{
    const Grid g(2.0, 5);
    const Profile p(g, {0.0, 0.25, 0.5, 0.75, 1.0});
    const auto d = derivative(p);
    for (double v : d) CHECK(v == rel(0.25));
    const auto q = resample(p, Grid(4.0, 9));
    CHECK(q.values.front() == 0.0);
    CHECK(q.values.back() == 1.0);
    CHECK(q.values[4] == rel(0.5));
    const std::vector<double> ones(11, 1.0);
    CHECK(trapezoid(ones, 0.1) == rel(1.0));
}
