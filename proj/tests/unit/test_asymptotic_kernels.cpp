#include "fracfront/asymptotic_kernels.hpp"
#include "fracfront/fractional_operator.hpp"

#include "pv_quadrature.hpp"

#include "approx.hpp"

#include <doctest.h>

#include <cmath>

using namespace fracfront;

namespace {

/// The power tail on the whole line, cut far enough out that the cut is below 1e-13.
oracle::LineFunction whole_line(const PowerTailFunction& fn)
{
    const double lo = -1e7;
    return {[fn](double x) { return fn.value(x); }, lo, 1e7, fn.value(lo), fn.value(1e7), {-1.0}};
}

double oracle_value(const PowerTailFunction& fn, double alpha, double c, double x)
{
    return oracle::pv_operator(whole_line(fn), alpha, normalization_constant(alpha), x) + c * fn.slope(x);
}

} // namespace

TEST_CASE("power tail values")
{
    for (double beta : {0.2, 0.5, 0.8})
        CHECK(eval_power_tail(PowerTailFunction(beta, TailKind::Lower), -1.0) == rel(1.0));
    CHECK(eval_power_tail(PowerTailFunction(0.5, TailKind::Lower), -4.0) == rel(0.5));
    CHECK(eval_power_tail(PowerTailFunction(1.5, TailKind::Upper), -0.5) == 0.0);
    CHECK(eval_power_tail(PowerTailFunction(0.5, TailKind::Lower), 3.0) == 1.0);
}

TEST_CASE("reflected function vanishes for x <= 1")
{
    const PowerTailFunction phi1(0.5, TailKind::Lower, 1.0, true);
    CHECK(eval_power_tail(phi1, 0.5) == 0.0);
    CHECK(eval_power_tail(phi1, -3.0) == 0.0);
    CHECK(eval_power_tail(phi1, 4.0) == rel(0.5));
}

TEST_CASE("operator on power tails agrees with an independent quadrature")
{
    const double a = 0.75;
    const PowerTailFunction lower(2 * a - 1, TailKind::Lower);
    const PowerTailFunction upper(2 * a, TailKind::Upper);
    for (double x : {-10.0, -100.0, -1000.0}) {
        CAPTURE(x);
        CHECK(eval_operator_on_tail(lower, a, 1.0, x) == rel(oracle_value(lower, a, 1.0, x)).epsilon(1e-6));
        CHECK(eval_operator_on_tail(upper, a, 0.0, x) == rel(oracle_value(upper, a, 0.0, x)).epsilon(1e-6));
    }
}

TEST_CASE("lower kind, c = 1, x = -1000: within 3% of the two-term prediction")
{
    const double a = 0.75;
    const PowerTailFunction fn(2 * a - 1, TailKind::Lower);
    const double v = eval_operator_on_tail(fn, a, 1.0, -1000.0);
    const double p = leading_term(fn, a, 1.0, -1000.0);
    const double ca = normalization_constant(a), beta = 2 * a - 1;
    CHECK(p == rel(-ca / (2 * a * std::pow(1000.0, 2 * a)) + beta / std::pow(1000.0, beta + 1)));
    MESSAGE("evaluated / predicted = " << v / p);
    CHECK(std::abs(v / p - 1.0) <= 0.03);
}

TEST_CASE("upper kind, small c: negative, with the stated leading term")
{
    const double a = 0.75;
    const double ca = normalization_constant(a);
    const double threshold = ca / (2 * a * (2 * a - 1));
    const PowerTailFunction fn(2 * a, TailKind::Upper);
    const double x = -1000.0;
    for (double c : {0.0, 0.1 * threshold, 0.5 * threshold}) {
        const double p = leading_term(fn, a, c, x);
        CHECK(p == rel(-ca / (2 * a - 1) * std::pow(-x, -2 * a - 1) + c * 2 * a * std::pow(-x, -2 * a - 1)));
        CHECK(p < 0.0);
        CHECK(eval_operator_on_tail(fn, a, c, x) < 0.0);
    }
}

TEST_CASE("c = 0 gives the pure operator, matching the assembled operator on a wide grid")
{
    // Each function is split into a continuous power tail g (1 for x >= -1), which the grid
    // represents to second order, and, for the upper kind, minus the step 1_{x >= -1}, whose
    // operator at x < -1 is -c_alpha |x + 1|^{-2 alpha} / (2 alpha). The part of g beyond -b,
    // where the grid holds 0, is added by quadrature.
    const double a = 0.75, b = 200.0, x = -100.0;
    const double ca = normalization_constant(a);
    const Grid g = Grid::with_spacing(b, 0.125);
    const auto assembly = assemble(g, a);
    const auto i = static_cast<std::size_t>(std::lround((x + b) / g.spacing()));
    for (const auto& fn : {PowerTailFunction(2 * a, TailKind::Upper), PowerTailFunction(2 * a - 1, TailKind::Lower)}) {
        auto cont = [beta = fn.beta](double y) { return y < -1.0 ? std::pow(-y, -beta) : 1.0; };
        std::vector<double> v(g.size());
        for (std::size_t k = 0; k < g.size(); ++k)
            v[k] = cont(g.node(k));
        v.front() = 0.0;
        const auto op = apply_full(assembly, Profile(g, v, 0.0, 1.0));
        oracle::LineFunction missing{[&](double y) { return y < -b ? cont(y) : 0.0; }, -1e7, b, cont(-1e7), 0.0, {-b}};
        double grid_value = op[i] + oracle::pv_operator(missing, a, ca, x);
        if (fn.kind == TailKind::Upper)
            grid_value += ca * std::pow(std::abs(x + 1.0), -2 * a) / (2 * a);
        const double expected = eval_operator_on_tail(fn, a, 0.0, x);
        CAPTURE(fn.kind == TailKind::Lower);
        MESSAGE("grid " << grid_value << " vs quadrature " << expected);
        CHECK(grid_value == rel(expected, 2e-3));
    }
}

TEST_CASE("leading terms at c = 0")
{
    for (double a : {0.6, 0.75, 0.9}) {
        const double ca = normalization_constant(a);
        const double x = -50.0;
        CHECK(leading_term(PowerTailFunction(2 * a - 1, TailKind::Lower), a, 0.0, x) ==
              rel(-ca / (2 * a) * std::pow(-x, -2 * a)));
        CHECK(leading_term(PowerTailFunction(0.3, TailKind::Lower), a, 0.0, x) ==
              rel(-ca / (2 * a) * std::pow(-x, -2 * a)));
        CHECK(leading_term(PowerTailFunction(2 * a, TailKind::Upper), a, 0.0, x) ==
              rel(-ca / (2 * a - 1) * std::pow(-x, -2 * a - 1)));
    }
}

TEST_CASE("derivative term dominates beyond c = c_alpha / (2 alpha (2 alpha - 1))")
{
    for (double a : {0.6, 0.75, 0.9}) {
        const double threshold = normalization_constant(a) / (2 * a * (2 * a - 1));
        const PowerTailFunction fn(2 * a - 1, TailKind::Lower);
        for (double x : {-1e2, -1e4, -1e6}) {
            CHECK(leading_term(fn, a, 1.01 * threshold, x) > 0.0);
            CHECK(leading_term(fn, a, 0.99 * threshold, x) < 0.0);
        }
    }
}

TEST_CASE("expansion ratio tends to 1 monotonically, remainder exponent near beta + 2 alpha")
{
    const double a = 0.75;
    const PowerTailFunction fn(2 * a - 1, TailKind::Lower);
    const auto report = expansion_report(fn, a, 1.0, -1e4, -1e2, 21);
    REQUIRE(report.rows.size() == 21);
    // rows run from x_max outwards
    double previous_gap = 0.0;
    bool first = true;
    for (auto it = report.rows.begin(); it != report.rows.end(); ++it) {
        CHECK(std::abs(it->x) > (it == report.rows.begin() ? 0.0 : std::abs((it - 1)->x)));
        const double gap = std::abs(it->ratio - 1.0);
        if (!first) CHECK(gap < previous_gap);
        previous_gap = gap;
        first = false;
    }
    CHECK(report.remainder_exponent == rel(fn.beta + 2 * a).epsilon(0.2 / (fn.beta + 2 * a)));
}

TEST_CASE("degenerate expansion range is rejected")
{
    const PowerTailFunction fn(0.5, TailKind::Lower);
    CHECK_THROWS_AS(expansion_report(fn, 0.75, 1.0, -100.0, -100.0, 1), ContractViolation);
    CHECK_THROWS_AS(expansion_report(fn, 0.75, 1.0, -100.0, -100.0, 10), ContractViolation);
}

TEST_CASE("super-solution threshold")
{
    for (double a : {0.6, 0.75, 0.9}) {
        const ProblemSpec spec(a, IgnitionNonlinearity(Family::Quadratic, 0.3));
        const auto t = supersolution_threshold(spec);
        CHECK(t.far_field == rel(spec.c_alpha() / (2 * a * (2 * a - 1))));
        CHECK(t.speed >= t.far_field);
        CHECK(t.matching_radius == rel(std::pow(0.3, -1.0 / (2 * a - 1))));
    }
}

TEST_CASE("alpha = 0.75: far-field threshold c_alpha / 0.75")
{
    const ProblemSpec spec(0.75, IgnitionNonlinearity(Family::Quadratic, 0.3));
    CHECK(supersolution_threshold(spec).far_field == rel(spec.c_alpha() / 0.75));
}

TEST_CASE("lower kind at speed K is a super-solution on (-1e4, -1)")
{
    const ProblemSpec spec(0.75, IgnitionNonlinearity(Family::Quadratic, 0.3));
    const auto t = supersolution_threshold(spec);
    const PowerTailFunction fn(2 * spec.alpha() - 1, TailKind::Lower);
    int negative = 0;
    for (int k = 0; k <= 200; ++k) {
        const double x = -std::pow(10.0, 0.002 + 4.0 * k / 200.0);
        if (eval_operator_on_tail(fn, spec, t.speed, x) < 0.0) ++negative;
    }
    CHECK(negative == 0);
}
