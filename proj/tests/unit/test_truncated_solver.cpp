#include "fracfront/asymptotic_kernels.hpp"
#include "fracfront/oracles.hpp"
#include "fracfront/truncated_solver.hpp"

#include "approx.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

using namespace fracfront;

namespace {

ProblemSpec default_spec(double alpha = 0.75, double scale = 1.0)
{
    return ProblemSpec(alpha, IgnitionNonlinearity(Family::Quadratic, 0.3, scale));
}

} // namespace

TEST_CASE("f == 0, c = 0: the discrete alpha-harmonic interpolant of the exterior states")
{
    const ProblemSpec spec(0.75, IgnitionNonlinearity(Family::Zero, 0.3));
    const Grid g = Grid::with_spacing(10.0, 0.1);
    const auto a = assemble(g, spec);
    const auto s = solve_fixed_speed(0.0, g, spec, a);
    const auto& v = s.profile.values;
    CHECK(s.profile.is_nondecreasing());
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        CHECK(v[i] > 0.0);
        CHECK(v[i] < 1.0);
        // symmetry of the problem under x -> -x, u -> 1 - u
        CHECK(v[i] + v[v.size() - 1 - i] == rel(1.0, 1e-9));
    }
    // oracle: one direct dense solve of the linear system
    const Eigen::VectorXd direct = a.interior_matrix.partialPivLu().solve(-a.exterior_offset());
    for (Eigen::Index i = 0; i < direct.size(); ++i)
        CHECK(v[static_cast<std::size_t>(i) + 1] == doctest::Approx(direct[i]).scale(0.0).epsilon(1e-8));
}

TEST_CASE("monotone iteration envelopes are ordered, monotone in k and inside [0, 1]")
{
    const auto spec = default_spec();
    const Grid g = Grid::with_spacing(25.0, 0.1);
    const auto a = assemble(g, spec);
    SolverOptions o;
    Eigen::VectorXd prev_lo, prev_up;
    int sweeps = 0;
    bool ordered = true, in_range = true, lower_up = true, upper_down = true;
    o.on_sweep = [&](int k, const Eigen::VectorXd& lo, const Eigen::VectorXd& up) {
        ++sweeps;
        ordered = ordered && ((up - lo).minCoeff() >= -1e-12);
        in_range = in_range && lo.minCoeff() >= -1e-12 && up.maxCoeff() <= 1.0 + 1e-12;
        if (k > 0) {
            lower_up = lower_up && ((lo - prev_lo).minCoeff() >= -1e-10);
            upper_down = upper_down && ((prev_up - up).minCoeff() >= -1e-10);
        }
        prev_lo = lo;
        prev_up = up;
    };
    for (double c : {0.5, 0.9}) {
        sweeps = 0;
        const auto s = solve_fixed_speed(c, g, spec, a, o);
        CHECK(s.method == SolveMethod::MonotoneIteration);
        CHECK(sweeps > 1);
    }
    CHECK(ordered);
    CHECK(in_range);
    CHECK(lower_up);
    CHECK(upper_down);
}

TEST_CASE("comparison: larger speed, lower value at 0 (alpha = 0.75, b = 50)")
{
    const auto spec = default_spec();
    const Grid g = Grid::with_spacing(50.0, 0.1);
    const auto a = assemble(g, spec);
    double previous = 2.0;
    for (double c : {0.2, 0.6, 1.0, 1.5}) {
        const auto s = solve_fixed_speed(c, g, spec, a);
        CHECK(s.residual_norm <= 1e-6);
        CHECK(s.profile.within_exterior_range(1e-12));
        CAPTURE(c);
        CHECK(s.profile.at_center() <= previous);
        previous = s.profile.at_center();
    }
}

TEST_CASE("speed bound: far-field part, linear growth in sup f, monotone in sup f")
{
    for (double a : {0.6, 0.75, 0.9}) {
        const auto spec = default_spec(a);
        CHECK(speed_bound(spec) >= spec.c_alpha() / (2 * a * (2 * a - 1)));
        CHECK(supersolution_threshold(spec).far_field == rel(spec.c_alpha() / (2 * a * (2 * a - 1)), 1e-14));
    }
    const double A = std::pow(0.3, -1.0 / 0.5);
    double previous = 0.0;
    for (double s : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
        const auto spec = default_spec(0.75, s);
        const double K = speed_bound(spec);
        CHECK(K >= spec.sup_f() * std::pow(A, 1.5) / 0.5 * (1 - 1e-12));
        CHECK(K >= previous);
        previous = K;
    }
}

TEST_CASE("endpoint signs: g(K) < 0 < g(-K) on a large domain")
{
    const auto spec = default_spec();
    const Grid g = Grid::with_spacing(100.0, 0.1);
    const auto a = assemble(g, spec);
    const double K = speed_bound(spec);
    CHECK(solve_fixed_speed(K, g, spec, a).profile.at_center() < spec.theta());
    CHECK(solve_fixed_speed(-K, g, spec, a).profile.at_center() > spec.theta());
}

TEST_CASE("tiny domain: domain too small")
{
    const auto spec = default_spec();
    const Grid g = Grid::with_spacing(1.0, 0.1);
    try {
        shoot_speed(g, spec, 1e-6);
        FAIL("expected DomainTooSmall");
    } catch (const DomainTooSmall& e) {
        CHECK(std::string(e.what()).find("domain too small") != std::string::npos);
    }
}

TEST_CASE("alpha = 0.75, b = 100: c_b in (0, K], regression anchor, within 5% of the time-dependent speed")
{
    const auto spec = default_spec();
    const Grid g = Grid::with_spacing(100.0, 0.1);
    const auto r = shoot_speed(g, spec, 1e-6);
    const double K = speed_bound(spec);
    CHECK(r.speed > 0.0);
    CHECK(r.speed <= K);
    CHECK(std::abs(r.solve.profile.at_center() - spec.theta()) <= 1e-6);
    CHECK(r.speed == rel(0.843961286219, 1e-8));
    const auto ivp = ivp_speed(spec, 800.0, 16384, 0.05, 400.0);
    MESSAGE("c_b = " << r.speed << ", c_ivp = " << ivp.speed);
    CHECK(std::abs(r.speed - ivp.speed) <= 0.05 * ivp.speed);
}

TEST_CASE("root finders agree on a small problem")
{
    const auto spec = default_spec(0.9);
    const Grid g = Grid::with_spacing(25.0, 0.1);
    const auto a = assemble(g, spec);
    ShootOptions o;
    o.tol_c = 1e-7;
    const double pinned = shoot_speed(g, spec, a, o).speed;
    for (auto finder : {RootFinder::Bisection, RootFinder::Brent}) {
        o.root_finder = finder;
        const auto r = shoot_speed(g, spec, a, o);
        CAPTURE(to_string(finder));
        CHECK(std::abs(r.solve.profile.at_center() - spec.theta()) <= 1e-4);
        CHECK(std::abs(r.speed - pinned) <= 1e-3);
    }
}

TEST_CASE("wrong-length start data is a contract violation")
{
    const auto spec = default_spec();
    const Grid g = Grid::with_spacing(5.0, 0.1);
    const auto a = assemble(g, spec);
    FixedSpeedStart start;
    start.guess = std::vector<double>(3, 0.5);
    CHECK_THROWS_AS(solve_fixed_speed(0.5, g, spec, a, {}, start), ContractViolation);
}
