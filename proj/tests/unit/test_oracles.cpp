#include "fracfront/continuation.hpp"
#include "fracfront/oracles.hpp"

#include "approx.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace fracfront;

TEST_CASE("classical front: phase-plane speed agrees with the second-difference pipeline")
{
    const IgnitionNonlinearity f(Family::Quadratic, 0.3);
    const auto front = classical_front(f);
    REQUIRE(front.pipeline_speed.has_value());
    CHECK(front.speed > 0.0);
    CHECK(front.relative_difference == rel(std::abs(*front.pipeline_speed - front.speed) / front.speed, 1e-12));
    CHECK(front.relative_difference < 0.01);
    CHECK(front.agreement);
    CHECK(front.strictly_increasing);
    CHECK(front.mismatch <= 1e-8);
    CHECK(front.residual <= 1e-3);
    CHECK(front.phi.front() < 1e-3);
    CHECK(front.phi.back() > 1.0 - 1e-3);
}

TEST_CASE("classical front: scaling f by s scales the speed by sqrt(s)")
{
    ClassicalOptions o;
    o.run_pipeline = false;
    const double c1 = classical_front(IgnitionNonlinearity(Family::Quadratic, 0.3), 1e-10, o).speed;
    for (double s : {0.25, 4.0}) {
        const double cs = classical_front(IgnitionNonlinearity(Family::Quadratic, 0.3, s), 1e-10, o).speed;
        CHECK(cs == rel(std::sqrt(s) * c1, 1e-6));
    }
    const double cubic = classical_front(IgnitionNonlinearity(Family::Cubic, 0.3), 1e-10, o).speed;
    const double cubic4 = classical_front(IgnitionNonlinearity(Family::Cubic, 0.3, 4.0), 1e-10, o).speed;
    CHECK(cubic4 == rel(2.0 * cubic, 1e-6));
}

TEST_CASE("classical front: f == 0 has no front")
{
    CHECK_THROWS_AS(classical_front(IgnitionNonlinearity(Family::Zero, 0.3)), DomainError);
}

TEST_CASE("IVP: level set moves affinely, stays in [0, 1], matches the front speed (alpha = 0.9)")
{
    const ProblemSpec spec(0.9, IgnitionNonlinearity(Family::Quadratic, 0.3));
    const auto run = ivp_speed(spec, 400.0, 8192, 0.05, 200.0);
    CHECK(run.min_value >= -1e-8);
    CHECK(run.max_value <= 1.0 + 1e-8);
    CHECK(run.monotone);
    CHECK(run.fit_residual < 1e-3 * run.L);
    REQUIRE(run.times.size() == run.positions.size());
    for (std::size_t k = run.times.size() / 2 + 1; k < run.times.size(); ++k)
        CHECK(run.positions[k] < run.positions[k - 1]);

    const auto front = solve_front(spec, ContinuationOptions{});
    CHECK(std::abs(run.speed - front.speed) <= 0.05 * front.speed);

    std::ostringstream os;
    run.write_csv(os);
    const std::string csv = os.str();
    CHECK(csv.rfind("t,x_theta\n", 0) == 0);
    CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == run.times.size() + 1);
}

TEST_CASE("IVP: invalid parameters are rejected")
{
    const ProblemSpec spec(0.75, IgnitionNonlinearity(Family::Quadratic, 0.3));
    CHECK_THROWS_AS(ivp_speed(spec, 0.0, 1024, 0.05, 10.0), ConfigError);
    CHECK_THROWS_AS(ivp_speed(spec, 100.0, 8, 0.05, 10.0), ConfigError);
    CHECK_THROWS_AS(ivp_speed(spec, 100.0, 1024, 5.0, 10.0), ConfigError);
}

TEST_CASE("IVP: a short domain is exhausted before the run ends")
{
    const ProblemSpec spec(0.75, IgnitionNonlinearity(Family::Quadratic, 0.3));
    CHECK_THROWS_WITH_AS(ivp_speed(spec, 40.0, 1024, 0.05, 200.0), doctest::Contains("domain exhausted"),
                         NumericalError);
}

TEST_CASE("alpha = 0.95 IVP speed against the classical speed (recorded, not asserted)")
{
    const ProblemSpec spec(0.95, IgnitionNonlinearity(Family::Quadratic, 0.3));
    const auto run = ivp_speed(spec, 400.0, 8192, 0.05, 200.0);
    ClassicalOptions o;
    o.run_pipeline = false;
    const auto classical = classical_front(spec.nonlinearity(), 1e-10, o);
    MESSAGE("alpha = 0.95 IVP speed " << run.speed << ", classical speed " << classical.speed << ", relative gap "
                                      << std::abs(run.speed - classical.speed) / classical.speed);
    CHECK(run.speed > 0.0);
}
