#include "fracfront/continuation.hpp"

#include "approx.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace fracfront;

namespace {

ProblemSpec default_spec(double alpha = 0.75, Family family = Family::Quadratic)
{
    return ProblemSpec(alpha, IgnitionNonlinearity(family, 0.3));
}

/// Converged front at alpha = 0.75, h = 0.2, computed once per process.
const FrontSolution& front_075()
{
    static const FrontSolution sol = [] {
        ContinuationOptions o;
        o.h = 0.2;
        return solve_front(default_spec(), o);
    }();
    return sol;
}

} // namespace

TEST_CASE("continuation converges with c0 in (0, K] and a Cauchy speed record")
{
    const auto& sol = front_075();
    const auto& d = sol.diagnostics;
    CHECK(sol.speed > 0.0);
    CHECK(sol.speed <= d.speed_bound);
    REQUIRE(d.history.size() >= 3);
    for (std::size_t k = 1; k < d.history.size(); ++k) {
        CHECK(d.history[k].b == rel(2.0 * d.history[k - 1].b));
        CHECK(std::abs(d.history[k].speed) <= d.speed_bound);
    }
    for (std::size_t k = 2; k < d.history.size(); ++k)
        CHECK(d.history[k].speed_change < d.history[k - 1].speed_change);
    CHECK(sol.profile.is_nondecreasing());
    CHECK(sol.profile.within_exterior_range());
    CHECK(std::abs(sol.profile.at_center() - 0.3) <= 1e-6);
    CHECK(d.residual_norm <= 1e-6);
}

TEST_CASE("end levels approach 0 and 1 as b grows")
{
    ContinuationOptions o;
    o.h = 0.2;
    o.max_doublings = 0;
    std::optional<FrontSolution> single;
    try {
        solve_front(default_spec(), o);
    } catch (const ContinuationFailure& e) {
        single = e.record().final;
    }
    REQUIRE(single.has_value());
    const auto& full = front_075();
    CHECK(full.profile.grid.half_width() > single->profile.grid.half_width());
    CHECK(full.diagnostics.gamma0 < single->diagnostics.gamma0);
    CHECK(full.diagnostics.gamma1 > single->diagnostics.gamma1);
    CHECK(full.diagnostics.gamma0 < 1e-3);
    CHECK(full.diagnostics.gamma1 > 1.0 - 1e-3);
    CHECK(full.diagnostics.limits_flat);
}

TEST_CASE("conservation: constants give zero, the front and a perturbed front stay small")
{
    const auto spec = default_spec();
    const Grid g = Grid::with_spacing(20.0, 0.1);
    const auto a = assemble(g, spec);
    const FrontSolution ones{Profile(g, std::vector<double>(g.size(), 1.0), 1.0, 1.0), 0.0, {}};
    CHECK(check_conservation(ones, a) <= 1e-12);

    const auto& sol = front_075();
    const auto fa = assemble(sol.profile.grid, spec);
    const double mass = reaction_integral(sol.profile, spec.nonlinearity());
    CHECK(check_conservation(sol, fa) <= 1e-3 * mass);

    FrontSolution bumped = sol;
    for (std::size_t i = 1; i + 1 < bumped.profile.values.size(); ++i) {
        const double x = bumped.profile.grid.node(i);
        bumped.profile.values[i] += 0.05 * std::exp(-(x - 3.0) * (x - 3.0));
    }
    CHECK(check_conservation(bumped, fa) <= 1e-3 * mass);
}

TEST_CASE("speed-mass identity holds within 2% on the converged front")
{
    const auto& sol = front_075();
    CHECK(check_speed_mass_identity(sol, default_spec()) <= 0.02);
    CHECK(sol.diagnostics.speed_mass_residual == check_speed_mass_identity(sol, default_spec()));
}

TEST_CASE("speed-mass identity with f == 0 and c = 0 is exactly consistent")
{
    const ProblemSpec spec(0.75, IgnitionNonlinearity(Family::Zero, 0.3));
    const Grid g = Grid::with_spacing(10.0, 0.1);
    const auto a = assemble(g, spec);
    const auto s = solve_fixed_speed(0.0, g, spec, a);
    const FrontSolution sol{s.profile, 0.0, {}};
    CHECK(check_speed_mass_identity(sol, spec) == 0.0);
}

TEST_CASE("speed-mass residual halves when h is halved (alpha = 0.9)")
{
    const auto spec = default_spec(0.9);
    std::vector<double> residual;
    for (double h : {0.4, 0.2, 0.1}) {
        ContinuationOptions o;
        o.h = h;
        residual.push_back(solve_front(spec, o).diagnostics.speed_mass_residual);
    }
    CHECK(residual[1] <= 0.5 * residual[0]);
    CHECK(residual[2] <= 0.5 * residual[1]);
}

TEST_CASE("conservation residual decreases when h is halved (alpha = 0.9)")
{
    const auto spec = default_spec(0.9);
    std::vector<double> residual;
    for (double h : {0.4, 0.2, 0.1}) {
        ContinuationOptions o;
        o.h = h;
        const auto sol = solve_front(spec, o);
        residual.push_back(sol.diagnostics.conservation_residual / sol.diagnostics.reaction_integral);
    }
    CHECK(residual[1] < residual[0]);
    CHECK(residual[2] < residual[1]);
}

TEST_CASE("limit values: ordered around theta, the extreme interior values of a monotone profile")
{
    const auto& sol = front_075();
    const auto lv = limit_values(sol, default_spec().nonlinearity());
    CHECK(lv.gamma0 <= 0.3);
    CHECK(lv.gamma1 >= 0.3);
    CHECK(lv.gamma0 >= 0.0);
    CHECK(lv.gamma1 <= 1.0);
    const auto& v = sol.profile.values;
    const auto [mn, mx] = std::minmax_element(v.begin() + 1, v.end() - 1);
    CHECK(lv.gamma0 == *mn);
    CHECK(lv.gamma1 == *mx);
    CHECK(lv.flat);
    CHECK(lv.reaction_free);
}

TEST_CASE("limit values flag a profile that is still sloped at the ends")
{
    const Grid g = Grid::with_spacing(5.0, 0.1);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = 0.5 + 0.1 * g.node(i);
    const FrontSolution sol{Profile(g, v), 0.5, {}};
    const auto lv = limit_values(sol, default_spec().nonlinearity(), 0.01);
    CHECK(lv.variation == rel(0.1 * 0.1 * 4.0, 1e-9));
    CHECK_FALSE(lv.flat);
    CHECK_FALSE(lv.reaction_free);
    CHECK(lv.gamma0 <= 0.3);
    CHECK(lv.gamma1 >= 0.3);
}

TEST_CASE("both families converge at alpha = 0.9")
{
    for (Family family : {Family::Quadratic, Family::Cubic}) {
        ContinuationOptions o;
        o.h = 0.2;
        const auto sol = solve_front(default_spec(0.9, family), o);
        CHECK(sol.speed > 0.0);
        CHECK(sol.diagnostics.residual_norm <= 1e-6);
        CHECK(sol.diagnostics.speed_mass_residual <= 0.02);
    }
}

TEST_CASE("invalid continuation options are configuration errors")
{
    ContinuationOptions o;
    o.h = 0.0;
    CHECK_THROWS_AS(solve_front(default_spec(), o), ConfigError);
    o.h = 30.0;
    CHECK_THROWS_AS(solve_front(default_spec(), o), ConfigError);
    o.h = 0.1;
    o.max_doublings = -1;
    CHECK_THROWS_AS(solve_front(default_spec(), o), ConfigError);
}

TEST_CASE("front CSV: header, one row per node, empty operator value at the two ends")
{
    const auto spec = default_spec();
    const auto& sol = front_075();
    const auto a = assemble(sol.profile.grid, spec);
    std::ostringstream os;
    write_front_csv(os, sol, spec, a);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,phi,dphi,op_value,f_phi");
    std::vector<std::string> rows;
    while (std::getline(in, line))
        rows.push_back(line);
    REQUIRE(rows.size() == sol.profile.grid.size());
    CHECK(std::count(rows.front().begin(), rows.front().end(), ',') == 4);
    CHECK(rows.front().find(",,") != std::string::npos);
    CHECK(rows.back().find(",,") != std::string::npos);
    CHECK(rows[rows.size() / 2].find(",,") == std::string::npos);
}
