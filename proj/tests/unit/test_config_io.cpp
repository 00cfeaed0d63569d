#include "fracfront/config.hpp"
#include "fracfront/io.hpp"

#include "approx.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace fracfront;

TEST_CASE("config: key = value lines, comments and blank lines")
{
    std::istringstream in("# front at a larger order\n"
                          "alpha = 0.9\n"
                          "\n"
                          "theta=0.25   # ignition level\n"
                          "family = cubic\n"
                          "ivp.T = 100\n"
                          "n_max = 4001\n"
                          "root_finder = bisection\n");
    const auto s = parse_config(in, "run.cfg");
    CHECK(s.alpha == 0.9);
    CHECK(s.theta == 0.25);
    CHECK(s.family == Family::Cubic);
    CHECK(s.ivp_T == 100.0);
    CHECK(s.n_max == 4001);
    CHECK(s.root_finder == RootFinder::Bisection);
    CHECK(s.h == RunSettings{}.h);
}

TEST_CASE("config: errors name the source and the line")
{
    auto error_of = [](const std::string& text) {
        std::istringstream in(text);
        try {
            parse_config(in, "bad.cfg");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(error_of("alpha = 0.8\nbogus = 1\n") == "bad.cfg:2: unknown config key 'bogus'");
    CHECK(error_of("alpha 0.8\n") == "bad.cfg:1: expected 'key = value'");
    CHECK(error_of("\n\nh = fast\n") == "bad.cfg:3: invalid value 'fast' for key 'h'");
    CHECK(error_of("alpha =\n") == "bad.cfg:1: expected 'key = value'");
    CHECK(error_of("family = linear\n").rfind("bad.cfg:1: ", 0) == 0);
    CHECK(error_of("n_max = -5\n").rfind("bad.cfg:1: ", 0) == 0);
    CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("config: overrides apply after the file and reject unknown keys")
{
    RunSettings s;
    apply_override(s, "alpha=0.6");
    apply_override(s, " b_initial = 50 ");
    CHECK(s.alpha == 0.6);
    CHECK(s.b_initial == 50.0);
    CHECK_THROWS_AS(apply_override(s, "alpha"), ConfigError);
    CHECK_THROWS_WITH_AS(apply_override(s, "speed=1"), doctest::Contains("unknown config key 'speed'"), ConfigError);
}

TEST_CASE("config: every accepted key appears in the resolved JSON")
{
    const auto j = to_json(RunSettings{});
    for (const auto& key : config_keys())
        CHECK_MESSAGE(j.contains(key), key);
    CHECK(j.size() == config_keys().size());
    CHECK(j["window_lo"] == "default");
    CHECK(j["family"] == "quadratic");
}

TEST_CASE("config: settings map onto the problem and the continuation options")
{
    RunSettings s;
    s.alpha = 0.9;
    s.family = Family::Cubic;
    s.h = 0.2;
    s.max_doublings = 5;
    s.tol_residual = 1e-9;
    const auto spec = make_spec(s);
    CHECK(spec.alpha() == 0.9);
    CHECK(spec.nonlinearity().family() == Family::Cubic);
    const auto o = make_continuation_options(s);
    CHECK(o.h == 0.2);
    CHECK(o.max_doublings == 5);
    CHECK(o.shoot.solver.tol_residual == 1e-9);

    s.lipschitz_bound = 10.0;
    CHECK(make_spec(s).lipschitz() == 10.0);
    s.lipschitz_bound = 1e-3;
    CHECK_THROWS(make_spec(s));
}

TEST_CASE("JSON: non-finite numbers are written as null")
{
    ContinuationStage st;
    st.speed_change = std::numeric_limits<double>::quiet_NaN();
    st.profile_change = 0.5;
    const auto j = to_json(st);
    CHECK(j["speed_change"].is_null());
    CHECK(j["profile_change"] == 0.5);
}

TEST_CASE("JSON: build info lists the library and its dependencies")
{
    const auto j = build_info();
    for (const char* key : {"fracfront", "json_schema", "compiler", "eigen", "boost", "fftw", "nlohmann_json"})
        CHECK_MESSAGE(j.contains(key), key);
    CHECK(j["json_schema"] == json_schema_version);
}

TEST_CASE("write_text creates directories and leaves no temporary file")
{
    const auto dir = std::filesystem::temp_directory_path() / "fracfront_io_test";
    std::filesystem::remove_all(dir);
    const auto path = dir / "nested" / "out.json";
    write_json(path, Json{{"a", 1}});
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(text.str() == "{\n  \"a\": 1\n}\n");
    CHECK_FALSE(std::filesystem::exists(dir / "nested" / "out.json.tmp"));
    std::filesystem::remove_all(dir);
}
