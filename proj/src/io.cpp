#include "fracfront/io.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>

#include <cmath>
#include <fstream>

namespace fracfront {

namespace {

/// NaN and infinities have no JSON literal; they are written as null.
Json number(double v)
{
    if (!std::isfinite(v))
        return nullptr;
    return v;
}

} // namespace

Json to_json(const ContinuationStage& s)
{
    return {{"b", s.b},
            {"n", s.n},
            {"speed", s.speed},
            {"residual", s.residual},
            {"theta_error", s.theta_error},
            {"bracket_evaluations", s.bracket_evaluations},
            {"fingerprint", s.fingerprint},
            {"speed_change", number(s.speed_change)},
            {"profile_change", number(s.profile_change)}};
}

Json to_json(const DiagnosticsRecord& d)
{
    Json history = Json::array();
    for (const auto& s : d.history)
        history.push_back(to_json(s));
    return {{"residual_norm", d.residual_norm},
            {"conservation_residual", d.conservation_residual},
            {"reaction_integral", d.reaction_integral},
            {"conservation_relative", number(d.conservation_residual / d.reaction_integral)},
            {"speed_mass_residual", d.speed_mass_residual},
            {"gamma0", d.gamma0},
            {"gamma1", d.gamma1},
            {"limits_flat", d.limits_flat},
            {"speed_bound", d.speed_bound},
            {"history", history},
            {"warnings", d.warnings}};
}

Json to_json(const TailFit& f)
{
    return {{"window", {f.window.x_lo, f.window.x_hi}},
            {"exponent", f.exponent},
            {"constant", f.constant},
            {"residual", f.residual},
            {"points", f.points},
            {"indicator_exponent", f.indicator_exponent},
            {"indicator_sup", f.indicator_sup},
            {"indicator_inf", f.indicator_inf}};
}

Json to_json(const DerivativeLowerBound& b)
{
    return {{"m_est", b.m_est}, {"inner_inf", b.inner_inf}, {"outer_inf", b.outer_inf}, {"pass", b.pass}};
}

Json to_json(const DominationReport& r)
{
    return {{"side", std::string(to_string(r.side))},
            {"epsilon", r.epsilon},
            {"drift", r.drift},
            {"radius", r.radius},
            {"r", r.r},
            {"checked", {r.checked.x_lo, r.checked.x_hi}},
            {"nodes_checked", r.nodes_checked},
            {"active_nodes", r.active_nodes},
            {"violations", r.violations},
            {"worst_x", r.worst_x},
            {"worst_margin", r.worst_margin},
            {"passed", r.passed}};
}

Json to_json(const TailBoundsReport& r)
{
    return {{"profile_fit", to_json(r.profile_fit)},
            {"derivative_fit", to_json(r.derivative_fit)},
            {"derivative_bound", to_json(r.derivative_bound)},
            {"nested_sups", r.nested_sups},
            {"sup_variation", number(r.sup_variation)},
            {"upper_bounded", r.upper_bounded},
            {"exponent_consistent", r.exponent_consistent},
            {"passed", r.passed}};
}

Json to_json(const ExpansionReport& r)
{
    Json rows = Json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"x", row.x}, {"evaluated", row.evaluated}, {"predicted", row.predicted}, {"ratio", row.ratio}});
    return {{"beta", r.beta},
            {"kind", r.kind == TailKind::Lower ? "lower" : "upper"},
            {"speed", r.speed},
            {"remainder_exponent", r.remainder_exponent},
            {"sign_crossover", r.sign_crossover},
            {"rows", rows}};
}

Json to_json(const ClassicalFront& f)
{
    Json out = {{"speed", f.speed},
                {"tolerance", f.tolerance},
                {"mismatch", f.mismatch},
                {"residual", f.residual},
                {"strictly_increasing", f.strictly_increasing}};
    if (f.pipeline_speed) {
        out["pipeline_speed"] = *f.pipeline_speed;
        out["relative_difference"] = f.relative_difference;
        out["agreement"] = f.agreement;
    }
    return out;
}

Json to_json(const IvpRun& r)
{
    return {{"alpha", r.alpha},
            {"L", r.L},
            {"n_f", r.n_f},
            {"dt", r.dt},
            {"T", r.T},
            {"speed", r.speed},
            {"fit_residual", r.fit_residual},
            {"min_value", r.min_value},
            {"max_value", r.max_value},
            {"monotone", r.monotone},
            {"frames", r.times.size()},
            {"warnings", r.warnings}};
}

Json to_json(const LimitValues& v)
{
    return {{"gamma0", v.gamma0},
            {"gamma1", v.gamma1},
            {"variation", v.variation},
            {"flat", v.flat},
            {"reaction_free", v.reaction_free}};
}

Json build_info()
{
    return {{"fracfront", library_version},
            {"json_schema", json_schema_version},
            {"compiler", __VERSION__},
            {"cplusplus", __cplusplus},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                          std::to_string(BOOST_VERSION % 100)},
            {"fftw", std::string(fftw_version)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw Error("cannot write '" + tmp.string() + "'");
        out << text;
        if (!out)
            throw Error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

void write_json(const std::filesystem::path& path, const Json& value)
{
    write_text(path, value.dump(2) + "\n");
}

} // namespace fracfront
