#include "fracfront/asymptotic_kernels.hpp"
#include "fracfront/config.hpp"
#include "fracfront/continuation.hpp"
#include "fracfront/fractional_operator.hpp"
#include "fracfront/io.hpp"
#include "fracfront/oracles.hpp"
#include "fracfront/tail_analysis.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

using namespace fracfront;
namespace fs = std::filesystem;

namespace {

struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
};

Json to_json(const Check& c)
{
    Json v = std::isfinite(c.value) ? Json(c.value) : Json(nullptr);
    return {{"name", c.name}, {"passed", c.passed}, {"value", v}, {"threshold", c.threshold}};
}

/// What a subcommand produced: gating checks, written files and summary lines.
struct Outcome {
    std::vector<Check> checks;
    std::vector<std::string> outputs;
    std::vector<std::string> notes;
    std::string failure; ///< set when the run completed but cannot be accepted as a whole

    void check(std::string name, bool passed, double value, double threshold)
    {
        checks.push_back({std::move(name), passed, value, threshold});
    }
    bool passed() const
    {
        if (!failure.empty()) return false;
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    Json checks_json() const
    {
        Json a = Json::array();
        for (const auto& c : checks)
            a.push_back(::to_json(c));
        return a;
    }
};

struct Context {
    RunSettings settings;
    fs::path out;
    int verbosity = 0;
    bool dump_matrix = false;

    void log(const std::string& msg) const
    {
        if (verbosity > 0)
            std::cerr << msg << '\n';
    }
    void write(Outcome& o, const std::string& name, const std::string& text) const
    {
        write_text(out / name, text);
        o.outputs.push_back(name);
    }
    void write(Outcome& o, const std::string& name, const Json& value) const
    {
        write_json(out / name, value);
        o.outputs.push_back(name);
    }
};

std::string fmt(double v, int digits = 6)
{
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

std::optional<TailWindow> configured_window(const RunSettings& s)
{
    if (std::isnan(s.window_lo) && std::isnan(s.window_hi))
        return std::nullopt;
    if (std::isnan(s.window_lo) || std::isnan(s.window_hi))
        throw ConfigError("window_lo and window_hi must be given together");
    return TailWindow{s.window_lo, s.window_hi};
}

/// solve_front with the failure path turned into an Outcome entry; the final stage is
/// still returned when convergence fails.
struct FrontRun {
    std::optional<FrontSolution> solution;
    bool converged = false;
    std::vector<ContinuationStage> history;
    std::string error;
};

FrontRun run_front(const Context& ctx, const ProblemSpec& spec)
{
    FrontRun r;
    ctx.log("solving the front (alpha = " + fmt(spec.alpha()) + ")");
    try {
        r.solution = solve_front(spec, make_continuation_options(ctx.settings));
        r.converged = true;
        r.history = r.solution->diagnostics.history;
    } catch (const ContinuationFailure& e) {
        r.error = e.what();
        r.history = e.record().stages;
        r.solution = e.record().final;
    }
    for (const auto& s : r.history)
        ctx.log("  b = " + fmt(s.b) + "  n = " + std::to_string(s.n) + "  c_b = " + fmt(s.speed, 10));
    return r;
}

Json history_json(const std::vector<ContinuationStage>& history)
{
    Json a = Json::array();
    for (const auto& s : history)
        a.push_back(to_json(s));
    return a;
}

void front_checks(Outcome& o, const FrontRun& run, const ProblemSpec& spec, const std::optional<TailWindow>& window,
                  Json& diag, bool include_tails)
{
    diag["converged"] = run.converged;
    diag["continuation_history"] = history_json(run.history);
    if (!run.converged) {
        o.failure = run.error;
        diag["error"] = run.error;
    }
    if (!run.solution)
        return;
    const FrontSolution& sol = *run.solution;
    const auto& d = sol.diagnostics;
    const double K = d.speed_bound;
    diag["speed"] = sol.speed;
    diag["K"] = K;
    diag["identities"] = {{"residual_norm", d.residual_norm},
                          {"conservation_residual", d.conservation_residual},
                          {"reaction_integral", d.reaction_integral},
                          {"speed_mass_residual", d.speed_mass_residual}};
    diag["limits"] = {{"gamma0", d.gamma0}, {"gamma1", d.gamma1}, {"flat", d.limits_flat}};
    diag["warnings"] = d.warnings;

    o.check("speed in (0, K]", sol.speed > 0.0 && sol.speed <= K, sol.speed, K);
    o.check("monotone profile in [0,1]", sol.profile.is_nondecreasing() && sol.profile.within_exterior_range(), 0.0,
            0.0);
    o.check("phi(0) = theta", std::abs(sol.profile.at_center() - spec.theta()) <= 1e-6,
            std::abs(sol.profile.at_center() - spec.theta()), 1e-6);
    o.check("equation residual", d.residual_norm <= 1e-6, d.residual_norm, 1e-6);
    o.check("conservation", d.conservation_residual <= 1e-3 * d.reaction_integral, d.conservation_residual,
            1e-3 * d.reaction_integral);
    o.check("speed-mass identity", d.speed_mass_residual <= 0.02, d.speed_mass_residual, 0.02);
    const auto levels = limit_values(sol, spec.nonlinearity());
    diag["limits"]["variation"] = levels.variation;
    diag["limits"]["reaction_free"] = levels.reaction_free;
    o.check("flat limit levels", d.limits_flat, levels.variation, 0.05);
    if (!include_tails || !run.converged)
        return;

    TailBoundsReport tails;
    DominationReport upper, lower;
    try {
        tails = check_tail_bounds(sol, spec, window);
        upper = check_domination(sol, spec, DominationSide::Upper);
        lower = check_domination(sol, spec, DominationSide::Lower);
    } catch (const Error& e) {
        diag["tail_error"] = e.what();
        o.check(std::string("tail analysis: ") + e.what(), false, NAN, 0.0);
        return;
    }
    diag["tail"] = to_json(tails);
    diag["domination"] = {to_json(upper), to_json(lower)};
    o.check("profile indicator bounded", tails.upper_bounded, tails.sup_variation, 2.0);
    o.check("derivative indicator bounded below", tails.derivative_bound.pass, tails.derivative_bound.m_est, 0.0);
    o.check("tail exponent >= 2 alpha - 1 - 0.1", tails.exponent_consistent, tails.profile_fit.exponent,
            2.0 * spec.alpha() - 1.1);
    o.check("upper domination", upper.passed, static_cast<double>(upper.violations), 0.0);
    o.check("lower domination", lower.passed, static_cast<double>(lower.violations), 0.0);
}

void write_front(Context& ctx, Outcome& o, const FrontRun& run, const ProblemSpec& spec)
{
    if (!run.solution)
        return;
    const auto assembly = assemble(run.solution->profile.grid, spec);
    std::ostringstream os;
    write_front_csv(os, *run.solution, spec, assembly);
    ctx.write(o, "front.csv", os.str());
    if (!ctx.dump_matrix)
        return;
    std::ostringstream m;
    m << std::setprecision(17);
    const auto& a = assembly.interior_matrix;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        m << assembly.boundary_left[i] << ',';
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            m << a(i, j) << ',';
        m << assembly.boundary_right[i] << '\n';
    }
    ctx.write(o, "matrix.csv", m.str());
}

Outcome cmd_solve(Context& ctx)
{
    Outcome o;
    const auto spec = make_spec(ctx.settings);
    const auto run = run_front(ctx, spec);
    Json diag = {{"schema_version", json_schema_version}};
    front_checks(o, run, spec, configured_window(ctx.settings), diag, true);
    write_front(ctx, o, run, spec);
    diag["checks"] = o.checks_json();
    ctx.write(o, "diagnostics.json", diag);
    if (run.solution)
        o.notes.push_back("c0 = " + fmt(run.solution->speed, 10) + " (b = " + fmt(run.solution->profile.grid.half_width()) +
                          ", h = " + fmt(run.solution->profile.grid.spacing()) + ")");
    return o;
}

Outcome cmd_tails(Context& ctx)
{
    Outcome o;
    const auto spec = make_spec(ctx.settings);
    const auto run = run_front(ctx, spec);
    Json diag = {{"schema_version", json_schema_version}};
    front_checks(o, run, spec, configured_window(ctx.settings), diag, true);
    // only the tail checks gate this subcommand
    std::erase_if(o.checks, [](const Check& c) {
        static const std::set<std::string> kept = {"profile indicator bounded", "derivative indicator bounded below",
                                                   "tail exponent >= 2 alpha - 1 - 0.1", "upper domination",
                                                   "lower domination"};
        return !kept.contains(c.name) && !c.name.starts_with("tail analysis");
    });
    if (run.solution) {
        const auto& p = run.solution->profile;
        const auto d = derivative(p);
        const double a = spec.alpha();
        std::ostringstream os;
        os << "x,phi,dphi,phi_indicator,dphi_indicator\n" << std::setprecision(17);
        for (std::size_t i = 1; i + 1 < p.values.size(); ++i) {
            const double x = p.grid.node(i);
            if (x > -1.0)
                break;
            os << x << ',' << p.values[i] << ',' << d[i] << ',' << p.values[i] * std::pow(-x, 2 * a - 1) << ','
               << d[i] * std::pow(-x, 2 * a) << '\n';
        }
        ctx.write(o, "tail.csv", os.str());
    }
    diag["checks"] = o.checks_json();
    ctx.write(o, "tails.json", diag);
    return o;
}

Outcome cmd_verify_lemmas(Context& ctx)
{
    Outcome o;
    const auto spec = make_spec(ctx.settings);
    const double a = spec.alpha();
    const PowerTailFunction lower(2 * a - 1, TailKind::Lower);
    const PowerTailFunction upper(2 * a, TailKind::Upper);
    ctx.log("evaluating the power-tail expansions");
    const auto lo = expansion_report(lower, spec, 1.0, -1e4, -10.0, 31);
    const auto up = expansion_report(upper, spec, 0.0, -1e4, -10.0, 31);
    std::ostringstream l, u;
    lo.write_csv(l);
    up.write_csv(u);
    ctx.write(o, "expansion_lower.csv", l.str());
    ctx.write(o, "expansion_upper.csv", u.str());

    auto ratio = [&](const PowerTailFunction& fn, double c, double x) {
        return eval_operator_on_tail(fn, spec, c, x) / leading_term(fn, spec, c, x);
    };
    const double r3 = ratio(lower, 1.0, -1e3), r4 = ratio(lower, 1.0, -1e4), u3 = ratio(upper, 0.0, -1e3);
    const auto tail_fit = expansion_report(lower, spec, 1.0, -1e4, -1e2, 21);
    const double target = lower.beta + 2 * a;
    o.check("lower kind ratio at |x| = 1e3", std::abs(r3 - 1) <= 0.03, std::abs(r3 - 1), 0.03);
    o.check("lower kind ratio at |x| = 1e4", std::abs(r4 - 1) <= 0.01, std::abs(r4 - 1), 0.01);
    o.check("lower kind remainder exponent", std::abs(tail_fit.remainder_exponent - target) <= 0.2,
            tail_fit.remainder_exponent, target);
    o.check("upper kind ratio at |x| = 1e3", std::abs(u3 - 1) <= 0.03, std::abs(u3 - 1), 0.03);

    const auto sup = supersolution_threshold(spec);
    const auto sub = derivative_subsolution(spec);
    Json out = {{"schema_version", json_schema_version},
                {"alpha", a},
                {"lower", to_json(lo)},
                {"upper", to_json(up)},
                {"remainder_fit_window", {-1e4, -1e2}},
                {"remainder_exponent", tail_fit.remainder_exponent},
                {"supersolution", {{"far_field", sup.far_field},
                                   {"matching_radius", sup.matching_radius},
                                   {"speed", sup.speed},
                                   {"binding_x", sup.binding_x}}},
                {"speed_bound", speed_bound(spec)},
                {"derivative_subsolution", {{"drift", sub.drift}, {"radius", sub.radius}}},
                {"checks", o.checks_json()}};
    ctx.write(o, "lemmas.json", out);
    return o;
}

Outcome cmd_symbol_check(Context& ctx)
{
    Outcome o;
    const double a = ctx.settings.alpha;
    constexpr double h0 = 0.05;
    std::ostringstream os;
    os << "alpha,xi,h,relative_error\n" << std::setprecision(17);
    Json rows = Json::array();
    for (double xi : {0.5, 1.0, 2.0}) {
        std::vector<double> errs;
        for (double h : {h0, h0 / 2, h0 / 4}) {
            errs.push_back(symbol_check(a, xi, symbol_check_grid(xi, h)));
            os << a << ',' << xi << ',' << h << ',' << errs.back() << '\n';
            rows.push_back({{"xi", xi}, {"h", h}, {"relative_error", errs.back()}});
        }
        o.check("xi = " + fmt(xi) + ": error < 1e-3", errs[0] < 1e-3, errs[0], 1e-3);
        o.check("xi = " + fmt(xi) + ": decreasing", errs[1] < errs[0] && errs[2] < errs[1], errs[2], errs[0]);
    }
    ctx.write(o, "symbol.csv", os.str());
    ctx.write(o, "symbol.json", Json{{"schema_version", json_schema_version},
                                     {"alpha", a},
                                     {"c_alpha", normalization_constant(a)},
                                     {"rows", rows},
                                     {"checks", o.checks_json()}});
    return o;
}

Outcome cmd_classical_check(Context& ctx)
{
    Outcome o;
    const IgnitionNonlinearity f(ctx.settings.family, ctx.settings.theta);
    ctx.log("phase-plane shooting and the local pipeline");
    const auto cf = classical_front(f);
    std::ostringstream os;
    os << "x,phi\n" << std::setprecision(17);
    for (std::size_t i = 0; i < cf.x.size(); ++i)
        os << cf.x[i] << ',' << cf.phi[i] << '\n';
    ctx.write(o, "classical.csv", os.str());
    o.check("pipeline vs phase plane within 1%", cf.agreement, cf.relative_difference, 0.01);
    o.check("strictly increasing profile", cf.strictly_increasing, 0.0, 0.0);
    o.check("shooting mismatch", cf.mismatch <= 1e-8, cf.mismatch, 1e-8);
    Json out = to_json(cf);
    out["schema_version"] = json_schema_version;
    out["checks"] = o.checks_json();
    ctx.write(o, "classical.json", out);
    o.notes.push_back("phase-plane c = " + fmt(cf.speed, 10) + ", pipeline c = " + fmt(cf.pipeline_speed.value_or(NAN), 10));
    return o;
}

Outcome cmd_ivp_check(Context& ctx)
{
    Outcome o;
    const auto spec = make_spec(ctx.settings);
    const auto& s = ctx.settings;
    ctx.log("time stepping the initial-value problem");
    const auto ivp = ivp_speed(spec, s.ivp_L, s.ivp_n, s.ivp_dt, s.ivp_T);
    std::ostringstream os;
    ivp.write_csv(os);
    ctx.write(o, "ivp.csv", os.str());
    o.check("values in [0,1]", ivp.min_value >= -1e-8 && ivp.max_value <= 1 + 1e-8,
            std::max(-ivp.min_value, ivp.max_value - 1), 1e-8);
    o.check("monotone frames", ivp.monotone, 0.0, 0.0);

    const auto run = run_front(ctx, spec);
    Json out = to_json(ivp);
    out["schema_version"] = json_schema_version;
    out["front_converged"] = run.converged;
    if (run.converged) {
        const double c0 = run.solution->speed;
        const double rel = std::abs(ivp.speed - c0) / c0;
        out["front_speed"] = c0;
        out["relative_difference"] = rel;
        o.check("ivp speed vs front speed within 5%", rel <= 0.05, rel, 0.05);
        o.notes.push_back("c_ivp = " + fmt(ivp.speed, 10) + ", c0 = " + fmt(c0, 10));
    } else {
        o.failure = run.error;
        out["error"] = run.error;
    }
    out["checks"] = o.checks_json();
    ctx.write(o, "ivp.json", out);
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Traveling fronts of the fractional combustion equation"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string output_dir;
    std::vector<std::string> overrides;
    std::optional<double> alpha;
    int verbosity = 0;
    app.add_option("-c,--config", config_path, "key = value configuration file");
    app.add_option("-o,--output-dir", output_dir, "directory for CSV and JSON outputs (overrides output_dir)");
    app.add_option("-s,--set", overrides, "override a configuration key (key=value, repeatable)");
    app.add_option("--alpha", alpha, "fractional order (shortcut for --set alpha=...)");
    app.add_flag("-v,--verbose", verbosity, "progress messages on stderr");

    using Command = Outcome (*)(Context&);
    const std::vector<std::tuple<std::string, std::string, Command>> commands = {
        {"solve", "compute the front (phi0, c0) by continuation in b", cmd_solve},
        {"verify-lemmas", "power-tail expansions of the operator and the speed bound", cmd_verify_lemmas},
        {"tails", "tail exponents, indicator bounds and domination checks", cmd_tails},
        {"ivp-check", "front speed of the time-dependent problem vs c0", cmd_ivp_check},
        {"symbol-check", "discrete operator on cos(xi x) vs |xi|^{2 alpha}", cmd_symbol_check},
        {"classical-check", "alpha = 1: phase-plane shooting vs the local pipeline", cmd_classical_check},
    };
    bool dump_matrix = false;
    for (const auto& [name, help, _] : commands) {
        auto* sub = app.add_subcommand(name, help);
        if (name == "solve")
            sub->add_flag("--dump-matrix", dump_matrix,
                          "also write the assembled operator of the final grid to matrix.csv (rows: interior nodes, "
                          "columns: all nodes)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    std::string subcommand;
    Command command = nullptr;
    for (const auto& [name, help, fn] : commands)
        if (app.got_subcommand(name)) {
            subcommand = name;
            command = fn;
        }

    Context ctx;
    ctx.verbosity = verbosity;
    ctx.dump_matrix = dump_matrix;
    ctx.out = output_dir.empty() ? fs::path(ctx.settings.output_dir) : fs::path(output_dir);
    Json manifest = {{"schema_version", json_schema_version}, {"subcommand", subcommand}, {"config_file", config_path},
                     {"overrides", overrides}, {"versions", build_info()}};
    auto finish = [&](int code, const std::string& status, const std::string& message, const Outcome* o) {
        manifest["exit_code"] = code;
        manifest["status"] = status;
        manifest["message"] = message;
        if (o) {
            manifest["outputs"] = o->outputs;
            manifest["checks"] = o->checks_json();
        }
        try {
            write_json(ctx.out / "manifest.json", manifest);
        } catch (const std::exception& e) {
            std::cerr << "error: could not write the manifest: " << e.what() << '\n';
            return 1;
        }
        return code;
    };

    try {
        if (!config_path.empty())
            ctx.settings = load_config(config_path);
        if (alpha)
            ctx.settings.alpha = *alpha;
        for (const auto& ov : overrides)
            apply_override(ctx.settings, ov);
        if (!output_dir.empty())
            ctx.settings.output_dir = output_dir;
        ctx.out = ctx.settings.output_dir;
        manifest["config"] = to_json(ctx.settings);
        (void)make_spec(ctx.settings); // validates alpha, theta and the family
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return finish(1, "error", e.what(), nullptr);
    }

    Outcome outcome;
    try {
        outcome = command(ctx);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return finish(1, "error", e.what(), nullptr);
    }

    std::ostringstream summary;
    summary << subcommand << " (alpha = " << ctx.settings.alpha << ", family = " << to_string(ctx.settings.family)
            << ", theta = " << ctx.settings.theta << ")\n";
    for (const auto& c : outcome.checks)
        summary << "  [" << (c.passed ? "PASS" : "FAIL") << "] " << c.name << " (value " << fmt(c.value) << ", limit "
                << fmt(c.threshold) << ")\n";
    for (const auto& n : outcome.notes)
        summary << "  " << n << '\n';
    if (!outcome.failure.empty())
        summary << "  FAILED: " << outcome.failure << '\n';
    const bool ok = outcome.passed();
    std::string message = "all gating checks passed";
    if (!ok) {
        message = outcome.failure;
        for (const auto& c : outcome.checks)
            if (!c.passed)
                message += (message.empty() ? "" : "; ") + std::string("failed: ") + c.name;
    }
    summary << (ok ? "OK" : "GATING CHECK FAILED: " + message) << '\n';
    std::cout << summary.str();
    try {
        ctx.write(outcome, "summary.txt", summary.str());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return finish(1, "error", e.what(), &outcome);
    }
    return finish(ok ? 0 : 2, ok ? "ok" : "gating_failed", message, &outcome);
}
