#include "fracfront/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

namespace fracfront {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text)
{
    T v{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw ConfigError("invalid value '" + std::string(text) + "' for key '" + std::string(key) + "'");
    return v;
}

using Setter = std::function<void(RunSettings&, std::string_view, std::string_view)>;

template <class T>
Setter number(T RunSettings::*field)
{
    return [field](RunSettings& s, std::string_view k, std::string_view v) { s.*field = parse_number<T>(k, v); };
}

const std::map<std::string, Setter, std::less<>>& setters()
{
    static const std::map<std::string, Setter, std::less<>> table = {
        {"alpha", number(&RunSettings::alpha)},
        {"theta", number(&RunSettings::theta)},
        {"family",
         [](RunSettings& s, std::string_view, std::string_view v) { s.family = parse_family(v); }},
        {"lipschitz_bound", number(&RunSettings::lipschitz_bound)},
        {"b_initial", number(&RunSettings::b_initial)},
        {"h", number(&RunSettings::h)},
        {"n_max", number(&RunSettings::n_max)},
        {"tol_residual", number(&RunSettings::tol_residual)},
        {"tol_g", number(&RunSettings::tol_g)},
        {"tol_c", number(&RunSettings::tol_c)},
        {"tol_c_cont", number(&RunSettings::tol_c_cont)},
        {"tol_profile", number(&RunSettings::tol_profile)},
        {"max_doublings", number(&RunSettings::max_doublings)},
        {"window_lo", number(&RunSettings::window_lo)},
        {"window_hi", number(&RunSettings::window_hi)},
        {"ivp.L", number(&RunSettings::ivp_L)},
        {"ivp.n", number(&RunSettings::ivp_n)},
        {"ivp.dt", number(&RunSettings::ivp_dt)},
        {"ivp.T", number(&RunSettings::ivp_T)},
        {"output_dir", [](RunSettings& s, std::string_view, std::string_view v) { s.output_dir = std::string(v); }},
        {"root_finder",
         [](RunSettings& s, std::string_view, std::string_view v) { s.root_finder = parse_root_finder(v); }},
    };
    return table;
}

} // namespace

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : setters())
            k.push_back(name);
        return k;
    }();
    return keys;
}

void set_config_value(RunSettings& settings, std::string_view key, std::string_view value)
{
    const auto it = setters().find(key);
    if (it == setters().end())
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    it->second(settings, key, value);
}

RunSettings parse_config(std::istream& in, const std::string& source, RunSettings base)
{
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos)
            s = s.substr(0, hash);
        s = trim(s);
        if (s.empty())
            continue;
        const auto eq = s.find('=');
        try {
            if (eq == std::string_view::npos)
                throw ConfigError("expected 'key = value'");
            const auto key = trim(s.substr(0, eq));
            const auto value = trim(s.substr(eq + 1));
            if (key.empty() || value.empty())
                throw ConfigError("expected 'key = value'");
            set_config_value(base, key, value);
        } catch (const Error& e) {
            throw ConfigError(source + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return base;
}

RunSettings load_config(const std::string& path, RunSettings base)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path, std::move(base));
}

void apply_override(RunSettings& settings, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
    try {
        set_config_value(settings, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
    } catch (const Error& e) {
        throw ConfigError("override '" + std::string(assignment) + "': " + e.what());
    }
}

nlohmann::ordered_json to_json(const RunSettings& s)
{
    auto window = [](double v) -> nlohmann::ordered_json {
        if (std::isnan(v)) return "default";
        return v;
    };
    return {
        {"alpha", s.alpha},
        {"theta", s.theta},
        {"family", std::string(to_string(s.family))},
        {"lipschitz_bound", s.lipschitz_bound},
        {"b_initial", s.b_initial},
        {"h", s.h},
        {"n_max", s.n_max},
        {"tol_residual", s.tol_residual},
        {"tol_g", s.tol_g},
        {"tol_c", s.tol_c},
        {"tol_c_cont", s.tol_c_cont},
        {"tol_profile", s.tol_profile},
        {"max_doublings", s.max_doublings},
        {"window_lo", window(s.window_lo)},
        {"window_hi", window(s.window_hi)},
        {"ivp.L", s.ivp_L},
        {"ivp.n", s.ivp_n},
        {"ivp.dt", s.ivp_dt},
        {"ivp.T", s.ivp_T},
        {"output_dir", s.output_dir},
        {"root_finder", std::string(to_string(s.root_finder))},
    };
}

ProblemSpec make_spec(const RunSettings& s)
{
    ProblemSpec spec(s.alpha, IgnitionNonlinearity(s.family, s.theta));
    if (s.lipschitz_bound > 0.0)
        spec = spec.with_lipschitz_bound(s.lipschitz_bound);
    return spec;
}

ContinuationOptions make_continuation_options(const RunSettings& s)
{
    ContinuationOptions o;
    o.b0 = s.b_initial;
    o.h = s.h;
    o.tol_c_cont = s.tol_c_cont;
    o.tol_profile = s.tol_profile;
    o.max_doublings = s.max_doublings;
    o.n_max = s.n_max;
    o.shoot.tol_g = s.tol_g;
    o.shoot.tol_c = s.tol_c;
    o.shoot.root_finder = s.root_finder;
    if (s.tol_residual > 0.0)
        o.shoot.solver.tol_residual = s.tol_residual;
    return o;
}

} // namespace fracfront
