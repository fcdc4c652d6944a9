#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fomlab/core.hpp"
#include "fomlab/model.hpp"
#include "fomlab/prior.hpp"

namespace fomlab {

/// Parsed config value: scalar, number list, or one-level inline table.
struct ConfigValue {
    std::variant<std::string, double, bool, std::vector<double>,
                 std::map<std::string, ConfigValue>>
        v;

    bool is_string() const { return std::holds_alternative<std::string>(v); }
    bool is_number() const { return std::holds_alternative<double>(v); }
    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_array() const { return std::holds_alternative<std::vector<double>>(v); }
    bool is_table() const { return std::holds_alternative<std::map<std::string, ConfigValue>>(v); }
};

using ConfigMap = std::map<std::string, ConfigValue>;

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

inline ConfigValue parse_value(const std::string& raw, const std::string& key);

inline std::vector<std::string> split_top_level(const std::string& body, const std::string& key) {
    std::vector<std::string> parts;
    int depth = 0;
    bool in_str = false;
    std::string cur;
    for (const char c : body) {
        if (c == '"') in_str = !in_str;
        if (!in_str) {
            if (c == '[' || c == '{') ++depth;
            if (c == ']' || c == '}') --depth;
            if (c == ',' && depth == 0) {
                parts.push_back(cur);
                cur.clear();
                continue;
            }
        }
        cur += c;
    }
    if (!trim(cur).empty()) parts.push_back(cur);
    if (depth != 0) throw ConfigError(key, "unbalanced brackets in value");
    return parts;
}

inline ConfigValue parse_value(const std::string& raw, const std::string& key) {
    const std::string s = trim(raw);
    if (s.empty()) throw ConfigError(key, "empty value");
    ConfigValue out;
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') throw ConfigError(key, "unterminated string");
        out.v = s.substr(1, s.size() - 2);
        return out;
    }
    if (s == "true" || s == "false") {
        out.v = (s == "true");
        return out;
    }
    if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError(key, "unterminated array");
        std::vector<double> arr;
        for (const auto& part : split_top_level(s.substr(1, s.size() - 2), key)) {
            const std::string p = trim(part);
            char* end = nullptr;
            const double x = std::strtod(p.c_str(), &end);
            if (end != p.c_str() + p.size()) throw ConfigError(key, "array elements must be numbers");
            arr.push_back(x);
        }
        out.v = std::move(arr);
        return out;
    }
    if (s.front() == '{') {
        if (s.back() != '}') throw ConfigError(key, "unterminated inline table");
        std::map<std::string, ConfigValue> table;
        for (const auto& part : split_top_level(s.substr(1, s.size() - 2), key)) {
            const std::string p = trim(part);
            if (p.empty()) continue;
            const auto eq = p.find('=');
            if (eq == std::string::npos) throw ConfigError(key, "inline table entries need key = value");
            const std::string k = trim(p.substr(0, eq));
            table[k] = parse_value(p.substr(eq + 1), key + "." + k);
        }
        out.v = std::move(table);
        return out;
    }
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw ConfigError(key, "cannot parse value '" + s + "'");
    out.v = x;
    return out;
}

}  // namespace detail

/// Parse the key = value config text (sections in [brackets], strings in
/// quotes, number arrays in [..], one-level inline tables in {..},
/// # comments). Keys flatten to section.key.
inline ConfigMap parse_config_text(const std::string& text) {
    ConfigMap out;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = detail::trim(detail::strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("line " + std::to_string(lineno), "bad section header");
            section = detail::trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        std::string key = detail::trim(s.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        if (out.count(key)) throw ConfigError(key, "duplicate key");
        out[key] = detail::parse_value(s.substr(eq + 1), key);
    }
    return out;
}

enum class Command {
    fi, bfi, fim, roc, auc, mpe, entropy, si, emse, bounds, zivzakai, expansions, regularity, all
};

inline const std::map<std::string, Command>& command_names() {
    static const std::map<std::string, Command> names = {
        {"fi", Command::fi},       {"bfi", Command::bfi},
        {"fim", Command::fim},     {"roc", Command::roc},
        {"auc", Command::auc},     {"mpe", Command::mpe},
        {"entropy", Command::entropy}, {"si", Command::si},
        {"emse", Command::emse},   {"bounds", Command::bounds},
        {"zivzakai", Command::zivzakai}, {"expansions", Command::expansions},
        {"regularity", Command::regularity}, {"all", Command::all},
    };
    return names;
}

/// Validated run request: everything the dispatcher needs, plus an echo of
/// the parsed config for the report.
struct RunConfig {
    Command command = Command::fi;
    std::string command_name = "fi";
    MethodChoice method = MethodChoice::automatic;
    std::optional<Model> model;
    std::optional<Prior> prior;

    std::optional<double> theta;
    std::optional<double> theta0;
    std::optional<double> theta1;
    std::optional<double> delta;
    std::vector<double> direction;
    std::optional<std::string> claim;
    std::optional<std::string> estimator;
    std::optional<std::string> bound;
    std::optional<std::string> form;

    NumericsOptions numerics;
    bool seed_given = false;

    std::string output_path;
    std::string output_format = "json";

    nlohmann::json echo;  // config as parsed, for the report
};

namespace detail {

inline nlohmann::json echo_value(const ConfigValue& v) {
    nlohmann::json j;
    if (v.is_string()) j = std::get<std::string>(v.v);
    else if (v.is_number()) j = std::get<double>(v.v);
    else if (v.is_bool()) j = std::get<bool>(v.v);
    else if (v.is_array()) j = std::get<std::vector<double>>(v.v);
    else {
        for (const auto& [k, sub] : std::get<std::map<std::string, ConfigValue>>(v.v))
            j[k] = echo_value(sub);
    }
    return j;
}

struct ConfigReader {
    const ConfigMap& map;
    mutable std::set<std::string> used;

    const ConfigValue* find(const std::string& key) const {
        const auto it = map.find(key);
        if (it == map.end()) return nullptr;
        used.insert(key);
        return &it->second;
    }
    std::optional<std::string> get_string(const std::string& key) const {
        const ConfigValue* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_string()) throw ConfigError(key, "expected a string");
        return std::get<std::string>(v->v);
    }
    std::optional<double> get_number(const std::string& key) const {
        const ConfigValue* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_number()) throw ConfigError(key, "expected a number");
        return std::get<double>(v->v);
    }
    std::optional<std::vector<double>> get_array(const std::string& key) const {
        const ConfigValue* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_array()) throw ConfigError(key, "expected an array");
        return std::get<std::vector<double>>(v->v);
    }
};

inline Model model_from_table(const std::map<std::string, ConfigValue>& t) {
    const auto fam = t.find("family");
    if (fam == t.end() || !fam->second.is_string())
        throw ConfigError("model.family", "model needs a string 'family'");
    const std::string name = std::get<std::string>(fam->second.v);
    auto num = [&](const char* k, std::optional<double> fallback = std::nullopt) {
        const auto it = t.find(k);
        if (it == t.end()) {
            if (fallback) return *fallback;
            throw ConfigError(std::string("model.") + k, "missing required model parameter");
        }
        if (!it->second.is_number()) throw ConfigError(std::string("model.") + k, "expected a number");
        return std::get<double>(it->second.v);
    };
    if (name == "gaussian_location") return Model::gaussian_location(num("sigma"));
    if (name == "gaussian_scale") return Model::gaussian_scale();
    if (name == "poisson_rate") return Model::poisson_rate();
    if (name == "gaussian_location_vector")
        return Model::gaussian_location_vector(num("sigma"), static_cast<int>(num("dim")));
    throw ConfigError("model.family", "unknown model family '" + name + "'");
}

inline Prior prior_from_table(const std::map<std::string, ConfigValue>& t) {
    const auto fam = t.find("family");
    if (fam == t.end() || !fam->second.is_string())
        throw ConfigError("prior.family", "prior needs a string 'family'");
    const std::string name = std::get<std::string>(fam->second.v);
    const auto pv = t.find("params");
    if (pv == t.end() || !pv->second.is_array())
        throw ConfigError("prior.params", "prior needs a numeric 'params' array");
    const auto& params = std::get<std::vector<double>>(pv->second.v);
    if (params.size() != 2) throw ConfigError("prior.params", "prior families take 2 parameters");
    if (name == "gaussian") return Prior::gaussian(params[0], params[1]);
    if (name == "cosine_bump") return Prior::cosine_bump(params[0], params[1]);
    if (name == "lognormal") return Prior::lognormal(params[0], params[1]);
    throw ConfigError("prior.family", "unknown prior family '" + name + "'");
}

}  // namespace detail

inline RunConfig build_run_config(const ConfigMap& map) {
    detail::ConfigReader r{map, {}};
    RunConfig cfg;

    const auto cmd = r.get_string("command");
    if (!cmd) throw ConfigError("command", "missing 'command'");
    const auto it = command_names().find(*cmd);
    if (it == command_names().end()) throw ConfigError("command", "unknown command '" + *cmd + "'");
    cfg.command = it->second;
    cfg.command_name = *cmd;

    if (const auto m = r.get_string("method")) {
        if (*m == "auto") cfg.method = MethodChoice::automatic;
        else if (*m == "closed_form") cfg.method = MethodChoice::closed_form;
        else if (*m == "quadrature") cfg.method = MethodChoice::quadrature;
        else if (*m == "monte_carlo") cfg.method = MethodChoice::monte_carlo;
        else throw ConfigError("method", "unknown method '" + *m + "'");
    }

    if (const ConfigValue* mv = r.find("model")) {
        if (!mv->is_table()) throw ConfigError("model", "expected an inline table");
        cfg.model = detail::model_from_table(std::get<std::map<std::string, ConfigValue>>(mv->v));
    }
    if (const ConfigValue* pv = r.find("prior")) {
        if (!pv->is_table()) throw ConfigError("prior", "expected an inline table");
        cfg.prior = detail::prior_from_table(std::get<std::map<std::string, ConfigValue>>(pv->v));
    }

    cfg.theta = r.get_number("task.theta");
    cfg.theta0 = r.get_number("task.theta0");
    cfg.theta1 = r.get_number("task.theta1");
    cfg.delta = r.get_number("task.delta");
    if (const auto u = r.get_array("task.u")) cfg.direction = *u;
    cfg.claim = r.get_string("task.claim");
    cfg.estimator = r.get_string("task.estimator");
    cfg.bound = r.get_string("task.bound");
    cfg.form = r.get_string("task.form");

    if (const auto t = r.get_number("numerics.quad_tol")) {
        if (!(*t > 0.0)) throw ConfigError("numerics.quad_tol", "must be positive");
        cfg.numerics.quad_tol = *t;
    }
    if (const auto n = r.get_number("numerics.mc_samples")) {
        if (!(*n >= 2.0)) throw ConfigError("numerics.mc_samples", "must be >= 2");
        cfg.numerics.mc_samples = static_cast<std::size_t>(*n);
    }
    if (const auto s = r.get_number("numerics.seed")) {
        cfg.numerics.seed = static_cast<std::uint64_t>(*s);
        cfg.seed_given = true;
    }
    if (const auto l = r.get_array("numerics.curvature_ladder")) {
        if (l->size() < 3) throw ConfigError("numerics.curvature_ladder", "need >= 3 steps");
        cfg.numerics.curvature_ladder = *l;
    }

    if (const auto p = r.get_string("output.path")) cfg.output_path = *p;
    if (const auto f = r.get_string("output.format")) {
        if (*f != "json" && *f != "csv") throw ConfigError("output.format", "must be json or csv");
        cfg.output_format = *f;
    }

    // a stochastic fallback without a pinned seed would not be reproducible
    if (!cfg.seed_given &&
        (cfg.method == MethodChoice::automatic || cfg.method == MethodChoice::monte_carlo))
        throw ConfigError("numerics.seed",
                          "seed is required when method is 'auto' or 'monte_carlo'");

    for (const auto& [key, value] : map) {
        if (!r.used.count(key)) throw ConfigError(key, "unknown key");
        cfg.echo[key] = detail::echo_value(value);
    }
    return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return build_run_config(parse_config_text(ss.str()));
}

}  // namespace fomlab
