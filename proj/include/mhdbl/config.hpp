#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mhdbl/errors.hpp"
#include "mhdbl/scenario.hpp"

namespace mhdbl {

// A TOML subset: `[table]` headers one level deep, `key = value` with
// strings, numbers, booleans and single-line arrays of those, `#` comments.

using TomlScalar = std::variant<std::string, double, bool>;
struct TomlValue {
    std::vector<TomlScalar> items;
    bool is_array = false;
    int line = 0;
};
using TomlDoc = std::map<std::string, TomlValue>;  // keys are "table.key" or "key"

class ConfigErrors : public ConfigError {
public:
    explicit ConfigErrors(std::vector<std::string> errs) : ConfigError(join(errs)), errors_(std::move(errs)) {}
    const std::vector<std::string>& errors() const { return errors_; }

private:
    static std::string join(const std::vector<std::string>& e) {
        std::string s;
        for (const auto& x : e) s += (s.empty() ? "" : "\n") + x;
        return s;
    }
    std::vector<std::string> errors_;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

inline bool parse_scalar(const std::string& tok, TomlScalar& out) {
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
        out = tok.substr(1, tok.size() - 2);
        return true;
    }
    if (tok == "true" || tok == "false") {
        out = tok == "true";
        return true;
    }
    std::string t;
    for (char c : tok)
        if (c != '_') t += c;
    double v = 0.0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty()) return false;
    out = v;
    return true;
}

inline std::vector<std::string> split_array(const std::string& body) {
    std::vector<std::string> parts;
    std::string cur;
    bool in_str = false;
    for (char c : body) {
        if (c == '"') in_str = !in_str;
        if (c == ',' && !in_str) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) parts.push_back(trim(cur));
    return parts;
}

} // namespace detail

inline TomlDoc parse_toml(const std::string& text, std::vector<std::string>& errors) {
    TomlDoc doc;
    std::istringstream in(text);
    std::string raw, table;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                errors.push_back(where + "malformed table header");
                continue;
            }
            table = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back(where + "expected key = value");
            continue;
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        const std::string path = table.empty() ? key : table + "." + key;
        if (key.empty()) {
            errors.push_back(where + "empty key");
            continue;
        }
        if (doc.count(path)) {
            errors.push_back(where + "duplicate key '" + path + "'");
            continue;
        }
        TomlValue tv;
        tv.line = lineno;
        if (!val.empty() && val.front() == '[') {
            if (val.back() != ']') {
                errors.push_back(where + "'" + path + "': arrays must close on the same line");
                continue;
            }
            tv.is_array = true;
            bool ok = true;
            for (const auto& part : detail::split_array(val.substr(1, val.size() - 2))) {
                TomlScalar s;
                if (!detail::parse_scalar(part, s)) {
                    errors.push_back(where + "'" + path + "': cannot parse array element '" + part + "'");
                    ok = false;
                    break;
                }
                tv.items.push_back(s);
            }
            if (!ok) continue;
        } else {
            TomlScalar s;
            if (!detail::parse_scalar(val, s)) {
                errors.push_back(where + "'" + path + "': cannot parse value '" + val + "'");
                continue;
            }
            tv.items.push_back(s);
        }
        doc[path] = tv;
    }
    return doc;
}

// ---------------------------------------------------------------- RunConfig

struct RunConfig {
    ScenarioParams scenario;
    std::vector<double> epsilons{1e-2, 3.16e-3, 1e-3, 3.16e-4, 1e-4};
    double epsilon = 1e-2;  // single-case subcommands
    std::vector<int> orders{0, 1};
    std::vector<BcMode> bc_modes{BcMode::conducting, BcMode::dirichlet};
    int order = 0;          // single-case subcommands
    NumericalKnobs knobs;
    std::string output_dir = "mhdbl-out";
    int jobs = 1;
    std::vector<double> check_times{0.5, 1.0, 1.5};  // remainder cross-check times
};

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["scenario"] = {{"family", c.scenario.family},
                     {"bc_mode", to_string(c.scenario.bc_mode)},
                     {"horizon_T", c.scenario.horizon_T},
                     {"alpha1_offset", c.scenario.alpha1_offset},
                     {"forcing_scale", c.scenario.forcing_scale}};
    std::vector<std::string> modes;
    for (auto m : c.bc_modes) modes.push_back(to_string(m));
    j["epsilons"] = c.epsilons;
    j["epsilon"] = c.epsilon;
    j["orders"] = c.orders;
    j["order"] = c.order;
    j["bc_modes"] = modes;
    j["output_dir"] = c.output_dir;
    j["jobs"] = c.jobs;
    j["check_times"] = c.check_times;
    j["numerics"] = {{"nx", c.knobs.nx},
                     {"nz", c.knobs.nz},
                     {"stretch", c.knobs.stretch},
                     {"dt", c.knobs.dt},
                     {"snapshot_cadence", c.knobs.snapshot_cadence},
                     {"z_max", c.knobs.z_max},
                     {"nzb", c.knobs.nzb}};
    return j;
}

// The documented defaults, in the config syntax.
inline std::string defaults_toml() {
    const RunConfig c;
    std::ostringstream os;
    auto num = [](double v) {
        char buf[32];
        const auto r = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, r.ptr);
    };
    auto arr = [&](const auto& v) {
        std::string a = "[";
        for (std::size_t i = 0; i < v.size(); ++i) a += (i ? ", " : "") + num(static_cast<double>(v[i]));
        return a + "]";
    };
    os << "# scenario = \"default-conducting\" is shorthand for the [scenario] table below\n";
    os << "epsilons = " << arr(c.epsilons) << "   # rates: >= 4 values over >= 1.5 decades, decreasing\n";
    os << "epsilon = " << num(c.epsilon) << "   # check, correctors, assemble, solve\n";
    os << "orders = " << arr(c.orders) << "   # order 1 applies to dirichlet mode\n";
    os << "order = " << c.order << "\n";
    os << "bc_modes = [\"conducting\", \"dirichlet\"]\n";
    os << "output_dir = \"" << c.output_dir << "\"\n";
    os << "jobs = " << c.jobs << "\n";
    os << "check_times = " << arr(c.check_times) << "   # remainder cross-check times\n\n";
    os << "[scenario]\n";
    os << "family = \"" << c.scenario.family << "\"   # default | flat\n";
    os << "bc_mode = \"" << to_string(c.scenario.bc_mode) << "\"   # conducting | dirichlet\n";
    os << "horizon_T = " << num(c.scenario.horizon_T) << "\n";
    os << "alpha1_offset = " << num(c.scenario.alpha1_offset) << "\n";
    os << "forcing_scale = " << num(c.scenario.forcing_scale) << "\n\n";
    os << "[numerics]\n";
    os << "nx = " << c.knobs.nx << "\n";
    os << "nz = " << c.knobs.nz << "\n";
    os << "stretch = " << num(c.knobs.stretch) << "   # in [0, 1)\n";
    os << "dt = " << num(c.knobs.dt) << "\n";
    os << "snapshot_cadence = " << num(c.knobs.snapshot_cadence) << "\n";
    os << "z_max = " << num(c.knobs.z_max) << "\n";
    os << "nzb = " << c.knobs.nzb << "\n";
    return os.str();
}

namespace detail {

struct Reader {
    const TomlDoc& doc;
    std::vector<std::string>& errors;
    std::set<std::string> used;

    const TomlValue* get(const std::string& path) {
        auto it = doc.find(path);
        if (it == doc.end()) return nullptr;
        used.insert(path);
        return &it->second;
    }
    std::string where(const std::string& path, const TomlValue& v) const {
        return "line " + std::to_string(v.line) + ": '" + path + "'";
    }
    void number(const std::string& path, double& out) {
        if (auto* v = get(path)) {
            if (v->is_array || !std::holds_alternative<double>(v->items[0]))
                errors.push_back(where(path, *v) + " must be a number");
            else
                out = std::get<double>(v->items[0]);
        }
    }
    void integer(const std::string& path, int& out) {
        double d = out;
        const std::size_t before = errors.size();
        number(path, d);
        if (errors.size() != before || !doc.count(path)) return;
        if (d != std::floor(d) || std::abs(d) > 1e9)
            errors.push_back(where(path, doc.at(path)) + " must be an integer");
        else
            out = static_cast<int>(d);
    }
    void string(const std::string& path, std::string& out) {
        if (auto* v = get(path)) {
            if (v->is_array || !std::holds_alternative<std::string>(v->items[0]))
                errors.push_back(where(path, *v) + " must be a string");
            else
                out = std::get<std::string>(v->items[0]);
        }
    }
    template <class T>
    void array(const std::string& path, std::vector<T>& out) {
        auto* v = get(path);
        if (!v) return;
        if (!v->is_array) {
            errors.push_back(where(path, *v) + " must be an array");
            return;
        }
        std::vector<T> tmp;
        for (const auto& it : v->items) {
            if constexpr (std::is_same_v<T, std::string>) {
                if (!std::holds_alternative<std::string>(it)) {
                    errors.push_back(where(path, *v) + " must hold strings");
                    return;
                }
                tmp.push_back(std::get<std::string>(it));
            } else {
                if (!std::holds_alternative<double>(it)) {
                    errors.push_back(where(path, *v) + " must hold numbers");
                    return;
                }
                tmp.push_back(static_cast<T>(std::get<double>(it)));
            }
        }
        out = tmp;
    }
};

} // namespace detail

// Parses and validates. `subcommand` selects the extra checks of that
// command ("" for none). Every error is collected before throwing.
inline RunConfig parse_config(const std::string& text, const std::string& subcommand = "") {
    std::vector<std::string> errors;
    const TomlDoc doc = parse_toml(text, errors);
    detail::Reader rd{doc, errors, {}};
    RunConfig c;

    std::string name;
    rd.string("scenario", name);
    const bool table = std::any_of(doc.begin(), doc.end(), [](auto& kv) { return kv.first.rfind("scenario.", 0) == 0; });
    if (!name.empty()) {
        if (table) errors.push_back("'scenario' given both as a name and as a [scenario] table");
        try {
            c.scenario = params_from_name(name);
        } catch (const ConfigError& e) {
            errors.push_back(std::string("scenario: ") + e.what());
        }
    }
    std::string family = c.scenario.family, mode = to_string(c.scenario.bc_mode);
    rd.string("scenario.family", family);
    rd.string("scenario.bc_mode", mode);
    rd.number("scenario.horizon_T", c.scenario.horizon_T);
    rd.number("scenario.alpha1_offset", c.scenario.alpha1_offset);
    rd.number("scenario.forcing_scale", c.scenario.forcing_scale);
    if (family != "default" && family != "flat") errors.push_back("scenario.family: unknown family '" + family + "'");
    c.scenario.family = family;
    try {
        c.scenario.bc_mode = parse_bc_mode(mode);
    } catch (const ConfigError& e) {
        errors.push_back(std::string("scenario.bc_mode: ") + e.what());
    }

    rd.array("epsilons", c.epsilons);
    rd.number("epsilon", c.epsilon);
    rd.array("orders", c.orders);
    rd.integer("order", c.order);
    std::vector<std::string> modes;
    rd.array("bc_modes", modes);
    if (doc.count("bc_modes")) {
        c.bc_modes.clear();
        for (const auto& m : modes) {
            try {
                c.bc_modes.push_back(parse_bc_mode(m));
            } catch (const ConfigError& e) {
                errors.push_back(std::string("bc_modes: ") + e.what());
            }
        }
    }
    rd.string("output_dir", c.output_dir);
    rd.integer("jobs", c.jobs);
    rd.array("check_times", c.check_times);

    rd.integer("numerics.nx", c.knobs.nx);
    rd.integer("numerics.nz", c.knobs.nz);
    rd.number("numerics.stretch", c.knobs.stretch);
    rd.number("numerics.dt", c.knobs.dt);
    rd.number("numerics.snapshot_cadence", c.knobs.snapshot_cadence);
    rd.number("numerics.z_max", c.knobs.z_max);
    rd.integer("numerics.nzb", c.knobs.nzb);
    // Knobs are also accepted at top level for short files.
    for (const char* k : {"nx", "nz", "nzb"}) {
        int* dst = std::string(k) == "nx" ? &c.knobs.nx : (std::string(k) == "nz" ? &c.knobs.nz : &c.knobs.nzb);
        rd.integer(k, *dst);
    }
    rd.number("stretch", c.knobs.stretch);
    rd.number("dt", c.knobs.dt);
    rd.number("snapshot_cadence", c.knobs.snapshot_cadence);
    rd.number("z_max", c.knobs.z_max);

    for (const auto& [path, v] : doc)
        if (!rd.used.count(path)) errors.push_back("line " + std::to_string(v.line) + ": unknown key '" + path + "'");

    // Constraints.
    const NumericalKnobs& k = c.knobs;
    if (k.nx < 4 || k.nx % 2) errors.push_back("numerics.nx: must be even and >= 4");
    if (k.nz < 5 || k.nz % 2 == 0) errors.push_back("numerics.nz: must be odd and >= 5");
    if (!(k.stretch >= 0.0 && k.stretch < 1.0)) errors.push_back("numerics.stretch: must lie in [0,1)");
    if (!(k.dt > 0.0)) errors.push_back("numerics.dt: must be positive");
    if (!(k.snapshot_cadence > 0.0)) errors.push_back("numerics.snapshot_cadence: must be positive");
    if (!(k.z_max >= 12.0)) errors.push_back("numerics.z_max: must be >= 12");
    if (k.nzb < 3 || (k.nzb >= 2 && k.z_max / (k.nzb - 1) > 0.05))
        errors.push_back("numerics.nzb: half-line spacing z_max/(nzb-1) must be <= 0.05");
    if (!(c.scenario.horizon_T > 0.0)) errors.push_back("scenario.horizon_T: must be positive");
    if (!(c.epsilon > 0.0)) errors.push_back("epsilon: must be positive");
    if (c.order != 0 && c.order != 1) errors.push_back("order: must be 0 or 1");
    for (int o : c.orders)
        if (o != 0 && o != 1) errors.push_back("orders: entries must be 0 or 1");
    if (c.jobs < 1) errors.push_back("jobs: must be >= 1");
    for (double e : c.epsilons)
        if (!(e > 0.0)) errors.push_back("epsilons: entries must be positive");
    for (std::size_t i = 1; i < c.epsilons.size(); ++i)
        if (!(c.epsilons[i] < c.epsilons[i - 1])) {
            errors.push_back("epsilons: must be strictly decreasing");
            break;
        }
    if (c.order == 1 && c.scenario.bc_mode != BcMode::dirichlet && subcommand != "rates")
        errors.push_back("order: order 1 is only available in dirichlet mode");
    if (subcommand == "rates") {
        if (c.epsilons.size() < 4)
            errors.push_back("epsilons: need ≥4 epsilons (got " + std::to_string(c.epsilons.size()) + ")");
        else if (c.epsilons.front() > 0.0 && c.epsilons.back() > 0.0 &&
                 std::log10(c.epsilons.front() / c.epsilons.back()) < 1.5 - 1e-12)
            errors.push_back("epsilons: must span at least 1.5 decades");
        if (c.bc_modes.empty()) errors.push_back("bc_modes: must not be empty");
    }
    if (!errors.empty()) throw ConfigErrors(errors);
    return c;
}

} // namespace mhdbl
