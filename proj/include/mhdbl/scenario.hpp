#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "mhdbl/errors.hpp"

namespace mhdbl {

enum class BcMode { conducting, dirichlet };
enum class Wall { lower, upper };

inline const char* to_string(BcMode m) { return m == BcMode::conducting ? "conducting" : "dirichlet"; }
inline const char* to_string(Wall w) { return w == Wall::lower ? "lower" : "upper"; }

inline BcMode parse_bc_mode(const std::string& s) {
    if (s == "conducting") return BcMode::conducting;
    if (s == "dirichlet") return BcMode::dirichlet;
    throw ConfigError("unknown bc_mode '" + s + "'");
}

struct NumericalKnobs {
    int nx = 16;
    int nz = 2049;
    double stretch = 0.995;
    double dt = 1e-3;
    double snapshot_cadence = 0.05;
    double z_max = 12.0;
    int nzb = 1201;
};

using Fz = std::function<double(double)>;
using Fxz = std::function<double(double, double)>;
using Ftxz = std::function<double(double, double, double)>;

// Data of one experiment. Closures must be smooth on a neighbourhood of
// [0,1] in z (wall derivatives are taken by central differences).
struct Scenario {
    std::string name = "custom";
    double length_L = 2.0 * std::numbers::pi;
    double horizon_T = 2.0;
    BcMode bc_mode = BcMode::conducting;
    int order = 0;
    NumericalKnobs knobs;

    Fz a, c;            // u1, H1 initial profiles
    Fxz b, d;           // u2, H2 initial fields (x, z)
    Fxz f1;             // (t, z)
    Ftxz f2;            // (t, x, z); empty means zero
    Ftxz g2;            // magnetic source (t, x, z); test hook, empty means zero
    std::array<std::function<double(double)>, 2> alpha1, gamma1;        // (t)
    std::array<std::function<double(double, double)>, 2> alpha2, gamma2; // (t, x)

    double f2_at(double t, double x, double z) const { return f2 ? f2(t, x, z) : 0.0; }
    double g2_at(double t, double x, double z) const { return g2 ? g2(t, x, z) : 0.0; }
};

// Inline scenario block: a named family plus a few knobs.
struct ScenarioParams {
    std::string family = "default";  // "default" | "flat"
    BcMode bc_mode = BcMode::conducting;
    double horizon_T = 2.0;
    double alpha1_offset = 0.0;       // shifts alpha1 away from a(i): breaks zero-order compatibility
    double forcing_scale = 1.0;       // amplitude of f1
};

inline ScenarioParams params_from_name(const std::string& name) {
    ScenarioParams p;
    const auto dash = name.rfind('-');
    if (dash == std::string::npos) throw ConfigError("scenario name must look like <family>-<bc_mode>: '" + name + "'");
    p.family = name.substr(0, dash);
    p.bc_mode = parse_bc_mode(name.substr(dash + 1));
    if (p.family != "default" && p.family != "flat") throw ConfigError("unknown scenario family '" + p.family + "'");
    return p;
}

// "default": every wall-normal derivative the expansion feeds on is nonzero
// at the walls, and the first-order compatibility conditions of both wall
// modes hold (checked numerically by check_compatibility).
// "flat": a = 2 + sin^3, b = sin x sin^3, so that wall derivatives of u vanish.
inline Scenario make_scenario(const ScenarioParams& p, double eps) {
    using std::cos;
    using std::exp;
    using std::sin;
    constexpr double pi = std::numbers::pi;
    Scenario s;
    s.name = p.family + "-" + to_string(p.bc_mode);
    s.bc_mode = p.bc_mode;
    s.horizon_T = p.horizon_T;
    s.length_L = 2.0 * pi;

    const double fs = p.forcing_scale;
    s.c = [](double z) { return 1.0 + 0.5 * cos(pi * z); };
    s.d = [](double x, double z) { return cos(x) * cos(pi * z); };
    s.f1 = [fs](double t, double z) { return fs * sin(t) * cos(pi * z); };
    if (p.family == "flat") {
        s.a = [](double z) { return 2.0 + std::pow(sin(pi * z), 3); };
        s.b = [](double x, double z) { return sin(x) * std::pow(sin(pi * z), 3); };
    } else {
        s.a = [](double z) { return 2.0 + sin(pi * z); };
        s.b = [](double x, double z) { return (2.0 / 3.0) * cos(x) * (sin(2.0 * pi * z) - sin(pi * z)); };
    }
    const double off = p.alpha1_offset;
    for (int i = 0; i < 2; ++i) {
        const double zi = i;
        const double ci = s.c(zi);
        const double ai = s.a(zi);
        const double cpi = cos(pi * zi);
        s.alpha1[i] = [ai, off](double) { return ai + off; };
        // c(i) * d_x d(x, i) ramped in: matches the first-order condition
        // d_t alpha2(0) = c(i) d_x d(x, i) because b and its x, zz
        // derivatives vanish at the walls.
        s.alpha2[i] = [ci, cpi](double t, double x) { return (1.0 - exp(-t)) * ci * (-sin(x) * cpi); };
        if (p.bc_mode == BcMode::dirichlet) {
            const double cpp = -0.5 * pi * pi * cpi;  // c''(i)
            if (p.family == "flat") {
                s.gamma1[i] = [ci](double) { return ci; };
            } else {
                s.gamma1[i] = [ci, cpp, eps](double t) { return ci + eps * cpp * t * exp(-t); };
            }
            s.gamma2[i] = [cpi, eps](double t, double x) {
                return cos(x) * cpi + t * exp(-t) * (2.0 * sin(x) * cpi - eps * (1.0 + pi * pi) * cos(x) * cpi);
            };
        }
    }
    return s;
}

inline Scenario make_scenario(const std::string& name, double eps) { return make_scenario(params_from_name(name), eps); }

} // namespace mhdbl
