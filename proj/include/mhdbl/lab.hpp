#pragma once

#include <algorithm>
#include <charconv>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mhdbl/composer.hpp"
#include "mhdbl/remainders.hpp"
#include "mhdbl/viscous.hpp"

namespace mhdbl {

// ---------------------------------------------------------------- context

// Everything a sweep shares across epsilons: grids, time lattice, outer
// solution and its wall traces (none of them depends on epsilon).
struct LabContext {
    ScenarioParams params;
    NumericalKnobs knobs;
    ChannelGrid grid;
    BLGrid bl;
    TimeLattice lattice;
    std::vector<int> snap_steps;
    std::vector<double> snap_times;
    TraceTable traces;
    OuterSolution outer;
};

inline LabContext make_context(const ScenarioParams& p, const NumericalKnobs& knobs) {
    LabContext c;
    c.params = p;
    c.knobs = knobs;
    // epsilon enters the scenario only through dirichlet wall data, which the
    // outer solution does not see; any positive value will do here.
    const Scenario s = make_scenario(p, 1.0);
    c.grid = build_channel_grid(knobs.nx, knobs.nz, knobs.stretch, s.length_L);
    c.bl = build_bl_grid(knobs.z_max, knobs.nzb);
    c.lattice = make_lattice(p.horizon_T, knobs.dt);
    c.snap_steps = snapshot_steps(c.lattice, knobs.snapshot_cadence);
    for (int n : c.snap_steps) c.snap_times.push_back(c.lattice.time(n));
    OuterSolver os(s, knobs.nx);
    c.traces = build_trace_table(os, c.lattice);
    c.outer = solve_outer(os, c.grid, c.snap_times, false);
    for (int n : c.snap_steps) {
        c.outer.lower.push_back(c.traces.at(n, Wall::lower));
        c.outer.upper.push_back(c.traces.at(n, Wall::upper));
    }
    return c;
}

// ---------------------------------------------------------------- error table

enum class NormKind { l2, h1, linf };
inline const char* to_string(NormKind n) { return n == NormKind::l2 ? "l2" : (n == NormKind::h1 ? "h1" : "linf"); }
inline double pick(const NormTriple& t, NormKind n) { return n == NormKind::l2 ? t.l2 : (n == NormKind::h1 ? t.h1 : t.linf); }

struct ErrorRow {
    double epsilon = 0.0;
    BcMode bc_mode = BcMode::conducting;
    std::string target;     // approx0 | approx1 | ideal | ideal+bl
    std::string component;  // u1 | h1 | u2 | h2 | all
    NormKind norm = NormKind::l2;
    double value = 0.0;     // sup over snapshots
    std::string warnings;
};

struct ErrorTable {
    std::vector<ErrorRow> rows;

    std::vector<const ErrorRow*> select(BcMode m, const std::string& target, const std::string& comp, NormKind n) const {
        std::vector<const ErrorRow*> out;
        for (const auto& r : rows)
            if (r.bc_mode == m && r.target == target && r.component == comp && r.norm == n) out.push_back(&r);
        std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->epsilon > b->epsilon; });
        return out;
    }
    double value(BcMode m, const std::string& target, const std::string& comp, NormKind n, double eps) const {
        for (const auto& r : rows)
            if (r.bc_mode == m && r.target == target && r.component == comp && r.norm == n && r.epsilon == eps)
                return r.value;
        throw ConfigError("no error row for " + target + "/" + comp);
    }
};

inline const std::vector<std::string>& components() {
    static const std::vector<std::string> c{"u1", "h1", "u2", "h2", "all"};
    return c;
}

// sup over snapshots of each component norm of (viscous - approx).
inline std::vector<ErrorRow> error_rows(const ViscousRun& run, const ApproxSolution& a, const std::string& target,
                                        const ChannelGrid& g, const std::string& warnings) {
    if (run.states.size() != a.snaps.size()) throw DimensionError("viscous and approximate snapshots differ");
    std::vector<std::vector<NormTriple>> series(components().size());
    for (std::size_t s = 0; s < a.snaps.size(); ++s) {
        const ViscousState& v = run.states[s];
        const ApproxSnapshot& p = a.snaps[s];
        if (std::abs(v.time - p.t) > 1e-12) throw DimensionError("snapshot times differ");
        Profile1D e1 = v.u1, e3 = v.h1;
        ModalField e2 = v.u2, e4 = v.h2;
        for (std::size_t j = 0; j < e1.values.size(); ++j) {
            e1.values[j] -= p.u1.values[j];
            e3.values[j] -= p.h1.values[j];
        }
        for (std::size_t i = 0; i < e2.coeffs.size(); ++i) {
            e2.coeffs[i] -= p.u2.coeffs[i];
            e4.coeffs[i] -= p.h2.coeffs[i];
        }
        series[0].push_back(norms(e1, g));
        series[1].push_back(norms(e3, g));
        series[2].push_back(norms(e2, g));
        series[3].push_back(norms(e4, g));
        series[4].push_back(norms(FieldSet().add(e1).add(e3).add(e2).add(e4), g));
    }
    std::vector<ErrorRow> rows;
    for (std::size_t c = 0; c < components().size(); ++c) {
        const NormTriple m = max_over_time(series[c]);
        for (NormKind n : {NormKind::l2, NormKind::h1, NormKind::linf}) {
            const double v = pick(m, n);
            if (!std::isfinite(v)) throw SolverError("non-finite error norm");
            rows.push_back({run.epsilon, run.bc_mode, target, components()[c], n, v, warnings});
        }
    }
    return rows;
}

// ---------------------------------------------------------------- one case

struct CaseResult {
    double epsilon = 0.0;
    BcMode bc_mode = BcMode::conducting;
    int order = 0;
    std::vector<ErrorRow> rows;
    std::vector<std::string> warnings;
    // Kept only on request.
    std::vector<ViscousState> viscous;
    std::vector<ApproxSolution> approximants;  // in the order of `targets`
    std::vector<std::string> targets;
};

inline std::vector<std::string> targets_for(int order) {
    if (order == 1) return {"approx0", "approx1", "ideal", "ideal+bl"};
    return {"approx0", "ideal", "ideal+bl"};
}

inline CaseResult run_case(const LabContext& ctx, double eps, int order, bool keep_fields = false) {
    const Scenario s = make_scenario(ctx.params, eps);
    CaseResult res;
    res.epsilon = eps;
    res.bc_mode = s.bc_mode;
    res.order = order;

    CorrectorInputs in{&s, &ctx.traces, &ctx.bl, ctx.knobs.nx};
    const CorrectorSet cs = solve_correctors(in, order, ctx.snap_steps);
    if (cs.lower.decay_warning || cs.upper.decay_warning)
        res.warnings.push_back("corrector tail above decay threshold at z_max");
    const EtaSet eta = eta_corrector(ctx.traces, ctx.snap_steps);
    ViscousRun run = solve_viscous(s, eps, ctx.grid, ctx.lattice, ctx.snap_steps, order);
    for (auto& w : run.warnings) res.warnings.push_back(w);
    std::string warn;
    for (const auto& w : res.warnings) warn += (warn.empty() ? "" : "; ") + w;

    for (const std::string& target : targets_for(order)) {
        AssembleOptions opt;
        opt.order = target == "approx1" ? 1 : 0;
        opt.correctors = target != "ideal";
        opt.eta = target != "ideal+bl";
        const ApproxSolution a = assemble(opt, s.bc_mode, eps, ctx.outer, &cs, &eta, ctx.grid, &ctx.bl);
        auto rows = error_rows(run, a, target, ctx.grid, warn);
        res.rows.insert(res.rows.end(), rows.begin(), rows.end());
        if (keep_fields) {
            res.approximants.push_back(a);
            res.targets.push_back(target);
        }
    }
    if (keep_fields) res.viscous = std::move(run.states);
    return res;
}

// ---------------------------------------------------------------- cross-check

struct CrossCheckRun {
    CrossCheck check;
    std::vector<double> times;             // recorded snapshot times
    std::vector<ResidualSnapshot> residuals;
};

// Substitution residual against the remainder tables at `check_times`. The
// snapshots t - dt, t, t + dt are recorded around every check time so the
// residual's time difference has step dt.
inline CrossCheckRun run_crosscheck(const ScenarioParams& p, const NumericalKnobs& knobs, double eps, int order,
                                    std::span<const double> check_times) {
    Scenario s = make_scenario(p, eps);
    s.knobs = knobs;
    const ChannelGrid g = build_channel_grid(knobs.nx, knobs.nz, knobs.stretch, s.length_L);
    const BLGrid bl = build_bl_grid(knobs.z_max, knobs.nzb);
    const TimeLattice lat = make_lattice(p.horizon_T, knobs.dt);
    std::vector<int> steps = snapshot_steps(lat, knobs.snapshot_cadence);
    std::vector<int> centres;
    for (double t : check_times) {
        const int n = static_cast<int>(std::lround(t / lat.dt));
        if (n < 1 || n >= lat.steps || std::abs(n * lat.dt - t) > 1e-9)
            throw ConfigError("check time must be an interior lattice time");
        centres.push_back(n);
        for (int m : {n - 1, n, n + 1}) steps.push_back(m);
    }
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());

    OuterSolver os(s, knobs.nx);
    const TraceTable tt = build_trace_table(os, lat);
    CrossCheckRun out;
    for (int n : steps) out.times.push_back(lat.time(n));
    OuterSolution outer = solve_outer(os, g, out.times, false);
    for (int n : steps) {
        outer.lower.push_back(tt.at(n, Wall::lower));
        outer.upper.push_back(tt.at(n, Wall::upper));
    }
    CorrectorInputs in{&s, &tt, &bl, knobs.nx};
    const CorrectorSet cs = solve_correctors(in, order, steps);
    const EtaSet eta = eta_corrector(tt, steps);
    AssembleOptions opt;
    opt.order = order;
    const ApproxSolution a = assemble(opt, s.bc_mode, eps, outer, &cs, &eta, g, &bl);
    out.residuals = residual(a, eps, s, g);
    std::vector<std::size_t> at;
    for (int n : centres) at.push_back(static_cast<std::size_t>(std::find(steps.begin(), steps.end(), n) - steps.begin()));
    const RemainderInputs ri{eps, s.bc_mode, order, &g, &bl, &outer, &cs, &eta};
    out.check = remainder_crosscheck(ri, out.residuals, at);
    return out;
}

// ---------------------------------------------------------------- rates

struct RateFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
    int points = 0;
    std::string note;
};

// Ordinary least squares of ln(err) on ln(eps). Zero norms are dropped.
inline RateFit fit_rate(std::span<const double> eps, std::span<const double> err) {
    if (eps.size() != err.size()) throw DimensionError("fit_rate: length mismatch");
    std::vector<double> x, y;
    int dropped = 0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw ConfigError("fit_rate: epsilon must be positive");
        if (!(err[i] > 0.0)) {
            ++dropped;
            continue;
        }
        x.push_back(std::log(eps[i]));
        y.push_back(std::log(err[i]));
    }
    if (x.size() < 3) throw ConfigError("fit_rate needs at least 3 rows with positive error");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw ConfigError("fit_rate: all epsilons equal");
    RateFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) ssr += std::pow(y[i] - f.intercept - f.slope * x[i], 2);
    f.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    f.points = static_cast<int>(x.size());
    if (dropped) f.note = std::to_string(dropped) + " zero-norm rows excluded";
    return f;
}

inline constexpr double kSlopeTol = 0.12;
inline constexpr double kIdealSlopeTol = 0.05;
inline constexpr double kR2Gate = 0.98;

struct RateEntry {
    BcMode bc_mode = BcMode::conducting;
    std::string target, component;
    NormKind norm = NormKind::l2;
    double theory = 0.0, tolerance = kSlopeTol;
    RateFit fit;
    bool pass = false;
};

struct Expectation {
    std::string target, component;
    NormKind norm;
    double theory, tolerance;
};

inline std::vector<Expectation> expectations(int order) {
    std::vector<Expectation> e{
        {"approx0", "all", NormKind::l2, 0.75, kSlopeTol},  {"approx0", "all", NormKind::h1, 0.25, kSlopeTol},
        {"approx0", "all", NormKind::linf, 0.5, kSlopeTol},  {"approx0", "u1", NormKind::l2, 1.0, kSlopeTol},
        {"approx0", "u1", NormKind::h1, 0.5, kSlopeTol},     {"approx0", "u1", NormKind::linf, 0.75, kSlopeTol},
        {"approx0", "h1", NormKind::l2, 1.0, kSlopeTol},     {"approx0", "h1", NormKind::h1, 0.5, kSlopeTol},
        {"approx0", "h1", NormKind::linf, 0.75, kSlopeTol},  {"ideal", "all", NormKind::l2, 0.25, kIdealSlopeTol},
    };
    if (order == 1) {
        e.push_back({"approx1", "all", NormKind::h1, 0.5, kSlopeTol});
        e.push_back({"approx1", "all", NormKind::linf, 0.75, kSlopeTol});
        e.push_back({"ideal+bl", "all", NormKind::h1, 0.5, kSlopeTol});
    }
    return e;
}

inline RateEntry rate_entry(const ErrorTable& t, BcMode m, const Expectation& ex) {
    RateEntry r;
    r.bc_mode = m;
    r.target = ex.target;
    r.component = ex.component;
    r.norm = ex.norm;
    r.theory = ex.theory;
    r.tolerance = ex.tolerance;
    std::vector<double> eps, err;
    for (const ErrorRow* row : t.select(m, ex.target, ex.component, ex.norm)) {
        eps.push_back(row->epsilon);
        err.push_back(row->value);
    }
    r.fit = fit_rate(eps, err);
    r.pass = std::abs(r.fit.slope - r.theory) <= r.tolerance && r.fit.r2 >= kR2Gate;
    return r;
}

// ---------------------------------------------------------------- sweep

struct SweepSpec {
    std::string family = "default";
    std::vector<BcMode> bc_modes{BcMode::conducting, BcMode::dirichlet};
    std::vector<int> orders{0, 1};
    std::vector<double> epsilons{1e-2, 3.16e-3, 1e-3, 3.16e-4, 1e-4};
    double horizon_T = 2.0;
    NumericalKnobs knobs;
    int jobs = 1;
};

struct ConvergenceReport {
    ErrorTable table;
    std::vector<RateEntry> rates;
    std::vector<std::string> notes;
    bool complete = true;

    bool pass() const {
        return complete && std::all_of(rates.begin(), rates.end(), [](const RateEntry& r) { return r.pass; });
    }
};

inline void validate_epsilons(std::span<const double> eps) {
    if (eps.size() < 4) throw ConfigError("need >=4 epsilons for a rate sweep");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw ConfigError("epsilons must be positive");
        if (i && !(eps[i] < eps[i - 1])) throw ConfigError("epsilons must be strictly decreasing");
    }
    if (std::log10(eps.front() / eps.back()) < 1.5 - 1e-12) throw ConfigError("epsilons must span at least 1.5 decades");
}

// The expansion order used per wall mode: order 1 only exists in dirichlet mode.
inline int case_order(BcMode m, std::span<const int> orders) {
    const bool want1 = std::find(orders.begin(), orders.end(), 1) != orders.end();
    return (want1 && m == BcMode::dirichlet) ? 1 : 0;
}

// Runs every (mode, epsilon) case on up to `jobs` threads; rows are merged in
// a fixed order so the result does not depend on scheduling. On failure the
// partial report is returned with complete = false and the error noted.
inline ConvergenceReport sweep(const SweepSpec& spec, const std::function<void(const std::string&)>& log = {}) {
    validate_epsilons(spec.epsilons);
    ConvergenceReport rep;
    for (BcMode m : spec.bc_modes) {
        ScenarioParams p;
        p.family = spec.family;
        p.bc_mode = m;
        p.horizon_T = spec.horizon_T;
        const int order = case_order(m, spec.orders);
        if (m == BcMode::conducting && order == 0 &&
            std::find(spec.orders.begin(), spec.orders.end(), 1) != spec.orders.end())
            rep.notes.push_back("order 1 is built for dirichlet mode only; conducting runs at order 0");
        if (log) log(std::string("context: ") + to_string(m));
        const LabContext ctx = make_context(p, spec.knobs);

        const std::size_t n = spec.epsilons.size();
        std::vector<CaseResult> results(n);
        std::vector<std::string> errors(n);
        std::atomic<std::size_t> next{0};
        std::mutex log_mu;
        auto worker = [&] {
            for (std::size_t i; (i = next++) < n;) {
                try {
                    results[i] = run_case(ctx, spec.epsilons[i], order);
                    if (log) {
                        std::lock_guard lk(log_mu);
                        std::ostringstream os;
                        os << "case " << to_string(m) << " eps=" << spec.epsilons[i] << " done";
                        log(os.str());
                    }
                } catch (const std::exception& e) {
                    errors[i] = e.what();
                }
            }
        };
        const int jobs = std::max(1, std::min<int>(spec.jobs, static_cast<int>(n)));
        std::vector<std::thread> pool;
        for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();

        for (std::size_t i = 0; i < n; ++i) {
            if (!errors[i].empty()) {
                rep.complete = false;
                std::ostringstream os;
                os << "case " << to_string(m) << " eps=" << spec.epsilons[i] << " failed: " << errors[i];
                rep.notes.push_back(os.str());
                continue;
            }
            rep.table.rows.insert(rep.table.rows.end(), results[i].rows.begin(), results[i].rows.end());
        }
        if (!rep.complete) return rep;
        for (const auto& ex : expectations(order)) rep.rates.push_back(rate_entry(rep.table, m, ex));
    }
    return rep;
}

// ---------------------------------------------------------------- emitters

inline constexpr int kReportSchemaVersion = 1;

// Shortest text that reads back to the same double.
inline std::string fmt_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// CSV columns: epsilon, bc_mode, target, component, norm, value, warnings.
// The header lines starting with '#' carry the resolved configuration.
inline void write_error_csv(std::ostream& os, const ErrorTable& t, const nlohmann::json& config) {
    os << "# config: " << config.dump() << "\n";
    os << "epsilon,bc_mode,target,component,norm,value,warnings\n";
    for (const auto& r : t.rows)
        os << fmt_double(r.epsilon) << ',' << to_string(r.bc_mode) << ',' << r.target << ',' << r.component << ','
           << to_string(r.norm) << ',' << fmt_double(r.value) << ",\"" << r.warnings << "\"\n";
}

inline nlohmann::json report_json(const ConvergenceReport& rep, const nlohmann::json& config) {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["config"] = config;
    j["complete"] = rep.complete;
    j["pass"] = rep.pass();
    j["notes"] = rep.notes;
    j["r2_gate"] = kR2Gate;
    auto& arr = j["rates"] = nlohmann::json::array();
    for (const auto& r : rep.rates) {
        arr.push_back({{"bc_mode", to_string(r.bc_mode)},
                       {"target", r.target},
                       {"component", r.component},
                       {"norm", to_string(r.norm)},
                       {"theory", r.theory},
                       {"tolerance", r.tolerance},
                       {"slope", r.fit.slope},
                       {"intercept", r.fit.intercept},
                       {"r2", r.fit.r2},
                       {"points", r.fit.points},
                       {"note", r.fit.note},
                       {"pass", r.pass}});
    }
    auto& rows = j["errors"] = nlohmann::json::array();
    for (const auto& r : rep.table.rows)
        rows.push_back({{"epsilon", r.epsilon},
                        {"bc_mode", to_string(r.bc_mode)},
                        {"target", r.target},
                        {"component", r.component},
                        {"norm", to_string(r.norm)},
                        {"value", r.value},
                        {"warnings", r.warnings}});
    return j;
}

// Two columns (ln eps, ln err) plus the fitted line in a comment, one file per rate.
inline void write_gnuplot(std::ostream& os, const ErrorTable& t, const RateEntry& r) {
    os << "# " << to_string(r.bc_mode) << ' ' << r.target << ' ' << r.component << ' ' << to_string(r.norm)
       << " slope=" << fmt_double(r.fit.slope) << " intercept=" << fmt_double(r.fit.intercept)
       << " r2=" << fmt_double(r.fit.r2) << " theory=" << r.theory << "\n";
    for (const ErrorRow* row : t.select(r.bc_mode, r.target, r.component, r.norm))
        if (row->value > 0.0) os << fmt_double(std::log(row->epsilon)) << ' ' << fmt_double(std::log(row->value)) << "\n";
}

} // namespace mhdbl
