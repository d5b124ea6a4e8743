// mhdbl-lab: command-line front end of the boundary-layer lab.
//
// Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 rate gate failed.
// Logs go to stderr; stdout carries only the paths of written artifacts.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mhdbl/config.hpp"
#include "mhdbl/lab.hpp"

namespace fs = std::filesystem;
using namespace mhdbl;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kSolver = 2, kRateGate = 3 };

void log(const std::string& msg) { std::cerr << "[mhdbl-lab] " << msg << std::endl; }

struct Output {
    fs::path dir;
    nlohmann::json config;

    fs::path open(const std::string& name, std::ofstream& os) const {
        fs::create_directories(dir);
        const fs::path p = dir / name;
        os.open(p);
        if (!os) throw std::runtime_error("cannot write " + p.string());
        os << std::setprecision(17);
        return p;
    }
    // CSV with the resolved config as a comment header.
    fs::path csv(const std::string& name, const std::string& header, const std::function<void(std::ostream&)>& body) const {
        std::ofstream os;
        const fs::path p = open(name, os);
        os << "# config: " << config.dump() << "\n" << header << "\n";
        body(os);
        return p;
    }
    fs::path json(const std::string& name, nlohmann::json j) const {
        std::ofstream os;
        const fs::path p = open(name, os);
        j["config"] = config;
        os << j.dump(2) << "\n";
        return p;
    }
};

Scenario scenario_of(const RunConfig& c, double eps) {
    Scenario s = make_scenario(c.scenario, eps);
    s.knobs = c.knobs;
    return s;
}

int cmd_check(const RunConfig& c, const Output& out) {
    const Scenario s = scenario_of(c, c.epsilon);
    const CompatReport rep = check_compatibility(s, c.order, c.epsilon);
    const auto p = out.csv("check.csv", "condition,wall,order,residual,tolerance,pass", [&](std::ostream& os) {
        for (const auto& r : rep.rows)
            os << r.condition << ',' << r.wall << ',' << r.order << ',' << r.residual << ',' << r.tolerance << ','
               << (r.pass ? 1 : 0) << "\n";
    });
    std::cout << p.string() << "\n";
    for (const auto& r : rep.rows)
        if (!r.pass || !rep.pass(c.order))
            log(r.condition + " wall " + std::to_string(r.wall) + " order " + std::to_string(r.order) +
                " residual " + fmt_double(r.residual) + (r.pass ? "" : "  FAILED"));
    if (!rep.pass(c.order)) {
        log("compatibility conditions violated");
        return kInvalid;
    }
    log("compatibility conditions hold up to order " + std::to_string(c.order));
    return kOk;
}

int cmd_ideal(const RunConfig& c, const Output& out) {
    const Scenario s = scenario_of(c, c.epsilon);
    const TimeLattice lat = make_lattice(c.scenario.horizon_T, c.knobs.dt);
    const auto steps = snapshot_steps(lat, c.knobs.snapshot_cadence);
    OuterSolver os(s, c.knobs.nx);
    const auto p1 = out.csv("ideal_traces.csv", "t,wall,U,dU,d2U,B,dB,d2B", [&](std::ostream& o) {
        for (int n : steps)
            for (Wall w : {Wall::lower, Wall::upper}) {
                const WallTrace tr = os.trace(lat.time(n), w);
                o << tr.t << ',' << to_string(w) << ',' << tr.U << ',' << tr.dU << ',' << tr.d2U << ',' << tr.B << ','
                  << tr.dB << ',' << tr.d2B << "\n";
            }
    });
    const auto p2 = out.csv("ideal_modes.csv", "t,wall,k,u2_re,u2_im,du2_re,du2_im,h2_re,h2_im,dh2_re,dh2_im",
                            [&](std::ostream& o) {
                                for (int n : steps)
                                    for (Wall w : {Wall::lower, Wall::upper}) {
                                        const WallTrace tr = os.trace(lat.time(n), w);
                                        for (std::size_t k = 0; k < tr.u2.size(); ++k)
                                            o << tr.t << ',' << to_string(w) << ',' << k << ',' << tr.u2[k].real()
                                              << ',' << tr.u2[k].imag() << ',' << tr.du2[k].real() << ','
                                              << tr.du2[k].imag() << ',' << tr.h2[k].real() << ',' << tr.h2[k].imag()
                                              << ',' << tr.dh2[k].real() << ',' << tr.dh2[k].imag() << "\n";
                                    }
                            });
    std::cout << p1.string() << "\n" << p2.string() << "\n";
    return kOk;
}

int cmd_correctors(const RunConfig& c, const Output& out) {
    const Scenario s = scenario_of(c, c.epsilon);
    const TimeLattice lat = make_lattice(c.scenario.horizon_T, c.knobs.dt);
    const auto steps = snapshot_steps(lat, c.knobs.snapshot_cadence);
    const BLGrid bl = build_bl_grid(c.knobs.z_max, c.knobs.nzb);
    OuterSolver os(s, c.knobs.nx);
    log("building wall traces");
    const TraceTable tt = build_trace_table(os, lat);
    log("marching correctors");
    CorrectorInputs in{&s, &tt, &bl, c.knobs.nx};
    const CorrectorSet cs = solve_correctors(in, c.order, steps);
    const auto p = out.csv("corrector_decay.csv", "t,wall,profile,k,weight,sup_weighted,argmax,l2_weighted_dZ",
                           [&](std::ostream& o) {
                               for (Wall w : {Wall::lower, Wall::upper}) {
                                   const WallCorrectors& wc = cs.at(w);
                                   for (std::size_t i = 0; i < wc.times.size(); ++i)
                                       for (int l = 0; l <= 2; ++l) {
                                           auto row = [&](const char* name, int k, const WeightedDecay& d) {
                                               o << wc.times[i] << ',' << to_string(w) << ',' << name << ',' << k << ','
                                                 << l << ',' << d.sup_weighted << ',' << d.argmax << ','
                                                 << d.l2_weighted_dz << "\n";
                                           };
                                           row("theta1", 0, weighted_decay_report<double>(wc.theta1[i], bl, l));
                                           row("h1", 0, weighted_decay_report<double>(wc.h1[i], bl, l));
                                           for (int k = 0; k < wc.theta2[i].nk(); ++k) {
                                               row("theta2", k, weighted_decay_report<cplx>(wc.theta2[i].mode(k), bl, l));
                                               row("h2", k, weighted_decay_report<cplx>(wc.h2[i].mode(k), bl, l));
                                               if (c.order == 1) {
                                                   row("theta2_1", k, weighted_decay_report<cplx>(wc.theta2_1[i].mode(k), bl, l));
                                                   row("h2_1", k, weighted_decay_report<cplx>(wc.h2_1[i].mode(k), bl, l));
                                               }
                                           }
                                       }
                               }
                           });
    std::cout << p.string() << "\n";
    if (cs.lower.decay_warning || cs.upper.decay_warning) log("warning: corrector tail above the decay threshold");
    return kOk;
}

int cmd_assemble(const RunConfig& c, const Output& out, bool emit_remainders) {
    log("assembling and cross-checking at check times");
    const CrossCheckRun run = run_crosscheck(c.scenario, c.knobs, c.epsilon, c.order, c.check_times);
    Scenario s = scenario_of(c, c.epsilon);
    const ChannelGrid g = build_channel_grid(c.knobs.nx, c.knobs.nz, c.knobs.stretch, s.length_L);
    const auto p = out.csv("residuals.csv", "t,equation,l2", [&](std::ostream& o) {
        for (const auto& r : run.residuals) {
            o << r.t << ",1," << norms(r.r1, g).l2 << "\n";
            o << r.t << ",2," << norms(r.r2, g).l2 << "\n";
            o << r.t << ",3," << norms(r.r3, g).l2 << "\n";
            o << r.t << ",4," << norms(r.r4, g).l2 << "\n";
        }
    });
    std::cout << p.string() << "\n";
    if (emit_remainders) {
        const auto p2 = out.csv("remainder_terms.csv", "t,term,equation,L2,exact_L2,discrepancy_L2,flagged,reason",
                                [&](std::ostream& o) {
                                    for (const auto& t : run.check.terms)
                                        o << t.t << ',' << t.name << ',' << t.equation << ',' << t.printed_l2 << ','
                                          << t.exact_l2 << ',' << t.difference_l2 << ',' << (t.flagged ? 1 : 0)
                                          << ",\"" << t.reason << "\"\n";
                                });
        const auto p3 = out.csv("remainder_equations.csv", "t,equation,residual_L2,gap_printed,gap_corrected",
                                [&](std::ostream& o) {
                                    for (const auto& e : run.check.equations)
                                        o << e.t << ',' << e.equation << ',' << e.residual_l2 << ',' << e.gap_printed
                                          << ',' << e.gap_exact << "\n";
                                });
        std::cout << p2.string() << "\n" << p3.string() << "\n";
    }
    log("worst relative gap: printed " + fmt_double(run.check.worst_gap(false)) + ", corrected " +
        fmt_double(run.check.worst_gap(true)));
    return kOk;
}

int cmd_solve(const RunConfig& c, const Output& out) {
    log("preparing shared context");
    const LabContext ctx = make_context(c.scenario, c.knobs);
    log("running case eps=" + fmt_double(c.epsilon));
    const CaseResult r = run_case(ctx, c.epsilon, c.order);
    for (const auto& w : r.warnings) log("warning: " + w);
    ErrorTable t;
    t.rows = r.rows;
    std::ofstream os;
    const auto p = out.open("errors.csv", os);
    write_error_csv(os, t, out.config);
    std::cout << p.string() << "\n";
    return kOk;
}

int cmd_rates(const RunConfig& c, const Output& out) {
    SweepSpec spec;
    spec.family = c.scenario.family;
    spec.bc_modes = c.bc_modes;
    spec.orders = c.orders;
    spec.epsilons = c.epsilons;
    spec.horizon_T = c.scenario.horizon_T;
    spec.knobs = c.knobs;
    spec.jobs = c.jobs;
    const ConvergenceReport rep = sweep(spec, log);
    std::ofstream os;
    const auto pcsv = out.open("errors.csv", os);
    write_error_csv(os, rep.table, out.config);
    os.close();
    std::ofstream js;
    const auto pjs = out.open("rates.json", js);
    js << report_json(rep, out.config).dump(2) << "\n";
    js.close();
    std::cout << pcsv.string() << "\n" << pjs.string() << "\n";
    for (const auto& r : rep.rates) {
        const std::string name =
            std::string(to_string(r.bc_mode)) + "_" + r.target + "_" + r.component + "_" + to_string(r.norm) + ".dat";
        std::ofstream g;
        const auto pg = out.open("fits/" + name, g);
        write_gnuplot(g, rep.table, r);
        std::cout << pg.string() << "\n";
        log(std::string(r.pass ? "pass " : "FAIL ") + to_string(r.bc_mode) + " " + r.target + "/" + r.component + "/" +
            to_string(r.norm) + " slope " + fmt_double(r.fit.slope) + " (theory " + fmt_double(r.theory) + ", R2 " +
            fmt_double(r.fit.r2) + ")");
    }
    for (const auto& n : rep.notes) log(n);
    if (!rep.complete) return kSolver;
    return rep.pass() ? kOk : kRateGate;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundary-layer expansion lab for plane-parallel MHD channel flow"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_dir;
    int jobs = 0;
    double eps_override = 0.0;
    app.add_option("-c,--config", config_path, "configuration file (TOML subset); defaults if omitted")
        ->check(CLI::ExistingFile);
    app.add_option("-o,--output-dir", out_dir, "artifact directory (overrides output_dir)");
    app.add_option("-j,--jobs", jobs, "maximum worker threads (overrides jobs)")->check(CLI::PositiveNumber);
    app.add_option("-e,--epsilon", eps_override, "epsilon for single-case commands (overrides epsilon)")
        ->check(CLI::PositiveNumber);

    auto* check = app.add_subcommand("check", "compatibility report of the scenario");
    auto* ideal = app.add_subcommand("ideal", "outer solution wall traces");
    auto* corr = app.add_subcommand("correctors", "boundary-layer correctors and their weighted decay");
    auto* assemble_cmd = app.add_subcommand("assemble", "approximate solution, residuals and remainder terms");
    bool emit_remainders = false;
    assemble_cmd->add_flag("--emit-remainders", emit_remainders, "write per-term remainder norms");
    auto* solve = app.add_subcommand("solve", "one viscous case against all targets");
    auto* rates = app.add_subcommand("rates", "epsilon sweep and convergence-rate report");
    auto* defaults = app.add_subcommand("defaults", "write the documented default configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInvalid;
    }
    const std::string sub = app.get_subcommands().front()->get_name();

    RunConfig cfg;
    try {
        std::string text;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            std::stringstream ss;
            ss << in.rdbuf();
            text = ss.str();
        }
        cfg = parse_config(text, sub);
    } catch (const ConfigErrors& e) {
        for (const auto& m : e.errors()) log("config error: " + m);
        return kInvalid;
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (jobs > 0) cfg.jobs = jobs;
    if (eps_override > 0.0) cfg.epsilon = eps_override;

    const Output out{cfg.output_dir, to_json(cfg)};
    try {
        if (*defaults) {
            std::ofstream os;
            const auto p = out.open("defaults.toml", os);
            os << defaults_toml();
            std::cout << p.string() << "\n";
            return kOk;
        }
        if (*check) return cmd_check(cfg, out);
        if (*ideal) return cmd_ideal(cfg, out);
        if (*corr) return cmd_correctors(cfg, out);
        if (*assemble_cmd) return cmd_assemble(cfg, out, emit_remainders);
        if (*solve) return cmd_solve(cfg, out);
        if (*rates) return cmd_rates(cfg, out);
    } catch (const ConfigError& e) {
        log(std::string("invalid input: ") + e.what());
        return kInvalid;
    } catch (const CompatibilityError& e) {
        log(std::string("invalid scenario: ") + e.what());
        return kInvalid;
    } catch (const std::exception& e) {
        log(std::string("solver failure: ") + e.what());
        return kSolver;
    }
    return kOk;
}
