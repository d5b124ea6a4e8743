#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mhdbl/prandtl.hpp"

using namespace mhdbl;
namespace {

constexpr double pi = std::numbers::pi;

std::vector<int> every_step(const TimeLattice& lat) {
    std::vector<int> s(lat.steps + 1);
    for (int n = 0; n <= lat.steps; ++n) s[n] = n;
    return s;
}

// Quiet channel: no outer tangential field and no forcing; callers add the
// wall data they need.
Scenario quiet(BcMode mode) {
    Scenario s;
    s.bc_mode = mode;
    s.a = [](double) { return 2.0; };
    s.c = [](double) { return 1.0; };
    s.b = [](double, double) { return 0.0; };
    s.d = [](double, double) { return 0.0; };
    s.f1 = [](double, double) { return 0.0; };
    for (int i = 0; i < 2; ++i) {
        s.alpha1[i] = [](double) { return 2.0; };
        s.alpha2[i] = [](double, double) { return 0.0; };
        s.gamma1[i] = [](double) { return 1.0; };
        s.gamma2[i] = [](double, double) { return 0.0; };
    }
    return s;
}

struct CorrectorRun {
    Scenario s;
    BLGrid bl;
    TraceTable tt;
    CorrectorSet cs;
};

CorrectorRun run_correctors(Scenario s, int nx, double T, double dt, int nzb, int order = 0) {
    CorrectorRun r{std::move(s), build_bl_grid(12.0, nzb), {}, {}};
    const TimeLattice lat = make_lattice(T, dt);
    r.tt = build_trace_table(OuterSolver(r.s, nx), lat);
    const auto steps = snapshot_steps(lat, T / 4);
    CorrectorInputs in{&r.s, &r.tt, &r.bl, nx};
    r.cs = solve_correctors(in, order, steps);
    return r;
}

TEST(HeatHalfline, ZeroDataGivesZero) {
    const BLGrid bl = build_bl_grid(12.0, 241);
    const TimeLattice lat = make_lattice(0.5, 1e-2);
    const auto steps = every_step(lat);
    for (BcKind kind : {BcKind::dirichlet, BcKind::neumann}) {
        const ProfileSeries p = solve_heat_halfline(kind, [](double) { return 0.0; }, bl, lat, steps);
        ASSERT_EQ(p.values.size(), steps.size());
        for (const auto& v : p.values)
            for (double x : v) EXPECT_EQ(x, 0.0);
    }
}

TEST(HeatHalfline, RejectsIncompatibleStep) {
    const BLGrid bl = build_bl_grid(12.0, 241);
    const TimeLattice lat = make_lattice(0.1, 1e-2);
    const auto steps = every_step(lat);
    EXPECT_THROW(solve_heat_halfline(BcKind::dirichlet, [](double) { return 1.0; }, bl, lat, steps),
                 CompatibilityError);
}

TEST(HeatHalfline, ErfcSimilaritySolution) {
    const BLGrid bl = build_bl_grid(12.0, 1201);
    const double t0 = 1e-6;
    TimeLattice lat{t0, 1e-3, 1000};
    HeatOptions opt;
    opt.enforce_compatibility = false;
    opt.initial.resize(bl.nzb);
    for (int j = 0; j < bl.nzb; ++j) opt.initial[j] = std::erfc(bl.nodes[j] / (2.0 * std::sqrt(t0)));
    const std::vector<int> rec{lat.steps};
    const ProfileSeries p = solve_heat_halfline(BcKind::dirichlet, [](double) { return 1.0; }, bl, lat, rec, opt);
    const double t = p.times[0];
    double err = 0.0;
    for (int j = 0; j < bl.nzb; ++j)
        err = std::max(err, std::abs(p.values[0][j] - std::erfc(bl.nodes[j] / (2.0 * std::sqrt(t)))));
    EXPECT_LE(err, 2e-4);
}

TEST(Correctors, NoMismatchNoCorrector) {
    const CorrectorRun r = run_correctors(quiet(BcMode::dirichlet), 8, 0.2, 1e-2, 241, 1);
    for (Wall w : {Wall::lower, Wall::upper}) {
        const WallCorrectors& wc = r.cs.at(w);
        for (std::size_t s = 0; s < wc.times.size(); ++s) {
            for (double v : wc.theta1[s]) EXPECT_EQ(v, 0.0);
            for (double v : wc.h1[s]) EXPECT_EQ(v, 0.0);
            for (auto v : wc.theta2[s].coeffs) EXPECT_EQ(v, cplx(0.0));
            for (auto v : wc.h2[s].coeffs) EXPECT_EQ(v, cplx(0.0));
            for (auto v : wc.theta2_1[s].coeffs) EXPECT_EQ(v, cplx(0.0));
        }
    }
}

TEST(Correctors, MeanModeReducesToHeat) {
    Scenario s = quiet(BcMode::conducting);
    auto g = [](double t) { return 0.7 * (1.0 - std::exp(-t)); };
    s.alpha2[0] = [g](double t, double x) { return g(t) * (1.0 + std::sin(x)); };
    const double T = 0.5, dt = 5e-3;
    const CorrectorRun r = run_correctors(s, 8, T, dt, 241);
    const TimeLattice lat = make_lattice(T, dt);
    const auto steps = snapshot_steps(lat, T / 4);
    const ProfileSeries heat = solve_heat_halfline(BcKind::dirichlet, g, r.bl, lat, steps);
    const WallCorrectors& wc = r.cs.lower;
    for (std::size_t i = 0; i < steps.size(); ++i)
        for (int j = 0; j < r.bl.nzb; ++j) {
            EXPECT_NEAR(std::abs(wc.theta2[i].at(0, j) - heat.values[i][j]), 0.0, 1e-10);
            EXPECT_NEAR(std::abs(wc.h2[i].at(0, j)), 0.0, 1e-10);
        }
}

TEST(Correctors, PhaseFactorOracle) {
    Scenario s = quiet(BcMode::conducting);
    const double U = 1.5;
    s.a = [U](double) { return U; };
    s.c = [](double z) { return std::pow(std::sin(pi * z), 2); };
    for (int i = 0; i < 2; ++i) s.alpha1[i] = [U](double) { return U; };
    s.alpha2[0] = [](double t, double x) { return (1.0 - std::exp(-t)) * std::sin(x); };
    const double T = 1.0, dt = 1e-3;
    const CorrectorRun r = run_correctors(s, 8, T, dt, 1201);
    const TimeLattice lat = make_lattice(T, dt);
    const auto steps = snapshot_steps(lat, T / 4);
    // sin x has mode-1 coefficient -i/2; k = 1 since L = 2 pi.
    const cplx c1(0.0, -0.5);
    auto data = [&](double t, bool imag) {
        const cplx v = std::polar(1.0, U * t) * c1 * (1.0 - std::exp(-t));
        return imag ? v.imag() : v.real();
    };
    const ProfileSeries re = solve_heat_halfline(BcKind::dirichlet, [&](double t) { return data(t, false); }, r.bl, lat, steps);
    const ProfileSeries im = solve_heat_halfline(BcKind::dirichlet, [&](double t) { return data(t, true); }, r.bl, lat, steps);
    double err = 0.0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const cplx ph = std::polar(1.0, -U * lat.time(steps[i]));
        for (int j = 0; j < r.bl.nzb; ++j)
            err = std::max(err, std::abs(r.cs.lower.theta2[i].at(1, j) - ph * cplx(re.values[i][j], im.values[i][j])));
    }
    EXPECT_LE(err, 2e-4);
}

TEST(Correctors, WallConditionsHold) {
    for (BcMode mode : {BcMode::conducting, BcMode::dirichlet}) {
        ScenarioParams p;
        p.bc_mode = mode;
        const CorrectorRun r = run_correctors(make_scenario(p, 1e-2), 8, 0.4, 2e-3, 241);
        for (Wall w : {Wall::lower, Wall::upper}) {
            const WallCorrectors& wc = r.cs.at(w);
            EXPECT_FALSE(wc.decay_warning);
            for (std::size_t s = 0; s < wc.times.size(); ++s) {
                EXPECT_DOUBLE_EQ(wc.theta1[s][0], wc.mismatch_theta1[s]);
                for (int k = 0; k < wc.h2[s].nk(); ++k) {
                    auto h = wc.h2[s].mode(k);
                    if (mode == BcMode::conducting) {
                        const auto& e = r.bl.stencil.d1[0].w;
                        const cplx slope = e[0] * h[0] + e[1] * h[1] + e[2] * h[2];
                        EXPECT_NEAR(std::abs(slope), 0.0, 1e-12);
                    }
                }
                if (mode == BcMode::dirichlet) {
                    EXPECT_DOUBLE_EQ(wc.h1[s][0], wc.mismatch_h1[s]);
                }
                if (s == 0) {
                    for (auto v : wc.theta2[s].coeffs) EXPECT_EQ(v, cplx(0.0));
                }
            }
        }
    }
}

TEST(Correctors, DirichletWallValueEqualsMismatch) {
    ScenarioParams p;
    p.bc_mode = BcMode::dirichlet;
    const Scenario s = make_scenario(p, 1e-2);
    const CorrectorRun r = run_correctors(s, 8, 0.4, 2e-3, 241);
    const WallCorrectors& wc = r.cs.lower;
    const TimeLattice& lat = r.tt.lattice;
    for (std::size_t i = 0; i < wc.times.size(); ++i) {
        const int n = wc.steps[i];
        std::vector<double> xs(8);
        for (int q = 0; q < 8; ++q) xs[q] = s.gamma2[0](lat.time(n), s.length_L * q / 8);
        std::vector<cplx> gh(5);
        forward_fft(xs, gh);
        for (int k = 0; k < 5; ++k)
            EXPECT_NEAR(std::abs(wc.h2[i].at(k, 0) - (gh[k] - r.tt.at(n, Wall::lower).h2[k])), 0.0, 1e-14);
    }
}

TEST(Correctors, ModesDoNotInteract) {
    const Scenario s = make_scenario("default-dirichlet", 1e-2);
    const CorrectorRun a = run_correctors(s, 16, 0.3, 5e-3, 241, 1);
    const CorrectorRun b = run_correctors(s, 32, 0.3, 5e-3, 241, 1);
    for (std::size_t i = 0; i < a.cs.lower.times.size(); ++i)
        for (int k = 0; k < 9; ++k)
            for (int j = 0; j < a.bl.nzb; ++j) {
                EXPECT_NEAR(std::abs(a.cs.lower.theta2[i].at(k, j) - b.cs.lower.theta2[i].at(k, j)), 0.0, 1e-12);
                EXPECT_NEAR(std::abs(a.cs.upper.h2_1[i].at(k, j) - b.cs.upper.h2_1[i].at(k, j)), 0.0, 1e-12);
            }
}

TEST(Correctors, MirrorSymmetricDataGiveEqualWalls) {
    Scenario s;
    s.bc_mode = BcMode::conducting;
    s.a = [](double z) { return 2.0 + std::sin(pi * z); };
    s.c = [](double z) { return 1.0 + 0.5 * std::cos(2 * pi * z); };
    s.b = [](double x, double z) { return std::cos(x) * std::pow(std::sin(pi * z), 2); };
    s.d = [](double x, double z) { return std::sin(x) * std::cos(2 * pi * z); };
    s.f1 = [](double t, double z) { return std::sin(t) * std::cos(2 * pi * z); };
    for (int i = 0; i < 2; ++i) {
        s.alpha1[i] = [](double t) { return 2.0 + 0.3 * t * t; };
        s.alpha2[i] = [](double t, double x) { return (1.0 - std::exp(-t)) * std::cos(x); };
    }
    const CorrectorRun r = run_correctors(s, 8, 0.4, 4e-3, 241);
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < r.cs.lower.times.size(); ++i) {
        for (int j = 0; j < r.bl.nzb; ++j) {
            scale = std::max(scale, std::abs(r.cs.lower.theta1[i][j]));
            diff = std::max(diff, std::abs(r.cs.lower.theta1[i][j] - r.cs.upper.theta1[i][j]));
        }
        for (std::size_t q = 0; q < r.cs.lower.theta2[i].coeffs.size(); ++q) {
            scale = std::max(scale, std::abs(r.cs.lower.h2[i].coeffs[q]));
            diff = std::max(diff, std::abs(r.cs.lower.theta2[i].coeffs[q] - r.cs.upper.theta2[i].coeffs[q]));
            diff = std::max(diff, std::abs(r.cs.lower.h2[i].coeffs[q] - r.cs.upper.h2[i].coeffs[q]));
        }
    }
    EXPECT_GT(scale, 1e-3);
    EXPECT_LE(diff, 1e-9 * scale);
}

TEST(Correctors, SecondOrderSelfConvergence) {
    const Scenario s = make_scenario("default-dirichlet", 1e-2);
    const double T = 0.48;
    std::vector<CorrectorRun> runs;
    runs.push_back(run_correctors(s, 8, T, 1e-2, 241));
    runs.push_back(run_correctors(s, 8, T, 5e-3, 481));
    runs.push_back(run_correctors(s, 8, T, 2.5e-3, 961));
    // Compare at the final time on the coarse nodes.
    auto change = [&](const CorrectorRun& c, const CorrectorRun& f) {
        const int stride = (f.bl.nzb - 1) / (c.bl.nzb - 1);
        const std::size_t last = c.cs.lower.times.size() - 1;
        double m = 0.0;
        for (int j = 0; j < c.bl.nzb; ++j) {
            m = std::max(m, std::abs(c.cs.lower.theta2[last].at(1, j) - f.cs.lower.theta2[last].at(1, j * stride)));
            m = std::max(m, std::abs(c.cs.lower.h2[last].at(1, j) - f.cs.lower.h2[last].at(1, j * stride)));
        }
        return m;
    };
    const double d1 = change(runs[0], runs[1]), d2 = change(runs[1], runs[2]);
    EXPECT_GT(d1, 0.0);
    EXPECT_NEAR(d1 / d2, 4.0, 0.6);
}

TEST(Correctors, FirstOrderNeedsDirichletMode) {
    const Scenario s = make_scenario("default-conducting", 1e-2);
    const BLGrid bl = build_bl_grid(12.0, 241);
    const TimeLattice lat = make_lattice(0.1, 1e-2);
    const TraceTable tt = build_trace_table(OuterSolver(s, 8), lat);
    CorrectorInputs in{&s, &tt, &bl, 8};
    const std::vector<int> steps{0, 10};
    EXPECT_THROW(solve_correctors(in, 1, steps), ConfigError);
}

TEST(Correctors, FirstOrderTrivialComponents) {
    const BLGrid bl = build_bl_grid(12.0, 241);
    const TrivialComponents t = first_order_trivial_components(bl);
    for (const auto* v : {&t.theta1_1, &t.h1_1, &t.theta1_1_upper, &t.h1_1_upper}) {
        ASSERT_EQ(static_cast<int>(v->size()), bl.nzb);
        for (double x : *v) EXPECT_EQ(x, 0.0);
    }
}

TEST(WeightedDecay, ZeroProfile) {
    const BLGrid bl = build_bl_grid(12.0, 241);
    const std::vector<double> z(bl.nzb, 0.0);
    for (int l = 0; l <= 2; ++l) {
        const WeightedDecay d = weighted_decay_report<double>(z, bl, l);
        EXPECT_EQ(d.sup_weighted, 0.0);
        EXPECT_EQ(d.l2_weighted_dz, 0.0);
    }
    EXPECT_THROW(weighted_decay_report<double>(z, bl, 3), ConfigError);
}

TEST(WeightedDecay, ExponentialAgainstDenseSampling) {
    const BLGrid bl = build_bl_grid(12.0, 1201);
    std::vector<double> e(bl.nzb);
    for (int j = 0; j < bl.nzb; ++j) e[j] = std::exp(-bl.nodes[j]);
    const WeightedDecay d = weighted_decay_report<double>(e, bl, 2);
    double dense = 0.0;
    for (int i = 0; i <= 1200000; ++i) {
        const double Z = 12.0 * i / 1200000.0;
        dense = std::max(dense, (1.0 + Z * Z) * std::exp(-Z));
    }
    EXPECT_NEAR(d.sup_weighted, dense, 1e-3);
    // (1+Z^2) e^-Z has derivative -(Z-1)^2 e^-Z, so the sup sits at the wall.
    EXPECT_NEAR(d.sup_weighted, 1.0, 1e-12);
    EXPECT_EQ(d.argmax, 0.0);
}

TEST(WeightedDecay, InteriorMaximum) {
    const BLGrid bl = build_bl_grid(12.0, 1201);
    std::vector<double> e(bl.nzb);
    for (int j = 0; j < bl.nzb; ++j) e[j] = bl.nodes[j] * std::exp(-bl.nodes[j] * bl.nodes[j] / 4.0);
    const WeightedDecay d = weighted_decay_report<double>(e, bl, 2);
    EXPECT_TRUE(std::isfinite(d.sup_weighted));
    EXPECT_TRUE(std::isfinite(d.l2_weighted_dz));
    EXPECT_GT(d.argmax, 0.0);
    EXPECT_LT(d.argmax, 12.0);
    EXPECT_FALSE(decay_violated<double>(e));
}

} // namespace
