#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mhdbl/lab.hpp"

using namespace mhdbl;
namespace {

NumericalKnobs tiny() {
    NumericalKnobs k;
    k.nx = 8;
    k.nz = 257;
    k.stretch = 0.9;
    k.dt = 1e-2;
    k.snapshot_cadence = 0.1;
    k.nzb = 241;
    return k;
}

TEST(FitRate, RecoversPowerLaw) {
    const std::vector<double> eps{1e-2, 3.16e-3, 1e-3, 3.16e-4, 1e-4};
    std::vector<double> err;
    for (double e : eps) err.push_back(3.0 * std::pow(e, 0.75));
    const RateFit f = fit_rate(eps, err);
    EXPECT_NEAR(f.slope, 0.75, 1e-12);
    EXPECT_NEAR(f.intercept, std::log(3.0), 1e-10);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    EXPECT_EQ(f.points, 5);
    EXPECT_TRUE(f.note.empty());
}

TEST(FitRate, LinearErrorGivesUnitSlope) {
    const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
    std::vector<double> err;
    for (double e : eps) err.push_back(3.0 * e);
    EXPECT_NEAR(fit_rate(eps, err).slope, 1.0, 1e-12);
}

TEST(FitRate, OscillationFailsTheGate) {
    const std::vector<double> eps{1e-2, 3.16e-3, 1e-3, 3.16e-4, 1e-4};
    const std::vector<double> err{1e-2, 1e-1, 1e-3, 1e-1, 1e-4};
    const RateFit f = fit_rate(eps, err);
    EXPECT_LT(f.r2, kR2Gate);
}

TEST(FitRate, Guards) {
    const std::vector<double> eps{1e-2, 1e-3};
    EXPECT_THROW(fit_rate(eps, eps), ConfigError);
    const std::vector<double> e4{1e-2, 1e-3, 1e-4, 1e-5}, z{1e-2, 0.0, 1e-4, 1e-5};
    const RateFit f = fit_rate(e4, z);
    EXPECT_EQ(f.points, 3);
    EXPECT_NE(f.note.find("excluded"), std::string::npos);
    const std::vector<double> zz{1e-2, 0.0, 0.0, 1e-5};
    EXPECT_THROW(fit_rate(e4, zz), ConfigError);
    EXPECT_THROW(fit_rate(e4, eps), DimensionError);
}

TEST(Sweep, EpsilonValidation) {
    EXPECT_THROW(validate_epsilons(std::vector<double>{1e-2}), ConfigError);
    EXPECT_THROW(validate_epsilons(std::vector<double>{1e-2, 1e-3, 3e-3, 1e-4}), ConfigError);
    EXPECT_THROW(validate_epsilons(std::vector<double>{1e-2, 8e-3, 6e-3, 4e-3}), ConfigError);
    EXPECT_NO_THROW(validate_epsilons(std::vector<double>{1e-2, 3.16e-3, 1e-3, 3.16e-4}));
    SweepSpec s;
    s.epsilons = {1e-2};
    EXPECT_THROW(sweep(s), ConfigError);
}

TEST(Expectations, TargetsAndTolerances) {
    EXPECT_EQ(expectations(0).size(), 10u);
    EXPECT_EQ(expectations(1).size(), 13u);
    for (const auto& e : expectations(1)) {
        EXPECT_EQ(e.tolerance, e.target == "ideal" ? kIdealSlopeTol : kSlopeTol);
    }
    EXPECT_EQ(case_order(BcMode::conducting, std::vector<int>{0, 1}), 0);
    EXPECT_EQ(case_order(BcMode::dirichlet, std::vector<int>{0, 1}), 1);
    EXPECT_EQ(case_order(BcMode::dirichlet, std::vector<int>{0}), 0);
}

TEST(RunCase, DeterministicAndComplete) {
    ScenarioParams p;
    p.bc_mode = BcMode::dirichlet;
    p.horizon_T = 0.3;
    const LabContext ctx = make_context(p, tiny());
    const CaseResult a = run_case(ctx, 1e-2, 1), b = run_case(ctx, 1e-2, 1);
    ASSERT_EQ(a.rows.size(), 4u * 5u * 3u);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].value, b.rows[i].value);
        EXPECT_TRUE(std::isfinite(a.rows[i].value));
        EXPECT_GE(a.rows[i].value, 0.0);
    }
    ErrorTable t{a.rows};
    // The boundary-layer corrector must beat the bare outer solution near the walls.
    EXPECT_LT(t.value(BcMode::dirichlet, "approx0", "all", NormKind::linf, 1e-2),
              t.value(BcMode::dirichlet, "ideal", "all", NormKind::linf, 1e-2));
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
    SweepSpec s;
    s.bc_modes = {BcMode::conducting};
    s.orders = {0};
    s.epsilons = {1e-1, 3e-2, 1e-2, 3e-3};
    s.horizon_T = 0.2;
    s.knobs = tiny();
    s.jobs = 1;
    const ConvergenceReport a = sweep(s);
    s.jobs = 2;
    const ConvergenceReport b = sweep(s);
    ASSERT_TRUE(a.complete);
    ASSERT_EQ(a.table.rows.size(), b.table.rows.size());
    for (std::size_t i = 0; i < a.table.rows.size(); ++i) EXPECT_EQ(a.table.rows[i].value, b.table.rows[i].value);
    EXPECT_EQ(a.rates.size(), expectations(0).size());

    std::ostringstream csv;
    write_error_csv(csv, a.table, {{"k", 1}});
    const std::string text = csv.str();
    EXPECT_EQ(text.rfind("# config: {\"k\":1}\nepsilon,bc_mode,target,component,norm,value,warnings\n", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(2 + a.table.rows.size()));

    const nlohmann::json j = report_json(a, {});
    EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
    EXPECT_EQ(j["rates"].size(), a.rates.size());
    EXPECT_EQ(j["errors"].size(), a.table.rows.size());
    EXPECT_EQ(j["pass"], a.pass());
    EXPECT_DOUBLE_EQ(j["rates"][0]["slope"].get<double>(), a.rates[0].fit.slope);

    std::ostringstream gp;
    write_gnuplot(gp, a.table, a.rates[0]);
    std::istringstream in(gp.str());
    std::string header, line;
    std::getline(in, header);
    EXPECT_NE(header.find("slope="), std::string::npos);
    int n = 0;
    double x, y;
    while (in >> x >> y) ++n;
    EXPECT_EQ(n, 4);
}

TEST(Emitters, ShortestRoundTripNumbers) {
    EXPECT_EQ(fmt_double(0.1), "0.1");
    EXPECT_EQ(fmt_double(3.16e-4), "0.000316");
    EXPECT_EQ(std::stod(fmt_double(1.0 / 3.0)), 1.0 / 3.0);
}

} // namespace
