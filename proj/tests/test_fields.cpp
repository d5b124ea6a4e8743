#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mhdbl/fields.hpp"

using namespace mhdbl;
namespace {

constexpr double pi = std::numbers::pi;

TEST(ChannelGrid, DegenerateUniform) {
    const ChannelGrid g = build_channel_grid(4, 3, 0.0, 2 * pi);
    ASSERT_EQ(g.nz(), 3);
    EXPECT_DOUBLE_EQ(g.z_nodes[0], 0.0);
    EXPECT_DOUBLE_EQ(g.z_nodes[1], 0.5);
    EXPECT_DOUBLE_EQ(g.z_nodes[2], 1.0);
}

TEST(ChannelGrid, TrapezoidWeightsOnUniformMesh) {
    const ChannelGrid g = build_channel_grid(16, 33, 0.0, 2 * pi);
    double sum = 0.0;
    for (int j = 0; j < g.nz(); ++j) {
        const double expect = (j == 0 || j == 32) ? 0.5 / 32 : 1.0 / 32;
        EXPECT_NEAR(g.z_weights[j], expect, 1e-15);
        sum += g.z_weights[j];
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
}

TEST(ChannelGrid, DefaultMeshResolvesSmallestLayer) {
    const ChannelGrid g = build_channel_grid(16, 2049, 0.995, 2 * pi);
    EXPECT_LE(g.min_spacing(), 1.25e-3);
    EXPECT_GE(g.nodes_within_layer(1e-4), 8);
}

TEST(ChannelGrid, RejectsInvalidInput) {
    EXPECT_THROW(build_channel_grid(5, 33, 0.0, 1.0), ConfigError);
    EXPECT_THROW(build_channel_grid(16, 32, 0.0, 1.0), ConfigError);
    EXPECT_THROW(build_channel_grid(16, 33, 1.0, 1.0), ConfigError);
    EXPECT_THROW(build_channel_grid(16, 33, -0.1, 1.0), ConfigError);
}

TEST(Modal, ConstantFieldHasOnlyMeanMode) {
    const ChannelGrid g = build_channel_grid(16, 5, 0.0, 2 * pi);
    const ModalField m = sample_modal(g, [](double, double) { return 3.5; });
    for (int j = 0; j < g.nz(); ++j) {
        EXPECT_NEAR(std::abs(m.at(0, j) - cplx(3.5)), 0.0, 1e-14);
        for (int k = 1; k < m.nk(); ++k) EXPECT_NEAR(std::abs(m.at(k, j)), 0.0, 1e-14);
    }
}

TEST(Modal, SineHasPlusMinusHalfI) {
    const ChannelGrid g = build_channel_grid(16, 5, 0.0, 3.0);
    const ModalField m = sample_modal(g, [&](double x, double) { return std::sin(2 * pi * x / 3.0); });
    EXPECT_NEAR(std::abs(m.coeff(1, 2) - cplx(0.0, -0.5)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(m.coeff(-1, 2) - cplx(0.0, 0.5)), 0.0, 1e-14);
    for (int k = 2; k < m.nk(); ++k) EXPECT_NEAR(std::abs(m.at(k, 2)), 0.0, 1e-14);
}

TEST(Modal, RandomRoundTrip) {
    std::mt19937_64 rng(20261016);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int nx : {4, 16, 64}) {
        PhysicalField p(nx, 9);
        for (double& v : p.data) v = U(rng);
        const ModalField m = to_modal(p);
        EXPECT_EQ(m.at(0, 3).imag(), 0.0);
        EXPECT_EQ(m.at(nx / 2, 3).imag(), 0.0);
        const PhysicalField back = from_modal(m);
        double err = 0.0;
        for (std::size_t i = 0; i < p.data.size(); ++i) err = std::max(err, std::abs(back.data[i] - p.data[i]));
        EXPECT_LT(err, 1e-12) << "nx=" << nx;
    }
}

TEST(Ddz, ExactOnQuadraticsOfGradedMesh) {
    const ChannelGrid g = build_channel_grid(4, 65, 0.9, 1.0);
    const Profile1D lin = sample_profile(g, [](double z) { return z; });
    const Profile1D quad = sample_profile(g, [](double z) { return z * z; });
    const Profile1D dl = ddz(lin, g), dq = ddz(quad, g);
    for (int j = 0; j < g.nz(); ++j) {
        EXPECT_NEAR(dl.values[j], 1.0, 1e-12);
        EXPECT_NEAR(dq.values[j], 2.0 * g.z_nodes[j], 1e-12);
    }
}

TEST(Ddz, SecondOrderSelfConvergence) {
    auto err = [](int nz) {
        const ChannelGrid g = build_channel_grid(4, nz, 0.0, 1.0);
        const Profile1D d = ddz(sample_profile(g, [](double z) { return std::sin(pi * z); }), g);
        double e = 0.0;
        for (int j = 0; j < g.nz(); ++j) e = std::max(e, std::abs(d.values[j] - pi * std::cos(pi * g.z_nodes[j])));
        return e;
    };
    const double e1 = err(129), e2 = err(257);
    EXPECT_LT(e1, 12.0 / (128.0 * 128.0));  // one-sided end rows: pi^3 h^2 / 3
    EXPECT_NEAR(e1 / e2, 4.0, 0.5);
}

TEST(Ddz, EvenProfileGivesOddDerivative) {
    const ChannelGrid g = build_channel_grid(4, 257, 0.8, 1.0);
    const Profile1D d = ddz(sample_profile(g, [](double z) { return std::cos(2 * pi * z) + (z - 0.5) * (z - 0.5); }), g);
    const int n = g.nz();
    for (int j = 0; j < n; ++j) EXPECT_NEAR(d.values[j], -d.values[n - 1 - j], 1e-9);
}

TEST(Norms, ConstantField) {
    const ChannelGrid g = build_channel_grid(16, 33, 0.7, 2 * pi);
    const Profile1D c = sample_profile(g, [](double) { return -2.0; });
    const NormTriple n = norms(c, g);
    EXPECT_NEAR(n.l2, 2.0 * std::sqrt(2 * pi), 1e-12);
    EXPECT_NEAR(n.linf, 2.0, 1e-15);
    EXPECT_NEAR(n.h1, n.l2, 1e-10);
}

TEST(Norms, SineSineClosedForm) {
    const ChannelGrid g = build_channel_grid(16, 4097, 0.0, 2 * pi);
    const ModalField m = sample_modal(g, [](double x, double z) { return std::sin(x) * std::sin(pi * z); });
    const NormTriple n = norms(m, g);
    EXPECT_NEAR(n.l2, std::sqrt(pi / 2), 1e-6);
    // brute-force quadrature in x and z
    double acc = 0.0;
    const PhysicalField p = from_modal(m);
    for (int j = 0; j < g.nz(); ++j)
        for (int i = 0; i < g.nx; ++i) acc += g.z_weights[j] * (2 * pi / g.nx) * p.at(i, j) * p.at(i, j);
    EXPECT_NEAR(n.l2, std::sqrt(acc), 1e-12);
    EXPECT_LE(n.l2, n.h1);
}

TEST(Norms, ZeroField) {
    const ChannelGrid g = build_channel_grid(8, 17, 0.5, 2 * pi);
    const NormTriple n = norms(ModalField(8, 17), g);
    EXPECT_EQ(n.l2, 0.0);
    EXPECT_EQ(n.h1, 0.0);
    EXPECT_EQ(n.linf, 0.0);
}

TEST(Norms, ModalMatchesPhysicalQuadratureForRandomFields) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const ChannelGrid g = build_channel_grid(16, 65, 0.9, 2 * pi);
    for (int trial = 0; trial < 5; ++trial) {
        PhysicalField p(g.nx, g.nz());
        for (double& v : p.data) v = U(rng);
        const ModalField m = to_modal(p);
        double acc = 0.0;
        for (int j = 0; j < g.nz(); ++j)
            for (int i = 0; i < g.nx; ++i) acc += g.z_weights[j] * (g.length_L / g.nx) * p.at(i, j) * p.at(i, j);
        EXPECT_NEAR(norms(m, g).l2, std::sqrt(acc), 1e-10 * std::sqrt(acc));
    }
}

TEST(Norms, InvariantUnderReversal) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const ChannelGrid g = build_channel_grid(8, 65, 0.95, 2 * pi);
    PhysicalField p(g.nx, g.nz()), r(g.nx, g.nz());
    for (int j = 0; j < g.nz(); ++j)
        for (int i = 0; i < g.nx; ++i) p.at(i, j) = r.at(i, g.nz() - 1 - j) = U(rng);
    const NormTriple a = norms(to_modal(p), g), b = norms(to_modal(r), g);
    EXPECT_NEAR(a.l2, b.l2, 1e-12 * a.l2);
    EXPECT_NEAR(a.h1, b.h1, 1e-12 * a.h1);
    EXPECT_NEAR(a.linf, b.linf, 1e-12);
}

TEST(Modal, DerivativesPreserveHermitianSymmetry) {
    const ChannelGrid g = build_channel_grid(8, 33, 0.5, 2 * pi);
    const ModalField m = sample_modal(g, [](double x, double z) { return std::cos(3 * x) * z + std::sin(x) * z * z; });
    for (const ModalField& d : {ddz(m, g), d2dz2(m, g)})
        for (int j = 0; j < g.nz(); ++j) {
            EXPECT_EQ(d.at(0, j).imag(), 0.0);
            EXPECT_EQ(d.at(4, j).imag(), 0.0);
        }
}

TEST(Halfline, ZeroProfile) {
    const BLGrid bl = build_bl_grid(12.0, 241);
    const std::vector<double> zero(bl.nzb, 0.0), q{0.0, 1.0, 5.5, 13.0};
    const HalflineValues v = interp_halfline(zero, bl, q);
    for (double x : v.values) EXPECT_EQ(x, 0.0);
    EXPECT_FALSE(v.decay_warning);
}

TEST(Halfline, ExponentialBeyondTruncationIsZero) {
    const BLGrid bl = build_bl_grid(12.0, 241);
    std::vector<double> e(bl.nzb);
    for (int j = 0; j < bl.nzb; ++j) e[j] = std::exp(-2.0 * bl.nodes[j]);
    const std::vector<double> q{13.0};
    const HalflineValues v = interp_halfline(e, bl, q);
    EXPECT_EQ(v.values[0], 0.0);
    EXPECT_FALSE(v.decay_warning);
}

TEST(Halfline, ReproducesLinears) {
    const BLGrid bl = build_bl_grid(12.0, 241);
    std::vector<double> z(bl.nodes.begin(), bl.nodes.end());
    const std::vector<double> q{3.14, 0.01, 11.97};
    const HalflineValues v = interp_halfline(z, bl, q);
    for (std::size_t i = 0; i < q.size(); ++i) EXPECT_NEAR(v.values[i], q[i], 1e-10);
    EXPECT_TRUE(v.decay_warning);
}

TEST(BLGrid, Constraints) {
    EXPECT_THROW(build_bl_grid(10.0, 1201), ConfigError);
    EXPECT_THROW(build_bl_grid(12.0, 200), ConfigError);
    EXPECT_NO_THROW(build_bl_grid(12.0, 241));
}

} // namespace
