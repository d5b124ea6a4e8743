#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mhdbl/crank_nicolson.hpp"
#include "mhdbl/fields.hpp"
#include "mhdbl/prandtl.hpp"
#include "mhdbl/quadrature.hpp"
#include "mhdbl/scenario.hpp"

namespace mhdbl {

// ---------------------------------------------------------------- compatibility

struct CompatRow {
    std::string condition;
    int wall = 0;
    int order = 0;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

struct CompatReport {
    std::vector<CompatRow> rows;
    bool pass(int max_order) const {
        for (const auto& r : rows)
            if (r.order <= max_order && !r.pass) return false;
        return true;
    }
};

inline CompatReport check_compatibility(const Scenario& s, int order, double eps) {
    CompatReport rep;
    const int nxs = s.knobs.nx;
    auto xs = [&](int i) { return s.length_L * i / nxs; };
    auto add = [&](const std::string& name, int wall, int ord, double res) {
        const double tol = ord == 0 ? 1e-10 : 1e-8;
        rep.rows.push_back({name, wall, ord, res, tol, std::abs(res) <= tol});
    };
    auto dx = [](const std::function<double(double)>& f, double x, int m) { return derivative(f, x, m); };
    auto f2 = [&](double t, double x, double z) { return s.f2_at(t, x, z); };

    for (int i = 0; i < 2; ++i) {
        const double zi = i;
        add("alpha1(0) = a(i)", i, 0, s.alpha1[i](0.0) - s.a(zi));
        double r = 0.0;
        for (int k = 0; k < nxs; ++k) r = std::max(r, std::abs(s.alpha2[i](0.0, xs(k)) - s.b(xs(k), zi)));
        add("alpha2(0,x) = b(x,i)", i, 0, r);
        if (s.bc_mode == BcMode::conducting) {
            add("dz c(i) = 0", i, 0, derivative(s.c, zi, 1));
            r = 0.0;
            for (int k = 0; k < nxs; ++k)
                r = std::max(r, std::abs(derivative([&](double z) { return s.d(xs(k), z); }, zi, 1)));
            add("dz d(x,i) = 0", i, 0, r);
        } else {
            add("gamma1(0) = c(i)", i, 0, s.gamma1[i](0.0) - s.c(zi));
            r = 0.0;
            for (int k = 0; k < nxs; ++k) r = std::max(r, std::abs(s.gamma2[i](0.0, xs(k)) - s.d(xs(k), zi)));
            add("gamma2(0,x) = d(x,i)", i, 0, r);
        }
        if (order < 1) continue;

        add("dt alpha1(0) - eps a''(i) - f1(0,i)", i, 1,
            derivative(s.alpha1[i], 0.0, 1) - eps * derivative(s.a, zi, 2) - s.f1(0.0, zi));
        // Laplacian and x-derivatives at (x, i) of a field g(x, z).
        auto lap = [&](const Fxz& g, double x) {
            return dx([&](double xx) { return g(xx, zi); }, x, 2) + derivative([&](double z) { return g(x, z); }, zi, 2);
        };
        auto gx = [&](const Fxz& g, double x, double z) { return dx([&](double xx) { return g(xx, z); }, x, 1); };
        r = 0.0;
        for (int k = 0; k < nxs; ++k) {
            const double x = xs(k);
            const double v = derivative([&](double t) { return s.alpha2[i](t, x); }, 0.0, 1) - eps * lap(s.b, x) +
                             s.a(zi) * gx(s.b, x, zi) - s.c(zi) * gx(s.d, x, zi) - f2(0.0, x, zi);
            r = std::max(r, std::abs(v));
        }
        add("dt alpha2(0,x) - eps lap b + a dx b - c dx d - f2(0,x,i)", i, 1, r);
        if (s.bc_mode == BcMode::conducting) {
            add("-eps dzzz c(i)", i, 1, -eps * derivative(s.c, zi, 3));
            r = 0.0;
            for (int k = 0; k < nxs; ++k) {
                const double x = xs(k);
                auto dzd = [&](double xx, double z) { return derivative([&](double zz) { return s.d(xx, zz); }, z, 1); };
                const double lap_dzd = dx([&](double xx) { return dzd(xx, zi); }, x, 2) + derivative([&](double z) { return s.d(x, z); }, zi, 3);
                const double flux = derivative(
                    [&](double z) { return s.a(z) * gx(s.d, x, z) - s.c(z) * gx(s.b, x, z); }, zi, 1);
                r = std::max(r, std::abs(-eps * lap_dzd + flux));
            }
            add("-eps lap dz d + dz(a dx d - c dx b)", i, 1, r);
        } else {
            add("dt gamma1(0) - eps c''(i)", i, 1, derivative(s.gamma1[i], 0.0, 1) - eps * derivative(s.c, zi, 2));
            r = 0.0;
            for (int k = 0; k < nxs; ++k) {
                const double x = xs(k);
                const double v = derivative([&](double t) { return s.gamma2[i](t, x); }, 0.0, 1) - eps * lap(s.d, x) +
                                 s.a(zi) * gx(s.d, x, zi) - s.c(zi) * gx(s.b, x, zi);
                r = std::max(r, std::abs(v));
            }
            add("dt gamma2(0,x) - eps lap d + a dx d - c dx b", i, 1, r);
        }
    }
    return rep;
}

// ---------------------------------------------------------------- axial

struct AxialWallData {
    BcKind kind = BcKind::dirichlet;
    std::function<double(double)> value;  // Dirichlet value or d/dz slope at time t
};

// u_t = eps u_zz + f on the channel grid.
inline std::vector<Profile1D> solve_axial(double eps, const Profile1D& initial, const AxialWallData& lower,
                                          const AxialWallData& upper, const std::function<double(double, double)>& f,
                                          const ChannelGrid& g, const TimeLattice& lat, std::span<const int> record) {
    if (!(lat.dt > 0.0)) throw ConfigError("dt must be positive");
    if (static_cast<int>(initial.values.size()) != g.nz()) throw DimensionError("initial profile does not match grid");
    ScalarCrankNicolson cn(g.stencil, eps);
    std::vector<double> u = initial.values;
    std::vector<double> s0, s1;
    if (f) {
        s0.resize(g.nz());
        s1.resize(g.nz());
    }
    std::vector<Profile1D> out;
    std::size_t next = 0;
    auto rec = [&](int n) {
        while (next < record.size() && record[next] == n) {
            out.push_back({u, lat.time(n)});
            ++next;
        }
    };
    rec(0);
    for (int n = 0; n < lat.steps; ++n) {
        const double t1 = lat.time(n + 1);
        if (f)
            for (int j = 0; j < g.nz(); ++j) {
                s0[j] = f(lat.time(n), g.z_nodes[j]);
                s1[j] = f(t1, g.z_nodes[j]);
            }
        cn.step(u, lat.dt, {lower.kind, lower.value ? lower.value(t1) : 0.0},
                {upper.kind, upper.value ? upper.value(t1) : 0.0}, s0, s1);
        rec(n + 1);
    }
    return out;
}

// ---------------------------------------------------------------- tangential

struct ViscousState {
    Profile1D u1, h1;
    ModalField u2, h2;
    double time = 0.0;
};

struct ViscousRun {
    double epsilon = 0.0;
    BcMode bc_mode = BcMode::conducting;
    std::vector<int> steps;
    std::vector<ViscousState> states;
    std::vector<std::string> warnings;
};

using StepObserver =
    std::function<void(int step, const std::vector<std::vector<cplx>>& u2, const std::vector<std::vector<cplx>>& h2)>;

// Advances all Fourier modes of (u2, H2) one step; u1, H1 are given at the
// half step. Optional sources are evaluated on the grid.
class TangentialStepper {
public:
    TangentialStepper(double eps, const Scenario& s, const ChannelGrid& g)
        : eps_(eps), s_(s), g_(g), nk_(g.nk()), cn_(g.stencil, eps) {
        u2_.assign(nk_, std::vector<cplx>(g.nz()));
        h2_.assign(nk_, std::vector<cplx>(g.nz()));
        ModalField b = sample_modal(g, s.b), d = sample_modal(g, s.d);
        for (int k = 0; k < nk_; ++k)
            for (int j = 0; j < g.nz(); ++j) {
                u2_[k][j] = b.at(k, j);
                h2_[k][j] = d.at(k, j);
            }
        have_src_ = static_cast<bool>(s.f2) || static_cast<bool>(s.g2);
    }

    // Advances from t0 to t1; wall data and sources are read at exactly these times.
    void step(double t0, double t1, std::span<const double> u1_mid, std::span<const double> h1_mid) {
        const double dt = t1 - t0;
        const int nz = g_.nz();
        std::vector<cplx> a_lo = wall_modes(s_.alpha2[0], t1), a_up = wall_modes(s_.alpha2[1], t1);
        std::vector<cplx> g_lo(nk_, 0.0), g_up(nk_, 0.0);
        const bool dir = s_.bc_mode == BcMode::dirichlet;
        if (dir) {
            g_lo = wall_modes(s_.gamma2[0], t1);
            g_up = wall_modes(s_.gamma2[1], t1);
        }
        if (have_src_) {
            if (src_next_t_ != t0) src_now_ = sources(t0);
            else src_now_ = std::move(src_next_);
            src_next_ = sources(t1);
            src_next_t_ = t1;
        }
        for (int k = 0; k < nk_; ++k) {
            const double kt = g_.wavenumber(k);
            PairEnd lo, up;
            lo.value[0] = a_lo[k];
            up.value[0] = a_up[k];
            if (dir) {
                lo.value[1] = g_lo[k];
                up.value[1] = g_up[k];
            } else {
                lo.kind[1] = BcKind::neumann;
                up.kind[1] = BcKind::neumann;
            }
            PairCrankNicolson::Source src;
            if (have_src_) {
                src.p_n = std::span<const cplx>(src_now_[0].data() + static_cast<std::size_t>(k) * nz, nz);
                src.m_n = std::span<const cplx>(src_now_[1].data() + static_cast<std::size_t>(k) * nz, nz);
                src.p_np1 = std::span<const cplx>(src_next_[0].data() + static_cast<std::size_t>(k) * nz, nz);
                src.m_np1 = std::span<const cplx>(src_next_[1].data() + static_cast<std::size_t>(k) * nz, nz);
            }
            cn_.step(u2_[k], h2_[k], dt, kt, eps_ * kt * kt, u1_mid, h1_mid, lo, up, src);
        }
    }

    const std::vector<std::vector<cplx>>& u2() const { return u2_; }
    const std::vector<std::vector<cplx>>& h2() const { return h2_; }

    ModalField snapshot(const std::vector<std::vector<cplx>>& v, double t) const {
        ModalField m(g_.nx, g_.nz(), t);
        for (int k = 0; k < nk_; ++k)
            for (int j = 0; j < g_.nz(); ++j) m.at(k, j) = v[k][j];
        m.enforce_hermitian();
        return m;
    }

private:
    std::vector<cplx> wall_modes(const std::function<double(double, double)>& f, double t) const {
        return detail::data_modes(f, t, g_.nx, g_.length_L);
    }

    std::array<std::vector<cplx>, 2> sources(double t) const {
        std::array<std::vector<cplx>, 2> out;
        auto fill = [&](const Ftxz& f, std::vector<cplx>& dst) {
            dst.assign(static_cast<std::size_t>(nk_) * g_.nz(), 0.0);
            if (!f) return;
            ModalField m = sample_modal(g_, [&](double x, double z) { return f(t, x, z); });
            dst = m.coeffs;
        };
        fill(s_.f2, out[0]);
        fill(s_.g2, out[1]);
        return out;
    }

    double eps_;
    const Scenario& s_;
    const ChannelGrid& g_;
    int nk_;
    PairCrankNicolson cn_;
    std::vector<std::vector<cplx>> u2_, h2_;
    bool have_src_ = false;
    std::array<std::vector<cplx>, 2> src_now_, src_next_;
    double src_next_t_ = -1.0;
};

// Tangential solve driven by given axial fields: coeffs(n) returns u1 and H1
// at the midpoint of step n -> n+1.
inline std::pair<std::vector<ModalField>, std::vector<ModalField>> solve_tangential_viscous(
    double eps, const Scenario& s, const std::function<std::pair<std::vector<double>, std::vector<double>>(int)>& coeffs,
    const ChannelGrid& g, const TimeLattice& lat, std::span<const int> record, const StepObserver& observer = {}) {
    TangentialStepper st(eps, s, g);
    std::vector<ModalField> u2s, h2s;
    std::size_t next = 0;
    auto rec = [&](int n) {
        while (next < record.size() && record[next] == n) {
            u2s.push_back(st.snapshot(st.u2(), lat.time(n)));
            h2s.push_back(st.snapshot(st.h2(), lat.time(n)));
            ++next;
        }
    };
    rec(0);
    for (int n = 0; n < lat.steps; ++n) {
        auto [u1m, h1m] = coeffs(n);
        if (static_cast<int>(u1m.size()) != g.nz() || static_cast<int>(h1m.size()) != g.nz())
            throw DimensionError("coefficient profiles do not match grid");
        for (int j = 0; j < g.nz(); ++j)
            if (!std::isfinite(u1m[j]) || !std::isfinite(h1m[j])) throw SolverError("non-finite coefficients");
        st.step(lat.time(n), lat.time(n + 1), u1m, h1m);
        if (observer) observer(n + 1, st.u2(), st.h2());
        rec(n + 1);
    }
    return {std::move(u2s), std::move(h2s)};
}

// Full viscous system; the axial and tangential parts march in lockstep.
inline ViscousRun solve_viscous(const Scenario& s, double eps, const ChannelGrid& g, const TimeLattice& lat,
                                std::span<const int> record, int order = 0) {
    if (!(eps > 0.0)) throw ConfigError("epsilon must be positive");
    const auto compat = check_compatibility(s, order, eps);
    if (!compat.pass(order)) throw CompatibilityError("scenario '" + s.name + "' violates compatibility conditions");

    ViscousRun run;
    run.epsilon = eps;
    run.bc_mode = s.bc_mode;
    if (const int n = g.nodes_within_layer(eps); n < 8)
        run.warnings.push_back("resolution: only " + std::to_string(n) + " nodes within sqrt(eps) of the wall");

    const int nz = g.nz();
    std::vector<double> u1 = sample_profile(g, s.a).values;
    std::vector<double> h1 = sample_profile(g, s.c).values;
    std::vector<double> u1m(nz), h1m(nz), s0(nz), s1(nz);
    ScalarCrankNicolson axial(g.stencil, eps);
    TangentialStepper tang(eps, s, g);
    const bool dir = s.bc_mode == BcMode::dirichlet;

    std::size_t next = 0;
    auto rec = [&](int n) {
        while (next < record.size() && record[next] == n) {
            const double t = lat.time(n);
            run.steps.push_back(n);
            run.states.push_back({{u1, t}, {h1, t}, tang.snapshot(tang.u2(), t), tang.snapshot(tang.h2(), t), t});
            ++next;
        }
    };
    rec(0);
    for (int n = 0; n < lat.steps; ++n) {
        const double t0 = lat.time(n), t1 = lat.time(n + 1);
        for (int j = 0; j < nz; ++j) {
            s0[j] = s.f1(t0, g.z_nodes[j]);
            s1[j] = s.f1(t1, g.z_nodes[j]);
        }
        u1m = u1;
        h1m = h1;
        axial.step(u1, lat.dt, {BcKind::dirichlet, s.alpha1[0](t1)}, {BcKind::dirichlet, s.alpha1[1](t1)}, s0, s1);
        if (dir)
            axial.step(h1, lat.dt, {BcKind::dirichlet, s.gamma1[0](t1)}, {BcKind::dirichlet, s.gamma1[1](t1)});
        else
            axial.step(h1, lat.dt, {BcKind::neumann, 0.0}, {BcKind::neumann, 0.0});
        for (int j = 0; j < nz; ++j) {
            u1m[j] = 0.5 * (u1m[j] + u1[j]);
            h1m[j] = 0.5 * (h1m[j] + h1[j]);
        }
        tang.step(t0, t1, u1m, h1m);
        rec(n + 1);
    }
    return run;
}

} // namespace mhdbl
