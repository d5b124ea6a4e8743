#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mhdbl/crank_nicolson.hpp"
#include "mhdbl/fields.hpp"
#include "mhdbl/ideal_mhd.hpp"
#include "mhdbl/scenario.hpp"

namespace mhdbl {

inline constexpr double kCompatTol = 1e-10;

// Uniform time lattice t_n = t0 + n dt, n = 0..steps.
struct TimeLattice {
    double t0 = 0.0;
    double dt = 1e-3;
    int steps = 0;

    double time(int n) const { return t0 + n * dt; }
};

inline TimeLattice make_lattice(double horizon, double dt) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    const double r = horizon / dt;
    const int steps = static_cast<int>(std::llround(r));
    if (steps < 1 || std::abs(r - steps) > 1e-9 * r) throw ConfigError("horizon must be an integer multiple of dt");
    return {0.0, dt, steps};
}

inline std::vector<int> snapshot_steps(const TimeLattice& lat, double cadence) {
    const double r = cadence / lat.dt;
    const int every = static_cast<int>(std::llround(r));
    if (every < 1 || std::abs(r - every) > 1e-9 * r) throw ConfigError("snapshot cadence must be an integer multiple of dt");
    std::vector<int> s;
    for (int n = 0; n <= lat.steps; n += every) s.push_back(n);
    if (s.back() != lat.steps) s.push_back(lat.steps);
    return s;
}

// Outer wall traces on every lattice step; shared by all walls and epsilons.
struct TraceTable {
    TimeLattice lattice;
    std::vector<WallTrace> lower, upper;

    const WallTrace& at(int n, Wall w) const { return w == Wall::lower ? lower[n] : upper[n]; }
};

inline TraceTable build_trace_table(const OuterSolver& os, const TimeLattice& lat) {
    TraceTable tt;
    tt.lattice = lat;
    tt.lower.reserve(lat.steps + 1);
    tt.upper.reserve(lat.steps + 1);
    for (int n = 0; n <= lat.steps; ++n) {
        tt.lower.push_back(os.trace(lat.time(n), Wall::lower));
        tt.upper.push_back(os.trace(lat.time(n), Wall::upper));
    }
    return tt;
}

// ---------------------------------------------------------------- heat

struct HeatOptions {
    std::vector<double> initial;     // empty: zero initial data
    bool enforce_compatibility = true;
};

struct ProfileSeries {
    std::vector<double> times;
    std::vector<std::vector<double>> values;
};

// u_t = u_ZZ on [0, z_max], far field u = 0, wall Dirichlet u = g(t) or
// Neumann u_Z = g(t).
inline ProfileSeries solve_heat_halfline(BcKind kind, const std::function<double(double)>& g, const BLGrid& bl,
                                         const TimeLattice& lat, std::span<const int> record_steps,
                                         const HeatOptions& opt = {}) {
    if (opt.enforce_compatibility && kind == BcKind::dirichlet && std::abs(g(lat.t0)) > kCompatTol)
        throw CompatibilityError("half-line heat: wall data must vanish at the initial time");
    std::vector<double> u = opt.initial.empty() ? std::vector<double>(bl.nzb, 0.0) : opt.initial;
    if (static_cast<int>(u.size()) != bl.nzb) throw DimensionError("initial profile does not match BL grid");
    ScalarCrankNicolson cn(bl.stencil, 1.0);
    ProfileSeries out;
    std::size_t next = 0;
    auto record = [&](int n) {
        while (next < record_steps.size() && record_steps[next] == n) {
            out.times.push_back(lat.time(n));
            out.values.push_back(u);
            ++next;
        }
    };
    record(0);
    for (int n = 0; n < lat.steps; ++n) {
        const double t1 = lat.time(n + 1);
        cn.step(u, lat.dt, {kind, g(t1)}, {BcKind::dirichlet, 0.0});
        record(n + 1);
    }
    return out;
}

// ---------------------------------------------------------------- correctors

// Correctors attached to one wall, on the half-line grid in the stretched
// variable (Z = z/sqrt(eps) at the lower wall, (1-z)/sqrt(eps) at the upper).
struct WallCorrectors {
    Wall wall = Wall::lower;
    BcMode bc_mode = BcMode::conducting;
    int order = 0;
    BcKind theta_kind = BcKind::dirichlet;
    BcKind h_kind = BcKind::neumann;
    std::vector<int> steps;
    std::vector<double> times;
    std::vector<std::vector<double>> theta1, h1;
    std::vector<ModalField> theta2, h2;      // order 0, nz = nzb
    std::vector<ModalField> theta2_1, h2_1;  // order 1 (empty at order 0)
    std::vector<double> mismatch_theta1, mismatch_h1;
    bool decay_warning = false;
};

struct CorrectorSet {
    WallCorrectors lower, upper;
    const WallCorrectors& at(Wall w) const { return w == Wall::lower ? lower : upper; }
};

struct CorrectorInputs {
    const Scenario* scenario = nullptr;
    const TraceTable* traces = nullptr;
    const BLGrid* bl = nullptr;
    int nx = 16;
};

namespace detail {

inline std::vector<cplx> data_modes(const std::function<double(double, double)>& f, double t, int nx, double L) {
    std::vector<double> s(nx);
    for (int i = 0; i < nx; ++i) s[i] = f ? f(t, L * i / nx) : 0.0;
    std::vector<cplx> out(nx / 2 + 1);
    forward_fft(s, out);
    return out;
}

} // namespace detail

// Marches the order-0 correctors of one wall (and the order-1 tangential
// correctors when order == 1) over the trace lattice, recording at
// `record_steps`. Upper-wall equations are the mirror image of the lower ones
// with inward normal derivatives.
inline WallCorrectors solve_wall_correctors(const CorrectorInputs& in, Wall wall, int order,
                                            std::span<const int> record_steps) {
    const Scenario& sc = *in.scenario;
    const TraceTable& tt = *in.traces;
    const BLGrid& bl = *in.bl;
    const TimeLattice& lat = tt.lattice;
    const int nx = in.nx;
    const int nk = nx / 2 + 1;
    const int nb = bl.nzb;
    const int iw = wall == Wall::lower ? 0 : 1;
    const double L = sc.length_L;
    if (order != 0 && order != 1) throw ConfigError("order must be 0 or 1");
    if (order == 1 && sc.bc_mode != BcMode::dirichlet)
        throw ConfigError("first-order correctors are built for the dirichlet wall mode only");
    if (static_cast<int>(tt.lower[0].u2.size()) != nk) throw DimensionError("trace table nx does not match");

    WallCorrectors wc;
    wc.wall = wall;
    wc.bc_mode = sc.bc_mode;
    wc.order = order;
    wc.h_kind = sc.bc_mode == BcMode::conducting ? BcKind::neumann : BcKind::dirichlet;

    auto theta1_data = [&](int n) { return sc.alpha1[iw](lat.time(n)) - tt.at(n, wall).U; };
    auto h1_data = [&](int n) {
        return sc.bc_mode == BcMode::conducting ? 0.0 : sc.gamma1[iw](lat.time(n)) - tt.at(n, wall).B;
    };
    auto theta2_data = [&](int n) {
        auto a = detail::data_modes(sc.alpha2[iw], lat.time(n), nx, L);
        const auto& tr = tt.at(n, wall);
        for (int k = 0; k < nk; ++k) a[k] -= tr.u2[k];
        return a;
    };
    auto h2_data = [&](int n) {
        std::vector<cplx> a(nk, 0.0);
        if (sc.bc_mode == BcMode::dirichlet) {
            a = detail::data_modes(sc.gamma2[iw], lat.time(n), nx, L);
            const auto& tr = tt.at(n, wall);
            for (int k = 0; k < nk; ++k) a[k] -= tr.h2[k];
        }
        return a;
    };

    // Zero initial data requires zero mismatch at t = 0.
    {
        double worst = std::max(std::abs(theta1_data(0)), std::abs(h1_data(0)));
        for (auto v : theta2_data(0)) worst = std::max(worst, std::abs(v));
        for (auto v : h2_data(0)) worst = std::max(worst, std::abs(v));
        if (worst > kCompatTol)
            throw CompatibilityError(std::string("corrector mismatch at t=0 is nonzero at the ") + to_string(wall) +
                                     " wall: " + std::to_string(worst));
    }

    std::vector<double> th1(nb, 0.0), hh1(nb, 0.0), th1_old(nb), hh1_old(nb);
    std::vector<std::vector<cplx>> th2(nk, std::vector<cplx>(nb)), hh2(nk, std::vector<cplx>(nb));
    std::vector<std::vector<cplx>> th2o, hh2o;
    if (order == 1) {
        th2o.assign(nk, std::vector<cplx>(nb));
        hh2o.assign(nk, std::vector<cplx>(nb));
    }
    std::vector<cplx> th2_prev(nb), hh2_prev(nb);
    std::vector<double> Ucoef(nb), Bcoef(nb);
    std::vector<cplx> sp_n(nb), sm_n(nb), sp_1(nb), sm_1(nb);
    std::vector<cplx> qp_n(nb), qm_n(nb), qp_1(nb), qm_1(nb);

    ScalarCrankNicolson heat(bl.stencil, 1.0);
    PairCrankNicolson pair(bl.stencil, 1.0);
    PairCrankNicolson pair1(bl.stencil, 1.0);

    std::size_t next = 0;
    auto record = [&](int n) {
        while (next < record_steps.size() && record_steps[next] == n) {
            wc.steps.push_back(n);
            wc.times.push_back(lat.time(n));
            wc.theta1.push_back(th1);
            wc.h1.push_back(hh1);
            wc.mismatch_theta1.push_back(theta1_data(n));
            wc.mismatch_h1.push_back(h1_data(n));
            ModalField t2(nx, nb, lat.time(n)), m2(nx, nb, lat.time(n));
            for (int k = 0; k < nk; ++k)
                for (int j = 0; j < nb; ++j) {
                    t2.at(k, j) = th2[k][j];
                    m2.at(k, j) = hh2[k][j];
                }
            t2.enforce_hermitian();
            m2.enforce_hermitian();
            wc.decay_warning = wc.decay_warning || decay_violated<double>(th1) || decay_violated<double>(hh1);
            for (int k = 0; k < nk; ++k)
                wc.decay_warning = wc.decay_warning || decay_violated<cplx>(th2[k]) || decay_violated<cplx>(hh2[k]);
            wc.theta2.push_back(std::move(t2));
            wc.h2.push_back(std::move(m2));
            if (order == 1) {
                ModalField t3(nx, nb, lat.time(n)), m3(nx, nb, lat.time(n));
                for (int k = 0; k < nk; ++k)
                    for (int j = 0; j < nb; ++j) {
                        t3.at(k, j) = th2o[k][j];
                        m3.at(k, j) = hh2o[k][j];
                    }
                t3.enforce_hermitian();
                m3.enforce_hermitian();
                wc.theta2_1.push_back(std::move(t3));
                wc.h2_1.push_back(std::move(m3));
            }
            ++next;
        }
    };
    record(0);

    const ScalarEnd far{BcKind::dirichlet, 0.0};
    PairEnd far_pair;

    for (int n = 0; n < lat.steps; ++n) {
        const WallTrace& tr0 = tt.at(n, wall);
        const WallTrace& tr1 = tt.at(n + 1, wall);
        th1_old = th1;
        hh1_old = hh1;
        heat.step(th1, lat.dt, {BcKind::dirichlet, theta1_data(n + 1)}, far);
        heat.step(hh1, lat.dt, {sc.bc_mode == BcMode::conducting ? BcKind::neumann : BcKind::dirichlet, h1_data(n + 1)},
                  far);
        for (int j = 0; j < nb; ++j) {
            Ucoef[j] = 0.5 * (tr0.U + tr1.U) + 0.5 * (th1_old[j] + th1[j]);
            Bcoef[j] = 0.5 * (tr0.B + tr1.B) + 0.5 * (hh1_old[j] + hh1[j]);
        }
        const auto td = theta2_data(n + 1);
        const auto hd = h2_data(n + 1);
        for (int k = 0; k < nk; ++k) {
            const double kt = 2.0 * std::numbers::pi * k / L;
            const cplx ik(0.0, kt);
            for (int j = 0; j < nb; ++j) {
                sp_n[j] = -ik * (th1_old[j] * tr0.u2[k] - hh1_old[j] * tr0.h2[k]);
                sm_n[j] = -ik * (th1_old[j] * tr0.h2[k] - hh1_old[j] * tr0.u2[k]);
                sp_1[j] = -ik * (th1[j] * tr1.u2[k] - hh1[j] * tr1.h2[k]);
                sm_1[j] = -ik * (th1[j] * tr1.h2[k] - hh1[j] * tr1.u2[k]);
            }
            if (order == 1) {
                th2_prev = th2[k];
                hh2_prev = hh2[k];
            }
            PairEnd left;
            left.kind[0] = BcKind::dirichlet;
            left.value[0] = td[k];
            left.kind[1] = wc.h_kind;
            left.value[1] = wc.h_kind == BcKind::dirichlet ? hd[k] : cplx(0.0);
            pair.step(th2[k], hh2[k], lat.dt, kt, 0.0, Ucoef, Bcoef, left, far_pair, {sp_n, sm_n, sp_1, sm_1});

            if (order == 1) {
                // -Z (theta1 d_nx u2 + d_n u1 d_x theta2 - h1 d_nx H2 - d_n H1 d_x h2), and the H analogue.
                for (int j = 0; j < nb; ++j) {
                    const double Z = bl.nodes[j];
                    qp_n[j] = -Z * ik * (th1_old[j] * tr0.du2[k] + tr0.dU * th2_prev[j] - hh1_old[j] * tr0.dh2[k] -
                                         tr0.dB * hh2_prev[j]);
                    qm_n[j] = -Z * ik * (th1_old[j] * tr0.dh2[k] + tr0.dU * hh2_prev[j] - hh1_old[j] * tr0.du2[k] -
                                         tr0.dB * th2_prev[j]);
                    qp_1[j] = -Z * ik * (th1[j] * tr1.du2[k] + tr1.dU * th2[k][j] - hh1[j] * tr1.dh2[k] -
                                         tr1.dB * hh2[k][j]);
                    qm_1[j] = -Z * ik * (th1[j] * tr1.dh2[k] + tr1.dU * hh2[k][j] - hh1[j] * tr1.du2[k] -
                                         tr1.dB * th2[k][j]);
                }
                PairEnd zero_wall;
                pair1.step(th2o[k], hh2o[k], lat.dt, kt, 0.0, Ucoef, Bcoef, zero_wall, far_pair,
                           {qp_n, qm_n, qp_1, qm_1});
            }
        }
        record(n + 1);
    }
    return wc;
}

inline CorrectorSet solve_correctors(const CorrectorInputs& in, int order, std::span<const int> record_steps) {
    CorrectorSet cs;
    cs.lower = solve_wall_correctors(in, Wall::lower, order, record_steps);
    cs.upper = solve_wall_correctors(in, Wall::upper, order, record_steps);
    return cs;
}

// theta^1_1 = h^1_1 = 0: they solve the homogeneous heat equation with zero data.
struct TrivialComponents {
    std::vector<double> theta1_1, h1_1, theta1_1_upper, h1_1_upper;
    std::string note;
};

inline TrivialComponents first_order_trivial_components(const BLGrid& bl) {
    TrivialComponents t;
    t.theta1_1.assign(bl.nzb, 0.0);
    t.h1_1.assign(bl.nzb, 0.0);
    t.theta1_1_upper.assign(bl.nzb, 0.0);
    t.h1_1_upper.assign(bl.nzb, 0.0);
    t.note = "first-order normal correctors: homogeneous heat problems with zero data, identically zero";
    return t;
}

struct WeightedDecay {
    double sup_weighted = 0.0;    // sup <Z>^l |f|
    double l2_weighted_dz = 0.0;  // || <Z>^l d_Z f ||_{L2(0, z_max)}
    double argmax = 0.0;
};

template <class T>
WeightedDecay weighted_decay_report(std::span<const T> f, const BLGrid& bl, int l) {
    if (l < 0 || l > 2) throw ConfigError("weight power must be 0, 1 or 2");
    if (static_cast<int>(f.size()) != bl.nzb) throw DimensionError("profile does not match BL grid");
    WeightedDecay r;
    std::vector<T> dz(f.size());
    bl.stencil.first<T>(f, dz);
    const double h = bl.spacing();
    double acc = 0.0;
    for (int j = 0; j < bl.nzb; ++j) {
        const double Z = bl.nodes[j];
        const double w = std::pow(std::sqrt(1.0 + Z * Z), l);
        const double v = w * std::abs(f[j]);
        if (v > r.sup_weighted) {
            r.sup_weighted = v;
            r.argmax = Z;
        }
        const double tw = (j == 0 || j == bl.nzb - 1) ? 0.5 * h : h;
        acc += tw * w * w * std::norm(dz[j]);
    }
    r.l2_weighted_dz = std::sqrt(acc);
    return r;
}

} // namespace mhdbl
