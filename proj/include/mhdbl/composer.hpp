#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mhdbl/fields.hpp"
#include "mhdbl/ideal_mhd.hpp"
#include "mhdbl/prandtl.hpp"
#include "mhdbl/scenario.hpp"

namespace mhdbl {

// Value and first two derivatives of a cut-off.
struct Smooth {
    double v = 0.0, d1 = 0.0, d2 = 0.0;
};

namespace detail {

// 1 - (6 s^5 - 15 s^4 + 10 s^3) on [lo, hi], plateaus 1 and 0 outside.
inline Smooth smooth_drop(double x, double lo, double hi) {
    if (x <= lo) return {1.0, 0.0, 0.0};
    if (x >= hi) return {0.0, 0.0, 0.0};
    const double w = hi - lo;
    const double s = (x - lo) / w;
    const double s2 = s * s, s3 = s2 * s;
    Smooth r;
    r.v = 1.0 - s3 * (10.0 - 15.0 * s + 6.0 * s2);
    r.d1 = -30.0 * s2 * (1.0 - s) * (1.0 - s) / w;
    r.d2 = -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (w * w);
    return r;
}

} // namespace detail

inline Smooth psi(double z) {
    if (z < -1e-14 || z > 1.0 + 1e-14) throw ConfigError("psi: argument outside [0,1]");
    return detail::smooth_drop(z, 1.0 / 3.0, 0.5);
}

inline Smooth rho(double Z) {
    if (Z < -1e-14) throw ConfigError("rho: negative argument");
    return detail::smooth_drop(Z, 1.0, 2.0);
}

// Z rho(Z) and its derivatives: the shape of the boundary corrector.
inline Smooth eta_shape(double Z) {
    const Smooth r = rho(Z);
    return {Z * r.v, r.v + Z * r.d1, 2.0 * r.d1 + Z * r.d2};
}

// eta_w(t, Z) = s(t) Z rho(Z) with s = -(inward normal derivative of H^0 at the wall).
// With the inward normal this covers both walls: at z = 1 the slope is +dz H^0(1).
struct EtaWall {
    std::vector<double> times;
    std::vector<double> s1;               // H1 part, constant in time
    std::vector<std::vector<cplx>> s2;    // per time, per mode
    std::vector<std::vector<cplx>> ds2dt; // time derivative of s2
};

struct EtaSet {
    EtaWall lower, upper;
    const EtaWall& at(Wall w) const { return w == Wall::lower ? lower : upper; }
};

inline EtaSet eta_corrector(const TraceTable& tt, std::span<const int> steps) {
    EtaSet e;
    const double dt = tt.lattice.dt;
    for (Wall w : {Wall::lower, Wall::upper}) {
        EtaWall& ew = w == Wall::lower ? e.lower : e.upper;
        for (int n : steps) {
            const WallTrace& tr = tt.at(n, w);
            ew.times.push_back(tr.t);
            ew.s1.push_back(-tr.dB);
            std::vector<cplx> s(tr.dh2.size()), ds(tr.dh2.size());
            const int na = std::max(0, n - 1), nb = std::min(tt.lattice.steps, n + 1);
            for (std::size_t k = 0; k < s.size(); ++k) {
                s[k] = -tr.dh2[k];
                ds[k] = -(tt.at(nb, w).dh2[k] - tt.at(na, w).dh2[k]) / ((nb - na) * dt);
            }
            ew.s2.push_back(std::move(s));
            ew.ds2dt.push_back(std::move(ds));
        }
    }
    return e;
}

// eta on the half-line grid at recorded index s (h1 part, mode part).
inline std::pair<std::vector<double>, ModalField> eta_on_grid(const EtaWall& ew, std::size_t s, const BLGrid& bl, int nx) {
    std::vector<double> e1(bl.nzb);
    ModalField e2(nx, bl.nzb, ew.times[s]);
    for (int j = 0; j < bl.nzb; ++j) {
        const double q = eta_shape(bl.nodes[j]).v;
        e1[j] = ew.s1[s] * q;
        for (int k = 0; k < e2.nk(); ++k) e2.at(k, j) = ew.s2[s][k] * q;
    }
    return {e1, e2};
}

// ---------------------------------------------------------------- assembly

struct ApproxSnapshot {
    double t = 0.0;
    Profile1D u1, h1;
    ModalField u2, h2;
};

struct ApproxSolution {
    double epsilon = 0.0;
    BcMode bc_mode = BcMode::conducting;
    int order = 0;
    bool with_correctors = true;
    bool with_eta = false;
    std::vector<ApproxSnapshot> snaps;
};

struct AssembleOptions {
    int order = 0;
    bool correctors = true;  // false: outer solution only
    bool eta = true;         // conducting mode only
};

// Channel-grid sampling of one wall's correctors at one snapshot.
struct LayerSample {
    std::vector<int> nodes;  // channel indices with a nonzero cut-off or cut-off slope
    std::vector<double> Z, ps, dps, d2ps;
    std::vector<double> th1, th1Z, th1ZZ, h1, h1Z, h1ZZ;
    // per mode k, per entry of `nodes`: value, dZ, dZZ
    std::vector<std::vector<cplx>> th2, th2Z, th2ZZ, h2, h2Z, h2ZZ;
    std::vector<std::vector<cplx>> th21, th21Z, h21, h21Z;  // order 1
    bool has_order1 = false;
};

inline LayerSample sample_layer(const WallCorrectors& wc, std::size_t s, double eps, const ChannelGrid& g,
                                const BLGrid& bl, bool want_order1) {
    LayerSample L;
    const double se = std::sqrt(eps);
    for (int j = 0; j < g.nz(); ++j) {
        const double zeta = wc.wall == Wall::lower ? g.z_nodes[j] : 1.0 - g.z_nodes[j];
        if (zeta >= 0.5) continue;
        const Smooth p = psi(std::max(0.0, zeta));
        L.nodes.push_back(j);
        L.Z.push_back(std::max(0.0, zeta) / se);
        L.ps.push_back(p.v);
        L.dps.push_back(p.d1);
        L.d2ps.push_back(p.d2);
    }
    const std::size_t m = L.nodes.size();
    auto real_fill = [&](const std::vector<double>& prof, std::vector<double>& v, std::vector<double>& d,
                         std::vector<double>& dd) {
        HalflineSpline sp(prof, bl);
        v.resize(m);
        d.resize(m);
        dd.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            v[i] = L.Z[i] == 0.0 ? prof[0] : sp(L.Z[i]);
            d[i] = sp.prime(L.Z[i]);
            dd[i] = sp.double_prime(L.Z[i]);
        }
    };
    real_fill(wc.theta1[s], L.th1, L.th1Z, L.th1ZZ);
    real_fill(wc.h1[s], L.h1, L.h1Z, L.h1ZZ);
    const int nk = wc.theta2[s].nk();
    auto modal_fill = [&](const ModalField& f, std::vector<std::vector<cplx>>& v, std::vector<std::vector<cplx>>& d,
                          std::vector<std::vector<cplx>>* dd) {
        v.assign(nk, std::vector<cplx>(m));
        d.assign(nk, std::vector<cplx>(m));
        if (dd) dd->assign(nk, std::vector<cplx>(m));
        for (int k = 0; k < nk; ++k) {
            ComplexHalflineSpline sp(f.mode(k), bl);
            for (std::size_t i = 0; i < m; ++i) {
                v[k][i] = L.Z[i] == 0.0 ? f.at(k, 0) : sp(L.Z[i]);
                d[k][i] = sp.prime(L.Z[i]);
                if (dd) (*dd)[k][i] = sp.double_prime(L.Z[i]);
            }
        }
    };
    modal_fill(wc.theta2[s], L.th2, L.th2Z, &L.th2ZZ);
    modal_fill(wc.h2[s], L.h2, L.h2Z, &L.h2ZZ);
    if (want_order1 && !wc.theta2_1.empty()) {
        modal_fill(wc.theta2_1[s], L.th21, L.th21Z, nullptr);
        modal_fill(wc.h2_1[s], L.h21, L.h21Z, nullptr);
        L.has_order1 = true;
    }
    return L;
}

// Outer solution plus cut-off-localised correctors. Snapshot s of the outer
// solution, of the correctors and of eta must refer to the same time.
inline ApproxSolution assemble(const AssembleOptions& opt, BcMode mode, double eps, const OuterSolution& outer,
                               const CorrectorSet* cs, const EtaSet* eta, const ChannelGrid& g, const BLGrid* bl) {
    if (!(eps > 0.0)) throw ConfigError("epsilon must be positive");
    if (opt.correctors && (!cs || !bl)) throw ConfigError("assemble: correctors requested but not supplied");
    const bool use_eta = opt.correctors && opt.eta && mode == BcMode::conducting;
    if (use_eta && !eta) throw ConfigError("assemble: conducting mode needs the boundary corrector");
    if (opt.order == 1 && opt.correctors && cs->lower.theta2_1.empty())
        throw ConfigError("assemble: order-1 correctors missing");
    ApproxSolution a;
    a.epsilon = eps;
    a.bc_mode = mode;
    a.order = opt.order;
    a.with_correctors = opt.correctors;
    a.with_eta = use_eta;
    const double se = std::sqrt(eps);
    const int nk = g.nk();
    for (std::size_t s = 0; s < outer.times.size(); ++s) {
        ApproxSnapshot snap;
        snap.t = outer.times[s];
        snap.u1 = outer.u1[s];
        snap.h1 = outer.h1;
        snap.h1.time_tag = snap.t;
        snap.u2 = outer.u2[s];
        snap.h2 = outer.h2[s];
        if (opt.correctors) {
            for (Wall w : {Wall::lower, Wall::upper}) {
                const WallCorrectors& wc = cs->at(w);
                if (std::abs(wc.times[s] - snap.t) > 1e-12) throw DimensionError("corrector and outer snapshots differ");
                const LayerSample L = sample_layer(wc, s, eps, g, *bl, opt.order == 1);
                for (std::size_t i = 0; i < L.nodes.size(); ++i) {
                    const int j = L.nodes[i];
                    const double p = L.ps[i];
                    if (p == 0.0) continue;
                    const double q = use_eta ? eta_shape(L.Z[i]).v : 0.0;
                    snap.u1.values[j] += p * L.th1[i];
                    double hb = L.h1[i];
                    if (use_eta) hb += se * eta->at(w).s1[s] * q;
                    snap.h1.values[j] += p * hb;
                    for (int k = 0; k < nk; ++k) {
                        cplx tu = L.th2[k][i];
                        cplx th = L.h2[k][i];
                        if (opt.order == 1) {
                            tu += se * L.th21[k][i];
                            th += se * L.h21[k][i];
                        }
                        if (use_eta) th += se * eta->at(w).s2[s][k] * q;
                        snap.u2.at(k, j) += p * tu;
                        snap.h2.at(k, j) += p * th;
                    }
                }
            }
            snap.u2.enforce_hermitian();
            snap.h2.enforce_hermitian();
        }
        a.snaps.push_back(std::move(snap));
    }
    return a;
}

// Inward wall slope of the assembled magnetic field in conducting mode, one
// entry per snapshot, wall and component (1: h1, 2: worst mode of h2).
// `composed` adds the slopes of the pieces: the outer field by the channel
// stencil, eta analytically, and the corrector by the one-sided half-line row
// through which its Neumann data are imposed. `spline` takes the corrector
// slope from its interpolant instead, and `stencil` applies the channel
// stencil to the assembled field; both carry discretisation error amplified by
// 1/sqrt(eps). `scale` is max |dz h_j| over the channel.
struct WallSlope {
    Wall wall = Wall::lower;
    int component = 1;
    double t = 0.0;
    double composed = 0.0;
    double spline = 0.0;
    double stencil = 0.0;
    double scale = 0.0;
};

inline std::vector<WallSlope> conducting_wall_slopes(const ApproxSolution& a, const OuterSolution& outer,
                                                     const CorrectorSet& cs, const EtaSet& eta, const ChannelGrid& g,
                                                     const BLGrid& bl) {
    if (a.bc_mode != BcMode::conducting || !a.with_eta) throw ConfigError("wall slope audit needs a conducting approximant with eta");
    const double se = std::sqrt(a.epsilon);
    const int nz = g.nz(), nk = g.nk();
    // (Z rho)'(0) = 1 and psi'(0) = 0.
    const StencilRow& row = bl.stencil.d1.front();
    std::vector<WallSlope> out;
    for (std::size_t s = 0; s < a.snaps.size(); ++s) {
        const ApproxSnapshot& A = a.snaps[s];
        const Profile1D dh1 = ddz(A.h1, g), dH1 = ddz(outer.h1, g);
        const ModalField dh2 = ddz(A.h2, g), dH2 = ddz(outer.h2[s], g);
        double scale1 = 0.0, scale2 = 0.0;
        for (double v : dh1.values) scale1 = std::max(scale1, std::abs(v));
        for (const cplx& v : dh2.coeffs) scale2 = std::max(scale2, std::abs(v));
        for (Wall w : {Wall::lower, Wall::upper}) {
            const int jw = w == Wall::lower ? 0 : nz - 1;
            const double sgn = w == Wall::lower ? 1.0 : -1.0;
            const WallCorrectors& wc = cs.at(w);
            const EtaWall& ew = eta.at(w);
            WallSlope r1{w, 1, A.t};
            r1.scale = scale1;
            const double o1 = sgn * dH1.values[jw] + ew.s1[s];
            r1.composed = std::abs(o1 + row.apply<double>(wc.h1[s]) / se);
            r1.spline = std::abs(o1 + HalflineSpline(wc.h1[s], bl).prime(0.0) / se);
            r1.stencil = std::abs(dh1.values[jw]);
            out.push_back(r1);
            WallSlope r2{w, 2, A.t};
            r2.scale = scale2;
            for (int k = 0; k < nk; ++k) {
                const cplx o2 = sgn * dH2.at(k, jw) + ew.s2[s][k];
                r2.composed = std::max(r2.composed, std::abs(o2 + row.apply<cplx>(wc.h2[s].mode(k)) / se));
                r2.spline = std::max(r2.spline, std::abs(o2 + ComplexHalflineSpline(wc.h2[s].mode(k), bl).prime(0.0) / se));
                r2.stencil = std::max(r2.stencil, std::abs(dh2.at(k, jw)));
            }
            out.push_back(r2);
        }
    }
    return out;
}

// ---------------------------------------------------------------- residual

struct ResidualSnapshot {
    double t = 0.0;
    Profile1D r1, r3;  // axial equations
    ModalField r2, r4; // tangential equations
};

namespace detail {

// Second-order weights for d/dt at index i on a (possibly nonuniform) time lattice.
inline std::array<double, 3> time_weights(std::span<const double> t, std::size_t i, std::size_t& first) {
    const std::size_t n = t.size();
    first = i == 0 ? 0 : (i == n - 1 ? n - 3 : i - 1);
    auto w = fornberg_weights(t[i], t.subspan(first, 3), 1);
    return {w[0][1], w[1][1], w[2][1]};
}

} // namespace detail

// Applies the viscous operators to the assembled fields and subtracts the forcing.
inline std::vector<ResidualSnapshot> residual(const ApproxSolution& a, double eps, const Scenario& sc,
                                              const ChannelGrid& g) {
    const std::size_t ns = a.snaps.size();
    if (ns < 3) throw ConfigError("residual needs at least three snapshots");
    std::vector<double> times(ns);
    for (std::size_t s = 0; s < ns; ++s) times[s] = a.snaps[s].t;
    const int nz = g.nz(), nk = g.nk();
    std::vector<ResidualSnapshot> out;
    for (std::size_t s = 0; s < ns; ++s) {
        std::size_t f0 = 0;
        const auto w = detail::time_weights(times, s, f0);
        const ApproxSnapshot& A = a.snaps[s];
        ResidualSnapshot R;
        R.t = A.t;
        R.r1.values.assign(nz, 0.0);
        R.r3.values.assign(nz, 0.0);
        R.r1.time_tag = R.r3.time_tag = A.t;
        R.r2 = ModalField(g.nx, nz, A.t);
        R.r4 = ModalField(g.nx, nz, A.t);
        for (int m = 0; m < 3; ++m) {
            const ApproxSnapshot& B = a.snaps[f0 + m];
            for (int j = 0; j < nz; ++j) {
                R.r1.values[j] += w[m] * B.u1.values[j];
                R.r3.values[j] += w[m] * B.h1.values[j];
            }
            for (std::size_t i = 0; i < R.r2.coeffs.size(); ++i) {
                R.r2.coeffs[i] += w[m] * B.u2.coeffs[i];
                R.r4.coeffs[i] += w[m] * B.h2.coeffs[i];
            }
        }
        const Profile1D u1zz = d2dz2(A.u1, g), h1zz = d2dz2(A.h1, g);
        const ModalField u2zz = d2dz2(A.u2, g), h2zz = d2dz2(A.h2, g);
        for (int j = 0; j < nz; ++j) {
            R.r1.values[j] -= eps * u1zz.values[j] + sc.f1(A.t, g.z_nodes[j]);
            R.r3.values[j] -= eps * h1zz.values[j];
        }
        const ModalField f2 = sample_modal(g, [&](double x, double z) { return sc.f2_at(A.t, x, z); });
        const ModalField g2 = sample_modal(g, [&](double x, double z) { return sc.g2_at(A.t, x, z); });
        for (int k = 0; k < nk; ++k) {
            const double kt = g.wavenumber(k);
            const cplx ik(0.0, kt);
            for (int j = 0; j < nz; ++j) {
                const cplx u = A.u2.at(k, j), h = A.h2.at(k, j);
                R.r2.at(k, j) += -eps * (u2zz.at(k, j) - kt * kt * u) + A.u1.values[j] * ik * u -
                                 A.h1.values[j] * ik * h - f2.at(k, j);
                R.r4.at(k, j) += -eps * (h2zz.at(k, j) - kt * kt * h) + A.u1.values[j] * ik * h -
                                 A.h1.values[j] * ik * u - g2.at(k, j);
            }
        }
        R.r2.enforce_hermitian();
        R.r4.enforce_hermitian();
        out.push_back(std::move(R));
    }
    return out;
}

} // namespace mhdbl
