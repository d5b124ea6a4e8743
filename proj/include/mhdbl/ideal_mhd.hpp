#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mhdbl/fields.hpp"
#include "mhdbl/quadrature.hpp"
#include "mhdbl/scenario.hpp"

namespace mhdbl {

// Normal-direction data of the outer solution at one wall and one time.
// Derivatives are along the inward normal (d/dz at z = 0, -d/dz at z = 1).
struct WallTrace {
    double t = 0.0;
    double U = 0.0, dU = 0.0, d2U = 0.0;  // u1^0
    double B = 0.0, dB = 0.0, d2B = 0.0;  // H1^0
    std::vector<cplx> u2, du2, d2u2;      // modes k = 0..nx/2 of u2^0
    std::vector<cplx> h2, dh2, d2h2;      // modes of H2^0
};

// Exact solution of the ideal system by integrating factors.
// u1^0(t,z) = a(z) + int_0^t f1(s,z) ds, H1^0 = c(z), and per mode the
// Elsasser amplitudes w+ = u2 + H2, w- = u2 - H2 move with speeds
// u1^0 - H1^0 and u1^0 + H1^0 respectively.
class OuterSolver {
public:
    OuterSolver(const Scenario& s, int nx) : s_(s), nx_(nx) {
        if (nx < 4 || nx % 2) throw ConfigError("nx must be even and >= 4");
    }

    int nx() const { return nx_; }
    int nk() const { return nx_ / 2 + 1; }
    const Scenario& scenario() const { return s_; }
    double wavenumber(int k) const { return 2.0 * std::numbers::pi * k / s_.length_L; }

    double u1(double t, double z) const {
        if (t == 0.0) return s_.a(z);
        return s_.a(z) + integrate([&](double r) { return s_.f1(r, z); }, 0.0, t);
    }

    // int_0^t u1^0 ds = a t + int_0^t (t - r) f1(r) dr
    double u1_integral(double t, double z) const {
        if (t == 0.0) return 0.0;
        return s_.a(z) * t + integrate([&](double r) { return (t - r) * s_.f1(r, z); }, 0.0, t);
    }

    double h1(double z) const { return s_.c(z); }

    void modes_of(const std::function<double(double)>& fx, std::span<cplx> out) const {
        std::vector<double> samples(nx_);
        for (int i = 0; i < nx_; ++i) samples[i] = fx(s_.length_L * i / nx_);
        forward_fft(samples, out);
    }

    // Modes of (u2^0, H2^0) at (t, z).
    void tangential(double t, double z, std::span<cplx> u2, std::span<cplx> h2) const {
        const int nk = this->nk();
        std::vector<cplx> bh(nk), dh(nk);
        modes_of([&](double x) { return s_.b(x, z); }, bh);
        modes_of([&](double x) { return s_.d(x, z); }, dh);
        const double Uint = u1_integral(t, z);
        const double ct = s_.c(z) * t;
        std::vector<cplx> duh_p(nk, 0.0), duh_m(nk, 0.0);
        if (s_.f2 && t > 0.0) duhamel(t, z, duh_p, duh_m);
        for (int k = 0; k < nk; ++k) {
            const double kt = wavenumber(k);
            const cplx wp0 = bh[k] + dh[k];
            const cplx wm0 = bh[k] - dh[k];
            const cplx ep = std::polar(1.0, -kt * (Uint - ct));
            const cplx em = std::polar(1.0, -kt * (Uint + ct));
            const cplx wp = ep * (wp0 + duh_p[k]);
            const cplx wm = em * (wm0 + duh_m[k]);
            u2[k] = 0.5 * (wp + wm);
            h2[k] = 0.5 * (wp - wm);
        }
        u2[0].imag(0.0);
        h2[0].imag(0.0);
        u2[nk - 1].imag(0.0);
        h2[nk - 1].imag(0.0);
    }

    WallTrace trace(double t, Wall w) const {
        const int nk = this->nk();
        const double z0 = (w == Wall::lower) ? 0.0 : 1.0;
        const double sgn = (w == Wall::lower) ? 1.0 : -1.0;
        WallTrace tr;
        tr.t = t;
        tr.U = u1(t, z0);
        tr.dU = sgn * derivative([&](double z) { return u1(t, z); }, z0, 1);
        tr.d2U = derivative([&](double z) { return u1(t, z); }, z0, 2);
        tr.B = s_.c(z0);
        tr.dB = sgn * derivative(s_.c, z0, 1);
        tr.d2B = derivative(s_.c, z0, 2);
        // Stacked (u2 modes, h2 modes) as one vector for differencing.
        auto eval = [&](double z, std::span<cplx> out) {
            tangential(t, z, out.subspan(0, nk), out.subspan(nk, nk));
        };
        std::vector<cplx> v(2 * nk), d1(2 * nk), d2(2 * nk);
        eval(z0, v);
        derivative_vec<cplx>(eval, z0, 1, std::span<cplx>(d1));
        derivative_vec<cplx>(eval, z0, 2, std::span<cplx>(d2));
        tr.u2.assign(v.begin(), v.begin() + nk);
        tr.h2.assign(v.begin() + nk, v.end());
        tr.du2.resize(nk);
        tr.dh2.resize(nk);
        tr.d2u2.assign(d2.begin(), d2.begin() + nk);
        tr.d2h2.assign(d2.begin() + nk, d2.end());
        for (int k = 0; k < nk; ++k) {
            tr.du2[k] = sgn * d1[k];
            tr.dh2[k] = sgn * d1[nk + k];
        }
        return tr;
    }

private:
    // Accumulates int_0^t exp(i kt Phi(s)) f2hat(s) ds for both characteristic
    // families, Phi the characteristic phase of w+ and w-.
    void duhamel(double t, double z, std::vector<cplx>& dp, std::vector<cplx>& dm) const {
        const int nk = this->nk();
        const double cz = s_.c(z);
        for (int k = 0; k < nk; ++k) {
            const double kt = wavenumber(k);
            for (int fam = 0; fam < 2; ++fam) {
                const double sgn = fam == 0 ? -1.0 : 1.0;
                auto integrand = [&](double s, bool imag) {
                    std::vector<cplx> fh(nk);
                    modes_of([&](double x) { return s_.f2(s, x, z); }, fh);
                    const double phase = u1_integral(s, z) + sgn * cz * s;
                    const cplx v = std::polar(1.0, kt * phase) * fh[k];
                    return imag ? v.imag() : v.real();
                };
                const double re = integrate([&](double s) { return integrand(s, false); }, 0.0, t, 1e-12);
                const double im = integrate([&](double s) { return integrand(s, true); }, 0.0, t, 1e-12);
                (fam == 0 ? dp : dm)[k] = cplx(re, im);
            }
        }
    }

    Scenario s_;
    int nx_;
};

struct OuterSolution {
    std::vector<double> times;
    std::vector<Profile1D> u1;
    Profile1D h1;
    std::vector<ModalField> u2, h2;
    std::vector<WallTrace> lower, upper;

    const WallTrace& trace(std::size_t n, Wall w) const { return w == Wall::lower ? lower[n] : upper[n]; }
};

inline Profile1D h1_outer(const Profile1D& c) { return c; }

inline std::vector<Profile1D> solve_u1_outer(const OuterSolver& os, const ChannelGrid& g, std::span<const double> times) {
    std::vector<Profile1D> out;
    out.reserve(times.size());
    for (double t : times) {
        Profile1D p;
        p.time_tag = t;
        p.values.resize(g.nz());
        for (int j = 0; j < g.nz(); ++j) {
            p.values[j] = os.u1(t, g.z_nodes[j]);
            if (!std::isfinite(p.values[j])) throw SolverError("non-finite forcing in u1 outer solve");
        }
        out.push_back(std::move(p));
    }
    return out;
}

inline std::pair<ModalField, ModalField> elsasser_split(const ModalField& u2, const ModalField& h2) {
    if (!u2.same_shape(h2)) throw DimensionError("elsasser_split: shape mismatch");
    ModalField wp = u2, wm = u2;
    for (std::size_t i = 0; i < u2.coeffs.size(); ++i) {
        wp.coeffs[i] = u2.coeffs[i] + h2.coeffs[i];
        wm.coeffs[i] = u2.coeffs[i] - h2.coeffs[i];
    }
    return {wp, wm};
}

inline std::pair<ModalField, ModalField> elsasser_merge(const ModalField& wp, const ModalField& wm) {
    if (!wp.same_shape(wm)) throw DimensionError("elsasser_merge: shape mismatch");
    ModalField u = wp, h = wp;
    for (std::size_t i = 0; i < wp.coeffs.size(); ++i) {
        u.coeffs[i] = 0.5 * (wp.coeffs[i] + wm.coeffs[i]);
        h.coeffs[i] = 0.5 * (wp.coeffs[i] - wm.coeffs[i]);
    }
    return {u, h};
}

inline std::pair<std::vector<ModalField>, std::vector<ModalField>> solve_tangential_outer(
    const OuterSolver& os, const ChannelGrid& g, std::span<const double> times) {
    std::vector<ModalField> u2s, h2s;
    const int nk = g.nk();
    std::vector<cplx> u(nk), h(nk);
    for (double t : times) {
        ModalField u2(g.nx, g.nz(), t), h2(g.nx, g.nz(), t);
        for (int j = 0; j < g.nz(); ++j) {
            os.tangential(t, g.z_nodes[j], u, h);
            for (int k = 0; k < nk; ++k) {
                if (!std::isfinite(std::abs(u[k])) || !std::isfinite(std::abs(h[k])))
                    throw SolverError("non-finite data in tangential outer solve");
                u2.at(k, j) = u[k];
                h2.at(k, j) = h[k];
            }
        }
        u2s.push_back(std::move(u2));
        h2s.push_back(std::move(h2));
    }
    return {std::move(u2s), std::move(h2s)};
}

inline OuterSolution solve_outer(const OuterSolver& os, const ChannelGrid& g, std::span<const double> times,
                                 bool with_traces = true) {
    if (os.nx() != g.nx) throw DimensionError("outer solver nx does not match grid");
    OuterSolution out;
    out.times.assign(times.begin(), times.end());
    out.u1 = solve_u1_outer(os, g, times);
    out.h1 = sample_profile(g, os.scenario().c);
    auto [u2, h2] = solve_tangential_outer(os, g, times);
    out.u2 = std::move(u2);
    out.h2 = std::move(h2);
    if (with_traces) {
        for (double t : times) {
            out.lower.push_back(os.trace(t, Wall::lower));
            out.upper.push_back(os.trace(t, Wall::upper));
        }
    }
    return out;
}

// The first-order outer terms vanish identically: u^1_1 = H^1_1 = 0 because
// they solve homogeneous equations with zero data, and (u^1_2, H^1_2) = 0
// by uniqueness for the homogeneous hyperbolic system.
struct OuterIncrement {
    Profile1D u1, h1;
    ModalField u2, h2;
    std::string note;
};

inline OuterIncrement first_order_outer(const ChannelGrid& g) {
    OuterIncrement inc;
    inc.u1.values.assign(g.nz(), 0.0);
    inc.h1.values.assign(g.nz(), 0.0);
    inc.u2 = ModalField(g.nx, g.nz());
    inc.h2 = ModalField(g.nx, g.nz());
    inc.note = "first-order outer solution: homogeneous system with zero data, identically zero";
    return inc;
}

} // namespace mhdbl
