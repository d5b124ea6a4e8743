#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <fftw3.h>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "mhdbl/errors.hpp"
#include "mhdbl/stencil.hpp"

namespace mhdbl {

using cplx = std::complex<double>;

// Mapping constant of the tanh grading: beta = stretch * kAtanhScale.
inline constexpr double kAtanhScale = 3.0;

struct ChannelGrid {
    double length_L = 2.0 * std::numbers::pi;
    int nx = 0;
    std::vector<double> z_nodes;
    std::vector<double> z_weights;
    double stretch = 0.0;
    Stencil1D stencil;

    int nz() const { return static_cast<int>(z_nodes.size()); }
    int nk() const { return nx / 2 + 1; }
    double x(int i) const { return length_L * i / nx; }
    double wavenumber(int k) const { return 2.0 * std::numbers::pi * k / length_L; }

    double min_spacing() const {
        double h = 1.0;
        for (int j = 1; j < nz(); ++j) h = std::min(h, z_nodes[j] - z_nodes[j - 1]);
        return h;
    }

    // Nodes strictly inside the wall and within distance sqrt(eps) of z = 0.
    int nodes_within_layer(double eps) const {
        const double w = std::sqrt(eps);
        int count = 0;
        for (int j = 1; j < nz() && z_nodes[j] <= w; ++j) ++count;
        return count;
    }

    bool same_as(const ChannelGrid& o) const {
        return nx == o.nx && length_L == o.length_L && z_nodes == o.z_nodes;
    }
};

inline ChannelGrid build_channel_grid(int nx, int nz, double stretch, double length_L) {
    if (nx < 4 || nx % 2 != 0) throw ConfigError("nx must be even and >= 4");
    if (nz < 3 || nz % 2 == 0) throw ConfigError("nz must be odd");
    if (!(stretch >= 0.0 && stretch < 1.0)) throw ConfigError("stretch must lie in [0,1)");
    if (!(length_L > 0.0)) throw ConfigError("length_L must be positive");

    ChannelGrid g;
    g.length_L = length_L;
    g.nx = nx;
    g.stretch = stretch;
    g.z_nodes.assign(nz, 0.0);
    const double beta = stretch * kAtanhScale;
    const int half = (nz - 1) / 2;
    for (int j = 0; j <= half; ++j) {
        const double xi = 2.0 * j / (nz - 1) - 1.0;
        double z = 0.5 * (1.0 + xi);
        if (beta > 0.0) z = 0.5 * (1.0 + std::tanh(beta * xi) / std::tanh(beta));
        g.z_nodes[j] = z;
    }
    g.z_nodes[0] = 0.0;
    g.z_nodes[half] = 0.5;
    for (int j = 0; j < half; ++j) g.z_nodes[nz - 1 - j] = 1.0 - g.z_nodes[j];
    g.z_nodes[nz - 1] = 1.0;

    g.z_weights.assign(nz, 0.0);
    for (int j = 0; j < nz - 1; ++j) {
        const double h = g.z_nodes[j + 1] - g.z_nodes[j];
        g.z_weights[j] += 0.5 * h;
        g.z_weights[j + 1] += 0.5 * h;
    }
    g.stencil = Stencil1D(g.z_nodes);
    return g;
}

struct Profile1D {
    std::vector<double> values;
    double time_tag = 0.0;
};

// Real samples f(x_i, z_j), stored z-major: data[j * nx + i].
struct PhysicalField {
    int nx = 0;
    int nz = 0;
    std::vector<double> data;

    PhysicalField() = default;
    PhysicalField(int nx_, int nz_) : nx(nx_), nz(nz_), data(static_cast<std::size_t>(nx_) * nz_, 0.0) {}

    double& at(int i, int j) { return data[static_cast<std::size_t>(j) * nx + i]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(j) * nx + i]; }
};

// Half spectrum k = 0..nx/2; negative modes follow from Hermitian symmetry.
// Normalised so that f(x) = sum_k c_k exp(i 2 pi k x / L).
struct ModalField {
    int nx = 0;
    int nz = 0;
    double time_tag = 0.0;
    std::vector<cplx> coeffs;

    ModalField() = default;
    ModalField(int nx_, int nz_, double t = 0.0)
        : nx(nx_), nz(nz_), time_tag(t), coeffs(static_cast<std::size_t>(nx_ / 2 + 1) * nz_) {}

    int nk() const { return nx / 2 + 1; }

    cplx& at(int k, int j) { return coeffs[static_cast<std::size_t>(k) * nz + j]; }
    cplx at(int k, int j) const { return coeffs[static_cast<std::size_t>(k) * nz + j]; }

    std::span<cplx> mode(int k) { return {coeffs.data() + static_cast<std::size_t>(k) * nz, static_cast<std::size_t>(nz)}; }
    std::span<const cplx> mode(int k) const {
        return {coeffs.data() + static_cast<std::size_t>(k) * nz, static_cast<std::size_t>(nz)};
    }

    // Any k in (-nx/2, nx/2].
    cplx coeff(int k, int j) const {
        if (k >= 0) return at(k, j);
        return std::conj(at(-k, j));
    }

    void enforce_hermitian() {
        for (int j = 0; j < nz; ++j) {
            at(0, j).imag(0.0);
            at(nx / 2, j).imag(0.0);
        }
    }

    bool same_shape(const ModalField& o) const { return nx == o.nx && nz == o.nz; }
};

namespace detail {

class FftPlans {
public:
    struct Pair {
        fftw_plan forward = nullptr;
        fftw_plan backward = nullptr;
    };

    static const Pair& get(int n) {
        static FftPlans inst;
        std::lock_guard<std::mutex> lock(inst.mutex_);
        auto it = inst.plans_.find(n);
        if (it != inst.plans_.end()) return it->second;
        std::vector<double> r(n);
        std::vector<fftw_complex> c(n / 2 + 1);
        Pair p;
        p.forward = fftw_plan_dft_r2c_1d(n, r.data(), c.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
        p.backward = fftw_plan_dft_c2r_1d(n, c.data(), r.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
        return inst.plans_.emplace(n, p).first->second;
    }

    ~FftPlans() {
        for (auto& [n, p] : plans_) {
            fftw_destroy_plan(p.forward);
            fftw_destroy_plan(p.backward);
        }
    }

private:
    std::mutex mutex_;
    std::map<int, Pair> plans_;
};

} // namespace detail

// Half-spectrum coefficients of real samples on a uniform periodic lattice.
inline void forward_fft(std::span<const double> samples, std::span<cplx> out) {
    const int n = static_cast<int>(samples.size());
    const auto& plan = detail::FftPlans::get(n);
    std::vector<double> in(samples.begin(), samples.end());
    fftw_execute_dft_r2c(plan.forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    for (int k = 0; k <= n / 2; ++k) out[k] /= static_cast<double>(n);
    out[0].imag(0.0);
    out[n / 2].imag(0.0);
}

inline void inverse_fft(std::span<const cplx> half, std::span<double> out) {
    const int n = static_cast<int>(out.size());
    const auto& plan = detail::FftPlans::get(n);
    std::vector<cplx> in(half.begin(), half.end());
    fftw_execute_dft_c2r(plan.backward, reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

inline ModalField to_modal(const PhysicalField& f, double time_tag = 0.0) {
    ModalField m(f.nx, f.nz, time_tag);
    std::vector<cplx> half(m.nk());
    for (int j = 0; j < f.nz; ++j) {
        forward_fft(std::span<const double>(f.data.data() + static_cast<std::size_t>(j) * f.nx, f.nx), half);
        for (int k = 0; k < m.nk(); ++k) m.at(k, j) = half[k];
    }
    return m;
}

inline PhysicalField from_modal(const ModalField& m) {
    PhysicalField f(m.nx, m.nz);
    std::vector<cplx> half(m.nk());
    for (int j = 0; j < m.nz; ++j) {
        for (int k = 0; k < m.nk(); ++k) half[k] = m.at(k, j);
        inverse_fft(half, std::span<double>(f.data.data() + static_cast<std::size_t>(j) * m.nx, m.nx));
    }
    return f;
}

// Sample f(x, z_j) on the grid and transform.
inline ModalField sample_modal(const ChannelGrid& g, const std::function<double(double, double)>& f,
                               double time_tag = 0.0) {
    PhysicalField p(g.nx, g.nz());
    for (int j = 0; j < g.nz(); ++j)
        for (int i = 0; i < g.nx; ++i) p.at(i, j) = f(g.x(i), g.z_nodes[j]);
    return to_modal(p, time_tag);
}

inline Profile1D sample_profile(const ChannelGrid& g, const std::function<double(double)>& f,
                                double time_tag = 0.0) {
    Profile1D p;
    p.time_tag = time_tag;
    p.values.resize(g.nz());
    for (int j = 0; j < g.nz(); ++j) p.values[j] = f(g.z_nodes[j]);
    return p;
}

inline Profile1D ddz(const Profile1D& f, const ChannelGrid& g) {
    if (static_cast<int>(f.values.size()) != g.nz()) throw DimensionError("profile length does not match grid");
    Profile1D out;
    out.time_tag = f.time_tag;
    out.values.resize(g.nz());
    g.stencil.first<double>(f.values, out.values);
    return out;
}

inline ModalField ddz(const ModalField& f, const ChannelGrid& g) {
    if (f.nz != g.nz() || f.nx != g.nx) throw DimensionError("modal field does not match grid");
    ModalField out(f.nx, f.nz, f.time_tag);
    for (int k = 0; k < f.nk(); ++k) g.stencil.first<cplx>(f.mode(k), out.mode(k));
    out.enforce_hermitian();
    return out;
}

inline Profile1D d2dz2(const Profile1D& f, const ChannelGrid& g) {
    if (static_cast<int>(f.values.size()) != g.nz()) throw DimensionError("profile length does not match grid");
    Profile1D out;
    out.time_tag = f.time_tag;
    out.values.resize(g.nz());
    g.stencil.second<double>(f.values, out.values);
    return out;
}

inline ModalField d2dz2(const ModalField& f, const ChannelGrid& g) {
    if (f.nz != g.nz() || f.nx != g.nx) throw DimensionError("modal field does not match grid");
    ModalField out(f.nx, f.nz, f.time_tag);
    for (int k = 0; k < f.nk(); ++k) g.stencil.second<cplx>(f.mode(k), out.mode(k));
    out.enforce_hermitian();
    return out;
}

// ---------------------------------------------------------------- norms

struct NormTriple {
    double l2 = 0.0;
    double h1 = 0.0;
    double linf = 0.0;
};

inline NormTriple max_over_time(std::span<const NormTriple> series) {
    NormTriple m;
    for (const auto& n : series) {
        m.l2 = std::max(m.l2, n.l2);
        m.h1 = std::max(m.h1, n.h1);
        m.linf = std::max(m.linf, n.linf);
    }
    return m;
}

// A set of fields whose norms are combined: squares add for L2 and H1, the
// sup norm is the max over members.
class FieldSet {
public:
    FieldSet& add(const Profile1D& p) {
        profiles_.push_back(&p);
        return *this;
    }
    FieldSet& add(const ModalField& m) {
        modal_.push_back(&m);
        return *this;
    }
    const std::vector<const Profile1D*>& profiles() const { return profiles_; }
    const std::vector<const ModalField*>& modal() const { return modal_; }

private:
    std::vector<const Profile1D*> profiles_;
    std::vector<const ModalField*> modal_;
};

// Unit measure in y. L2 over (x, z) uses Parseval with period L.
inline NormTriple norms(const FieldSet& set, const ChannelGrid& g) {
    const int nz = g.nz();
    const double L = g.length_L;
    double l2sq = 0.0;
    double gradsq = 0.0;
    double linf = 0.0;
    std::vector<double> dz(nz);
    for (const Profile1D* p : set.profiles()) {
        if (static_cast<int>(p->values.size()) != nz) throw DimensionError("profile length does not match grid");
        g.stencil.first<double>(p->values, dz);
        for (int j = 0; j < nz; ++j) {
            l2sq += L * g.z_weights[j] * p->values[j] * p->values[j];
            gradsq += L * g.z_weights[j] * dz[j] * dz[j];
            linf = std::max(linf, std::abs(p->values[j]));
        }
    }
    std::vector<cplx> dzc(nz);
    for (const ModalField* m : set.modal()) {
        if (m->nz != nz || m->nx != g.nx) throw DimensionError("modal field does not match grid");
        for (int k = 0; k < m->nk(); ++k) {
            // Modes 0 and nx/2 appear once in the full spectrum, the rest twice.
            const double mult = (k == 0 || k == m->nx / 2) ? 1.0 : 2.0;
            const double kt = g.wavenumber(k);
            auto c = m->mode(k);
            g.stencil.first<cplx>(c, dzc);
            for (int j = 0; j < nz; ++j) {
                const double a2 = std::norm(c[j]);
                l2sq += mult * L * g.z_weights[j] * a2;
                gradsq += mult * L * g.z_weights[j] * (kt * kt * a2 + std::norm(dzc[j]));
            }
        }
        const PhysicalField phys = from_modal(*m);
        for (double v : phys.data) linf = std::max(linf, std::abs(v));
    }
    return {std::sqrt(l2sq), std::sqrt(l2sq + gradsq), linf};
}

inline NormTriple norms(const Profile1D& p, const ChannelGrid& g) { return norms(FieldSet().add(p), g); }
inline NormTriple norms(const ModalField& m, const ChannelGrid& g) { return norms(FieldSet().add(m), g); }

// ---------------------------------------------------------------- half line

struct BLGrid {
    double z_max = 12.0;
    int nzb = 1201;
    std::vector<double> nodes;
    Stencil1D stencil;

    double spacing() const { return z_max / (nzb - 1); }
    int size() const { return nzb; }
};

inline BLGrid build_bl_grid(double z_max, int nzb) {
    if (!(z_max >= 12.0)) throw ConfigError("z_max must be >= 12");
    if (nzb < 3) throw ConfigError("nzb must be >= 3");
    if (z_max / (nzb - 1) > 0.05 + 1e-15) throw ConfigError("boundary-layer spacing must be <= 0.05");
    BLGrid b;
    b.z_max = z_max;
    b.nzb = nzb;
    b.nodes.resize(nzb);
    for (int j = 0; j < nzb; ++j) b.nodes[j] = z_max * j / (nzb - 1);
    b.stencil = Stencil1D(b.nodes);
    return b;
}

inline constexpr double kDecayThreshold = 1e-8;

// Truncation is suspect when the last interior node still carries a visible
// fraction of the profile (the far-field node itself is pinned to zero).
template <class T>
bool decay_violated(std::span<const T> profile) {
    double peak = 0.0;
    for (const T& v : profile) peak = std::max(peak, static_cast<double>(std::abs(v)));
    if (peak == 0.0 || profile.size() < 2) return false;
    return std::abs(profile[profile.size() - 2]) > kDecayThreshold * peak;
}

// C2 cubic B-spline on the uniform half-line grid; identically zero past z_max.
class HalflineSpline {
public:
    HalflineSpline() = default;
    HalflineSpline(std::span<const double> values, const BLGrid& grid) : z_max_(grid.z_max) {
        if (static_cast<int>(values.size()) != grid.nzb) throw DimensionError("profile length does not match BL grid");
        bool all_zero = std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
        if (!all_zero) {
            // Fourth-order one-sided end slopes keep the second derivative second-order accurate up to the ends.
            const std::size_t n = values.size();
            const double h = grid.spacing();
            auto v = [&](std::size_t i) { return values[i]; };
            const double dl = (-25 * v(0) + 48 * v(1) - 36 * v(2) + 16 * v(3) - 3 * v(4)) / (12 * h);
            const double dr = (25 * v(n - 1) - 48 * v(n - 2) + 36 * v(n - 3) - 16 * v(n - 4) + 3 * v(n - 5)) / (12 * h);
            spline_ = Spline(values.data(), values.size(), 0.0, grid.spacing(), dl, dr);
        }
        zero_ = all_zero;
    }

    double operator()(double Z) const { return (zero_ || Z > z_max_) ? 0.0 : spline_(Z); }
    double prime(double Z) const { return (zero_ || Z > z_max_) ? 0.0 : spline_.prime(Z); }
    double double_prime(double Z) const { return (zero_ || Z > z_max_) ? 0.0 : spline_.double_prime(Z); }

private:
    using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;
    Spline spline_;
    double z_max_ = 0.0;
    bool zero_ = true;
};

class ComplexHalflineSpline {
public:
    ComplexHalflineSpline() = default;
    ComplexHalflineSpline(std::span<const cplx> values, const BLGrid& grid) {
        std::vector<double> re(values.size()), im(values.size());
        for (std::size_t j = 0; j < values.size(); ++j) {
            re[j] = values[j].real();
            im[j] = values[j].imag();
        }
        re_ = HalflineSpline(re, grid);
        im_ = HalflineSpline(im, grid);
    }
    cplx operator()(double Z) const { return {re_(Z), im_(Z)}; }
    cplx prime(double Z) const { return {re_.prime(Z), im_.prime(Z)}; }
    cplx double_prime(double Z) const { return {re_.double_prime(Z), im_.double_prime(Z)}; }

private:
    HalflineSpline re_, im_;
};

struct HalflineValues {
    std::vector<double> values;
    bool decay_warning = false;
};

inline HalflineValues interp_halfline(std::span<const double> profile, const BLGrid& grid,
                                      std::span<const double> queries) {
    HalflineValues out;
    out.decay_warning = decay_violated(profile);
    HalflineSpline s(profile, grid);
    out.values.reserve(queries.size());
    for (double q : queries) out.values.push_back(s(q));
    return out;
}

} // namespace mhdbl
