#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mhdbl/errors.hpp"
#include "mhdbl/stencil.hpp"

namespace mhdbl {

enum class BcKind { dirichlet, neumann };

inline const char* to_string(BcKind k) { return k == BcKind::dirichlet ? "dirichlet" : "neumann"; }

// End condition for a scalar unknown: value, or one-sided slope (in the node
// coordinate, pointing towards increasing index) equal to `value`.
struct ScalarEnd {
    BcKind kind = BcKind::dirichlet;
    double value = 0.0;
};

// Crank-Nicolson for u_t = nu u_zz + s on a nonuniform grid, tridiagonal solve.
class ScalarCrankNicolson {
public:
    ScalarCrankNicolson(const Stencil1D& st, double nu) : st_(&st), nu_(nu) {
        const int n = st.size();
        a_.resize(n);
        b_.resize(n);
        c_.resize(n);
        r_.resize(n);
    }

    void step(std::span<double> u, double dt, ScalarEnd left, ScalarEnd right,
              std::span<const double> src_n = {}, std::span<const double> src_np1 = {}) {
        const int n = st_->size();
        if (static_cast<int>(u.size()) != n) throw DimensionError("state length does not match stencil");
        if (!(dt > 0.0)) throw ConfigError("dt must be positive");
        const double h = 0.5 * dt * nu_;
        for (int j = 1; j < n - 1; ++j) {
            const auto& w = st_->d2[j].w;
            a_[j] = -h * w[0];
            b_[j] = 1.0 - h * w[1];
            c_[j] = -h * w[2];
            r_[j] = u[j] + h * (w[0] * u[j - 1] + w[1] * u[j] + w[2] * u[j + 1]);
            if (!src_n.empty()) r_[j] += 0.5 * dt * (src_n[j] + src_np1[j]);
        }
        if (left.kind == BcKind::dirichlet) {
            b_[0] = 1.0;
            c_[0] = 0.0;
            r_[0] = left.value;
        } else {
            const auto& e = st_->d1[0].w;
            b_[0] = e[0] - e[2] * a_[1] / c_[1];
            c_[0] = e[1] - e[2] * b_[1] / c_[1];
            r_[0] = left.value - e[2] * r_[1] / c_[1];
        }
        if (right.kind == BcKind::dirichlet) {
            a_[n - 1] = 0.0;
            b_[n - 1] = 1.0;
            r_[n - 1] = right.value;
        } else {
            const auto& f = st_->d1[n - 1].w;
            a_[n - 1] = f[1] - f[0] * b_[n - 2] / a_[n - 2];
            b_[n - 1] = f[2] - f[0] * c_[n - 2] / a_[n - 2];
            r_[n - 1] = right.value - f[0] * r_[n - 2] / a_[n - 2];
        }
        // Thomas
        for (int j = 1; j < n; ++j) {
            const double m = a_[j] / b_[j - 1];
            b_[j] -= m * c_[j - 1];
            r_[j] -= m * r_[j - 1];
        }
        u[n - 1] = r_[n - 1] / b_[n - 1];
        for (int j = n - 2; j >= 0; --j) u[j] = (r_[j] - c_[j] * u[j + 1]) / b_[j];
        if (!std::isfinite(u[0]) || !std::isfinite(u[n - 1])) throw SolverError("tridiagonal solve produced non-finite values");
    }

private:
    const Stencil1D* st_;
    double nu_;
    std::vector<double> a_, b_, c_, r_;
};

struct PairEnd {
    BcKind kind[2] = {BcKind::dirichlet, BcKind::dirichlet};
    std::complex<double> value[2] = {0.0, 0.0};
};

// Crank-Nicolson for the pair q = (p, m) of complex mode amplitudes,
//   q_t = nu q_zz - decay q + i kt [[-U, B], [B, -U]] q + F,
// with U, B frozen at the half step. Block-tridiagonal solve, 2x2 blocks.
class PairCrankNicolson {
public:
    using cplx = std::complex<double>;
    using Mat = Eigen::Matrix2cd;
    using Vec = Eigen::Vector2cd;

    PairCrankNicolson(const Stencil1D& st, double nu) : st_(&st), nu_(nu) {
        const int n = st.size();
        lo_.resize(n);
        up_.resize(n);
        diag_.resize(n);
        rhs_.resize(n);
    }

    struct Source {
        std::span<const cplx> p_n, m_n, p_np1, m_np1;
        bool empty() const { return p_n.empty(); }
    };

    void step(std::span<cplx> p, std::span<cplx> m, double dt, double kt, double decay,
              std::span<const double> U, std::span<const double> B, const PairEnd& left, const PairEnd& right,
              const Source& src = {}) {
        const int n = st_->size();
        if (static_cast<int>(p.size()) != n || static_cast<int>(m.size()) != n)
            throw DimensionError("state length does not match stencil");
        const double h = 0.5 * dt * nu_;
        const cplx ik = cplx(0.0, kt);
        const double hd = 0.5 * dt;
        for (int j = 1; j < n - 1; ++j) {
            const auto& w = st_->d2[j].w;
            const cplx diag_op = -ik * U[j];
            const cplx off_op = ik * B[j];
            // implicit side
            lo_[j] = -h * w[0];
            up_[j] = -h * w[2];
            const cplx dd = 1.0 - h * w[1] + hd * decay - hd * diag_op;
            const cplx oo = -hd * off_op;
            diag_[j] << dd, oo, oo, dd;
            // explicit side
            const cplx ed = 1.0 + h * w[1] - hd * decay + hd * diag_op;
            const cplx eo = hd * off_op;
            const cplx lp = h * (w[0] * p[j - 1] + w[2] * p[j + 1]);
            const cplx lm = h * (w[0] * m[j - 1] + w[2] * m[j + 1]);
            rhs_[j](0) = ed * p[j] + eo * m[j] + lp;
            rhs_[j](1) = eo * p[j] + ed * m[j] + lm;
            if (!src.empty()) {
                rhs_[j](0) += hd * (src.p_n[j] + src.p_np1[j]);
                rhs_[j](1) += hd * (src.m_n[j] + src.m_np1[j]);
            }
        }
        // Wall rows. Off-diagonal blocks of interior rows are scalar multiples
        // of the identity, which keeps the Neumann elimination componentwise.
        Mat up0 = Mat::Zero();
        Mat d0 = Mat::Identity();
        Vec r0;
        for (int c = 0; c < 2; ++c) {
            if (left.kind[c] == BcKind::dirichlet) {
                r0(c) = left.value[c];
            } else {
                const auto& e = st_->d1[0].w;
                const double lam = lo_[1].real(), mu = up_[1].real();
                d0(c, c) = e[0] - e[2] * lam / mu;
                up0.row(c) = -(e[2] / mu) * diag_[1].row(c);
                up0(c, c) += e[1];
                r0(c) = left.value[c] - e[2] * rhs_[1](c) / mu;
            }
        }
        Mat dn = Mat::Identity();
        Mat lon = Mat::Zero();
        Vec rn;
        for (int c = 0; c < 2; ++c) {
            if (right.kind[c] == BcKind::dirichlet) {
                rn(c) = right.value[c];
            } else {
                const auto& f = st_->d1[n - 1].w;
                const double lam = lo_[n - 2].real(), mu = up_[n - 2].real();
                dn(c, c) = f[2] - f[0] * mu / lam;
                lon.row(c) = -(f[0] / lam) * diag_[n - 2].row(c);
                lon(c, c) += f[1];
                rn(c) = right.value[c] - f[0] * rhs_[n - 2](c) / lam;
            }
        }

        // Block Thomas. Interior lower/upper blocks are lo_[j] I and up_[j] I.
        std::vector<Mat>& dp = diag_;
        dp[0] = d0;
        rhs_[0] = r0;
        std::vector<Mat>& upm = upmat_;
        upm.resize(n);
        upm[0] = up0;
        Mat inv_prev = dp[0].inverse();
        inv_.resize(n);
        inv_[0] = inv_prev;
        for (int j = 1; j < n; ++j) {
            Mat lower = (j == n - 1) ? lon : Mat(lo_[j] * Mat::Identity());
            if (j == n - 1) dp[j] = dn, rhs_[j] = rn, upm[j] = Mat::Zero();
            else upm[j] = up_[j] * Mat::Identity();
            const Mat mult = lower * inv_[j - 1];
            dp[j] -= mult * upm[j - 1];
            rhs_[j] -= mult * rhs_[j - 1];
            inv_[j] = dp[j].inverse();
        }
        Vec q = inv_[n - 1] * rhs_[n - 1];
        p[n - 1] = q(0);
        m[n - 1] = q(1);
        for (int j = n - 2; j >= 0; --j) {
            q = inv_[j] * (rhs_[j] - upm[j] * q);
            p[j] = q(0);
            m[j] = q(1);
        }
        // The block inverse reproduces Dirichlet data only to rounding.
        if (left.kind[0] == BcKind::dirichlet) p[0] = left.value[0];
        if (left.kind[1] == BcKind::dirichlet) m[0] = left.value[1];
        if (right.kind[0] == BcKind::dirichlet) p[n - 1] = right.value[0];
        if (right.kind[1] == BcKind::dirichlet) m[n - 1] = right.value[1];
        if (!std::isfinite(std::abs(p[0])) || !std::isfinite(std::abs(m[0])))
            throw SolverError("block solve produced non-finite values");
    }

private:
    const Stencil1D* st_;
    double nu_;
    std::vector<cplx> lo_, up_;
    std::vector<Mat> diag_, upmat_, inv_;
    std::vector<Vec> rhs_;
};

} // namespace mhdbl
