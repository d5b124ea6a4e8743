#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "mhdbl/composer.hpp"

namespace mhdbl {

// One named remainder term at one time. Axial-equation terms (equations 1
// and 3) are x-independent and live in mode 0 only.
struct Term {
    std::string name;
    int equation = 0;
    ModalField value;
};

enum class RemainderVariant { printed, exact };

struct RemainderInputs {
    double epsilon = 0.0;
    BcMode bc_mode = BcMode::conducting;
    int order = 0;
    const ChannelGrid* grid = nullptr;
    const BLGrid* bl = nullptr;
    const OuterSolution* outer = nullptr;  // with traces
    const CorrectorSet* correctors = nullptr;
    const EtaSet* eta = nullptr;           // conducting mode
};

// Names, in equation order, of the terms produced for a configuration.
inline std::vector<std::pair<std::string, int>> term_layout(BcMode mode, int order) {
    const bool cond = mode == BcMode::conducting;
    if (order == 1)
        return {{"A", 1}, {"B", 1}, {"C", 2}, {"Dhat", 2}, {"Ehat", 2}, {"Mhat", 2}, {"F", 3}, {"G", 3},
                {"H", 4}, {"Ihat", 4}, {"Jhat", 4}, {"Nhat", 4}};
    if (cond)
        return {{"A", 1}, {"B", 1}, {"C", 2}, {"D1", 2}, {"E1", 2}, {"F1", 3}, {"G1", 3}, {"G2", 3},
                {"H", 4}, {"I1", 4}, {"J1", 4}, {"J2", 4}};
    return {{"A", 1}, {"B", 1}, {"C", 2}, {"D", 2}, {"E", 2}, {"F", 3}, {"G", 3}, {"H", 4}, {"I", 4}, {"J", 4}};
}

// Terms whose printed form differs from the algebraic identity, with the reason.
inline std::map<std::string, std::string> flagged_terms(BcMode mode, int order) {
    std::map<std::string, std::string> f;
    f["H"] = "upper-wall product uses h^u d_x h^u instead of h^u d_x theta^u";
    if (order == 1) {
        f["Ehat"] = "Taylor remainder of the outer coefficients truncated at second order";
        f["Jhat"] = "Taylor remainder truncated; upper-wall Z^2 should be (Z^u)^2";
        f["Mhat"] = "misses -2 eps psi' d_Z theta^1 and carries a spurious d_xx h^1";
        f["Nhat"] = "misses -2 eps psi' d_Z h^1 and carries a spurious d_xx theta^1";
    } else {
        const std::string taylor = "outer coefficient differences replaced by first-order Taylor terms";
        if (mode == BcMode::conducting) {
            f["D1"] = taylor;
            f["I1"] = taylor;
            f["G1"] = "upper-wall term has the wrong sign";
            f["J1"] = "upper-wall term uses psi'' instead of psi'";
        } else {
            f["D"] = taylor;
            f["I"] = taylor;
        }
    }
    return f;
}

// Evaluates every remainder term at recorded snapshot s.
inline std::vector<Term> remainder_terms(const RemainderInputs& in, std::size_t s, RemainderVariant variant) {
    const ChannelGrid& g = *in.grid;
    const OuterSolution& out = *in.outer;
    const double eps = in.epsilon, se = std::sqrt(eps), e32 = eps * se;
    const bool printed = variant == RemainderVariant::printed;
    const bool use_eta = in.bc_mode == BcMode::conducting && in.order == 0;
    if (in.order == 1 && in.bc_mode != BcMode::dirichlet) throw ConfigError("order-1 remainders need dirichlet mode");
    if (use_eta && !in.eta) throw ConfigError("remainder_terms: conducting mode needs eta");
    if (out.lower.size() != out.times.size()) throw ConfigError("remainder_terms: outer traces missing");
    const int nz = g.nz(), nk = g.nk();
    const double t = out.times[s];

    std::vector<Term> terms;
    std::map<std::string, std::size_t> idx;
    for (auto& [name, eq] : term_layout(in.bc_mode, in.order)) {
        idx[name] = terms.size();
        terms.push_back({name, eq, ModalField(g.nx, nz, t)});
    }
    auto T = [&](const char* n) -> ModalField& { return terms[idx.at(n)].value; };
    const bool o1 = in.order == 1;
    const char* nD = o1 ? "Dhat" : (use_eta ? "D1" : "D");
    const char* nE = o1 ? "Ehat" : (use_eta ? "E1" : "E");
    const char* nI = o1 ? "Ihat" : (use_eta ? "I1" : "I");
    const char* nJ = o1 ? "Jhat" : (use_eta ? "J1" : "J");
    const char* nF = use_eta ? "F1" : "F";
    const char* nG = use_eta ? "G1" : "G";

    // Terms spread over the whole channel: -eps times the outer Laplacian.
    const Profile1D u1zz = d2dz2(out.u1[s], g), h1zz = d2dz2(out.h1, g);
    const ModalField u2zz = d2dz2(out.u2[s], g), h2zz = d2dz2(out.h2[s], g);
    for (int j = 0; j < nz; ++j) {
        T("B").at(0, j) += -eps * u1zz.values[j];
        T(nG).at(0, j) += -eps * h1zz.values[j];
        for (int k = 0; k < nk; ++k) {
            const double k2 = std::pow(g.wavenumber(k), 2);
            T(nE).at(k, j) += -eps * (u2zz.at(k, j) - k2 * out.u2[s].at(k, j));
            T(nJ).at(k, j) += -eps * (h2zz.at(k, j) - k2 * out.h2[s].at(k, j));
        }
    }

    for (Wall w : {Wall::lower, Wall::upper}) {
        const bool up = w == Wall::upper;
        const WallCorrectors& wc = in.correctors->at(w);
        if (std::abs(wc.times[s] - t) > 1e-12) throw DimensionError("corrector and outer snapshots differ");
        const LayerSample L = sample_layer(wc, s, eps, g, *in.bl, o1);
        const WallTrace& tr = out.trace(s, w);
        const EtaWall* ew = use_eta ? &in.eta->at(w) : nullptr;
        for (std::size_t i = 0; i < L.nodes.size(); ++i) {
            const int j = L.nodes[i];
            const double Z = L.Z[i], p = L.ps[i], dp = L.dps[i], d2p = L.d2ps[i];
            const double th1 = L.th1[i], h1 = L.h1[i];
            const double u1o = out.u1[s].values[j], H1o = out.h1.values[j];
            const Smooth q = use_eta ? eta_shape(Z) : Smooth{};
            const double s1 = use_eta ? ew->s1[s] : 0.0;
            const double e1 = s1 * q.v, e1Z = s1 * q.d1, e1ZZ = s1 * q.d2;

            T("A").at(0, j) += -2.0 * se * dp * L.th1Z[i];
            T("B").at(0, j) += -eps * d2p * th1;
            T(nF).at(0, j) += -2.0 * se * dp * L.h1Z[i];
            T(nG).at(0, j) += -eps * d2p * h1;
            if (use_eta) {
                T("F1").at(0, j) += -se * p * e1ZZ;
                T("G1").at(0, j) += (printed && up ? 2.0 : -2.0) * eps * dp * e1Z;
                T("G2").at(0, j) += -e32 * d2p * e1;
            }

            for (int k = 0; k < nk; ++k) {
                const double kt = g.wavenumber(k), k2 = kt * kt;
                const cplx ik(0.0, kt);
                const cplx th2 = L.th2[k][i], h2 = L.h2[k][i];
                const cplx th2Z = L.th2Z[k][i], h2Z = L.h2Z[k][i];
                const cplx u2o = out.u2[s].at(k, j), H2o = out.h2[s].at(k, j);
                const cplx u2w = tr.u2[k], h2w = tr.h2[k];

                T("C").at(k, j) += p * (p - 1.0) * (th1 * ik * th2 - h1 * ik * h2);
                const cplx hx = printed && up ? h2 : th2;
                T("H").at(k, j) += p * (p - 1.0) * (th1 * ik * h2 - h1 * ik * hx);

                if (!o1) {
                    if (printed) {
                        T(nD).at(k, j) += se * p * Z * (tr.dU * ik * th2 + th1 * ik * tr.du2[k] - tr.dB * ik * h2 - h1 * ik * tr.dh2[k]);
                        T(nI).at(k, j) += se * p * Z * (tr.dU * ik * h2 + th1 * ik * tr.dh2[k] - tr.dB * ik * th2 - h1 * ik * tr.du2[k]);
                    } else {
                        T(nD).at(k, j) += p * ((u1o - tr.U) * ik * th2 + th1 * ik * (u2o - u2w) - (H1o - tr.B) * ik * h2 - h1 * ik * (H2o - h2w));
                        T(nI).at(k, j) += p * ((u1o - tr.U) * ik * h2 + th1 * ik * (H2o - h2w) - (H1o - tr.B) * ik * th2 - h1 * ik * (u2o - u2w));
                    }
                    T(nD).at(k, j) += -2.0 * se * dp * th2Z;
                    T(nI).at(k, j) += -2.0 * se * dp * h2Z;
                    T(nE).at(k, j) += eps * (k2 * p * th2 - d2p * th2);
                    T(nJ).at(k, j) += eps * (k2 * p * h2 - d2p * h2);
                    if (use_eta) {
                        const cplx e2 = ew->s2[s][k] * q.v, e2Z = ew->s2[s][k] * q.d1, e2ZZ = ew->s2[s][k] * q.d2;
                        const cplx e2t = ew->ds2dt[s][k] * q.v;
                        T("D1").at(k, j) += -se * (p * p * h1 * ik * e2 + p * e1 * ik * H2o + p * p * e1 * ik * h2 + p * H1o * ik * e2);
                        T("E1").at(k, j) += -eps * p * p * e1 * ik * e2;
                        T("I1").at(k, j) += se * (p * e2t - p * e2ZZ + p * u1o * ik * e2 + p * p * th1 * ik * e2 -
                                                  p * e1 * ik * u2o - p * p * e1 * ik * th2);
                        T("J1").at(k, j) += -2.0 * eps * (printed && up ? d2p : dp) * e2Z;
                        T("J2").at(k, j) += -e32 * (d2p * e2 - k2 * p * e2);
                    }
                    continue;
                }

                const cplx t1 = L.th21[k][i], g1 = L.h21[k][i];
                const cplx t1Z = L.th21Z[k][i], g1Z = L.h21Z[k][i];
                T("Dhat").at(k, j) += se * p * (p - 1.0) * (th1 * ik * t1 - h1 * ik * g1) - 2.0 * se * dp * th2Z;
                T("Ihat").at(k, j) += se * p * (p - 1.0) * (th1 * ik * g1 - h1 * ik * t1) - 2.0 * se * dp * h2Z;
                T("Ehat").at(k, j) += eps * (k2 * p * th2 - d2p * th2);
                T("Jhat").at(k, j) += eps * (k2 * p * h2 - d2p * h2);
                if (printed) {
                    const double Z2 = Z * Z;
                    const double Zj = up ? g.z_nodes[j] / se : Z;  // the printed upper-wall Z
                    T("Ehat").at(k, j) += eps * p * (Z * ik * t1 * tr.dU + 0.5 * tr.d2U * Z2 * ik * th2 +
                                                     0.5 * Z2 * th1 * ik * tr.d2u2[k] - Z * ik * g1 * tr.dB -
                                                     0.5 * tr.d2B * Z2 * ik * h2 - 0.5 * Z2 * h1 * ik * tr.d2h2[k]);
                    T("Jhat").at(k, j) += eps * p * (Z * ik * g1 * tr.dU + 0.5 * tr.d2U * Zj * Zj * ik * h2 +
                                                     0.5 * Z2 * th1 * ik * tr.d2h2[k] - Z * ik * t1 * tr.dB -
                                                     0.5 * tr.d2B * Z2 * ik * th2 - 0.5 * Z2 * h1 * ik * tr.d2u2[k]);
                    T("Mhat").at(k, j) += e32 * (-d2p * t1 + p * (0.5 * tr.d2U * Z2 * ik * t1 + k2 * t1) -
                                                 p * (0.5 * tr.d2B * Z2 * ik * g1 + k2 * g1));
                    T("Nhat").at(k, j) += e32 * (-d2p * g1 + p * (0.5 * tr.d2U * Z2 * ik * g1 + k2 * g1) -
                                                 p * (0.5 * tr.d2B * Z2 * ik * t1 + k2 * t1));
                } else {
                    const double dUr = u1o - tr.U - se * Z * tr.dU;
                    const double dBr = H1o - tr.B - se * Z * tr.dB;
                    const cplx du2r = u2o - u2w - se * Z * tr.du2[k];
                    const cplx dh2r = H2o - h2w - se * Z * tr.dh2[k];
                    T("Ehat").at(k, j) += p * (dUr * ik * th2 + th1 * ik * du2r - dBr * ik * h2 - h1 * ik * dh2r) +
                                          se * p * ((u1o - tr.U) * ik * t1 - (H1o - tr.B) * ik * g1);
                    T("Jhat").at(k, j) += p * (dUr * ik * h2 + th1 * ik * dh2r - dBr * ik * th2 - h1 * ik * du2r) +
                                          se * p * ((u1o - tr.U) * ik * g1 - (H1o - tr.B) * ik * t1);
                    T("Mhat").at(k, j) += e32 * (k2 * p * t1 - d2p * t1) - 2.0 * eps * dp * t1Z;
                    T("Nhat").at(k, j) += e32 * (k2 * p * g1 - d2p * g1) - 2.0 * eps * dp * g1Z;
                }
            }
        }
    }
    for (auto& tm : terms) tm.value.enforce_hermitian();
    return terms;
}

// ---------------------------------------------------------------- cross-check

struct EquationCheck {
    int equation = 0;
    double t = 0.0;
    double residual_l2 = 0.0;
    double gap_printed = 0.0;  // ||R - sum printed|| / ||R||
    double gap_exact = 0.0;    // same with flagged terms corrected
};

struct TermReport {
    std::string name;
    int equation = 0;
    double t = 0.0;
    double printed_l2 = 0.0, exact_l2 = 0.0, difference_l2 = 0.0;
    bool flagged = false;
    std::string reason;
};

struct CrossCheck {
    std::vector<EquationCheck> equations;
    std::vector<TermReport> terms;

    double worst_gap(bool exact) const {
        double m = 0.0;
        for (const auto& e : equations) m = std::max(m, exact ? e.gap_exact : e.gap_printed);
        return m;
    }
};

inline ModalField axial_as_modal(const Profile1D& p, int nx) {
    ModalField m(nx, static_cast<int>(p.values.size()), p.time_tag);
    for (std::size_t j = 0; j < p.values.size(); ++j) m.at(0, static_cast<int>(j)) = p.values[j];
    return m;
}

// Compares the substitution residual of the assembled solution with the sum
// of the remainder terms at the snapshots listed in `at` (indices into the
// assembled solution, which must share snapshots with the inputs).
inline CrossCheck remainder_crosscheck(const RemainderInputs& in, const std::vector<ResidualSnapshot>& res,
                                       std::span<const std::size_t> at) {
    const ChannelGrid& g = *in.grid;
    const auto flags = flagged_terms(in.bc_mode, in.order);
    CrossCheck cc;
    for (std::size_t s : at) {
        const auto P = remainder_terms(in, s, RemainderVariant::printed);
        const auto E = remainder_terms(in, s, RemainderVariant::exact);
        const ResidualSnapshot& R = res.at(s);
        const ModalField r[4] = {axial_as_modal(R.r1, g.nx), R.r2, axial_as_modal(R.r3, g.nx), R.r4};
        for (int eq = 1; eq <= 4; ++eq) {
            ModalField dp = r[eq - 1], de = r[eq - 1];
            for (std::size_t m = 0; m < P.size(); ++m) {
                if (P[m].equation != eq) continue;
                for (std::size_t i = 0; i < dp.coeffs.size(); ++i) {
                    dp.coeffs[i] -= P[m].value.coeffs[i];
                    de.coeffs[i] -= E[m].value.coeffs[i];
                }
            }
            EquationCheck ec;
            ec.equation = eq;
            ec.t = R.t;
            ec.residual_l2 = norms(r[eq - 1], g).l2;
            const double denom = ec.residual_l2 > 0.0 ? ec.residual_l2 : 1.0;
            ec.gap_printed = norms(dp, g).l2 / denom;
            ec.gap_exact = norms(de, g).l2 / denom;
            cc.equations.push_back(ec);
        }
        for (std::size_t m = 0; m < P.size(); ++m) {
            TermReport tr;
            tr.name = P[m].name;
            tr.equation = P[m].equation;
            tr.t = R.t;
            tr.printed_l2 = norms(P[m].value, g).l2;
            tr.exact_l2 = norms(E[m].value, g).l2;
            ModalField d = P[m].value;
            for (std::size_t i = 0; i < d.coeffs.size(); ++i) d.coeffs[i] -= E[m].value.coeffs[i];
            tr.difference_l2 = norms(d, g).l2;
            auto it = flags.find(tr.name);
            tr.flagged = it != flags.end();
            if (tr.flagged) tr.reason = it->second;
            cc.terms.push_back(tr);
        }
    }
    return cc;
}

} // namespace mhdbl
