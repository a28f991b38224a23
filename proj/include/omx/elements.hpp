// Copyright 2026 The omx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OMX_ELEMENTS_HPP
#define OMX_ELEMENTS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "omx/element_op.hpp"
#include "omx/error.hpp"
#include "omx/fock.hpp"
#include "omx/registry.hpp"
#include "omx/state.hpp"

// Optical and optomagnonic elements.
//
// Phase conventions (the only place they are fixed):
//   * 50/50 beam splitter:  a1^dag -> (a1^dag + a2^dag)/sqrt2,  a2^dag -> (a1^dag - a2^dag)/sqrt2.
//   * Half-wave plate at angle t:  Jones matrix [[cos2t, sin2t], [sin2t, -cos2t]] on (H, V).
//   * Quarter-wave plate at angle t:  R(t) diag(i, 1) R(-t); the fast-axis component picks up +i.
//   * PBS: H transmits (stays on its path), V reflects (moves to the other path).
//   * Phase shift phi:  |n> -> exp(i n phi) |n>.
//   * Anti-Stokes state swap (beam-splitter evolution at gt = pi/2):
//     |k>_a |n>_m -> (-i)^(k+n) |n>_a |k>_m.  `literal = true` drops the phase.
//   * Stokes scattering: post-selected isometry |1>_TE |0>_TM |n>_m -> |0>_TE |1>_TM |n+1>_m.

namespace omx {

enum class ScatterModel { PaperUniform, Bosonic };

inline std::string to_string(ScatterModel m) { return m == ScatterModel::PaperUniform ? "paper_uniform" : "bosonic"; }

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

using Jones = Eigen::Matrix2cd;

inline Jones hwp_jones(double angle) {
    double c = std::cos(2.0 * angle);
    double s = std::sin(2.0 * angle);
    Jones j;
    j << c, s, s, -c;
    return j;
}

inline Jones qwp_jones(double angle) {
    double c = std::cos(angle);
    double s = std::sin(angle);
    Eigen::Matrix2cd r;
    r << c, -s, s, c;
    Eigen::Matrix2cd d = Eigen::Matrix2cd::Zero();
    d(0, 0) = cplx(0.0, 1.0);
    d(1, 1) = 1.0;
    return r * d * r.transpose();
}

/// Unitary sending |H> to alpha|H> + beta|V>.
inline Jones polarization_jones(cplx alpha, cplx beta) {
    Jones j;
    j << alpha, -std::conj(beta), beta, std::conj(alpha);
    return j;
}

/// Lifts a passive single-particle transformation (a_j^dag -> sum_i M_ij a_i^dag)
/// to the truncated Fock space of `targets`.
///
/// Photon-number sectors with N <= min(cutoff) are complete and receive the
/// exact transformation. Higher sectors are not closed under truncation; they
/// get the identity so the matrix stays unitary, and are excluded from the
/// domain so that apply() refuses states populating them.
inline ElementOp linear_optics(std::string name, const ModeRegistry &reg, const std::vector<std::size_t> &targets,
                               const Matrix &single) {
    auto k = targets.size();
    if (single.rows() != static_cast<Eigen::Index>(k) || single.cols() != static_cast<Eigen::Index>(k)) {
        throw DimensionError(name + ": single-particle matrix must be " + std::to_string(k) + "x" + std::to_string(k));
    }
    std::vector<int> cut;
    for (auto t : targets) {
        cut.push_back(reg.cutoff(t));
    }
    int complete = *std::min_element(cut.begin(), cut.end());
    auto d = detail::local_dimension(cut);
    Matrix u = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    std::vector<bool> domain(d, false);
    std::vector<double> fact{1.0};
    for (int i = 1; i <= 64; ++i) {
        fact.push_back(fact.back() * i);
    }
    for (std::size_t col = 0; col < d; ++col) {
        auto n = detail::local_occupations(col, cut);
        int total = 0;
        for (int x : n) {
            total += x;
        }
        if (total > complete) {
            u(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(col)) = 1.0;
            continue;
        }
        domain[col] = true;
        std::map<std::vector<int>, cplx> poly{{std::vector<int>(k, 0), cplx(1.0)}};
        for (std::size_t j = 0; j < k; ++j) {
            for (int rep = 0; rep < n[j]; ++rep) {
                std::map<std::vector<int>, cplx> next;
                for (const auto &[occ, coeff] : poly) {
                    for (std::size_t i = 0; i < k; ++i) {
                        cplx m = single(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                        if (m == cplx(0.0)) {
                            continue;
                        }
                        auto o = occ;
                        ++o[i];
                        next[o] += coeff * m;
                    }
                }
                poly = std::move(next);
            }
        }
        double in_norm = 1.0;
        for (int x : n) {
            in_norm *= fact[static_cast<std::size_t>(x)];
        }
        for (const auto &[occ, coeff] : poly) {
            double out_norm = 1.0;
            for (int x : occ) {
                out_norm *= fact[static_cast<std::size_t>(x)];
            }
            auto row = detail::local_index_of(occ, cut);
            u(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += coeff * std::sqrt(out_norm / in_norm);
        }
    }
    return ElementOp(name, reg, targets, std::move(u), OpFlavor::Unitary, std::move(domain),
                     name + ": state populates a photon-number sector above the mode cutoff; raise the cutoff");
}

namespace detail {

inline std::vector<std::size_t> polarization_pair(const ModeRegistry &reg, const std::string &path,
                                                  const std::string &who) {
    auto h = reg.find(ModeLabel::optical(path, Polarization::H));
    auto v = reg.find(ModeLabel::optical(path, Polarization::V));
    if (!h || !v) {
        throw LabelError(who + ": path " + path + " needs both H and V modes registered");
    }
    return {*h, *v};
}

inline void require_distinct(std::size_t a, std::size_t b, const std::string &who) {
    if (a == b) {
        throw LabelError(who + ": the two modes must be distinct");
    }
}

}  // namespace detail

inline ElementOp beam_splitter_50_50(const ModeRegistry &reg, std::size_t mode1, std::size_t mode2) {
    detail::require_distinct(mode1, mode2, "beam_splitter_50_50");
    if (reg.cutoff(mode1) != reg.cutoff(mode2)) {
        throw LabelError("beam_splitter_50_50: modes need equal cutoffs");
    }
    Matrix m(2, 2);
    double r = 1.0 / std::sqrt(2.0);
    m << r, r, r, -r;
    return linear_optics("bs50", reg, {mode1, mode2}, m);
}

inline ElementOp half_wave_plate(const ModeRegistry &reg, const std::string &path, double angle) {
    Matrix j = hwp_jones(angle);
    return linear_optics("hwp", reg, detail::polarization_pair(reg, path, "half_wave_plate"), j);
}

inline ElementOp quarter_wave_plate(const ModeRegistry &reg, const std::string &path, double angle) {
    Matrix j = qwp_jones(angle);
    return linear_optics("qwp", reg, detail::polarization_pair(reg, path, "quarter_wave_plate"), j);
}

/// Polarization rotation taking |H> on `path` to alpha|H> + beta|V>.
inline ElementOp polarization_prep(const ModeRegistry &reg, const std::string &path, cplx alpha, cplx beta) {
    if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > tol::kQubitNorm) {
        throw ConfigError("polarization_prep: |alpha|^2 + |beta|^2 must be 1");
    }
    Matrix j = polarization_jones(alpha, beta);
    return linear_optics("prep", reg, detail::polarization_pair(reg, path, "polarization_prep"), j);
}

/// Exchanges the contents of two modes (no phase).
inline ElementOp mode_swap(std::string name, const ModeRegistry &reg, std::size_t m1, std::size_t m2) {
    detail::require_distinct(m1, m2, name);
    if (reg.cutoff(m1) != reg.cutoff(m2)) {
        throw LabelError(name + ": cutoff mismatch between " + reg.label(m1).str() + " and " + reg.label(m2).str());
    }
    std::vector<int> cut{reg.cutoff(m1), reg.cutoff(m2)};
    auto d = static_cast<Eigen::Index>(detail::local_dimension(cut));
    Matrix p = Matrix::Zero(d, d);
    for (Eigen::Index col = 0; col < d; ++col) {
        auto n = detail::local_occupations(static_cast<std::size_t>(col), cut);
        p(static_cast<Eigen::Index>(detail::local_index_of({n[1], n[0]}, cut)), col) = 1.0;
    }
    return ElementOp(std::move(name), reg, {m1, m2}, std::move(p), OpFlavor::Unitary);
}

/// Polarizing beam splitter joining paths `in1` and `in2`. Outputs reuse the
/// input path names: horizontal light keeps its path, vertical light is
/// reflected into the other one.
inline ElementOp pbs(const ModeRegistry &reg, const std::string &in1, const std::string &in2) {
    if (in1 == in2) {
        throw LabelError("pbs: inconsistent port wiring (both ports on path " + in1 + ")");
    }
    auto p1 = detail::polarization_pair(reg, in1, "pbs");
    auto p2 = detail::polarization_pair(reg, in2, "pbs");
    if (reg.cutoff(p1[1]) != reg.cutoff(p2[1]) || reg.cutoff(p1[0]) != reg.cutoff(p2[0])) {
        throw LabelError("pbs: inconsistent port wiring (paths " + in1 + " and " + in2 + " have different cutoffs)");
    }
    return mode_swap("pbs", reg, p1[1], p2[1]);
}

inline ElementOp phase_shift(const ModeRegistry &reg, std::size_t mode, double phi) {
    int c = reg.cutoff(mode);
    Matrix d = Matrix::Zero(c + 1, c + 1);
    for (int n = 0; n <= c; ++n) {
        d(n, n) = std::polar(1.0, n * phi);
    }
    return ElementOp("phase", reg, {mode}, std::move(d), OpFlavor::Unitary);
}

/// Adds one excitation: |n> -> |n+1>, defined for n < cutoff.
inline ElementOp excitation_adder(const ModeRegistry &reg, std::size_t mode) {
    int c = reg.cutoff(mode);
    Matrix v = Matrix::Zero(c + 1, c + 1);
    std::vector<bool> domain(static_cast<std::size_t>(c) + 1, true);
    domain.back() = false;
    for (int n = 0; n < c; ++n) {
        v(n + 1, n) = 1.0;
    }
    return ElementOp("create", reg, {mode}, std::move(v), OpFlavor::Isometry, std::move(domain),
                     "create: occupation of " + reg.label(mode).str() + " already at cutoff");
}

/// Post-selected single Stokes scattering: one drive (TE) photon is consumed,
/// one TM photon and one magnon excitation are created.
///
/// PaperUniform scatters with amplitude 1 whatever the magnon occupation.
/// Bosonic scatters with amplitude sqrt((n+1)/c_m) and otherwise leaves the
/// drive photon in place; post-selecting on the drive being absorbed then
/// weights the branch by (n+1).
inline ElementOp stokes_scatter(const ModeRegistry &reg, std::size_t te, std::size_t tm, std::size_t magnon,
                                ScatterModel model) {
    if (te == tm || te == magnon || tm == magnon) {
        throw LabelError("stokes_scatter: TE, TM and magnon modes must be distinct");
    }
    std::vector<int> cut{reg.cutoff(te), reg.cutoff(tm), reg.cutoff(magnon)};
    int cm = cut[2];
    auto d = detail::local_dimension(cut);
    Matrix v = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    std::vector<bool> domain(d, false);
    for (std::size_t col = 0; col < d; ++col) {
        auto occ = detail::local_occupations(col, cut);
        int a = occ[0], b = occ[1], n = occ[2];
        if (b != 0 || a > 1 || (a == 1 && n >= cm)) {
            continue;
        }
        domain[col] = true;
        auto c = static_cast<Eigen::Index>(col);
        if (a == 0) {
            v(c, c) = 1.0;
            continue;
        }
        auto scattered = static_cast<Eigen::Index>(detail::local_index_of({0, 1, n + 1}, cut));
        if (model == ScatterModel::PaperUniform) {
            v(scattered, c) = 1.0;
        } else {
            double p = static_cast<double>(n + 1) / cm;
            v(scattered, c) = std::sqrt(p);
            v(c, c) = std::sqrt(1.0 - p);
        }
    }
    return ElementOp("stokes", reg, {te, tm, magnon}, std::move(v), OpFlavor::Isometry, std::move(domain),
                     "stokes_scatter: magnon " + reg.label(magnon).str() +
                         " at cutoff (would overflow), or TM/TE occupation outside the single-scattering model");
}

/// Full state swap between an anti-Stokes photon mode and a magnon mode.
inline ElementOp antistokes_swap(const ModeRegistry &reg, std::size_t photon, std::size_t magnon, bool literal = false) {
    detail::require_distinct(photon, magnon, "antistokes_swap");
    if (reg.cutoff(photon) != reg.cutoff(magnon)) {
        throw LabelError("antistokes_swap: cutoff mismatch between " + reg.label(photon).str() + " and " +
                         reg.label(magnon).str());
    }
    std::vector<int> cut{reg.cutoff(photon), reg.cutoff(magnon)};
    auto d = static_cast<Eigen::Index>(detail::local_dimension(cut));
    Matrix u = Matrix::Zero(d, d);
    const cplx minus_i(0.0, -1.0);
    for (Eigen::Index col = 0; col < d; ++col) {
        auto n = detail::local_occupations(static_cast<std::size_t>(col), cut);
        cplx phase = literal ? cplx(1.0) : std::pow(minus_i, n[0] + n[1]);
        u(static_cast<Eigen::Index>(detail::local_index_of({n[1], n[0]}, cut)), col) = phase;
    }
    return ElementOp("antistokes", reg, {photon, magnon}, std::move(u), OpFlavor::Unitary);
}

/// Truncated two-mode squeezing generator b m + b^dag m^dag.
inline LocalOperator pdc_generator(const ModeRegistry &reg, std::size_t photon, std::size_t magnon) {
    detail::require_distinct(photon, magnon, "pdc_generator");
    Matrix bm = local_product({lowering(reg.cutoff(photon)), lowering(reg.cutoff(magnon))});
    return {{photon, magnon}, bm + bm.adjoint()};
}

/// Truncated beam-splitter generator a^dag m + a m^dag.
inline LocalOperator beam_splitter_generator(const ModeRegistry &reg, std::size_t photon, std::size_t magnon) {
    detail::require_distinct(photon, magnon, "beam_splitter_generator");
    Matrix a = lowering(reg.cutoff(photon));
    Matrix m = lowering(reg.cutoff(magnon));
    Matrix adag_m = local_product({a.adjoint(), m});
    return {{photon, magnon}, adag_m + adag_m.adjoint()};
}

/// exp(-i gt (b m + b^dag m^dag)) on the truncated space.
inline ElementOp pdc_evolution(const ModeRegistry &reg, std::size_t photon, std::size_t magnon, double gt) {
    return expm_unitary(reg, pdc_generator(reg, photon, magnon), gt, "pdc");
}

/// Wave-plate angles realizing a polarization qubit from |H>.
struct WaveplateSetting {
    double hwp_angle;  // applied first
    double qwp_angle;
};

/// Finds (hwp, qwp) with QWP(qwp) HWP(hwp) |H> = e^{i g} (alpha|H> + beta|V>).
///
/// The QWP must map a linear polarization onto the target, so its angle is a
/// root of Im(conj(w0) w1) for w = QWP^dag chi; located by scan + bisection.
inline WaveplateSetting solve_waveplates(cplx alpha, cplx beta) {
    if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > tol::kQubitNorm) {
        throw ConfigError("solve_waveplates: |alpha|^2 + |beta|^2 must be 1");
    }
    Eigen::Vector2cd chi(alpha, beta);
    auto g = [&](double q) {
        Eigen::Vector2cd w = qwp_jones(q).adjoint() * chi;
        return (std::conj(w(0)) * w(1)).imag();
    };
    constexpr int kGrid = 720;
    const double pi = std::numbers::pi;
    double best = 0.0;
    double best_val = std::abs(g(0.0));
    std::optional<double> root;
    for (int i = 0; i < kGrid && !root; ++i) {
        double lo = pi * i / kGrid;
        double hi = pi * (i + 1) / kGrid;
        double glo = g(lo), ghi = g(hi);
        if (std::abs(glo) < best_val) {
            best_val = std::abs(glo);
            best = lo;
        }
        if (glo == 0.0) {
            root = lo;
        } else if ((glo < 0.0) != (ghi < 0.0)) {
            for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
                double mid = 0.5 * (lo + hi);
                if ((g(mid) < 0.0) == (glo < 0.0)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            root = 0.5 * (lo + hi);
        }
    }
    if (!root) {
        if (best_val > 1e-12) {
            throw InvariantError("solve_waveplates: no quarter-wave-plate angle found");
        }
        root = best;
    }
    Eigen::Vector2cd w = qwp_jones(*root).adjoint() * chi;
    cplx ref = std::abs(w(0)) >= std::abs(w(1)) ? w(0) : w(1);
    w *= std::conj(ref) / std::abs(ref);
    double h = 0.5 * std::atan2(w(1).real(), w(0).real());
    return {h, *root};
}

}  // namespace omx

#endif  // OMX_ELEMENTS_HPP
