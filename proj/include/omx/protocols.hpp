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

#ifndef OMX_PROTOCOLS_HPP
#define OMX_PROTOCOLS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "omx/elements.hpp"
#include "omx/error.hpp"
#include "omx/fock.hpp"
#include "omx/measurement.hpp"
#include "omx/state.hpp"
#include "omx/tolerances.hpp"

namespace omx {

// ---------------------------------------------------------------------------
// Inputs

/// Polarization qubit alpha|H> + beta|V> to be teleported.
struct InputQubit {
    cplx alpha{1.0 / std::numbers::sqrt2, 0.0};
    cplx beta{1.0 / std::numbers::sqrt2, 0.0};

    static InputQubit from_amplitudes(cplx alpha, cplx beta) {
        InputQubit q{alpha, beta};
        q.validate();
        return q;
    }

    /// Point on the Poincare sphere: alpha = cos(theta/2), beta = e^{i phi} sin(theta/2).
    static InputQubit from_sphere(double theta, double phi) {
        return from_amplitudes(std::cos(theta / 2.0), std::polar(std::sin(theta / 2.0), phi));
    }

    void validate() const {
        double n = std::norm(alpha) + std::norm(beta);
        if (!std::isfinite(n) || std::abs(n - 1.0) > tol::kQubitNorm) {
            throw ConfigError("input qubit: |alpha|^2 + |beta|^2 = " + std::to_string(n) + ", expected 1");
        }
    }
};

/// `count` qubits spread over the Poincare sphere (Fibonacci lattice).
inline std::vector<InputQubit> poincare_grid(int count) {
    std::vector<InputQubit> out;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
        double z = 1.0 - 2.0 * (i + 0.5) / count;
        out.push_back(InputQubit::from_sphere(std::acos(z), golden * i));
    }
    return out;
}

/// Thermal magnon population truncated at `cutoff` excitations.
struct ThermalConfig {
    double n_bar = 0.0;
    int cutoff = 2;
    bool renormalize_truncation = true;

    double s() const { return n_bar / (n_bar + 1.0); }

    void validate() const {
        if (!std::isfinite(n_bar) || n_bar < 0.0) {
            throw ConfigError("thermal config: n_bar must be finite and >= 0");
        }
        if (cutoff < 1) {
            throw ConfigError("thermal config: cutoff must be >= 1");
        }
    }
};

/// (1-s) s^n for n = 0..cutoff, divided by their sum when renormalizing.
inline std::vector<double> thermal_weights(double n_bar, int cutoff, bool renormalize) {
    ThermalConfig{n_bar, cutoff, renormalize}.validate();
    double s = n_bar / (n_bar + 1.0);
    std::vector<double> w;
    double sum = 0.0;
    double sn = 1.0;
    for (int n = 0; n <= cutoff; ++n) {
        w.push_back((1.0 - s) * sn);
        sum += w.back();
        sn *= s;
    }
    if (renormalize) {
        for (auto &x : w) {
            x /= sum;
        }
    }
    return w;
}

/// Single thermal magnon mode. `mode_cutoff` may exceed cfg.cutoff to leave
/// room for added excitations; the extra levels are empty.
inline DensityMatrix prepare_thermal(const ThermalConfig &cfg, int mode_cutoff = -1, const std::string &name = "m") {
    cfg.validate();
    if (mode_cutoff < 0) {
        mode_cutoff = cfg.cutoff;
    }
    if (mode_cutoff < cfg.cutoff) {
        throw ConfigError("prepare_thermal: thermal cutoff exceeds mode cutoff");
    }
    auto w = thermal_weights(cfg.n_bar, cfg.cutoff, cfg.renormalize_truncation);
    Matrix rho = Matrix::Zero(mode_cutoff + 1, mode_cutoff + 1);
    for (int n = 0; n <= cfg.cutoff; ++n) {
        rho(n, n) = w[static_cast<std::size_t>(n)];
    }
    double tr = rho.trace().real();
    return DensityMatrix(ModeRegistry({ModeLabel::magnon(name)}, {mode_cutoff}), std::move(rho),
                         detail::normalization_of(tr));
}

// ---------------------------------------------------------------------------
// Closed forms

inline double boltzmann_ratio(double n_bar) { return n_bar / (n_bar + 1.0); }

/// Teleportation fidelity 1/(1+s+s^2)^2 of the cutoff-2 thermal model.
inline double closed_form_f1(double n_bar) {
    if (!std::isfinite(n_bar) || n_bar < 0.0) {
        throw ConfigError("closed_form_f1: n_bar must be finite and >= 0");
    }
    double s = boltzmann_ratio(n_bar);
    double d = 1.0 + s + s * s;
    return 1.0 / (d * d);
}

/// Entanglement-swapping fidelity 1/(1+s+s^2)^4.
inline double closed_form_f2(double n_bar) {
    double f1 = closed_form_f1(n_bar);
    return f1 * f1;
}

/// Untruncated thermal limits: the ground-branch weight (1-s)^2 and (1-s)^4.
inline double full_thermal_f1(double n_bar) {
    double s = boltzmann_ratio(n_bar);
    return (1.0 - s) * (1.0 - s);
}
inline double full_thermal_f2(double n_bar) {
    double f = full_thermal_f1(n_bar);
    return f * f;
}

/// Thermal occupation at which closed_form_f1 drops to `target`.
inline double genuine_threshold(double target = 2.0 / 3.0) {
    // F1 decreases monotonically from 1 (n=0) towards 1/9 (n -> infinity).
    if (!(target > 1.0 / 9.0) || target > 1.0) {
        throw ConfigError("genuine_threshold: target must lie in (1/9, 1]");
    }
    if (target == 1.0) {
        return 0.0;
    }
    double lo = 0.0;
    double hi = 1.0;
    while (closed_form_f1(hi) > target) {
        hi *= 2.0;
        if (hi > 1e15) {
            throw ConfigError("genuine_threshold: target not reachable");
        }
    }
    while (hi - lo > tol::kThresholdBisection * 1e-2) {
        double mid = 0.5 * (lo + hi);
        if (closed_form_f1(mid) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Targets and figures of merit

/// Dual-rail qubit alpha|L> + beta|U>: |L> puts the excitation in `lower`,
/// |U> in `upper`. All other modes of `reg` are empty.
inline StateVector dual_rail_state(const ModeRegistry &reg, std::size_t upper, std::size_t lower, cplx alpha,
                                   cplx beta) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(reg.dimension()));
    std::vector<int> occ(reg.size(), 0);
    occ[lower] = 1;
    v(static_cast<Eigen::Index>(reg.index_of(occ))) = alpha;
    occ[lower] = 0;
    occ[upper] = 1;
    v(static_cast<Eigen::Index>(reg.index_of(occ))) = beta;
    return StateVector(reg, std::move(v));
}

/// Bell state of two dual-rail qubits, modes ordered (upper1, lower1, upper2, lower2).
/// phi+- = (|LL> +- |UU>)/sqrt2, psi+- = (|LU> +- |UL>)/sqrt2.
inline StateVector dual_rail_bell(const ModeRegistry &reg, const std::array<std::size_t, 4> &m, BellId id) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(reg.dimension()));
    auto put = [&](bool first_upper, bool second_upper, double amp) {
        std::vector<int> occ(reg.size(), 0);
        occ[first_upper ? m[0] : m[1]] = 1;
        occ[second_upper ? m[2] : m[3]] = 1;
        v(static_cast<Eigen::Index>(reg.index_of(occ))) = amp;
    };
    const double r = 1.0 / std::sqrt(2.0);
    switch (id) {
        case BellId::PhiPlus:
            put(false, false, r);
            put(true, true, r);
            break;
        case BellId::PhiMinus:
            put(false, false, r);
            put(true, true, -r);
            break;
        case BellId::PsiPlus:
            put(false, true, r);
            put(true, false, r);
            break;
        case BellId::PsiMinus:
            put(false, true, r);
            put(true, false, -r);
            break;
        case BellId::NoHerald:
            throw LabelError("dual_rail_bell: no_herald has no target");
    }
    return StateVector(reg, std::move(v));
}

/// Wootters concurrence of a (possibly sub-normalized) two-qubit density
/// matrix in the basis |00>, |01>, |10>, |11>. Homogeneous of degree one.
inline double wootters_concurrence(const Eigen::Matrix4cd &rho) {
    Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    Eigen::Matrix4cd h = (rho + rho.adjoint()) * 0.5;
    Eigen::Matrix4cd tilde = yy * h.conjugate() * yy;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h);
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::Matrix4cd root = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    Eigen::Matrix4cd m = root * tilde * root;
    m = (m + m.adjoint()) * 0.5;
    Eigen::Vector4d lam = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd>(m, Eigen::EigenvaluesOnly)
                              .eigenvalues()
                              .cwiseMax(0.0)
                              .cwiseSqrt();
    std::sort(lam.data(), lam.data() + 4, std::greater<>());
    return std::max(0.0, lam(0) - lam(1) - lam(2) - lam(3));
}

/// Concurrence of two dual-rail qubits, restricted to the sector with one
/// excitation per pair. The restriction is not renormalized, so population
/// leaking out of the qubit sector lowers the value.
inline double concurrence_dual_rail(const DensityMatrix &state, const std::array<std::size_t, 4> &modes) {
    std::vector<std::size_t> keep(modes.begin(), modes.end());
    DensityMatrix red = state.registry().size() == 4 ? state : partial_trace(state, keep);
    const auto &reg = red.registry();
    std::array<std::size_t, 4> m{};
    for (std::size_t k = 0; k < 4; ++k) {
        m[k] = reg.require(state.registry().label(modes[k]));
    }
    // qubit value 0 = L (excitation in lower), 1 = U
    auto index = [&](int q1, int q2) {
        std::vector<int> occ(reg.size(), 0);
        occ[q1 ? m[0] : m[1]] = 1;
        occ[q2 ? m[2] : m[3]] = 1;
        return static_cast<Eigen::Index>(reg.index_of(occ));
    };
    Eigen::Matrix4cd q;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            q(a, b) = red.matrix()(index(a >> 1, a & 1), index(b >> 1, b & 1));
        }
    }
    return wootters_concurrence(q);
}

// ---------------------------------------------------------------------------
// Plans

enum class ProtocolKind { Teleport, Swap };

inline std::string to_string(ProtocolKind k) { return k == ProtocolKind::Teleport ? "teleport" : "swap"; }

struct ThermalMode {
    std::size_t mode;
    double n_bar;
};

/// Echo of the settings a report was produced with.
struct ProtocolConfig {
    ProtocolKind kind = ProtocolKind::Teleport;
    ThermalConfig thermal;
    ScatterModel model = ScatterModel::PaperUniform;
    InputQubit qubit;
    bool include_psi = false;
};

/// Executable description of an optical layout: initial occupations,
/// element sequence, heralding and Bell analysis. Built-in protocols and
/// compiled .omx programs both produce plans.
struct Plan {
    ProtocolConfig config;
    ModeRegistry registry;
    std::vector<ThermalMode> thermal;           // all other modes start in vacuum
    std::vector<ElementOp> steps;
    std::vector<std::string> herald_vacuum;     // paths required empty (successful scattering)
    DetectionLayout detection;
    std::vector<std::size_t> target_magnons;    // teleport: (upper, lower); swap: (u1, l1, u2, l2)
};

namespace detail {

/// Drive photon -> 50/50 BS -> Stokes scattering in both arms -> HWP(45 deg)
/// on the upper arm -> PBS1. Afterwards `lower` carries the Stokes photon and
/// `upper` the unscattered drive light.
inline void append_epr_stage(std::vector<ElementOp> &steps, const ModeRegistry &reg, const std::string &upper,
                             const std::string &lower, std::size_t m_upper, std::size_t m_lower, ScatterModel model) {
    auto uh = reg.optical(upper, Polarization::H);
    auto uv = reg.optical(upper, Polarization::V);
    auto lh = reg.optical(lower, Polarization::H);
    auto lv = reg.optical(lower, Polarization::V);
    steps.push_back(excitation_adder(reg, uv));
    steps.push_back(beam_splitter_50_50(reg, uv, lv));
    steps.push_back(stokes_scatter(reg, uv, uh, m_upper, model));
    steps.push_back(stokes_scatter(reg, lv, lh, m_lower, model));
    steps.push_back(half_wave_plate(reg, upper, deg_to_rad(45.0)));
    steps.push_back(pbs(reg, upper, lower));
}

inline std::vector<ModeLabel> path_modes(std::initializer_list<const char *> paths) {
    std::vector<ModeLabel> m;
    for (const char *p : paths) {
        m.push_back(ModeLabel::optical(p, Polarization::H));
        m.push_back(ModeLabel::optical(p, Polarization::V));
    }
    return m;
}

}  // namespace detail

/// Layout of the teleportation experiment. Paths A (upper) and B (lower)
/// form the interferometer, C carries the input photon; magnons mA, mB.
inline Plan teleport_plan(const InputQubit &q, const ThermalConfig &cfg, ScatterModel model, bool include_psi = false) {
    q.validate();
    cfg.validate();
    auto labels = detail::path_modes({"A", "B", "C"});
    labels.push_back(ModeLabel::magnon("mA"));
    labels.push_back(ModeLabel::magnon("mB"));
    std::vector<int> cut(6, 1);
    cut.push_back(cfg.cutoff + 1);
    cut.push_back(cfg.cutoff + 1);
    Plan p;
    p.config = {ProtocolKind::Teleport, cfg, model, q, include_psi};
    p.registry = ModeRegistry(std::move(labels), std::move(cut));
    const auto &reg = p.registry;
    auto ma = reg.magnon("mA");
    auto mb = reg.magnon("mB");
    p.thermal = {{ma, cfg.n_bar}, {mb, cfg.n_bar}};
    p.steps.push_back(excitation_adder(reg, reg.optical("C", Polarization::H)));
    p.steps.push_back(polarization_prep(reg, "C", q.alpha, q.beta));
    detail::append_epr_stage(p.steps, reg, "A", "B", ma, mb, model);
    p.herald_vacuum = {"A"};
    p.detection = {"B", "C"};
    p.target_magnons = {ma, mb};
    return p;
}

/// Layout of entanglement swapping: interferometers (A, B) and (C, D) with
/// magnons mA..mD; the two Stokes photons (paths B and D) are Bell-analyzed.
inline Plan swap_plan(const ThermalConfig &cfg, ScatterModel model, bool include_psi = false) {
    cfg.validate();
    auto labels = detail::path_modes({"A", "B", "C", "D"});
    for (const char *m : {"mA", "mB", "mC", "mD"}) {
        labels.push_back(ModeLabel::magnon(m));
    }
    std::vector<int> cut(8, 1);
    cut.insert(cut.end(), 4, cfg.cutoff + 1);
    Plan p;
    p.config = {ProtocolKind::Swap, cfg, model, InputQubit{}, include_psi};
    p.registry = ModeRegistry(std::move(labels), std::move(cut));
    const auto &reg = p.registry;
    std::array<std::size_t, 4> m{reg.magnon("mA"), reg.magnon("mB"), reg.magnon("mC"), reg.magnon("mD")};
    for (auto k : m) {
        p.thermal.push_back({k, cfg.n_bar});
    }
    detail::append_epr_stage(p.steps, reg, "A", "B", m[0], m[1], model);
    detail::append_epr_stage(p.steps, reg, "C", "D", m[2], m[3], model);
    p.herald_vacuum = {"A", "C"};
    p.detection = {"B", "D"};
    p.target_magnons = {m[0], m[1], m[2], m[3]};
    return p;
}

// ---------------------------------------------------------------------------
// Execution

/// Initial product state as an ensemble over thermal occupations.
inline Mixture initial_mixture(const Plan &plan) {
    const auto &reg = plan.registry;
    const int tc = plan.config.thermal.cutoff;
    std::vector<std::vector<double>> weights;
    for (const auto &t : plan.thermal) {
        if (tc > reg.cutoff(t.mode)) {
            throw ConfigError("thermal cutoff " + std::to_string(tc) + " exceeds the cutoff of " +
                              reg.label(t.mode).str());
        }
        weights.push_back(thermal_weights(t.n_bar, tc, plan.config.thermal.renormalize_truncation));
    }
    Mixture mix;
    std::vector<int> level(plan.thermal.size(), 0);
    while (true) {
        double w = 1.0;
        std::vector<int> occ(reg.size(), 0);
        for (std::size_t k = 0; k < level.size(); ++k) {
            w *= weights[k][static_cast<std::size_t>(level[k])];
            occ[plan.thermal[k].mode] = level[k];
        }
        if (w > 0.0) {
            mix.branches.push_back({w, StateVector::basis(reg, occ)});
        }
        std::size_t k = 0;
        while (k < level.size() && ++level[k] > tc) {
            level[k] = 0;
            ++k;
        }
        if (k == level.size()) {
            break;
        }
    }
    return mix;
}

inline DensityMatrix initial_density(const Plan &plan) {
    DensityMatrix rho = initial_mixture(plan).to_density_matrix();
    return rho;
}

inline std::vector<std::size_t> herald_modes(const Plan &plan) {
    std::vector<std::size_t> modes;
    for (const auto &path : plan.herald_vacuum) {
        auto pair = detail::polarization_pair(plan.registry, path, "herald");
        modes.insert(modes.end(), pair.begin(), pair.end());
    }
    return modes;
}

template <class State>
State run_steps(const Plan &plan, State state) {
    for (const auto &op : plan.steps) {
        state = apply(op, state);
    }
    return state;
}

struct Heralded {
    double success_probability = 0.0;
    Mixture state;  // branches unnormalized; weights carry the prior
};

/// Runs the element sequence on every branch and post-selects the herald
/// paths on vacuum (drive photon absorbed by a Stokes event).
inline Heralded run_and_herald(const Plan &plan) {
    Mixture mix = initial_mixture(plan);
    auto modes = herald_modes(plan);
    Heralded h;
    for (auto &b : mix.branches) {
        StateVector s = run_steps(plan, SparseState::from(b.state)).dense();
        StateVector rest = modes.empty() ? s : condition_on(s, modes, std::vector<int>(modes.size(), 0));
        double p = rest.norm_squared();
        h.success_probability += b.weight * p;
        if (p > 0.0) {
            h.state.branches.push_back({b.weight, std::move(rest)});
        }
    }
    return h;
}

/// Heralded optomagnonic Bell pair (|H>_b|L> + |V>_b|U>)/sqrt2 over
/// (B.H, B.V, mA, mB), or its thermal mixture.
inline DensityMatrix prepare_epr(ScatterModel model, const ThermalConfig &cfg) {
    cfg.validate();
    auto labels = detail::path_modes({"A", "B"});
    labels.push_back(ModeLabel::magnon("mA"));
    labels.push_back(ModeLabel::magnon("mB"));
    Plan p;
    p.config = {ProtocolKind::Teleport, cfg, model, InputQubit{}, false};
    p.registry = ModeRegistry(std::move(labels), {1, 1, 1, 1, cfg.cutoff + 1, cfg.cutoff + 1});
    auto ma = p.registry.magnon("mA");
    auto mb = p.registry.magnon("mB");
    p.thermal = {{ma, cfg.n_bar}, {mb, cfg.n_bar}};
    detail::append_epr_stage(p.steps, p.registry, "A", "B", ma, mb, model);
    p.herald_vacuum = {"A"};
    Heralded h = run_and_herald(p);
    if (h.success_probability < tol::kUnreachableOutcome) {
        throw InvariantError("prepare_epr: no successful scattering");
    }
    Matrix rho = h.state.to_density_matrix().matrix() / h.success_probability;
    return DensityMatrix(h.state.branches.front().state.registry(), (rho + rho.adjoint()) * 0.5);
}

inline StateVector epr_target(const ModeRegistry &reg) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(reg.dimension()));
    std::vector<int> occ(reg.size(), 0);
    const double r = 1.0 / std::sqrt(2.0);
    occ[reg.optical("B", Polarization::H)] = 1;
    occ[reg.magnon("mB")] = 1;
    v(static_cast<Eigen::Index>(reg.index_of(occ))) = r;
    std::fill(occ.begin(), occ.end(), 0);
    occ[reg.optical("B", Polarization::V)] = 1;
    occ[reg.magnon("mA")] = 1;
    v(static_cast<Eigen::Index>(reg.index_of(occ))) = r;
    return StateVector(reg, std::move(v));
}

struct OutcomeReport {
    BellId id = BellId::NoHerald;
    std::vector<std::string> patterns;
    double probability = 0.0;  // conditional on successful scattering
    std::optional<double> fidelity;
    std::optional<double> corrected_fidelity;
    std::optional<double> concurrence;  // swap only: dual-rail magnon pair
    bool requires_number_resolution = false;
    bool included = false;
    std::optional<DensityMatrix> post_state;  // over the target magnons
};

struct ClosedForm {
    double value = 1.0;
    double full_thermal = 1.0;
    double truncation_gap = 0.0;
};

struct ProtocolReport {
    ProtocolConfig config;
    double scatter_success_probability = 0.0;
    std::vector<OutcomeReport> outcomes;
    ClosedForm closed_form;
    std::optional<double> aggregate_fidelity;

    const OutcomeReport &outcome(BellId id) const {
        for (const auto &o : outcomes) {
            if (o.id == id) {
                return o;
            }
        }
        throw LabelError("report has no outcome " + to_string(id));
    }

    /// Headline fidelity: the phi+ herald, which needs no correction.
    double fidelity() const {
        const auto &o = outcome(BellId::PhiPlus);
        if (!o.fidelity) {
            throw InvariantError("phi_plus herald is unreachable");
        }
        return *o.fidelity;
    }
};

enum class Backend { Ensemble, DensityMatrix };

namespace detail {

struct RawOutcome {
    BellId id;
    double probability = 0.0;  // unconditional
    std::optional<omx::DensityMatrix> magnons;
};

inline void score_outcome(const Plan &plan, OutcomeReport &o) {
    const auto &rho = *o.post_state;
    const auto &reg = rho.registry();
    std::vector<std::size_t> m;
    for (auto t : plan.target_magnons) {
        m.push_back(reg.require(plan.registry.label(t)));
    }
    if (plan.config.kind == ProtocolKind::Teleport) {
        const auto &q = plan.config.qubit;
        StateVector target = dual_rail_state(reg, m[0], m[1], q.alpha, q.beta);
        o.fidelity = fidelity(rho, target);
        switch (o.id) {
            case BellId::PhiPlus:
                o.corrected_fidelity = o.fidelity;
                break;
            case BellId::PhiMinus:
                o.corrected_fidelity = fidelity(apply(phase_shift(reg, m[0], std::numbers::pi), rho), target);
                break;
            case BellId::PsiPlus:
                o.corrected_fidelity = fidelity(apply(mode_swap("arm-swap", reg, m[0], m[1]), rho), target);
                break;
            case BellId::PsiMinus: {
                auto swapped = apply(mode_swap("arm-swap", reg, m[0], m[1]), rho);
                o.corrected_fidelity = fidelity(apply(phase_shift(reg, m[0], std::numbers::pi), swapped), target);
                break;
            }
            case BellId::NoHerald:
                break;
        }
    } else {
        StateVector target = dual_rail_bell(reg, {m[0], m[1], m[2], m[3]}, o.id);
        o.fidelity = fidelity(rho, target);
        o.corrected_fidelity = o.fidelity;
        o.concurrence = concurrence_dual_rail(rho, {m[0], m[1], m[2], m[3]});
    }
}

inline ProtocolReport assemble(const Plan &plan, double success, std::vector<RawOutcome> raw) {
    if (success < tol::kUnreachableOutcome) {
        throw InvariantError("no trial passes the scattering herald");
    }
    ProtocolReport r;
    r.config = plan.config;
    r.scatter_success_probability = success;
    double n = plan.config.thermal.n_bar;
    if (plan.config.kind == ProtocolKind::Teleport) {
        r.closed_form = {closed_form_f1(n), full_thermal_f1(n), closed_form_f1(n) - full_thermal_f1(n)};
    } else {
        r.closed_form = {closed_form_f2(n), full_thermal_f2(n), closed_form_f2(n) - full_thermal_f2(n)};
    }
    double agg_p = 0.0;
    double agg_f = 0.0;
    for (auto &x : raw) {
        OutcomeReport o;
        o.id = x.id;
        o.patterns = outcome_patterns(x.id);
        o.probability = x.probability / success;
        o.requires_number_resolution = (x.id == BellId::PsiPlus || x.id == BellId::PsiMinus);
        o.included = (x.id == BellId::PhiPlus || x.id == BellId::PhiMinus) ||
                     (o.requires_number_resolution && plan.config.include_psi);
        if (x.id != BellId::NoHerald && o.probability >= tol::kUnreachableOutcome && x.magnons) {
            o.post_state = std::move(x.magnons);
            score_outcome(plan, o);
            if (o.included) {
                agg_p += o.probability;
                agg_f += o.probability * *o.corrected_fidelity;
            }
        }
        r.outcomes.push_back(std::move(o));
    }
    if (agg_p >= tol::kUnreachableOutcome) {
        r.aggregate_fidelity = agg_f / agg_p;
    }
    return r;
}

inline std::size_t outcome_slot(BellId id) { return static_cast<std::size_t>(id); }

inline ProtocolReport execute_ensemble(const Plan &plan) {
    Heralded h = run_and_herald(plan);
    std::array<double, 5> prob{};
    std::array<std::optional<Matrix>, 5> acc;
    std::optional<ModeRegistry> magnon_reg;
    std::vector<std::size_t> keep;
    for (const auto &b : h.state.branches) {
        auto result = detect(b.state, plan.detection);
        for (const auto &rec : result.records) {
            double p = rec.rest.norm_squared();
            if (p == 0.0) {
                continue;
            }
            auto slot = outcome_slot(rec.id);
            prob[slot] += b.weight * p;
            if (rec.id == BellId::NoHerald) {
                continue;
            }
            if (!magnon_reg) {
                for (auto t : plan.target_magnons) {
                    keep.push_back(rec.rest.registry().require(plan.registry.label(t)));
                }
                magnon_reg = rec.rest.registry().subset(keep);
            }
            auto dim = static_cast<Eigen::Index>(magnon_reg->dimension());
            if (!acc[slot]) {
                acc[slot] = Matrix::Zero(dim, dim);
            }
            if (keep.size() == rec.rest.registry().size()) {
                // post-states are sparse: accumulate the outer product on the support only
                const Vector &a = rec.rest.amplitudes();
                std::vector<Eigen::Index> nz;
                for (Eigen::Index i = 0; i < a.size(); ++i) {
                    if (a(i) != cplx(0.0)) {
                        nz.push_back(i);
                    }
                }
                for (auto j : nz) {
                    for (auto i : nz) {
                        (*acc[slot])(i, j) += b.weight * (a(i) * std::conj(a(j)));
                    }
                }
            } else {
                *acc[slot] += b.weight * reduced_density(rec.rest, keep).matrix();
            }
        }
    }
    std::vector<RawOutcome> raw;
    for (auto id : {BellId::PhiPlus, BellId::PhiMinus, BellId::PsiPlus, BellId::PsiMinus, BellId::NoHerald}) {
        RawOutcome x{id, prob[outcome_slot(id)], std::nullopt};
        auto &a = acc[outcome_slot(id)];
        if (a && a->trace().real() > 0.0) {
            Matrix m = *a / a->trace().real();
            x.magnons = omx::DensityMatrix(*magnon_reg, (m + m.adjoint()) * 0.5);
        }
        raw.push_back(std::move(x));
    }
    return assemble(plan, h.success_probability, std::move(raw));
}

inline ProtocolReport execute_density(const Plan &plan) {
    if (plan.registry.dimension() > tol::kMaxDensityDimension) {
        throw ConfigError("density backend supports dimension <= " + std::to_string(tol::kMaxDensityDimension) +
                          ", circuit has " + std::to_string(plan.registry.dimension()) + "; use the ensemble backend");
    }
    omx::DensityMatrix rho = run_steps(plan, initial_density(plan));
    auto modes = herald_modes(plan);
    omx::DensityMatrix rest = modes.empty() ? rho : condition_on(rho, modes, std::vector<int>(modes.size(), 0));
    double success = rest.trace();
    if (success < tol::kUnreachableOutcome) {
        throw InvariantError("no trial passes the scattering herald");
    }
    auto outcomes = simulate_detection(rest.normalize(), plan.detection);
    std::vector<RawOutcome> raw;
    for (auto &o : outcomes) {
        RawOutcome x{o.id, o.probability * success, std::nullopt};
        if (o.post_state) {
            std::vector<std::size_t> keep;
            for (auto t : plan.target_magnons) {
                keep.push_back(o.post_state->registry().require(plan.registry.label(t)));
            }
            x.magnons = partial_trace(*o.post_state, keep);
        }
        raw.push_back(std::move(x));
    }
    return assemble(plan, success, std::move(raw));
}

}  // namespace detail

/// Runs a plan: heralding, Bell analysis, magnon post-states and fidelities.
/// The ensemble backend propagates each thermal branch as a state vector; the
/// density-matrix backend carries the full mixed state (small layouts only).
inline ProtocolReport execute(const Plan &plan, Backend backend = Backend::Ensemble) {
    if (plan.config.kind == ProtocolKind::Teleport && plan.target_magnons.size() != 2) {
        throw ConfigError("teleport plan needs two target magnons (upper, lower)");
    }
    if (plan.config.kind == ProtocolKind::Swap && plan.target_magnons.size() != 4) {
        throw ConfigError("swap plan needs four target magnons");
    }
    return backend == Backend::Ensemble ? detail::execute_ensemble(plan) : detail::execute_density(plan);
}

inline ProtocolReport teleport(const InputQubit &q, const ThermalConfig &cfg,
                               ScatterModel model = ScatterModel::PaperUniform, bool include_psi = false) {
    return execute(teleport_plan(q, cfg, model, include_psi));
}

inline ProtocolReport entanglement_swap(const ThermalConfig &cfg, ScatterModel model = ScatterModel::PaperUniform,
                                        bool include_psi = false) {
    return execute(swap_plan(cfg, model, include_psi));
}

// ---------------------------------------------------------------------------
// Readout

struct ReadoutResult {
    DensityMatrix photonic;  // over (upper.V, lower.V) anti-Stokes modes
    bool partial = false;    // magnon occupation >= 2 was present
    std::size_t upper = 0;
    std::size_t lower = 1;
};

/// Maps a dual-rail magnon qubit onto anti-Stokes photons by a state swap in
/// each arm. With `apply_correction` a pi phase on the upper arm (the phi-
/// feed-forward) precedes the swap. The anti-Stokes photons are TE (V) and
/// leave through PBS1's second port; that routing only relabels modes.
inline ReadoutResult readout(const DensityMatrix &magnons, std::size_t upper_magnon, std::size_t lower_magnon,
                             const std::string &upper_path, const std::string &lower_path, bool apply_correction) {
    const auto &reg = magnons.registry();
    if (upper_magnon == lower_magnon || upper_magnon >= reg.size() || lower_magnon >= reg.size()) {
        throw LabelError("readout: need two distinct magnon modes");
    }
    bool partial = false;
    for (Eigen::Index g = 0; g < magnons.matrix().rows(); ++g) {
        auto gi = static_cast<std::size_t>(g);
        if (magnons.matrix()(g, g).real() > tol::kUnreachableOutcome &&
            (reg.occupation(gi, upper_magnon) >= 2 || reg.occupation(gi, lower_magnon) >= 2)) {
            partial = true;
        }
    }
    DensityMatrix state = magnons;
    if (apply_correction) {
        state = apply(phase_shift(reg, upper_magnon, std::numbers::pi), state);
    }
    ModeRegistry photons({ModeLabel::optical(upper_path, Polarization::V), ModeLabel::optical(lower_path, Polarization::V)},
                         {reg.cutoff(upper_magnon), reg.cutoff(lower_magnon)});
    DensityMatrix joint = tensor(state, DensityMatrix(StateVector::vacuum(photons)));
    const auto &jr = joint.registry();
    auto pu = jr.optical(upper_path, Polarization::V);
    auto pl = jr.optical(lower_path, Polarization::V);
    joint = apply(antistokes_swap(jr, pu, upper_magnon), joint);
    joint = apply(antistokes_swap(jr, pl, lower_magnon), joint);
    DensityMatrix out = partial_trace(joint, {pu, pl});
    return {std::move(out), partial, 0, 1};
}

struct TeleportReadout {
    BellId herald = BellId::PhiPlus;
    bool correction_applied = false;
    ReadoutResult result;
    double vacuum_probability = 0.0;  // no anti-Stokes photon retrieved
    double fidelity = 0.0;            // retrieved photon vs the input qubit
};

/// Reads out the magnon post-state of a teleport herald onto anti-Stokes
/// photons on A.V (upper) and B.V (lower). psi heralds get the arm swap
/// before readout when correcting; phi- and psi- get the pi phase.
inline TeleportReadout readout_teleported(const ProtocolReport &report, BellId herald, bool apply_correction) {
    if (report.config.kind != ProtocolKind::Teleport) {
        throw ConfigError("readout needs a teleport report");
    }
    const auto &o = report.outcome(herald);
    if (!o.post_state) {
        throw InvariantError("herald " + to_string(herald) + " is unreachable");
    }
    DensityMatrix magnons = *o.post_state;
    const std::size_t upper = 0;
    const std::size_t lower = 1;
    bool psi = herald == BellId::PsiPlus || herald == BellId::PsiMinus;
    if (apply_correction && psi) {
        magnons = apply(mode_swap("arm-swap", magnons.registry(), upper, lower), magnons);
    }
    bool phase = apply_correction && (herald == BellId::PhiMinus || herald == BellId::PsiMinus);
    TeleportReadout t{herald, apply_correction, readout(magnons, upper, lower, "A", "B", phase)};
    const auto &photons = t.result.photonic;
    t.vacuum_probability = photons.matrix()(0, 0).real();
    const auto &q = report.config.qubit;
    t.fidelity = fidelity(photons, dual_rail_state(photons.registry(), 0, 1, q.alpha, q.beta));
    return t;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
    double n_bar = 0.0;
    double simulated = 0.0;
    double closed_form = 0.0;
    double abs_diff = 0.0;
    std::optional<double> bosonic;
};

/// `steps` evenly spaced points from `from` to `to` inclusive.
inline std::vector<double> make_grid(double from, double to, int steps) {
    if (steps < 1) {
        throw ConfigError("grid: steps must be >= 1");
    }
    if (!(to >= from) || from < 0.0 || !std::isfinite(to)) {
        throw ConfigError("grid: need 0 <= from <= to");
    }
    std::vector<double> g;
    for (int i = 0; i < steps; ++i) {
        g.push_back(steps == 1 ? from : from + (to - from) * i / (steps - 1));
    }
    return g;
}

/// Simulated vs closed-form fidelity along a grid of thermal occupations.
/// Points are independent and run on up to `threads` workers; rows come back
/// in grid order.
inline std::vector<SweepRow> sweep_fidelity(ProtocolKind kind, const std::vector<double> &grid, ThermalConfig cfg,
                                            ScatterModel model, const InputQubit &q = {}, bool with_bosonic = false,
                                            unsigned threads = 1) {
    std::vector<SweepRow> rows(grid.size());
    auto run_point = [&](std::size_t i) {
        ThermalConfig c = cfg;
        c.n_bar = grid[i];
        auto run = [&](ScatterModel m) {
            return kind == ProtocolKind::Teleport ? teleport(q, c, m).fidelity() : entanglement_swap(c, m).fidelity();
        };
        SweepRow r;
        r.n_bar = grid[i];
        r.simulated = run(model);
        r.closed_form = kind == ProtocolKind::Teleport ? closed_form_f1(grid[i]) : closed_form_f2(grid[i]);
        r.abs_diff = std::abs(r.simulated - r.closed_form);
        if (with_bosonic) {
            r.bosonic = run(ScatterModel::Bosonic);
        }
        rows[i] = r;
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(grid.size())));
    if (threads == 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            run_point(i);
        }
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < grid.size() && !failed; i = next++) {
                try {
                    run_point(i);
                } catch (...) {
                    if (!failed.exchange(true)) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto &th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return rows;
}

}  // namespace omx

#endif  // OMX_PROTOCOLS_HPP
