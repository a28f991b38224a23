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

#ifndef OMX_MEASUREMENT_HPP
#define OMX_MEASUREMENT_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "omx/elements.hpp"
#include "omx/error.hpp"
#include "omx/fock.hpp"
#include "omx/state.hpp"
#include "omx/tolerances.hpp"

namespace omx {

enum class BellId { PhiPlus, PhiMinus, PsiPlus, PsiMinus, NoHerald };

inline constexpr std::array<BellId, 4> kBellIds{BellId::PhiPlus, BellId::PhiMinus, BellId::PsiPlus, BellId::PsiMinus};

inline std::string to_string(BellId id) {
    switch (id) {
        case BellId::PhiPlus:
            return "phi_plus";
        case BellId::PhiMinus:
            return "phi_minus";
        case BellId::PsiPlus:
            return "psi_plus";
        case BellId::PsiMinus:
            return "psi_minus";
        case BellId::NoHerald:
            return "no_herald";
    }
    return "?";
}

inline std::optional<BellId> bell_id_from_string(const std::string &s) {
    for (auto id : {BellId::PhiPlus, BellId::PhiMinus, BellId::PsiPlus, BellId::PsiMinus, BellId::NoHerald}) {
        if (to_string(id) == s) {
            return id;
        }
    }
    return std::nullopt;
}

/// One single-photon detector behind PBS3 or PBS4.
struct DetectorLabel {
    int pbs_id;  // 3 or 4
    Polarization port;

    std::string str() const { return std::to_string(pbs_id) + (port == Polarization::H ? "h" : "v"); }
    bool operator==(const DetectorLabel &) const = default;
};

inline constexpr std::array<DetectorLabel, 4> kDetectors{DetectorLabel{3, Polarization::H}, DetectorLabel{3, Polarization::V},
                                                         DetectorLabel{4, Polarization::H}, DetectorLabel{4, Polarization::V}};

/// The two photonic dual-rail subsystems entering the Bell-state analyzer.
/// After PBS2 the `first` path carries output 3 and `second` output 4.
struct DetectionLayout {
    std::string first;
    std::string second;
};

struct BellOutcome {
    BellId id = BellId::NoHerald;
    std::vector<std::string> patterns;
    double probability = 0.0;
    std::optional<DensityMatrix> post_state;  // normalized, over the undetected modes
    bool requires_number_resolution = false;
};

/// Local ordering of the analyzer modes: (first.H, first.V, second.H, second.V).
inline std::vector<std::size_t> analyzer_modes(const ModeRegistry &reg, const DetectionLayout &layout) {
    if (layout.first == layout.second) {
        throw LabelError("detection layout: the two photon paths must differ");
    }
    auto a = detail::polarization_pair(reg, layout.first, "detection layout");
    auto b = detail::polarization_pair(reg, layout.second, "detection layout");
    return {a[0], a[1], b[0], b[1]};
}

/// Bell ket on the analyzer modes' local space.
inline Vector bell_ket(const ModeRegistry &reg, const DetectionLayout &layout, BellId id) {
    auto modes = analyzer_modes(reg, layout);
    std::vector<int> cut;
    for (auto m : modes) {
        cut.push_back(reg.cutoff(m));
    }
    Vector k = Vector::Zero(static_cast<Eigen::Index>(detail::local_dimension(cut)));
    auto at = [&](int bh, int bv, int ch, int cv) {
        return static_cast<Eigen::Index>(detail::local_index_of({bh, bv, ch, cv}, cut));
    };
    const double r = 1.0 / std::sqrt(2.0);
    switch (id) {
        case BellId::PhiPlus:
            k(at(1, 0, 1, 0)) = r;
            k(at(0, 1, 0, 1)) = r;
            break;
        case BellId::PhiMinus:
            k(at(1, 0, 1, 0)) = r;
            k(at(0, 1, 0, 1)) = -r;
            break;
        case BellId::PsiPlus:
            k(at(1, 0, 0, 1)) = r;
            k(at(0, 1, 1, 0)) = r;
            break;
        case BellId::PsiMinus:
            k(at(1, 0, 0, 1)) = r;
            k(at(0, 1, 1, 0)) = -r;
            break;
        case BellId::NoHerald:
            throw LabelError("bell_ket: no_herald has no Bell state");
    }
    return k;
}

/// Rank-1 projectors onto phi+, phi-, psi+, psi- of the two photons.
inline std::array<LocalOperator, 4> bell_projectors(const ModeRegistry &reg, const DetectionLayout &layout) {
    auto modes = analyzer_modes(reg, layout);
    std::array<LocalOperator, 4> out;
    for (std::size_t i = 0; i < 4; ++i) {
        Vector k = bell_ket(reg, layout, kBellIds[i]);
        out[i] = LocalOperator{modes, k * k.adjoint()};
    }
    return out;
}

/// Projector onto the sector with exactly one photon in each subsystem.
inline LocalOperator coincidence_sector(const ModeRegistry &reg, const DetectionLayout &layout) {
    auto modes = analyzer_modes(reg, layout);
    std::vector<int> cut;
    for (auto m : modes) {
        cut.push_back(reg.cutoff(m));
    }
    auto d = static_cast<Eigen::Index>(detail::local_dimension(cut));
    Matrix p = Matrix::Zero(d, d);
    for (Eigen::Index l = 0; l < d; ++l) {
        auto n = detail::local_occupations(static_cast<std::size_t>(l), cut);
        if (n[0] + n[1] == 1 && n[2] + n[3] == 1) {
            p(l, l) = 1.0;
        }
    }
    return {modes, p};
}

template <class State>
struct ProjectionResult {
    double probability = 0.0;
    std::optional<State> post_state;
};

/// Probability tr(P rho) and normalized post-measurement state P rho P / p.
template <class State>
ProjectionResult<State> project_and_normalize(const State &state, const LocalOperator &projector) {
    const Matrix &p = projector.matrix;
    double idem = (p * p - p).cwiseAbs().maxCoeff();
    double herm = (p - p.adjoint()).cwiseAbs().maxCoeff();
    if (idem > tol::kProjectorIdempotent || herm > tol::kProjectorIdempotent) {
        throw InvariantError("project_and_normalize: operator is not an orthogonal projector");
    }
    State projected = apply_local(projector, state);
    ProjectionResult<State> r;
    r.probability = probability(projected);
    if (r.probability >= tol::kUnreachableOutcome) {
        r.post_state = projected.normalize();
    }
    return r;
}

namespace detail {

template <class State>
struct DetectionRecord {
    BellId id;
    std::string pattern;
    State rest;  // unnormalized state of the undetected modes
};

template <class State>
struct DetectionResult {
    std::vector<DetectionRecord<State>> records;
    double psi_pattern_probability = 0.0;  // bunched patterns, both photons behind one PBS
};

inline int photons_in(const ModeRegistry &reg, std::size_t index, std::size_t h, std::size_t v) {
    return reg.occupation(index, h) + reg.occupation(index, v);
}

inline void check_single_photons(const StateVector &s, const std::vector<std::size_t> &m) {
    const auto &reg = s.registry();
    for (Eigen::Index g = 0; g < s.amplitudes().size(); ++g) {
        if (std::norm(s.amplitudes()(g)) <= tol::kDomainLeak) {
            continue;
        }
        auto gi = static_cast<std::size_t>(g);
        if (photons_in(reg, gi, m[0], m[1]) > 1 || photons_in(reg, gi, m[2], m[3]) > 1) {
            throw DomainError("simulate_detection: a photonic subsystem holds more than one photon");
        }
    }
}

inline void check_single_photons(const DensityMatrix &s, const std::vector<std::size_t> &m) {
    const auto &reg = s.registry();
    for (Eigen::Index g = 0; g < s.matrix().rows(); ++g) {
        if (std::abs(s.matrix()(g, g).real()) <= tol::kDomainLeak) {
            continue;
        }
        auto gi = static_cast<std::size_t>(g);
        if (photons_in(reg, gi, m[0], m[1]) > 1 || photons_in(reg, gi, m[2], m[3]) > 1) {
            throw DomainError("simulate_detection: a photonic subsystem holds more than one photon");
        }
    }
}

inline std::string pattern_string(const std::array<int, 4> &n) {
    std::string s;
    for (std::size_t d = 0; d < 4; ++d) {
        for (int k = 0; k < n[d]; ++k) {
            if (!s.empty()) {
                s += ",";
            }
            s += kDetectors[d].str();
        }
    }
    return s.empty() ? "none" : s;
}

/// Runs the analyzer: PBS2, a HWP at 22.5 degrees on each output, PBS3/PBS4
/// splitting H and V onto detectors. psi+/psi- produce the same bunched
/// patterns, so they are resolved with the Bell projectors instead.
inline bool diagonal_nonzero(const StateVector &s, std::size_t g) {
    return s.amplitudes()(static_cast<Eigen::Index>(g)) != cplx(0.0);
}
inline bool diagonal_nonzero(const DensityMatrix &s, std::size_t g) {
    auto i = static_cast<Eigen::Index>(g);
    return s.matrix()(i, i) != cplx(0.0);
}

template <class State>
DetectionResult<State> detect(const State &state, const DetectionLayout &layout) {
    auto modes = analyzer_modes(state.registry(), layout);
    check_single_photons(state, modes);
    DetectionResult<State> out;
    for (auto id : {BellId::PsiPlus, BellId::PsiMinus}) {
        out.records.push_back({id, "bell-projector", contract(state, modes, bell_ket(state.registry(), layout, id))});
    }
    State wide = state;
    for (auto m : modes) {
        wide = widen_cutoff(wide, m, std::max(2, wide.registry().cutoff(m)));
    }
    const ModeRegistry reg = wide.registry();
    wide = apply(pbs(reg, layout.first, layout.second), wide);
    wide = apply(half_wave_plate(reg, layout.first, deg_to_rad(22.5)), wide);
    wide = apply(half_wave_plate(reg, layout.second, deg_to_rad(22.5)), wide);

    std::array<int, 4> cut{};
    for (std::size_t k = 0; k < 4; ++k) {
        cut[k] = reg.cutoff(modes[k]);
    }
    // Patterns whose diagonal support is empty cannot fire; skip them
    // without building the conditional state.
    LocalLayout pattern_layout(reg, {modes.begin(), modes.end()});
    std::vector<bool> occupied(pattern_layout.local_size(), false);
    for (std::size_t g = 0; g < reg.dimension(); ++g) {
        if (diagonal_nonzero(wide, g)) {
            occupied[pattern_layout.local_index(g)] = true;
        }
    }
    std::array<int, 4> n{};
    for (n[0] = 0; n[0] <= cut[0]; ++n[0]) {
        for (n[1] = 0; n[1] <= cut[1]; ++n[1]) {
            for (n[2] = 0; n[2] <= cut[2]; ++n[2]) {
                for (n[3] = 0; n[3] <= cut[3]; ++n[3]) {
                    if (!occupied[local_index_of({n[0], n[1], n[2], n[3]}, {cut[0], cut[1], cut[2], cut[3]})]) {
                        continue;
                    }
                    State rest = condition_on(wide, modes, {n[0], n[1], n[2], n[3]});
                    double p = probability(rest);
                    if (p == 0.0) {
                        continue;
                    }
                    int at3 = n[0] + n[1];
                    int at4 = n[2] + n[3];
                    if (at3 == 1 && at4 == 1) {
                        BellId id = (n[0] == n[2]) ? BellId::PhiPlus : BellId::PhiMinus;
                        out.records.push_back({id, pattern_string(n), std::move(rest)});
                    } else if (at3 + at4 == 2) {
                        out.psi_pattern_probability += p;
                    } else {
                        out.records.push_back({BellId::NoHerald, pattern_string(n), std::move(rest)});
                    }
                }
            }
        }
    }
    return out;
}

inline Matrix outer(const StateVector &s) { return s.amplitudes() * s.amplitudes().adjoint(); }
inline Matrix outer(const DensityMatrix &s) { return s.matrix(); }

}  // namespace detail

inline std::vector<std::string> outcome_patterns(BellId id) {
    switch (id) {
        case BellId::PhiPlus:
            return {"3h,4h", "3v,4v"};
        case BellId::PhiMinus:
            return {"3h,4v", "3v,4h"};
        case BellId::PsiPlus:
        case BellId::PsiMinus:
            return {"3h,3h", "3v,3v", "4h,4h", "4v,4v"};
        case BellId::NoHerald:
            return {};
    }
    return {};
}

/// Bell-state coincidence measurement on two dual-rail photons.
///
/// Returns five outcomes (phi+, phi-, psi+, psi-, no_herald) with exact
/// probabilities summing to 1 and normalized post-measurement states of the
/// undetected modes. psi outcomes are flagged as needing photon-number
/// resolution.
template <class State>
std::vector<BellOutcome> simulate_detection(const State &state, const DetectionLayout &layout) {
    auto result = detail::detect(state, layout);
    std::vector<BellOutcome> outcomes;
    double total = probability(state);
    for (auto id : {BellId::PhiPlus, BellId::PhiMinus, BellId::PsiPlus, BellId::PsiMinus, BellId::NoHerald}) {
        BellOutcome o;
        o.id = id;
        o.patterns = outcome_patterns(id);
        o.requires_number_resolution = (id == BellId::PsiPlus || id == BellId::PsiMinus);
        std::optional<Matrix> acc;
        const ModeRegistry *rest_reg = nullptr;
        for (const auto &r : result.records) {
            if (r.id != id) {
                continue;
            }
            double p = probability(r.rest);
            o.probability += p;
            if (!acc) {
                acc = detail::outer(r.rest);
            } else {
                *acc += detail::outer(r.rest);
            }
            rest_reg = &r.rest.registry();
        }
        if (total > 0.0) {
            o.probability /= total;
        }
        if (acc && o.probability >= tol::kUnreachableOutcome) {
            Matrix m = *acc / acc->trace().real();
            m = (m + m.adjoint()) * 0.5;
            o.post_state = DensityMatrix(*rest_reg, std::move(m));
        }
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

inline const BellOutcome &find_outcome(const std::vector<BellOutcome> &outcomes, BellId id) {
    for (const auto &o : outcomes) {
        if (o.id == id) {
            return o;
        }
    }
    throw LabelError("outcome " + to_string(id) + " not present");
}

/// Draws a seeded sequence of outcomes from exact probabilities. For
/// demonstrations only; acceptance checks use the exact probabilities.
template <class Outcome>
std::vector<BellId> sample_outcomes(const std::vector<Outcome> &outcomes, std::size_t count, std::uint64_t seed) {
    std::vector<double> w;
    for (const auto &o : outcomes) {
        w.push_back(std::max(0.0, o.probability));
    }
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> dist(w.begin(), w.end());
    std::vector<BellId> draws;
    draws.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        draws.push_back(outcomes[dist(rng)].id);
    }
    return draws;
}

}  // namespace omx

#endif  // OMX_MEASUREMENT_HPP
