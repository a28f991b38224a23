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

#ifndef OMX_FOCK_HPP
#define OMX_FOCK_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "omx/element_op.hpp"
#include "omx/error.hpp"
#include "omx/registry.hpp"
#include "omx/state.hpp"
#include "omx/tolerances.hpp"

namespace omx {

namespace detail {

inline void check_op_registry(const ElementOp &op, const ModeRegistry &registry) {
    for (std::size_t k = 0; k < op.targets().size(); ++k) {
        auto t = op.targets()[k];
        if (t >= registry.size()) {
            throw LabelError(op.name() + ": target index " + std::to_string(t) + " out of range");
        }
        if (!(registry.label(t) == op.target_labels()[k]) || registry.cutoff(t) != op.target_cutoffs()[k]) {
            throw LabelError(op.name() + ": built for mode " + op.target_labels()[k].str() + " but registry slot " +
                             std::to_string(t) + " is " + registry.label(t).str());
        }
    }
}

/// out = op * in on the registry's global space, skipping zero amplitudes.
inline Vector apply_kernel(const ElementOp &op, const LocalLayout &layout, const Vector &in) {
    Vector out = Vector::Zero(in.size());
    for (Eigen::Index g = 0; g < in.size(); ++g) {
        cplx a = in(g);
        if (a == cplx(0.0)) {
            continue;
        }
        auto gi = static_cast<std::size_t>(g);
        std::size_t l = layout.local_index(gi);
        if (!op.in_domain(l)) {
            if (std::norm(a) > tol::kDomainLeak) {
                throw DomainError(op.domain_message());
            }
            continue;
        }
        std::size_t base = gi - layout.offset(l);
        for (const auto &[row, v] : op.column(l)) {
            out(static_cast<Eigen::Index>(base + layout.offset(row))) += v * a;
        }
    }
    return out;
}

/// rho -> L rho L^dag for a linear map L given on vectors.
inline Matrix map_both_sides(const Matrix &rho, std::size_t out_dim, const std::function<Vector(const Vector &)> &f) {
    auto n = static_cast<Eigen::Index>(out_dim);
    Matrix half(n, rho.cols());
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
        half.col(j) = f(rho.col(j));
    }
    Matrix half_adj = half.adjoint();
    Matrix out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.col(j) = f(half_adj.col(j));
    }
    // Restore exact Hermiticity lost to rounding.
    return (out + out.adjoint()) * 0.5;
}

inline std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t> &modes) {
    std::vector<std::size_t> rest;
    for (std::size_t k = 0; k < n; ++k) {
        if (std::find(modes.begin(), modes.end(), k) == modes.end()) {
            rest.push_back(k);
        }
    }
    return rest;
}

inline Normalization normalization_of(double trace_or_norm2) {
    return std::abs(trace_or_norm2 - 1.0) <= tol::kStateNorm ? Normalization::Normalized
                                                             : Normalization::Unnormalized;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Single-mode building blocks

/// Truncated annihilation operator on {|0>, ..., |cutoff>}.
inline Matrix lowering(int cutoff) {
    Matrix a = Matrix::Zero(cutoff + 1, cutoff + 1);
    for (int n = 1; n <= cutoff; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

inline Matrix number_operator(int cutoff) {
    Matrix n = Matrix::Zero(cutoff + 1, cutoff + 1);
    for (int k = 0; k <= cutoff; ++k) {
        n(k, k) = static_cast<double>(k);
    }
    return n;
}

/// Product of single-mode operators on the little-endian joint space of
/// several modes: factors[0] acts on the fastest digit.
inline Matrix local_product(const std::vector<Matrix> &factors) {
    Matrix m = Matrix::Ones(1, 1);
    for (const auto &f : factors) {
        // New factor is the slower digit: kron(f, m) in big-endian convention.
        Matrix next(f.rows() * m.rows(), f.cols() * m.cols());
        for (Eigen::Index i = 0; i < f.rows(); ++i) {
            for (Eigen::Index j = 0; j < f.cols(); ++j) {
                next.block(i * m.rows(), j * m.cols(), m.rows(), m.cols()) = f(i, j) * m;
            }
        }
        m = std::move(next);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Composition

inline StateVector tensor(const StateVector &a, const StateVector &b) {
    ModeRegistry reg = a.registry().concat(b.registry());
    auto da = a.amplitudes().size();
    Vector v(static_cast<Eigen::Index>(reg.dimension()));
    for (Eigen::Index j = 0; j < b.amplitudes().size(); ++j) {
        v.segment(j * da, da) = b.amplitudes()(j) * a.amplitudes();
    }
    bool unit = a.normalized() && b.normalized();
    return StateVector(std::move(reg), std::move(v), unit ? Normalization::Normalized : Normalization::Unnormalized);
}

inline DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b) {
    ModeRegistry reg = a.registry().concat(b.registry());
    const Matrix &A = a.matrix();
    const Matrix &B = b.matrix();
    auto da = A.rows();
    Matrix m(static_cast<Eigen::Index>(reg.dimension()), static_cast<Eigen::Index>(reg.dimension()));
    for (Eigen::Index i = 0; i < B.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.cols(); ++j) {
            m.block(i * da, j * da, da, da) = B(i, j) * A;
        }
    }
    bool unit = a.normalized() && b.normalized();
    return DensityMatrix(std::move(reg), std::move(m), unit ? Normalization::Normalized : Normalization::Unnormalized);
}

// ---------------------------------------------------------------------------
// Element application

inline StateVector apply(const ElementOp &op, const StateVector &state) {
    detail::check_op_registry(op, state.registry());
    detail::LocalLayout layout(state.registry(), op.targets());
    Vector out = detail::apply_kernel(op, layout, state.amplitudes());
    return StateVector(state.registry(), std::move(out),
                       state.normalized() ? Normalization::Normalized : Normalization::Unnormalized);
}

inline DensityMatrix apply(const ElementOp &op, const DensityMatrix &state) {
    detail::check_op_registry(op, state.registry());
    detail::LocalLayout layout(state.registry(), op.targets());
    Matrix out = detail::map_both_sides(state.matrix(), state.registry().dimension(),
                                        [&](const Vector &v) { return detail::apply_kernel(op, layout, v); });
    return DensityMatrix(state.registry(), std::move(out),
                         state.normalized() ? Normalization::Normalized : Normalization::Unnormalized);
}

inline Mixture apply(const ElementOp &op, const Mixture &mixture) {
    Mixture out;
    out.branches.reserve(mixture.branches.size());
    for (const auto &b : mixture.branches) {
        out.branches.push_back({b.weight, apply(op, b.state)});
    }
    return out;
}

/// Nonzero amplitudes keyed by global basis index, sorted by index. Protocol
/// branches occupy a handful of basis states out of a large space.
struct SparseState {
    ModeRegistry registry;
    std::vector<std::pair<std::size_t, cplx>> amplitudes;

    static SparseState from(const StateVector &s) {
        SparseState out{s.registry(), {}};
        for (Eigen::Index g = 0; g < s.amplitudes().size(); ++g) {
            if (s.amplitudes()(g) != cplx(0.0)) {
                out.amplitudes.emplace_back(static_cast<std::size_t>(g), s.amplitudes()(g));
            }
        }
        return out;
    }

    StateVector dense(Normalization n = Normalization::Unnormalized) const {
        Vector v = Vector::Zero(static_cast<Eigen::Index>(registry.dimension()));
        for (const auto &[g, a] : amplitudes) {
            v(static_cast<Eigen::Index>(g)) = a;
        }
        return StateVector(registry, std::move(v), n);
    }
};

/// Same arithmetic as the dense kernel, visiting only stored amplitudes.
inline SparseState apply(const ElementOp &op, const SparseState &state) {
    detail::check_op_registry(op, state.registry);
    detail::LocalLayout layout(state.registry, op.targets());
    std::map<std::size_t, cplx> acc;
    for (const auto &[g, a] : state.amplitudes) {
        std::size_t l = layout.local_index(g);
        if (!op.in_domain(l)) {
            if (std::norm(a) > tol::kDomainLeak) {
                throw DomainError(op.domain_message());
            }
            continue;
        }
        std::size_t base = g - layout.offset(l);
        for (const auto &[row, v] : op.column(l)) {
            acc[base + layout.offset(row)] += v * a;
        }
    }
    SparseState out{state.registry, {}};
    out.amplitudes.reserve(acc.size());
    for (const auto &[g, a] : acc) {
        if (a != cplx(0.0)) {
            out.amplitudes.emplace_back(g, a);
        }
    }
    return out;
}

/// Applies an arbitrary local matrix (no unitarity required). Result is
/// flagged unnormalized.
inline StateVector apply_local(const LocalOperator &op, const StateVector &state) {
    detail::LocalLayout layout(state.registry(), op.targets);
    if (op.matrix.rows() != static_cast<Eigen::Index>(layout.local_size()) || op.matrix.cols() != op.matrix.rows()) {
        throw DimensionError("apply_local: operator dimension does not match its targets");
    }
    const Vector &in = state.amplitudes();
    Vector out = Vector::Zero(in.size());
    for (Eigen::Index g = 0; g < in.size(); ++g) {
        cplx a = in(g);
        if (a == cplx(0.0)) {
            continue;
        }
        auto gi = static_cast<std::size_t>(g);
        std::size_t l = layout.local_index(gi);
        std::size_t base = gi - layout.offset(l);
        for (Eigen::Index r = 0; r < op.matrix.rows(); ++r) {
            cplx m = op.matrix(r, static_cast<Eigen::Index>(l));
            if (m != cplx(0.0)) {
                out(static_cast<Eigen::Index>(base + layout.offset(static_cast<std::size_t>(r)))) += m * a;
            }
        }
    }
    return StateVector(state.registry(), std::move(out), Normalization::Unnormalized);
}

inline DensityMatrix apply_local(const LocalOperator &op, const DensityMatrix &state) {
    Matrix out = detail::map_both_sides(state.matrix(), state.registry().dimension(), [&](const Vector &v) {
        return apply_local(op, StateVector(state.registry(), v, Normalization::Unnormalized)).amplitudes();
    });
    return DensityMatrix(state.registry(), std::move(out), Normalization::Unnormalized);
}

// ---------------------------------------------------------------------------
// Reduction and conditioning

/// Reduced state on `keep` (registry order is preserved).
inline DensityMatrix partial_trace(const DensityMatrix &state, const std::vector<std::size_t> &keep) {
    const auto &reg = state.registry();
    if (keep.empty()) {
        throw LabelError("partial_trace: keep set is empty");
    }
    for (auto k : keep) {
        if (k >= reg.size()) {
            throw LabelError("partial_trace: mode index " + std::to_string(k) + " out of range");
        }
    }
    std::vector<std::size_t> kept(keep);
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    auto traced = detail::complement(reg.size(), kept);
    detail::LocalLayout keep_layout(reg, kept);
    detail::LocalLayout trace_layout(reg, traced);
    auto dk = static_cast<Eigen::Index>(keep_layout.local_size());
    auto dt = trace_layout.local_size();
    Matrix red = Matrix::Zero(dk, dk);
    const Matrix &rho = state.matrix();
    for (std::size_t t = 0; t < dt; ++t) {
        auto ot = trace_layout.offset(t);
        for (Eigen::Index j = 0; j < dk; ++j) {
            auto gj = static_cast<Eigen::Index>(keep_layout.offset(static_cast<std::size_t>(j)) + ot);
            for (Eigen::Index i = 0; i < dk; ++i) {
                red(i, j) += rho(static_cast<Eigen::Index>(keep_layout.offset(static_cast<std::size_t>(i)) + ot), gj);
            }
        }
    }
    red = (red + red.adjoint()) * 0.5;
    return DensityMatrix(reg.subset(kept), std::move(red),
                         state.normalized() ? Normalization::Normalized : Normalization::Unnormalized);
}

/// Reduced density matrix of a pure state on `keep`.
inline DensityMatrix reduced_density(const StateVector &state, const std::vector<std::size_t> &keep) {
    const auto &reg = state.registry();
    std::vector<std::size_t> kept(keep);
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    if (kept.empty()) {
        throw LabelError("reduced_density: keep set is empty");
    }
    auto traced = detail::complement(reg.size(), kept);
    detail::LocalLayout keep_layout(reg, kept);
    detail::LocalLayout trace_layout(reg, traced);
    auto dk = static_cast<Eigen::Index>(keep_layout.local_size());
    auto dt = static_cast<Eigen::Index>(trace_layout.local_size());
    Matrix psi(dk, dt);
    for (Eigen::Index t = 0; t < dt; ++t) {
        for (Eigen::Index k = 0; k < dk; ++k) {
            psi(k, t) = state.amplitudes()(static_cast<Eigen::Index>(
                keep_layout.offset(static_cast<std::size_t>(k)) + trace_layout.offset(static_cast<std::size_t>(t))));
        }
    }
    Matrix red = psi * psi.adjoint();
    red = (red + red.adjoint()) * 0.5;
    return DensityMatrix(reg.subset(kept), std::move(red),
                         state.normalized() ? Normalization::Normalized : Normalization::Unnormalized);
}

/// Contracts the target modes with <bra| (bra given on their local space) and
/// returns the unnormalized state of the remaining modes.
inline StateVector contract(const StateVector &state, const std::vector<std::size_t> &targets, const Vector &bra) {
    const auto &reg = state.registry();
    detail::LocalLayout t_layout(reg, targets);
    if (static_cast<std::size_t>(bra.size()) != t_layout.local_size()) {
        throw DimensionError("contract: bra dimension does not match targets");
    }
    auto rest = detail::complement(reg.size(), targets);
    if (rest.empty()) {
        throw LabelError("contract: no modes would remain");
    }
    detail::LocalLayout r_layout(reg, rest);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(r_layout.local_size()));
    for (std::size_t l = 0; l < t_layout.local_size(); ++l) {
        cplx b = std::conj(bra(static_cast<Eigen::Index>(l)));
        if (b == cplx(0.0)) {
            continue;
        }
        auto ol = t_layout.offset(l);
        for (std::size_t r = 0; r < r_layout.local_size(); ++r) {
            out(static_cast<Eigen::Index>(r)) += b * state.amplitudes()(static_cast<Eigen::Index>(ol + r_layout.offset(r)));
        }
    }
    return StateVector(reg.subset(rest), std::move(out), Normalization::Unnormalized);
}

inline DensityMatrix contract(const DensityMatrix &state, const std::vector<std::size_t> &targets, const Vector &bra) {
    const auto &reg = state.registry();
    auto rest = detail::complement(reg.size(), targets);
    if (rest.empty()) {
        throw LabelError("contract: no modes would remain");
    }
    ModeRegistry out_reg = reg.subset(rest);
    Matrix m = detail::map_both_sides(state.matrix(), out_reg.dimension(), [&](const Vector &v) {
        return contract(StateVector(reg, v, Normalization::Unnormalized), targets, bra).amplitudes();
    });
    return DensityMatrix(std::move(out_reg), std::move(m), Normalization::Unnormalized);
}

inline Vector basis_bra(const ModeRegistry &reg, const std::vector<std::size_t> &modes, const std::vector<int> &occ) {
    if (modes.size() != occ.size()) {
        throw DimensionError("condition_on: one occupation per mode required");
    }
    std::vector<int> cut;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        cut.push_back(reg.cutoff(modes[k]));
        if (occ[k] < 0 || occ[k] > cut.back()) {
            throw DimensionError("condition_on: occupation outside cutoff of " + reg.label(modes[k]).str());
        }
    }
    Vector bra = Vector::Zero(static_cast<Eigen::Index>(detail::local_dimension(cut)));
    bra(static_cast<Eigen::Index>(detail::local_index_of(occ, cut))) = 1.0;
    return bra;
}

/// Projects `modes` onto definite occupations and drops them; the squared
/// norm (trace) of the result is the outcome probability.
template <class State>
State condition_on(const State &state, const std::vector<std::size_t> &modes, const std::vector<int> &occupations) {
    return contract(state, modes, basis_bra(state.registry(), modes, occupations));
}

/// Embeds a state into a registry where `mode` has a larger cutoff.
inline StateVector widen_cutoff(const StateVector &state, std::size_t mode, int cutoff) {
    const auto &reg = state.registry();
    if (cutoff < reg.cutoff(mode)) {
        throw DimensionError("widen_cutoff: cannot shrink " + reg.label(mode).str());
    }
    if (cutoff == reg.cutoff(mode)) {
        return state;
    }
    ModeRegistry wide = reg.with_cutoff(mode, cutoff);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(wide.dimension()));
    auto old_local = reg.local_dimension(mode);
    auto s = reg.stride(mode);
    auto extra = wide.stride(mode) * wide.local_dimension(mode) - s * old_local;
    for (Eigen::Index g = 0; g < state.amplitudes().size(); ++g) {
        auto gi = static_cast<std::size_t>(g);
        // digits above `mode` shift by the growth of their stride
        std::size_t high = gi / (s * old_local);
        out(static_cast<Eigen::Index>(gi + high * extra)) = state.amplitudes()(g);
    }
    return StateVector(std::move(wide), std::move(out),
                       state.normalized() ? Normalization::Normalized : Normalization::Unnormalized);
}

inline DensityMatrix widen_cutoff(const DensityMatrix &state, std::size_t mode, int cutoff) {
    ModeRegistry wide = state.registry().with_cutoff(mode, cutoff);
    Matrix m = detail::map_both_sides(state.matrix(), wide.dimension(), [&](const Vector &v) {
        return widen_cutoff(StateVector(state.registry(), v, Normalization::Unnormalized), mode, cutoff).amplitudes();
    });
    return DensityMatrix(std::move(wide), std::move(m),
                         state.normalized() ? Normalization::Normalized : Normalization::Unnormalized);
}

inline double probability(const StateVector &s) { return s.norm_squared(); }
inline double probability(const DensityMatrix &s) { return s.trace(); }

// ---------------------------------------------------------------------------
// Figures of merit

/// <target| state |target>.
inline double fidelity(const DensityMatrix &state, const StateVector &target) {
    if (!(state.registry() == target.registry())) {
        throw DimensionError("fidelity: state and target live on different registries");
    }
    if (!target.normalized()) {
        throw InvariantError("fidelity: target must be normalized");
    }
    cplx f = target.amplitudes().dot(state.matrix() * target.amplitudes());
    if (std::abs(f.imag()) > tol::kFidelityImaginary) {
        throw InvariantError("fidelity: imaginary residue " + std::to_string(f.imag()));
    }
    return std::clamp(f.real(), 0.0, 1.0);
}

inline double fidelity(const StateVector &state, const StateVector &target) {
    if (!(state.registry() == target.registry())) {
        throw DimensionError("fidelity: state and target live on different registries");
    }
    return std::clamp(std::norm(target.amplitudes().dot(state.amplitudes())), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Hamiltonian evolution

/// exp(-i t G) for a Hermitian generator on the targets' joint space, as a
/// unitary element.
inline ElementOp expm_unitary(const ModeRegistry &registry, const LocalOperator &generator, double t,
                              std::string name = "expm") {
    const Matrix &g = generator.matrix;
    if (g.rows() != g.cols()) {
        throw DimensionError("expm_unitary: generator must be square");
    }
    double asym = g.size() == 0 ? 0.0 : (g - g.adjoint()).cwiseAbs().maxCoeff();
    if (asym > tol::kGeneratorHermitian) {
        throw InvariantError("expm_unitary: generator is not Hermitian (residual " + std::to_string(asym) + ")");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es((g + g.adjoint()) * 0.5);
    Vector phases = (es.eigenvalues().cast<cplx>() * cplx(0.0, -t)).array().exp().matrix();
    Matrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return ElementOp(std::move(name), registry, generator.targets, std::move(u), OpFlavor::Unitary);
}

template <class State>
State expm_apply(const LocalOperator &generator, double t, const State &state) {
    return apply(expm_unitary(state.registry(), generator, t), state);
}

}  // namespace omx

#endif  // OMX_FOCK_HPP
