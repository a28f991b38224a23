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

#ifndef OMX_ELEMENT_OP_HPP
#define OMX_ELEMENT_OP_HPP

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "omx/error.hpp"
#include "omx/registry.hpp"
#include "omx/state.hpp"
#include "omx/tolerances.hpp"

namespace omx {

namespace detail {

/// Maps between global basis indices of a registry and the local basis of a
/// subset of target modes. Local indices are little-endian over target order.
class LocalLayout {
   public:
    LocalLayout(const ModeRegistry &registry, const std::vector<std::size_t> &targets) : targets_(targets) {
        std::size_t ls = 1;
        for (auto t : targets_) {
            if (t >= registry.size()) {
                throw LabelError("target mode index " + std::to_string(t) + " out of range (registry has " +
                                 std::to_string(registry.size()) + " modes)");
            }
            for (auto u : global_stride_) {
                if (u == registry.stride(t)) {
                    throw LabelError("target mode " + registry.label(t).str() + " listed twice");
                }
            }
            global_stride_.push_back(registry.stride(t));
            local_dim_.push_back(registry.local_dimension(t));
            local_stride_.push_back(ls);
            ls *= registry.local_dimension(t);
        }
        local_size_ = ls;
        offset_.resize(local_size_);
        for (std::size_t l = 0; l < local_size_; ++l) {
            std::size_t g = 0;
            for (std::size_t k = 0; k < targets_.size(); ++k) {
                g += ((l / local_stride_[k]) % local_dim_[k]) * global_stride_[k];
            }
            offset_[l] = g;
        }
    }

    std::size_t local_size() const { return local_size_; }

    std::size_t local_index(std::size_t global) const {
        std::size_t l = 0;
        for (std::size_t k = 0; k < targets_.size(); ++k) {
            l += ((global / global_stride_[k]) % local_dim_[k]) * local_stride_[k];
        }
        return l;
    }

    /// Global offset contributed by local basis state `local`.
    std::size_t offset(std::size_t local) const { return offset_[local]; }

    int local_occupation(std::size_t local, std::size_t k) const {
        return static_cast<int>((local / local_stride_[k]) % local_dim_[k]);
    }

   private:
    std::vector<std::size_t> targets_;
    std::vector<std::size_t> global_stride_;
    std::vector<std::size_t> local_dim_;
    std::vector<std::size_t> local_stride_;
    std::vector<std::size_t> offset_;
    std::size_t local_size_ = 1;
};

inline std::size_t local_dimension(const std::vector<int> &cutoffs) {
    std::size_t d = 1;
    for (int c : cutoffs) {
        d *= static_cast<std::size_t>(c) + 1;
    }
    return d;
}

/// Occupations of local basis state `local` over modes with the given cutoffs.
inline std::vector<int> local_occupations(std::size_t local, const std::vector<int> &cutoffs) {
    std::vector<int> n(cutoffs.size());
    for (std::size_t k = 0; k < cutoffs.size(); ++k) {
        auto d = static_cast<std::size_t>(cutoffs[k]) + 1;
        n[k] = static_cast<int>(local % d);
        local /= d;
    }
    return n;
}

inline std::size_t local_index_of(const std::vector<int> &occupations, const std::vector<int> &cutoffs) {
    std::size_t l = 0;
    std::size_t s = 1;
    for (std::size_t k = 0; k < cutoffs.size(); ++k) {
        l += static_cast<std::size_t>(occupations[k]) * s;
        s *= static_cast<std::size_t>(cutoffs[k]) + 1;
    }
    return l;
}

}  // namespace detail

/// A matrix on the joint Fock space of some target modes, identity elsewhere.
/// Used for generators, observables and projectors.
struct LocalOperator {
    std::vector<std::size_t> targets;
    Matrix matrix;
};

enum class OpFlavor { Unitary, Isometry };

/// Unitary or isometry acting on a subset of registry modes.
///
/// An isometry is defined on a domain of local basis states (its columns
/// outside the domain are zero). Applying it to a state with support outside
/// the domain raises DomainError with `domain_message`.
class ElementOp {
   public:
    ElementOp(std::string name, const ModeRegistry &registry, std::vector<std::size_t> targets, Matrix matrix,
              OpFlavor flavor, std::vector<bool> domain = {}, std::string domain_message = {})
        : name_(std::move(name)),
          targets_(std::move(targets)),
          matrix_(std::move(matrix)),
          flavor_(flavor),
          domain_(std::move(domain)),
          domain_message_(std::move(domain_message)) {
        detail::LocalLayout layout(registry, targets_);  // validates targets
        for (auto t : targets_) {
            cutoffs_.push_back(registry.cutoff(t));
            labels_.push_back(registry.label(t));
        }
        auto d = static_cast<Eigen::Index>(layout.local_size());
        if (matrix_.rows() != d || matrix_.cols() != d) {
            throw DimensionError(name_ + ": matrix is " + std::to_string(matrix_.rows()) + "x" +
                                 std::to_string(matrix_.cols()) + ", target space has dimension " +
                                 std::to_string(d));
        }
        if (domain_.empty()) {
            domain_.assign(static_cast<std::size_t>(d), true);
        }
        if (domain_.size() != static_cast<std::size_t>(d)) {
            throw DimensionError(name_ + ": domain mask has wrong size");
        }
        if (domain_message_.empty()) {
            domain_message_ = name_ + ": state has support outside the operator's domain";
        }
        validate();
        build_columns();
    }

    const std::string &name() const { return name_; }
    const std::vector<std::size_t> &targets() const { return targets_; }
    const std::vector<int> &target_cutoffs() const { return cutoffs_; }
    const std::vector<ModeLabel> &target_labels() const { return labels_; }
    const Matrix &matrix() const { return matrix_; }
    OpFlavor flavor() const { return flavor_; }
    bool in_domain(std::size_t local) const { return domain_[local]; }
    const std::vector<bool> &domain() const { return domain_; }
    const std::string &domain_message() const { return domain_message_; }
    bool full_domain() const {
        for (bool b : domain_) {
            if (!b) {
                return false;
            }
        }
        return true;
    }

    /// Nonzero entries of column `local`: (row, value).
    const std::vector<std::pair<std::size_t, cplx>> &column(std::size_t local) const { return columns_[local]; }

    /// Largest deviation of the defining identity (U^dag U = U U^dag = 1, or
    /// V^dag V = 1 on the domain).
    double invariant_residual() const {
        auto d = matrix_.cols();
        if (flavor_ == OpFlavor::Unitary) {
            Matrix id = Matrix::Identity(d, d);
            double a = (matrix_.adjoint() * matrix_ - id).cwiseAbs().maxCoeff();
            double b = (matrix_ * matrix_.adjoint() - id).cwiseAbs().maxCoeff();
            return std::max(a, b);
        }
        std::vector<Eigen::Index> cols;
        for (Eigen::Index j = 0; j < d; ++j) {
            if (domain_[static_cast<std::size_t>(j)]) {
                cols.push_back(j);
            }
        }
        Matrix v(matrix_.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) {
            v.col(static_cast<Eigen::Index>(k)) = matrix_.col(cols[k]);
        }
        Matrix id = Matrix::Identity(v.cols(), v.cols());
        return v.cols() == 0 ? 0.0 : (v.adjoint() * v - id).cwiseAbs().maxCoeff();
    }

   private:
    void validate() {
        if (flavor_ == OpFlavor::Isometry) {
            for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
                if (!domain_[static_cast<std::size_t>(j)]) {
                    matrix_.col(j).setZero();
                }
            }
        }
        double r = invariant_residual();
        if (r > tol::kUnitary) {
            throw InvariantError(name_ + ": " + (flavor_ == OpFlavor::Unitary ? "not unitary" : "not an isometry") +
                                 " (residual " + std::to_string(r) + ")");
        }
    }

    void build_columns() {
        columns_.resize(static_cast<std::size_t>(matrix_.cols()));
        for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
            for (Eigen::Index i = 0; i < matrix_.rows(); ++i) {
                cplx v = matrix_(i, j);
                if (v != cplx(0.0)) {
                    columns_[static_cast<std::size_t>(j)].emplace_back(static_cast<std::size_t>(i), v);
                }
            }
        }
    }

    std::string name_;
    std::vector<std::size_t> targets_;
    std::vector<int> cutoffs_;
    std::vector<ModeLabel> labels_;
    Matrix matrix_;
    OpFlavor flavor_;
    std::vector<bool> domain_;
    std::string domain_message_;
    std::vector<std::vector<std::pair<std::size_t, cplx>>> columns_;
};

}  // namespace omx

#endif  // OMX_ELEMENT_OP_HPP
