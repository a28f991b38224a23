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

#ifndef OMX_STATE_HPP
#define OMX_STATE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "omx/error.hpp"
#include "omx/registry.hpp"
#include "omx/tolerances.hpp"

namespace omx {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

enum class Normalization { Normalized, Unnormalized };

/// Pure state over a truncated multimode Fock basis.
class StateVector {
   public:
    StateVector(ModeRegistry registry, Vector amplitudes, Normalization n = Normalization::Normalized)
        : registry_(std::move(registry)), amplitudes_(std::move(amplitudes)), normalization_(n) {
        if (static_cast<std::size_t>(amplitudes_.size()) != registry_.dimension()) {
            throw DimensionError("StateVector: " + std::to_string(amplitudes_.size()) +
                                 " amplitudes for registry of dimension " + std::to_string(registry_.dimension()));
        }
        if (normalization_ == Normalization::Normalized && std::abs(amplitudes_.norm() - 1.0) > tol::kStateNorm) {
            throw InvariantError("StateVector: norm " + std::to_string(amplitudes_.norm()) +
                                 " but state flagged normalized");
        }
    }

    static StateVector basis(const ModeRegistry &registry, const std::vector<int> &occupations) {
        Vector v = Vector::Zero(static_cast<Eigen::Index>(registry.dimension()));
        v(static_cast<Eigen::Index>(registry.index_of(occupations))) = 1.0;
        return StateVector(registry, std::move(v));
    }

    static StateVector vacuum(const ModeRegistry &registry) {
        return basis(registry, std::vector<int>(registry.size(), 0));
    }

    const ModeRegistry &registry() const { return registry_; }
    const Vector &amplitudes() const { return amplitudes_; }
    cplx amplitude(const std::vector<int> &occupations) const {
        return amplitudes_(static_cast<Eigen::Index>(registry_.index_of(occupations)));
    }
    bool normalized() const { return normalization_ == Normalization::Normalized; }
    double norm_squared() const { return amplitudes_.squaredNorm(); }

    /// Normalized copy; throws if the norm is zero.
    StateVector normalize() const {
        double n = amplitudes_.norm();
        if (n == 0.0) {
            throw InvariantError("StateVector::normalize: zero vector");
        }
        return StateVector(registry_, amplitudes_ / n);
    }

   private:
    ModeRegistry registry_;
    Vector amplitudes_;
    Normalization normalization_;
};

/// Mixed state over a truncated multimode Fock basis.
class DensityMatrix {
   public:
    DensityMatrix(ModeRegistry registry, Matrix matrix, Normalization n = Normalization::Normalized)
        : registry_(std::move(registry)), matrix_(std::move(matrix)), normalization_(n) {
        auto d = static_cast<Eigen::Index>(registry_.dimension());
        if (matrix_.rows() != d || matrix_.cols() != d) {
            throw DimensionError("DensityMatrix: matrix is " + std::to_string(matrix_.rows()) + "x" +
                                 std::to_string(matrix_.cols()) + ", registry dimension " + std::to_string(d));
        }
        double asym = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
        if (asym > tol::kDensityHermitian) {
            throw InvariantError("DensityMatrix: not Hermitian (residual " + std::to_string(asym) + ")");
        }
        if (normalization_ == Normalization::Normalized && std::abs(trace() - 1.0) > tol::kDensityTrace) {
            throw InvariantError("DensityMatrix: trace " + std::to_string(trace()) + " but flagged normalized");
        }
    }

    explicit DensityMatrix(const StateVector &psi)
        : DensityMatrix(psi.registry(), psi.amplitudes() * psi.amplitudes().adjoint(),
                        psi.normalized() ? Normalization::Normalized : Normalization::Unnormalized) {}

    const ModeRegistry &registry() const { return registry_; }
    const Matrix &matrix() const { return matrix_; }
    bool normalized() const { return normalization_ == Normalization::Normalized; }
    double trace() const { return matrix_.trace().real(); }

    DensityMatrix normalize() const {
        double t = trace();
        if (!(t > 0.0)) {
            throw InvariantError("DensityMatrix::normalize: non-positive trace");
        }
        return DensityMatrix(registry_, matrix_ / t);
    }

    Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }

    bool positive_semidefinite() const {
        return eigenvalues().minCoeff() >= tol::kDensityMinEigenvalue;
    }

   private:
    ModeRegistry registry_;
    Matrix matrix_;
    Normalization normalization_;
};

/// Weighted ensemble of pure states; the density matrix is sum_k w_k |psi_k><psi_k|.
/// Thermal inputs are diagonal, so propagating each branch as a vector is
/// exact and far cheaper than carrying the full density matrix.
struct Mixture {
    struct Branch {
        double weight;
        StateVector state;
    };
    std::vector<Branch> branches;

    double total_weight() const {
        double w = 0.0;
        for (const auto &b : branches) {
            w += b.weight * b.state.norm_squared();
        }
        return w;
    }

    DensityMatrix to_density_matrix() const {
        if (branches.empty()) {
            throw InvariantError("Mixture::to_density_matrix: empty mixture");
        }
        const auto &reg = branches.front().state.registry();
        auto d = static_cast<Eigen::Index>(reg.dimension());
        Matrix rho = Matrix::Zero(d, d);
        for (const auto &b : branches) {
            rho.noalias() += b.weight * (b.state.amplitudes() * b.state.amplitudes().adjoint());
        }
        bool unit = std::abs(rho.trace().real() - 1.0) <= tol::kDensityTrace;
        return DensityMatrix(reg, std::move(rho), unit ? Normalization::Normalized : Normalization::Unnormalized);
    }
};

}  // namespace omx

#endif  // OMX_STATE_HPP
