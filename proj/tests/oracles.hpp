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

#ifndef OMX_TESTS_ORACLES_HPP
#define OMX_TESTS_ORACLES_HPP

// Independent reference computations. None of these call into the
// propagation code they are used to check.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>

namespace oracle {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// exp(A) by scaling and squaring with a 30-term Taylor series.
inline Matrix taylor_expm(const Matrix &a) {
    double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = norm > 0.5 ? static_cast<int>(std::ceil(std::log2(norm / 0.5))) : 0;
    Matrix x = a / std::pow(2.0, squarings);
    Matrix term = Matrix::Identity(a.rows(), a.cols());
    Matrix sum = term;
    for (int k = 1; k <= 30; ++k) {
        term = term * x / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) {
        sum = sum * sum;
    }
    return sum;
}

/// Untruncated two-mode squeezed vacuum: amplitude of |n,n> is
/// (-i tanh r)^n / cosh r.
inline cplx squeezed_amplitude(double r, int n) {
    return std::pow(cplx(0.0, -std::tanh(r)), n) / std::cosh(r);
}

/// Teleport fidelity of the cutoff-2 renormalized thermal model, as the exact
/// rational 1296/1849 at n_bar = 0.2 (s = 1/6).
inline constexpr double kF1At02 = 1296.0 / 1849.0;

/// Thermal weight of level n, truncated at `cutoff` and renormalized.
inline double thermal_weight(double s, int n, int cutoff) {
    double z = 0.0;
    for (int k = 0; k <= cutoff; ++k) {
        z += std::pow(s, k);
    }
    return std::pow(s, n) / z;
}

/// Teleported magnon state written down directly: thermal occupations
/// (nA, nB) each receive one Stokes excitation, alpha on the lower arm and
/// beta on the upper. Returns the diagonal populations over (mA, mB) with
/// local dimension d each (mA fastest).
inline Eigen::VectorXd teleported_populations(double s, int cutoff, cplx alpha, cplx beta, int d) {
    Eigen::VectorXd pop = Eigen::VectorXd::Zero(d * d);
    for (int na = 0; na <= cutoff; ++na) {
        for (int nb = 0; nb <= cutoff; ++nb) {
            double w = thermal_weight(s, na, cutoff) * thermal_weight(s, nb, cutoff);
            pop(na + d * (nb + 1)) += w * std::norm(alpha);
            pop((na + 1) + d * nb) += w * std::norm(beta);
        }
    }
    return pop;
}

inline Vector random_state(std::mt19937_64 &rng, Eigen::Index dim) {
    std::normal_distribution<double> g;
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        v(i) = cplx(g(rng), g(rng));
    }
    return v / v.norm();
}

}  // namespace oracle

#endif  // OMX_TESTS_ORACLES_HPP
