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

#ifndef OMX_TOLERANCES_HPP
#define OMX_TOLERANCES_HPP

#include <cstddef>

namespace omx::tol {

// Numerical tolerances used across the library. Tests reference these
// names rather than repeating literals.

inline constexpr double kStateNorm = 1e-12;          // |<psi|psi> - 1|
inline constexpr double kDensityHermitian = 1e-12;   // max |rho - rho^dag|
inline constexpr double kDensityTrace = 1e-12;       // |tr rho - 1|
inline constexpr double kDensityMinEigenvalue = -1e-10;
inline constexpr double kUnitary = 1e-10;            // max |U^dag U - 1|
inline constexpr double kGeneratorHermitian = 1e-10;
inline constexpr double kProjectorIdempotent = 1e-10;
inline constexpr double kFidelityImaginary = 1e-12;
inline constexpr double kQubitNorm = 1e-12;          // |alpha|^2 + |beta|^2 = 1
inline constexpr double kUnreachableOutcome = 1e-14; // probability below => no post state
inline constexpr double kDomainLeak = 1e-20;         // squared amplitude allowed outside a domain
inline constexpr double kProbabilitySum = 1e-10;
inline constexpr double kThresholdBisection = 1e-10;

/// Largest Hilbert-space dimension a registry may describe.
inline constexpr std::size_t kMaxDimension = std::size_t{1} << 22;
inline constexpr std::size_t kMaxDensityDimension = std::size_t{1} << 12;  // dense rho: 256 MiB

}  // namespace omx::tol

#endif  // OMX_TOLERANCES_HPP
