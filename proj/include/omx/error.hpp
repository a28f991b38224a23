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

#ifndef OMX_ERROR_HPP
#define OMX_ERROR_HPP

#include <stdexcept>
#include <string>

namespace omx {

/// Base class of every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Hilbert-space dimension mismatch or overflow of the configured limit.
struct DimensionError : Error {
    using Error::Error;
};

/// Unknown, duplicate or mistyped mode label.
struct LabelError : Error {
    using Error::Error;
};

/// A state has support where an operator is undefined (isometry domain,
/// incomplete photon-number sector, cutoff overflow).
struct DomainError : Error {
    using Error::Error;
};

/// A value violates a numerical invariant (non-unitary matrix, non-Hermitian
/// generator, unnormalized state flagged as normalized, ...).
struct InvariantError : Error {
    using Error::Error;
};

/// Invalid user-facing configuration (thermal settings, qubit, grid).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace omx

#endif  // OMX_ERROR_HPP
