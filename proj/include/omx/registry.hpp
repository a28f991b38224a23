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

#ifndef OMX_REGISTRY_HPP
#define OMX_REGISTRY_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "omx/error.hpp"
#include "omx/tolerances.hpp"

namespace omx {

enum class ModeKind { OpticalPath, Magnon };
enum class Polarization { H, V };

inline char polarization_char(Polarization p) { return p == Polarization::H ? 'H' : 'V'; }

/// Name of one bosonic mode: an optical path with a polarization ("A.H"),
/// or a magnon mode ("mA").
struct ModeLabel {
    ModeKind kind = ModeKind::Magnon;
    std::string path;
    std::optional<Polarization> polarization;

    static ModeLabel optical(std::string path, Polarization pol) {
        return ModeLabel{ModeKind::OpticalPath, std::move(path), pol};
    }
    static ModeLabel magnon(std::string name) { return ModeLabel{ModeKind::Magnon, std::move(name), std::nullopt}; }

    bool valid() const { return !path.empty() && (polarization.has_value() == (kind == ModeKind::OpticalPath)); }

    std::string str() const {
        if (kind == ModeKind::OpticalPath) {
            return path + "." + polarization_char(*polarization);
        }
        return path;
    }

    bool operator==(const ModeLabel &) const = default;
};

/// Ordered catalogue of modes with per-mode Fock cutoffs.
///
/// Basis states are indexed little-endian over registry order: mode 0 is the
/// fastest-varying digit, so index = sum_k n_k * stride_k with
/// stride_0 = 1 and stride_{k+1} = stride_k * (cutoff_k + 1).
class ModeRegistry {
   public:
    ModeRegistry() = default;

    ModeRegistry(std::vector<ModeLabel> modes, std::vector<int> cutoffs)
        : modes_(std::move(modes)), cutoffs_(std::move(cutoffs)) {
        if (modes_.size() != cutoffs_.size()) {
            throw DimensionError("ModeRegistry: " + std::to_string(modes_.size()) + " modes but " +
                                 std::to_string(cutoffs_.size()) + " cutoffs");
        }
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            if (!modes_[i].valid()) {
                throw LabelError("ModeRegistry: malformed mode label '" + modes_[i].path + "'");
            }
            if (cutoffs_[i] < 1) {
                throw DimensionError("ModeRegistry: cutoff of " + modes_[i].str() + " must be >= 1");
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (modes_[j] == modes_[i]) {
                    throw LabelError("ModeRegistry: duplicate mode label " + modes_[i].str());
                }
            }
        }
        strides_.resize(modes_.size());
        std::size_t d = 1;
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            strides_[i] = d;
            auto local = static_cast<std::size_t>(cutoffs_[i]) + 1;
            if (d > tol::kMaxDimension / local) {
                throw DimensionError("ModeRegistry: dimension exceeds limit of " +
                                     std::to_string(tol::kMaxDimension));
            }
            d *= local;
        }
        dimension_ = d;
    }

    std::size_t size() const { return modes_.size(); }
    std::size_t dimension() const { return dimension_; }
    const std::vector<ModeLabel> &modes() const { return modes_; }
    const std::vector<int> &cutoffs() const { return cutoffs_; }
    const ModeLabel &label(std::size_t mode) const { return modes_.at(mode); }
    int cutoff(std::size_t mode) const { return cutoffs_.at(mode); }
    std::size_t stride(std::size_t mode) const { return strides_.at(mode); }
    std::size_t local_dimension(std::size_t mode) const { return static_cast<std::size_t>(cutoffs_.at(mode)) + 1; }

    int occupation(std::size_t index, std::size_t mode) const {
        return static_cast<int>((index / strides_[mode]) % (static_cast<std::size_t>(cutoffs_[mode]) + 1));
    }

    std::vector<int> occupations(std::size_t index) const {
        std::vector<int> n(modes_.size());
        for (std::size_t k = 0; k < modes_.size(); ++k) {
            n[k] = occupation(index, k);
        }
        return n;
    }

    std::size_t index_of(const std::vector<int> &occupations) const {
        if (occupations.size() != modes_.size()) {
            throw DimensionError("ModeRegistry::index_of: wrong number of occupations");
        }
        std::size_t idx = 0;
        for (std::size_t k = 0; k < modes_.size(); ++k) {
            if (occupations[k] < 0 || occupations[k] > cutoffs_[k]) {
                throw DimensionError("ModeRegistry::index_of: occupation " + std::to_string(occupations[k]) +
                                     " outside cutoff of " + modes_[k].str());
            }
            idx += static_cast<std::size_t>(occupations[k]) * strides_[k];
        }
        return idx;
    }

    std::optional<std::size_t> find(const ModeLabel &label) const {
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            if (modes_[i] == label) {
                return i;
            }
        }
        return std::nullopt;
    }

    std::size_t require(const ModeLabel &label) const {
        if (auto i = find(label)) {
            return *i;
        }
        throw LabelError("mode " + label.str() + " is not registered");
    }

    std::size_t optical(const std::string &path, Polarization pol) const {
        return require(ModeLabel::optical(path, pol));
    }
    std::size_t magnon(const std::string &name) const { return require(ModeLabel::magnon(name)); }

    bool has_path(const std::string &path) const {
        return find(ModeLabel::optical(path, Polarization::H)).has_value() &&
               find(ModeLabel::optical(path, Polarization::V)).has_value();
    }

    /// Registry over a subset of modes, in this registry's order.
    ModeRegistry subset(const std::vector<std::size_t> &keep) const {
        std::vector<ModeLabel> m;
        std::vector<int> c;
        for (std::size_t k = 0; k < modes_.size(); ++k) {
            for (auto q : keep) {
                if (q == k) {
                    m.push_back(modes_[k]);
                    c.push_back(cutoffs_[k]);
                    break;
                }
            }
        }
        return ModeRegistry(std::move(m), std::move(c));
    }

    /// Registry of this one followed by `other` (tensor-product order).
    ModeRegistry concat(const ModeRegistry &other) const {
        auto m = modes_;
        auto c = cutoffs_;
        m.insert(m.end(), other.modes_.begin(), other.modes_.end());
        c.insert(c.end(), other.cutoffs_.begin(), other.cutoffs_.end());
        return ModeRegistry(std::move(m), std::move(c));
    }

    ModeRegistry with_cutoff(std::size_t mode, int cutoff) const {
        auto c = cutoffs_;
        c.at(mode) = cutoff;
        return ModeRegistry(modes_, std::move(c));
    }

    bool operator==(const ModeRegistry &other) const {
        return modes_ == other.modes_ && cutoffs_ == other.cutoffs_;
    }

   private:
    std::vector<ModeLabel> modes_;
    std::vector<int> cutoffs_;
    std::vector<std::size_t> strides_;
    std::size_t dimension_ = 1;
};

}  // namespace omx

#endif  // OMX_REGISTRY_HPP
