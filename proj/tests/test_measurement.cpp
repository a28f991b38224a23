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

#include <gtest/gtest.h>

#include <random>

#include "omx/measurement.hpp"
#include "oracles.hpp"

using namespace omx;

namespace {

// Two analyzer paths plus a spectator magnon.
ModeRegistry analyzer_registry() {
    return ModeRegistry({ModeLabel::optical("B", Polarization::H), ModeLabel::optical("B", Polarization::V),
                         ModeLabel::optical("C", Polarization::H), ModeLabel::optical("C", Polarization::V),
                         ModeLabel::magnon("m")},
                        {1, 1, 1, 1, 1});
}

const DetectionLayout kLayout{"B", "C"};

StateVector from_local(const ModeRegistry &reg, const Vector &two_photon) {
    // embed a state of the four analyzer modes with the magnon in |0>
    Vector v = Vector::Zero(static_cast<Eigen::Index>(reg.dimension()));
    v.head(two_photon.size()) = two_photon;
    return StateVector(reg, v);
}

// Random state with at most one photon per subsystem, entangled with the magnon.
StateVector random_detectable(const ModeRegistry &reg, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Vector v = Vector::Zero(static_cast<Eigen::Index>(reg.dimension()));
    for (std::size_t i = 0; i < reg.dimension(); ++i) {
        auto n = reg.occupations(i);
        if (n[0] + n[1] <= 1 && n[2] + n[3] <= 1) {
            v(static_cast<Eigen::Index>(i)) = cplx(g(rng), g(rng));
        }
    }
    return StateVector(reg, v / v.norm());
}

}  // namespace

TEST(Measurement, ProjectorsOrthogonalIdempotentComplete) {
    auto reg = analyzer_registry();
    auto p = bell_projectors(reg, kLayout);
    auto sector = coincidence_sector(reg, kLayout);
    Matrix sum = Matrix::Zero(sector.matrix.rows(), sector.matrix.cols());
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_LT((p[i].matrix * p[i].matrix - p[i].matrix).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT((p[i].matrix - p[i].matrix.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
        for (std::size_t j = 0; j < 4; ++j) {
            if (i != j) {
                EXPECT_LT((p[i].matrix * p[j].matrix).cwiseAbs().maxCoeff(), 1e-10);
            }
        }
        sum += p[i].matrix;
    }
    EXPECT_LT((sum - sector.matrix).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(sector.matrix.trace().real(), 4.0, 1e-15);
}

TEST(Measurement, BellInputsAreIdentified) {
    auto reg = analyzer_registry();
    for (auto id : kBellIds) {
        auto s = from_local(reg, bell_ket(reg, kLayout, id));
        auto outcomes = simulate_detection(s, kLayout);
        EXPECT_NEAR(find_outcome(outcomes, id).probability, 1.0, 1e-12) << to_string(id);
        EXPECT_NEAR(find_outcome(outcomes, BellId::NoHerald).probability, 0.0, 1e-12);
    }
}

TEST(Measurement, PhiPatternsAreCoincidences) {
    auto reg = analyzer_registry();
    auto s = from_local(reg, bell_ket(reg, kLayout, BellId::PhiPlus));
    auto r = detail::detect(s, kLayout);
    std::set<std::string> seen;
    for (const auto &rec : r.records) {
        if (rec.id == BellId::PhiPlus && rec.rest.norm_squared() > 0.0) {
            seen.insert(rec.pattern);
        }
    }
    EXPECT_EQ(seen, (std::set<std::string>{"3h,4h", "3v,4v"}));
    // psi inputs bunch at one PBS
    auto psi = from_local(reg, bell_ket(reg, kLayout, BellId::PsiPlus));
    EXPECT_NEAR(detail::detect(psi, kLayout).psi_pattern_probability, 1.0, 1e-12);
}

TEST(Measurement, ProbabilitiesSumToOne) {
    auto reg = analyzer_registry();
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        auto s = random_detectable(reg, rng);
        auto outcomes = simulate_detection(s, kLayout);
        double total = 0.0;
        for (const auto &o : outcomes) {
            EXPECT_GE(o.probability, -1e-15);
            total += o.probability;
        }
        EXPECT_NEAR(total, 1.0, 1e-10);
    }
}

TEST(Measurement, ProjectorProbabilitiesMatchDetection) {
    auto reg = analyzer_registry();
    std::mt19937_64 rng(8);
    auto s = random_detectable(reg, rng);
    auto outcomes = simulate_detection(s, kLayout);
    auto p = bell_projectors(reg, kLayout);
    for (std::size_t i = 0; i < 4; ++i) {
        auto pr = project_and_normalize(s, p[i]);
        EXPECT_NEAR(pr.probability, find_outcome(outcomes, kBellIds[i]).probability, 1e-12);
    }
}

TEST(Measurement, DensityAndPureAgree) {
    auto reg = analyzer_registry();
    std::mt19937_64 rng(9);
    auto s = random_detectable(reg, rng);
    auto a = simulate_detection(s, kLayout);
    auto b = simulate_detection(DensityMatrix(s), kLayout);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_NEAR(a[i].probability, b[i].probability, 1e-12);
        ASSERT_EQ(a[i].post_state.has_value(), b[i].post_state.has_value());
        if (a[i].post_state) {
            EXPECT_LT((a[i].post_state->matrix() - b[i].post_state->matrix()).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(Measurement, PostStateOfSpectator) {
    // |phi+>_BC |1>_m + |psi+>_BC |0>_m: the phi+ herald leaves the magnon in |1>
    auto reg = analyzer_registry();
    Vector v = Vector::Zero(static_cast<Eigen::Index>(reg.dimension()));
    Vector phi = bell_ket(reg, kLayout, BellId::PhiPlus);
    Vector psi = bell_ket(reg, kLayout, BellId::PsiPlus);
    v.tail(16) = phi / std::sqrt(2.0);
    v.head(16) = psi / std::sqrt(2.0);
    auto outcomes = simulate_detection(StateVector(reg, v), kLayout);
    const auto &o = find_outcome(outcomes, BellId::PhiPlus);
    EXPECT_NEAR(o.probability, 0.5, 1e-12);
    ASSERT_TRUE(o.post_state);
    EXPECT_NEAR(o.post_state->matrix()(1, 1).real(), 1.0, 1e-12);
}

TEST(Measurement, RejectsMultiPhotonInput) {
    ModeRegistry reg({ModeLabel::optical("B", Polarization::H), ModeLabel::optical("B", Polarization::V),
                      ModeLabel::optical("C", Polarization::H), ModeLabel::optical("C", Polarization::V)},
                     {1, 1, 1, 1});
    EXPECT_THROW(simulate_detection(StateVector::basis(reg, {1, 1, 0, 0}), kLayout), DomainError);
}

TEST(Measurement, VacuumGivesNoHerald) {
    auto reg = analyzer_registry();
    auto outcomes = simulate_detection(StateVector::vacuum(reg), kLayout);
    EXPECT_NEAR(find_outcome(outcomes, BellId::NoHerald).probability, 1.0, 1e-15);
}

TEST(Measurement, SamplingIsSeeded) {
    auto reg = analyzer_registry();
    std::mt19937_64 rng(10);
    auto outcomes = simulate_detection(random_detectable(reg, rng), kLayout);
    auto a = sample_outcomes(outcomes, 200, 42);
    auto b = sample_outcomes(outcomes, 200, 42);
    auto c = sample_outcomes(outcomes, 200, 43);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(Measurement, LabelsRoundTrip) {
    for (auto id : {BellId::PhiPlus, BellId::PhiMinus, BellId::PsiPlus, BellId::PsiMinus, BellId::NoHerald}) {
        EXPECT_EQ(bell_id_from_string(to_string(id)), id);
    }
    EXPECT_FALSE(bell_id_from_string("phi"));
    EXPECT_EQ(kDetectors[3].str(), "4v");
}
