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

#include "omx/elements.hpp"
#include "oracles.hpp"

using namespace omx;

namespace {

ModeRegistry paths(std::initializer_list<const char *> names, int cutoff = 1) {
    std::vector<ModeLabel> m;
    for (auto p : names) {
        m.push_back(ModeLabel::optical(p, Polarization::H));
        m.push_back(ModeLabel::optical(p, Polarization::V));
    }
    return ModeRegistry(m, std::vector<int>(m.size(), cutoff));
}

cplx amp(const StateVector &s, const std::vector<int> &occ) {
    return s.amplitudes()(static_cast<Eigen::Index>(s.registry().index_of(occ)));
}

const double r2 = 1.0 / std::sqrt(2.0);

}  // namespace

TEST(Elements, BeamSplitterSingleAndTwoPhoton) {
    auto reg = paths({"A"}, 2);
    auto bs = beam_splitter_50_50(reg, 0, 1);
    auto out = apply(bs, StateVector::basis(reg, {1, 0}));
    EXPECT_NEAR(std::abs(amp(out, {1, 0}) - r2), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(amp(out, {0, 1}) - r2), 0.0, 1e-15);
    out = apply(bs, StateVector::basis(reg, {0, 1}));
    EXPECT_NEAR(std::abs(amp(out, {0, 1}) + r2), 0.0, 1e-15);
    // Hong-Ou-Mandel: no coincidences
    out = apply(bs, StateVector::basis(reg, {1, 1}));
    EXPECT_NEAR(std::abs(amp(out, {1, 1})), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(amp(out, {2, 0}) - r2), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(amp(out, {0, 2}) + r2), 0.0, 1e-14);
    EXPECT_LT(bs.invariant_residual(), 1e-12);
}

TEST(Elements, BeamSplitterPartialSectorsLeaveDomain) {
    // cutoff 1: the two-photon sector does not fit, so it is outside the domain
    auto reg = paths({"A"}, 1);
    auto bs = beam_splitter_50_50(reg, 0, 1);
    EXPECT_THROW(apply(bs, StateVector::basis(reg, {1, 1})), DomainError);
    EXPECT_NO_THROW(apply(bs, StateVector::basis(reg, {0, 0})));
}

TEST(Elements, Waveplates) {
    auto reg = paths({"A"});
    auto h = StateVector::basis(reg, {1, 0});
    auto out = apply(half_wave_plate(reg, "A", deg_to_rad(22.5)), h);
    EXPECT_NEAR(std::abs(amp(out, {1, 0}) - r2), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(amp(out, {0, 1}) - r2), 0.0, 1e-15);
    out = apply(half_wave_plate(reg, "A", deg_to_rad(45.0)), h);
    EXPECT_NEAR(std::abs(amp(out, {0, 1}) - 1.0), 0.0, 1e-15);
    out = apply(half_wave_plate(reg, "A", 0.0), StateVector::basis(reg, {0, 1}));
    EXPECT_NEAR(std::abs(amp(out, {0, 1}) + 1.0), 0.0, 1e-15);
    // QWP at 0: fast axis H gets +i
    out = apply(quarter_wave_plate(reg, "A", 0.0), h);
    EXPECT_NEAR(std::abs(amp(out, {1, 0}) - cplx(0, 1)), 0.0, 1e-15);
    for (double t : {0.1, 0.7, 2.0}) {
        EXPECT_LT((qwp_jones(t).adjoint() * qwp_jones(t) - Jones::Identity()).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT((hwp_jones(t) * hwp_jones(t) - Jones::Identity()).cwiseAbs().maxCoeff(), 1e-14);
    }
    EXPECT_THROW(half_wave_plate(reg, "B", 0.0), LabelError);
}

TEST(Elements, PolarizationPrep) {
    auto reg = paths({"C"});
    cplx a(0.6, 0.0), b(0.0, 0.8);
    auto out = apply(polarization_prep(reg, "C", a, b), StateVector::basis(reg, {1, 0}));
    EXPECT_NEAR(std::abs(amp(out, {1, 0}) - a), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(amp(out, {0, 1}) - b), 0.0, 1e-15);
    EXPECT_THROW(polarization_prep(reg, "C", 1.0, 1.0), ConfigError);
}

TEST(Elements, PolarizingBeamSplitterSwapsV) {
    auto reg = paths({"A", "B"});
    auto p = pbs(reg, "A", "B");
    auto out = apply(p, StateVector::basis(reg, {0, 1, 0, 0}));
    EXPECT_NEAR(std::abs(amp(out, {0, 0, 0, 1})), 1.0, 1e-15);
    out = apply(p, StateVector::basis(reg, {1, 0, 0, 0}));
    EXPECT_NEAR(std::abs(amp(out, {1, 0, 0, 0})), 1.0, 1e-15);
    EXPECT_THROW(pbs(reg, "A", "A"), LabelError);
}

TEST(Elements, PhaseShift) {
    ModeRegistry reg({ModeLabel::magnon("m")}, {3});
    auto p = phase_shift(reg, 0, 0.3);
    for (int n = 0; n <= 3; ++n) {
        auto out = apply(p, StateVector::basis(reg, {n}));
        EXPECT_NEAR(std::abs(out.amplitudes()(n) - std::polar(1.0, 0.3 * n)), 0.0, 1e-15);
    }
}

TEST(Elements, ExcitationAdder) {
    ModeRegistry reg({ModeLabel::magnon("m")}, {2});
    auto c = excitation_adder(reg, 0);
    auto out = apply(c, StateVector::basis(reg, {1}));
    EXPECT_NEAR(std::abs(out.amplitudes()(2)), 1.0, 1e-15);
    EXPECT_THROW(apply(c, StateVector::basis(reg, {2})), DomainError);
}

TEST(Elements, StokesPaperUniform) {
    ModeRegistry reg({ModeLabel::optical("A", Polarization::H), ModeLabel::optical("A", Polarization::V),
                      ModeLabel::magnon("mA")},
                     {1, 1, 3});
    auto s = stokes_scatter(reg, 1, 0, 2, ScatterModel::PaperUniform);
    for (int n = 0; n < 3; ++n) {
        auto out = apply(s, StateVector::basis(reg, {0, 1, n}));
        EXPECT_NEAR(std::abs(amp(out, {1, 0, n + 1})), 1.0, 1e-15) << n;
    }
    // no drive photon: magnon untouched
    auto out = apply(s, StateVector::basis(reg, {0, 0, 2}));
    EXPECT_NEAR(std::abs(amp(out, {0, 0, 2})), 1.0, 1e-15);
    // magnon at the cutoff cannot absorb another excitation
    EXPECT_THROW(apply(s, StateVector::basis(reg, {0, 1, 3})), DomainError);
    EXPECT_LT(s.invariant_residual(), 1e-12);
}

TEST(Elements, StokesBosonicFailureKeepsDrivePhoton) {
    ModeRegistry reg({ModeLabel::optical("A", Polarization::H), ModeLabel::optical("A", Polarization::V),
                      ModeLabel::magnon("mA")},
                     {1, 1, 3});
    auto s = stokes_scatter(reg, 1, 0, 2, ScatterModel::Bosonic);
    for (int n = 0; n < 3; ++n) {
        auto out = apply(s, StateVector::basis(reg, {0, 1, n}));
        double p = (n + 1.0) / 3.0;
        EXPECT_NEAR(std::norm(amp(out, {1, 0, n + 1})), p, 1e-14);
        EXPECT_NEAR(std::norm(amp(out, {0, 1, n})), 1.0 - p, 1e-14);
    }
}

TEST(Elements, AntiStokesSwapPhase) {
    ModeRegistry reg({ModeLabel::optical("A", Polarization::V), ModeLabel::magnon("mA")}, {2, 2});
    auto sw = antistokes_swap(reg, 0, 1);
    auto lit = antistokes_swap(reg, 0, 1, true);
    for (int k = 0; k <= 2; ++k) {
        for (int n = 0; n <= 2; ++n) {
            auto out = apply(sw, StateVector::basis(reg, {k, n}));
            EXPECT_NEAR(std::abs(amp(out, {n, k}) - std::pow(cplx(0, -1), k + n)), 0.0, 1e-15);
            out = apply(lit, StateVector::basis(reg, {k, n}));
            EXPECT_NEAR(std::abs(amp(out, {n, k}) - 1.0), 0.0, 1e-15);
        }
    }
}

TEST(Elements, AntiStokesIsBeamSplitterEvolution) {
    // exp(-i (pi/2) (a^dag m + a m^dag)) is the phased swap
    ModeRegistry reg({ModeLabel::optical("A", Polarization::V), ModeLabel::magnon("mA")}, {2, 2});
    auto u = expm_unitary(reg, beam_splitter_generator(reg, 0, 1), std::numbers::pi / 2);
    auto sw = antistokes_swap(reg, 0, 1);
    // compare on the complete sectors (total excitation <= cutoff)
    for (std::size_t c = 0; c < reg.dimension(); ++c) {
        auto occ = reg.occupations(c);
        if (occ[0] + occ[1] > 2) {
            continue;
        }
        auto x = apply(u, StateVector::basis(reg, occ));
        auto y = apply(sw, StateVector::basis(reg, occ));
        EXPECT_LT((x.amplitudes() - y.amplitudes()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Elements, PdcReproducesTwoModeSqueezing) {
    ModeRegistry reg({ModeLabel::optical("A", Polarization::V), ModeLabel::magnon("mA")}, {6, 6});
    for (double gt : {0.05, 0.1, 0.2}) {
        auto u = pdc_evolution(reg, 0, 1, gt);
        auto out = apply(u, StateVector::vacuum(reg));
        cplx a00 = amp(out, {0, 0});
        cplx a11 = amp(out, {1, 1});
        cplx a22 = amp(out, {2, 2});
        EXPECT_LT(std::abs(std::abs(a11 / a00) - std::tanh(gt)), gt * gt * gt);
        EXPECT_NEAR(std::abs(a11 / a00), std::tanh(gt), 1e-9);
        EXPECT_NEAR(std::abs(a22 / a00), std::tanh(gt) * std::tanh(gt), 1e-8);
        EXPECT_NEAR(std::abs(a11 - oracle::squeezed_amplitude(gt, 1)), 0.0, 1e-8);
        EXPECT_NEAR(std::abs(amp(out, {1, 0})), 0.0, 1e-15);
    }
}

TEST(Elements, PdcMatchesTaylorOracle) {
    ModeRegistry reg({ModeLabel::optical("A", Polarization::V), ModeLabel::magnon("mA")}, {2, 2});
    auto g = pdc_generator(reg, 0, 1);
    for (double gt : {0.05, 0.1, 0.2}) {
        Matrix ref = oracle::taylor_expm(cplx(0, -gt) * g.matrix);
        EXPECT_LT((pdc_evolution(reg, 0, 1, gt).matrix() - ref).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(Elements, WaveplateSolverPreparesQubit) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        double theta = std::acos(1.0 - 2.0 * u(rng));
        double phi = 2.0 * std::numbers::pi * u(rng);
        cplx a = std::cos(theta / 2);
        cplx b = std::polar(std::sin(theta / 2), phi);
        auto w = solve_waveplates(a, b);
        Eigen::Vector2cd out = qwp_jones(w.qwp_angle) * hwp_jones(w.hwp_angle) * Eigen::Vector2cd(1.0, 0.0);
        double overlap = std::norm(std::conj(a) * out(0) + std::conj(b) * out(1));
        EXPECT_NEAR(overlap, 1.0, 1e-9) << "theta=" << theta << " phi=" << phi;
    }
}

TEST(Elements, DistinctModesRequired) {
    auto reg = paths({"A"});
    EXPECT_THROW(beam_splitter_50_50(reg, 0, 0), LabelError);
    EXPECT_THROW(stokes_scatter(reg, 0, 0, 1, ScatterModel::PaperUniform), LabelError);
}
