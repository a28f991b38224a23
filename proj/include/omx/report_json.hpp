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

#ifndef OMX_REPORT_JSON_HPP
#define OMX_REPORT_JSON_HPP

// JSON and CSV serialization of reports. Needs nlohmann/json; the core
// library does not.

#include <cstdio>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "omx/protocols.hpp"

namespace omx::report {

using nlohmann::ordered_json;

/// Rounds to 12 significant digits, the precision of every file we write.
inline double sig12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

inline std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline ordered_json number(std::optional<double> v) { return v ? ordered_json(sig12(*v)) : ordered_json(nullptr); }

inline ordered_json complex_json(cplx z) { return {{"re", sig12(z.real())}, {"im", sig12(z.imag())}}; }

inline ordered_json config_json(const ProtocolConfig &c) {
    ordered_json j;
    j["protocol"] = to_string(c.kind);
    j["n_bar"] = sig12(c.thermal.n_bar);
    j["thermal_cutoff"] = c.thermal.cutoff;
    j["renormalize"] = c.thermal.renormalize_truncation;
    j["model"] = to_string(c.model);
    if (c.kind == ProtocolKind::Teleport) {
        j["alpha"] = complex_json(c.qubit.alpha);
        j["beta"] = complex_json(c.qubit.beta);
    }
    j["include_psi"] = c.include_psi;
    return j;
}

inline ordered_json to_json(const ProtocolReport &r) {
    ordered_json j;
    j["config"] = config_json(r.config);
    j["scatter_success_probability"] = sig12(r.scatter_success_probability);
    ordered_json outs = ordered_json::array();
    double total = 0.0;
    for (const auto &o : r.outcomes) {
        ordered_json x;
        x["id"] = to_string(o.id);
        x["patterns"] = o.patterns;
        x["probability"] = sig12(o.probability);
        x["fidelity"] = number(o.fidelity);
        x["corrected_fidelity"] = number(o.corrected_fidelity);
        if (r.config.kind == ProtocolKind::Swap) {
            x["concurrence"] = number(o.concurrence);
        }
        x["requires_number_resolution"] = o.requires_number_resolution;
        x["included"] = o.included;
        outs.push_back(std::move(x));
        total += o.probability;
    }
    j["outcomes"] = std::move(outs);
    j["probability_total"] = sig12(total);
    const auto &cf = r.closed_form;
    j["closed_form"] = {{"name", r.config.kind == ProtocolKind::Teleport ? "F1" : "F2"},
                        {"value", sig12(cf.value)},
                        {"full_thermal", sig12(cf.full_thermal)},
                        {"truncation_gap", sig12(cf.truncation_gap)}};
    std::optional<double> headline;
    if (r.outcome(BellId::PhiPlus).fidelity) {
        headline = r.fidelity();
    }
    j["fidelity"] = number(headline);
    j["aggregate_fidelity"] = number(r.aggregate_fidelity);
    return j;
}

inline const char *kSweepHeader = "n_bar,simulated,closed_form,abs_diff";

/// Sweep rows as CSV. The first line is a comment echoing the run settings.
inline void write_sweep_csv(std::ostream &os, const std::string &config_comment, const std::vector<SweepRow> &rows) {
    os << "# " << config_comment << "\n";
    bool bosonic = !rows.empty() && rows.front().bosonic.has_value();
    os << kSweepHeader << (bosonic ? ",bosonic" : "") << "\n";
    for (const auto &r : rows) {
        os << fmt12(r.n_bar) << "," << fmt12(r.simulated) << "," << fmt12(r.closed_form) << "," << fmt12(r.abs_diff);
        if (bosonic) {
            os << "," << fmt12(*r.bosonic);
        }
        os << "\n";
    }
}

}  // namespace omx::report

#endif  // OMX_REPORT_JSON_HPP
