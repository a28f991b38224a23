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

#ifndef OMX_TOOLS_OMX_CLI_HPP
#define OMX_TOOLS_OMX_CLI_HPP

// Command-line front end. Kept in a header so tests can drive it in-process.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "omx/dsl.hpp"
#include "omx/protocols.hpp"
#include "omx/report_json.hpp"

namespace omx::cli {

enum Exit { kOk = 0, kUsage = 1, kSimulation = 2, kParse = 3 };

struct ProtocolOptions {
    double n_bar = 0.0;
    int cutoff = 2;
    bool no_renormalize = false;
    std::string model = "paper_uniform";
    bool include_psi = false;
    std::string alpha;
    std::string beta;
    std::optional<double> theta;
    std::optional<double> phi;
    std::string output;
    std::size_t samples = 0;
    std::uint64_t seed = 0;

    ThermalConfig thermal() const {
        ThermalConfig c{n_bar, cutoff, !no_renormalize};
        c.validate();
        return c;
    }

    ScatterModel scatter_model() const { return model == "bosonic" ? ScatterModel::Bosonic : ScatterModel::PaperUniform; }

    InputQubit qubit() const {
        if (theta || phi) {
            if (!alpha.empty() || !beta.empty()) {
                throw ConfigError("give the input qubit either as --alpha/--beta or as --theta/--phi");
            }
            return InputQubit::from_sphere(theta.value_or(0.0), phi.value_or(0.0));
        }
        if (alpha.empty() && beta.empty()) {
            return InputQubit{};
        }
        if (alpha.empty() || beta.empty()) {
            throw ConfigError("--alpha and --beta must be given together");
        }
        return InputQubit::from_amplitudes(complex_arg("--alpha", alpha), complex_arg("--beta", beta));
    }

    static cplx complex_arg(const std::string &flag, const std::string &text) {
        try {
            return dsl::parse_complex(text);
        } catch (const dsl::ParseError &) {
            throw ConfigError(flag + ": not a complex number: '" + text + "'");
        }
    }
};

inline void add_protocol_options(CLI::App *cmd, ProtocolOptions &o, bool qubit, bool n_bar = true) {
    if (n_bar) {
        cmd->add_option("--n-bar", o.n_bar, "mean thermal magnon occupation")->check(CLI::NonNegativeNumber);
    }
    cmd->add_option("--cutoff", o.cutoff, "thermal truncation (excitations kept)")->check(CLI::Range(1, 64));
    cmd->add_flag("--no-renormalize", o.no_renormalize, "keep the truncated thermal weights unnormalized");
    cmd->add_option("--model", o.model, "Stokes scattering model")
        ->check(CLI::IsMember({"paper_uniform", "bosonic"}));
    if (qubit) {
        cmd->add_option("--alpha", o.alpha, "H amplitude, e.g. 0.6 or 0.3-0.2i");
        cmd->add_option("--beta", o.beta, "V amplitude");
        cmd->add_option("--theta", o.theta, "polar angle on the Poincare sphere (rad)");
        cmd->add_option("--phi", o.phi, "azimuth on the Poincare sphere (rad)");
    }
    cmd->add_option("-o,--output", o.output, "write to a file instead of stdout");
}

inline void add_sampling(CLI::App *cmd, ProtocolOptions &o) {
    cmd->add_flag("--include-psi", o.include_psi, "count psi heralds (number-resolving detectors) in the aggregate");
    cmd->add_option("--samples", o.samples, "draw this many seeded herald outcomes (demonstration only)");
    cmd->add_option("--seed", o.seed, "seed for --samples");
}

inline void emit(const std::string &text, const std::string &path, std::ostream &out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f || !(f << text)) {
        throw ConfigError("cannot write " + path);
    }
}

inline std::string dump(const report::ordered_json &j) { return j.dump(2) + "\n"; }

inline report::ordered_json report_json(const ProtocolReport &r, const ProtocolOptions &o) {
    auto j = report::to_json(r);
    if (o.samples > 0) {
        j["config"]["samples"] = o.samples;
        j["config"]["seed"] = o.seed;
        report::ordered_json draws = report::ordered_json::array();
        for (auto id : sample_outcomes(r.outcomes, o.samples, o.seed)) {
            draws.push_back(to_string(id));
        }
        j["samples"] = std::move(draws);
    }
    return j;
}

inline unsigned thread_cap() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("OMX_THREADS")) {
        char *end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) {
            throw ConfigError("OMX_THREADS must be a positive integer");
        }
        n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

inline std::string read_file(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw ConfigError("cannot read " + path);
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"omx: optomagnonic teleportation and entanglement-swapping simulator"};
    app.require_subcommand(1);

    ProtocolOptions tele;
    auto *cmd_tele = app.add_subcommand("teleport", "teleport a polarization qubit onto two magnons (JSON report)");
    add_protocol_options(cmd_tele, tele, true);
    add_sampling(cmd_tele, tele);

    ProtocolOptions swp;
    auto *cmd_swap = app.add_subcommand("swap", "entanglement swapping between two magnon pairs (JSON report)");
    add_protocol_options(cmd_swap, swp, false);
    add_sampling(cmd_swap, swp);

    ProtocolOptions rd;
    std::string rd_herald = "phi_plus";
    bool rd_raw = false;
    auto *cmd_read = app.add_subcommand("readout", "teleport, then map the magnon qubit onto anti-Stokes photons");
    add_protocol_options(cmd_read, rd, true);
    cmd_read->add_option("--herald", rd_herald, "herald branch to read out")
        ->check(CLI::IsMember({"phi_plus", "phi_minus", "psi_plus", "psi_minus"}));
    cmd_read->add_flag("--no-correction", rd_raw, "skip the feed-forward correction");

    ProtocolOptions sw;
    std::string sw_protocol = "teleport";
    double sw_from = 0.0;
    double sw_to = 0.3;
    int sw_steps = 61;
    std::string sw_format = "csv";
    bool sw_bosonic = false;
    auto *cmd_sweep = app.add_subcommand("sweep", "fidelity versus thermal occupation (CSV)");
    add_protocol_options(cmd_sweep, sw, true, false);
    cmd_sweep->add_option("--protocol", sw_protocol, "protocol to sweep")->check(CLI::IsMember({"teleport", "swap"}));
    cmd_sweep->add_option("--from", sw_from, "first n_bar")->check(CLI::NonNegativeNumber);
    cmd_sweep->add_option("--to", sw_to, "last n_bar")->check(CLI::NonNegativeNumber);
    cmd_sweep->add_option("--steps", sw_steps, "number of grid points, endpoints included")->check(CLI::PositiveNumber);
    cmd_sweep->add_option("--format", sw_format, "output format")->check(CLI::IsMember({"csv", "json"}));
    cmd_sweep->add_flag("--bosonic", sw_bosonic, "add a column with the bosonic scattering model");

    double th_target = 2.0 / 3.0;
    std::string th_format = "text";
    std::string th_output;
    auto *cmd_thr = app.add_subcommand("threshold", "thermal occupation where the teleport fidelity reaches --target");
    cmd_thr->add_option("--target", th_target, "fidelity to reach, in (1/9, 1]");
    cmd_thr->add_option("--format", th_format, "output format")->check(CLI::IsMember({"text", "json"}));
    cmd_thr->add_option("-o,--output", th_output);

    std::string run_file;
    std::string run_backend = "ensemble";
    ProtocolOptions run_opts;
    auto *cmd_run = app.add_subcommand("run", "execute an .omx circuit (JSON report)");
    cmd_run->add_option("file", run_file, "circuit file")->required();
    cmd_run->add_option("--backend", run_backend, "ensemble of pure states or dense density matrix")->check(CLI::IsMember({"ensemble", "density"}));
    cmd_run->add_option("-o,--output", run_opts.output);
    cmd_run->add_option("--samples", run_opts.samples);
    cmd_run->add_option("--seed", run_opts.seed);

    std::string val_file;
    bool val_print = false;
    auto *cmd_val = app.add_subcommand("validate", "parse and compile an .omx circuit");
    cmd_val->add_option("file", val_file, "circuit file")->required();
    cmd_val->add_flag("--print", val_print, "print the canonical form");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*cmd_tele) {
            auto r = teleport(tele.qubit(), tele.thermal(), tele.scatter_model(), tele.include_psi);
            emit(dump(report_json(r, tele)), tele.output, out);
        } else if (*cmd_swap) {
            auto r = entanglement_swap(swp.thermal(), swp.scatter_model(), swp.include_psi);
            emit(dump(report_json(r, swp)), swp.output, out);
        } else if (*cmd_read) {
            auto r = teleport(rd.qubit(), rd.thermal(), rd.scatter_model(), true);
            auto id = *bell_id_from_string(rd_herald);
            auto t = readout_teleported(r, id, !rd_raw);
            report::ordered_json j;
            j["config"] = report::config_json(r.config);
            j["herald"] = rd_herald;
            j["herald_probability"] = report::sig12(r.outcome(id).probability);
            j["correction_applied"] = !rd_raw;
            j["partial"] = t.result.partial;
            j["photon_modes"] = {"A.V", "B.V"};
            j["vacuum_probability"] = report::sig12(t.vacuum_probability);
            j["fidelity_to_input"] = report::sig12(t.fidelity);
            emit(dump(j), rd.output, out);
        } else if (*cmd_sweep) {
            if (sw_to < sw_from) {
                throw ConfigError("sweep: --to must not be below --from");
            }
            auto kind = sw_protocol == "swap" ? ProtocolKind::Swap : ProtocolKind::Teleport;
            auto grid = make_grid(sw_from, sw_to, sw_steps);
            auto cfg = sw.thermal();
            auto rows = sweep_fidelity(kind, grid, cfg, sw.scatter_model(), sw.qubit(), sw_bosonic, thread_cap());
            std::ostringstream os;
            std::string echo = "protocol=" + sw_protocol + " from=" + report::fmt12(sw_from) +
                               " to=" + report::fmt12(sw_to) + " steps=" + std::to_string(sw_steps) +
                               " thermal_cutoff=" + std::to_string(cfg.cutoff) +
                               " renormalize=" + (cfg.renormalize_truncation ? "true" : "false") +
                               " model=" + to_string(sw.scatter_model());
            if (sw_format == "csv") {
                report::write_sweep_csv(os, echo, rows);
            } else {
                report::ordered_json j;
                j["config"] = {{"protocol", sw_protocol},
                               {"from", report::sig12(sw_from)},
                               {"to", report::sig12(sw_to)},
                               {"steps", sw_steps},
                               {"thermal_cutoff", cfg.cutoff},
                               {"renormalize", cfg.renormalize_truncation},
                               {"model", to_string(sw.scatter_model())}};
                report::ordered_json arr = report::ordered_json::array();
                for (const auto &row : rows) {
                    report::ordered_json x = {{"n_bar", report::sig12(row.n_bar)},
                                              {"simulated", report::sig12(row.simulated)},
                                              {"closed_form", report::sig12(row.closed_form)},
                                              {"abs_diff", report::sig12(row.abs_diff)}};
                    if (row.bosonic) {
                        x["bosonic"] = report::sig12(*row.bosonic);
                    }
                    arr.push_back(std::move(x));
                }
                j["rows"] = std::move(arr);
                os << dump(j);
            }
            emit(os.str(), sw.output, out);
        } else if (*cmd_thr) {
            double n = genuine_threshold(th_target);
            if (th_format == "text") {
                emit(report::fmt12(n) + "\n", th_output, out);
            } else {
                report::ordered_json j = {{"config", {{"target", report::sig12(th_target)}}},
                                          {"n_bar", report::sig12(n)},
                                          {"s", report::sig12(boltzmann_ratio(n))}};
                emit(dump(j), th_output, out);
            }
        } else if (*cmd_run) {
            Plan plan = dsl::compile(read_file(run_file));
            auto r = execute(plan, run_backend == "density" ? Backend::DensityMatrix : Backend::Ensemble);
            emit(dump(report_json(r, run_opts)), run_opts.output, out);
        } else if (*cmd_val) {
            auto ast = dsl::parse(read_file(val_file));
            Plan plan = dsl::compile(ast);
            if (val_print) {
                out << dsl::print(ast);
            } else {
                out << "ok: " << to_string(plan.config.kind) << ", " << plan.registry.size() << " modes, "
                    << plan.steps.size() << " elements, dimension " << plan.registry.dimension() << "\n";
            }
        }
    } catch (const dsl::ParseError &e) {
        err << "parse error: " << e.what() << "\n";
        return kParse;
    } catch (const dsl::CompileError &e) {
        for (const auto &d : e.diagnostics()) {
            err << "error: " << d.str() << "\n";
        }
        return kParse;
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error &e) {
        err << "simulation error: " << e.what() << "\n";
        return kSimulation;
    } catch (const std::exception &e) {
        err << "simulation error: " << e.what() << "\n";
        return kSimulation;
    }
    return kOk;
}

}  // namespace omx::cli

#endif  // OMX_TOOLS_OMX_CLI_HPP
