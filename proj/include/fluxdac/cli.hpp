// Copyright 2026 The fluxdac Authors
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

#pragma once

// Command-line front end. run_cli is the whole program minus process
// plumbing, so tests can drive it with argument vectors.
//
// Exit status: 0 success, 1 configuration or input error, 2 numerical
// non-convergence, 3 a demux-check property failed, 64 usage error.

#include "fluxdac/errors.hpp"
#include "fluxdac/harness.hpp"
#include "fluxdac/presets.hpp"
#include "fluxdac/record.hpp"
#include "fluxdac/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fluxdac {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitNonConvergence = 2,
    kExitCheckFailed = 3,
    kExitUsage = 64,
};

inline const char* usage_text() {
    return "usage: fluxdac <subcommand> [--config <path>] [--out <path>] [--seed <u64>] [--format csv|json]\n"
           "\n"
           "subcommands:\n"
           "  plateau          single-pulse qubit-flux increment vs bias amplitude\n"
           "  sfq-program      qubit flux vs SFQ pulse count from several start digits\n"
           "  margins          positive/negative programming margin vs digit\n"
           "  spectroscopy     f01 vs flux, conventional line and DAC digits\n"
           "  coherence        flux sensitivity, dephasing rates and T1 near the sweet spot\n"
           "  demux-check      DEMUX bijection and routing-isolation check [--depth <d>]\n"
           "  calibrate <rec>  fit model parameters to a JSON experiment record\n"
           "  presets          list built-in device presets\n"
           "\n"
           "The seed falls back to the config 'seed' field, then FLUXDAC_SEED, then 0.\n";
}

namespace detail {

struct CliOptions {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::string format = "json";
    int depth = 4;
    std::string record_path;
};

inline std::uint64_t resolve_seed(const CliOptions& o, const ScenarioConfig& c) {
    if (o.seed) return *o.seed;
    if (c.seed) return *c.seed;
    if (const char* env = std::getenv("FLUXDAC_SEED"); env && *env) {
        std::size_t used = 0;
        std::uint64_t v = 0;
        try {
            v = std::stoull(env, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != std::string(env).size() || std::string(env).front() == '-')
            throw ConfigError(std::string("FLUXDAC_SEED: not an unsigned integer: '") + env + "'");
        return v;
    }
    return 0;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void emit(const CliOptions& o, const std::string& text, std::ostream& out) {
    if (o.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.out_path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + o.out_path + "'");
    f << text;
}

inline std::string render(const ExperimentRecord& r, const std::string& format) {
    return format == "csv" ? to_csv(r) : to_json(r).dump(2) + "\n";
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

inline std::string presets_output(const std::string& format) {
    nlohmann::json list = nlohmann::json::array();
    std::string csv =
        "name,chip,dac,i_c_uA,l_storage_nH,beta_L,beta_c,step_mPhi0,n_min,n_max,model_range_Phi0,"
        "measured_range_Phi0,measured_step_mPhi0\n";
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    auto opt_csv = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    for (const auto& p : builtin_presets()) {
        const auto d = derive(p.params);
        const auto window = usable_window(p.params, 0.96);
        std::optional<double> step, range;
        if (p.params.m_coupling_ph) {
            step = step_mphi0(p.params);
            range = output_range(p.params).range_phi0;
        }
        list.push_back({{"name", p.name},
                        {"chip", p.chip},
                        {"dac", p.dac_index},
                        {"params", device_params_to_json(p.params)},
                        {"beta_L", d.beta_l},
                        {"beta_c", d.beta_c},
                        {"step_mPhi0", opt(step)},
                        {"window", {{"n_min", window.n_min}, {"n_max", window.n_max}}},
                        {"model_range_Phi0", opt(range)},
                        {"measured_range_Phi0", opt(p.measured.range_phi0)},
                        {"measured_step_mPhi0", opt(p.measured.step_mphi0)}});
        csv += csv_escape(p.name) + "," + csv_escape(p.chip) + "," + std::to_string(p.dac_index) + "," +
               format_number(p.params.i_c_ua) + "," + format_number(p.params.l_storage_nh) + "," +
               format_number(d.beta_l) + "," + format_number(d.beta_c) + "," + opt_csv(step) + "," +
               std::to_string(window.n_min) + "," + std::to_string(window.n_max) + "," + opt_csv(range) + "," +
               opt_csv(p.measured.range_phi0) + "," + opt_csv(p.measured.step_mphi0) + "\n";
    }
    return format == "csv" ? csv : nlohmann::json{{"presets", list}}.dump(2) + "\n";
}

inline std::string fits_csv(const nlohmann::json& result) {
    std::string csv = "fit,parameter,value,unit,std_error,residual_rms,residual_unit,converged\n";
    for (const auto& [name, fit] : result.at("fits").items()) {
        for (const auto& p : fit.at("parameters")) {
            csv += csv_escape(name) + "," + csv_escape(p.at("name").get<std::string>()) + "," +
                   format_number(p.at("value").get<double>()) + "," + csv_escape(p.at("unit").get<std::string>()) +
                   "," + format_number(p.at("std_error").get<double>()) + "," +
                   format_number(fit.at("residual_rms").get<double>()) + "," +
                   csv_escape(fit.at("residual_unit").get<std::string>()) + "," +
                   (fit.at("converged").get<bool>() ? "true" : "false") + "\n";
        }
    }
    return csv;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    static const std::vector<std::string> kSubcommands = {"plateau",     "sfq-program", "margins",   "spectroscopy",
                                                          "coherence",   "demux-check", "calibrate", "presets"};
    if (argc < 2) {
        err << usage_text();
        return kExitUsage;
    }
    const std::string first = argv[1];
    if (first == "-h" || first == "--help" || first == "help") {
        out << usage_text();
        return kExitOk;
    }
    if (std::find(kSubcommands.begin(), kSubcommands.end(), first) == kSubcommands.end()) {
        err << "fluxdac: unknown subcommand '" << first << "'\n" << usage_text();
        return kExitUsage;
    }

    detail::CliOptions o;
    CLI::App app{"fluxdac", "fluxdac"};
    app.set_help_flag("-h,--help");
    CLI::App* sub = app.add_subcommand(first);
    sub->add_option("--config", o.config_path, "scenario config (JSON)");
    sub->add_option("--out", o.out_path, "output file (default: stdout)");
    sub->add_option("--seed", o.seed, "RNG seed");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    if (first == "demux-check") sub->add_option("--depth", o.depth, "DEMUX tree depth")->check(CLI::Range(0, 20));
    if (first == "calibrate") sub->add_option("record", o.record_path, "experiment record (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << sub->help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "fluxdac " << first << ": " << e.what() << "\n" << usage_text();
        return kExitUsage;
    }

    try {
        const ScenarioConfig cfg =
            o.config_path.empty() ? parse_scenario(nlohmann::json()) : load_scenario_file(o.config_path);
        const std::uint64_t seed = detail::resolve_seed(o, cfg);

        if (first == "presets") {
            detail::emit(o, detail::presets_output(o.format), out);
            return kExitOk;
        }
        if (first == "demux-check") {
            const auto rep = demux_check(o.depth, seed, 100, cfg.device);
            const auto j = to_json(rep);
            if (o.format == "csv") {
                detail::emit(o,
                             "depth,ports,select_lines,bijection,isolation,passed\n" + std::to_string(rep.depth) + "," +
                                 std::to_string(1 << rep.depth) + "," + std::to_string(rep.depth) + "," +
                                 (rep.bijection ? "true" : "false") + "," + (rep.isolation ? "true" : "false") + "," +
                                 (rep.passed() ? "true" : "false") + "\n",
                             out);
            } else {
                detail::emit(o, j.dump(2) + "\n", out);
            }
            if (!rep.passed()) {
                err << "fluxdac demux-check: property check failed\n";
                return kExitCheckFailed;
            }
            return kExitOk;
        }
        if (first == "calibrate") {
            const std::string text = detail::read_file(o.record_path);
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(text);
            } catch (const nlohmann::json::parse_error& e) {
                throw ConfigError(o.record_path + ": parse error at " + detail::line_context(text, e.byte) + ": " +
                                  e.what());
            }
            const auto record = record_from_json(doc);
            CalibrationOptions copt;
            copt.initial_guess = cfg.fluxonium;
            copt.fluxonium.seed = seed;
            const auto result = calibrate_record(record, copt);
            detail::emit(o, o.format == "csv" ? detail::fits_csv(result) : result.dump(2) + "\n", out);
            return kExitOk;
        }

        ExperimentRecord rec;
        if (first == "plateau") rec = run_plateau_scan(cfg, seed);
        if (first == "sfq-program") rec = run_sfq_program(cfg, seed);
        if (first == "margins") rec = run_margin_sweep(cfg, seed);
        if (first == "spectroscopy") rec = run_spectroscopy(cfg, seed);
        if (first == "coherence") rec = run_coherence(cfg, seed);
        detail::emit(o, detail::render(rec, o.format), out);
        return kExitOk;
    } catch (const ConvergenceError& e) {
        err << "fluxdac " << first << ": " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const Error& e) {
        err << "fluxdac " << first << ": " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        err << "fluxdac " << first << ": " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace fluxdac
