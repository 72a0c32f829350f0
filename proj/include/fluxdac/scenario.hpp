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

// Scenario configuration for the harness. JSON field names carry units;
// every section is optional and falls back to the documented defaults.
// Unknown keys are rejected with their path so that typos do not pass
// silently.

#include "fluxdac/dac.hpp"
#include "fluxdac/errors.hpp"
#include "fluxdac/fluxonium.hpp"
#include "fluxdac/presets.hpp"
#include "fluxdac/sfq.hpp"
#include "fluxdac/units.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fluxdac {

/// Either an explicit list of values or an inclusive linear range.
struct SweepSpec {
    std::vector<double> values;
    double start = 0.0;
    double stop = 0.0;
    int points = 0;

    std::vector<double> resolve() const {
        if (!values.empty()) return values;
        if (points < 1) throw ConfigError("sweep: need 'values' or 'points' >= 1");
        if (points == 1) return {start};
        std::vector<double> out(static_cast<std::size_t>(points));
        // Weighted form keeps ranges symmetric about zero exactly antisymmetric.
        for (int i = 0; i < points; ++i)
            out[static_cast<std::size_t>(i)] = ((points - 1 - i) * start + i * stop) / (points - 1);
        return out;
    }
};

struct DacScenario {
    double usable_fraction = 0.96;
    PulseMode pulse_mode = PulseMode::ThresholdTable;
    PulseShape pulse;
    int reference_digit = 0;
    int reset_cycles = 1;
};

struct SfqScenario {
    JtlConfig jtl;
    ConverterMargin converter;
    double converter_bias_ma = 1.0;
    double trigger_threshold_ma = 0.1;
    double trigger_amplitude_ma = 0.2;
    std::vector<int> start_digits{-20, 0, 20};
    int max_pulses = 10;
};

struct QubitScenario {
    double global_bias_phi0 = 0.5;
    std::vector<int> dac_digits;  // empty: scenario default
    bool include_dac_path = true;
};

struct NoiseScenario {
    double frequency_sigma_ghz = 0.0;
    double flux_sigma_mphi0 = 0.0;
    double rate_relative_sigma = 0.0;
    double a_phi_ramsey_uphi0 = 6.75;
    double a_phi_echo_uphi0 = 10.47;
    T1Model t1;
    bool t1_by_path = false;  // conventional and DAC-controlled T1 presets per row
};

struct ScenarioConfig {
    std::string device_name = "C4R1-DAC1";
    DeviceParams device;
    FluxoniumParams fluxonium;
    DacScenario dac;
    SfqScenario sfq;
    QubitScenario qubit;
    NoiseScenario noise;
    DephasingModel dephasing;
    std::optional<SweepSpec> sweep;
    std::optional<std::uint64_t> seed;
};

namespace detail {

// Typed access to one JSON object with path-qualified errors and a check
// for unknown keys.
class ConfigReader {
public:
    ConfigReader(const nlohmann::json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const char* key) {
        used_.insert(key);
        return obj_.contains(key) && !obj_.at(key).is_null();
    }
    const nlohmann::json& at(const char* key) { return obj_.at(key); }
    std::string path(const char* key) const { return path_ + "." + key; }

    template <class T>
    void read(const char* key, T& out) {
        if (!has(key)) return;
        try {
            out = obj_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(path(key) + ": wrong type");
        }
    }

    void number(const char* key, double& out) {
        if (!has(key)) return;
        if (!obj_.at(key).is_number()) throw ConfigError(path(key) + ": expected a number");
        out = obj_.at(key).get<double>();
    }

    void integer(const char* key, int& out) {
        if (!has(key)) return;
        if (!obj_.at(key).is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
        out = obj_.at(key).get<int>();
    }

    void finish() const {
        for (const auto& [key, value] : obj_.items())
            if (!used_.count(key)) throw ConfigError(path_ + "." + key + ": unknown field");
    }

private:
    const nlohmann::json& obj_;
    std::string path_;
    std::set<std::string> used_;
};

inline DeviceParams device_with_overrides(DeviceParams p, const nlohmann::json& obj, const std::string& path) {
    ConfigReader r(obj, path);
    std::string preset_name;
    r.read("preset", preset_name);
    r.number("i_c_uA", p.i_c_ua);
    r.number("l_storage_nH", p.l_storage_nh);
    r.number("c_junction_pF", p.c_junction_pf);
    r.number("r_normal_ohm", p.r_normal_ohm);
    r.number("phi_trap_phi0", p.phi_trap_phi0);
    r.number("bias_coupling_phi0_per_mA", p.bias_coupling_phi0_per_ma);
    auto optional_field = [&](const char* key, std::optional<double>& out) {
        if (!obj.contains(key)) return;
        r.has(key);
        if (obj.at(key).is_null()) {
            out.reset();
        } else if (obj.at(key).is_number()) {
            out = obj.at(key).get<double>();
        } else {
            throw ConfigError(path + "." + key + ": expected a number or null");
        }
    };
    optional_field("r_shunt_ohm", p.r_shunt_ohm);
    optional_field("m_coupling_pH", p.m_coupling_ph);
    r.finish();
    try {
        validate(p);
    } catch (const InvalidParameter& e) {
        throw ConfigError(path + "." + e.field() + ": " + e.what());
    }
    return p;
}

inline SweepSpec parse_sweep(const nlohmann::json& obj, const std::string& path) {
    ConfigReader r(obj, path);
    SweepSpec s;
    r.read("values", s.values);
    r.number("start", s.start);
    r.number("stop", s.stop);
    r.integer("points", s.points);
    r.finish();
    if (s.values.empty() && s.points < 1) throw ConfigError(path + ": need non-empty 'values' or 'points' >= 1");
    return s;
}

}  // namespace detail

/// Parses a scenario document. Device references resolve against `presets`.
inline ScenarioConfig parse_scenario(const nlohmann::json& doc,
                                     const std::vector<DevicePreset>& presets = builtin_presets()) {
    using detail::ConfigReader;
    ScenarioConfig c;
    c.device = find_preset(presets, c.device_name).params;
    if (doc.is_null()) return c;
    ConfigReader top(doc, "config");

    std::string ignored_scenario;
    top.read("scenario", ignored_scenario);

    if (top.has("device")) {
        const auto& dev = top.at("device");
        if (dev.is_string()) {
            c.device_name = dev.get<std::string>();
            try {
                c.device = find_preset(presets, c.device_name).params;
            } catch (const ConfigError& e) {
                throw ConfigError("config.device: " + std::string(e.what()));
            }
        } else if (dev.is_object() && dev.contains("preset")) {
            if (!dev.at("preset").is_string()) throw ConfigError("config.device.preset: expected a string");
            c.device_name = dev.at("preset").get<std::string>();
            try {
                c.device = find_preset(presets, c.device_name).params;
            } catch (const ConfigError& e) {
                throw ConfigError("config.device.preset: " + std::string(e.what()));
            }
            c.device = detail::device_with_overrides(c.device, dev, "config.device");
        } else if (dev.is_object()) {
            c.device_name = dev.value("name", std::string("inline"));
            nlohmann::json fields = dev;
            fields.erase("name");
            c.device = parse_device_params(fields, "config.device");
            c.device = detail::device_with_overrides(c.device, fields, "config.device");
        } else {
            throw ConfigError("config.device: expected a preset name or an object");
        }
    }

    if (top.has("fluxonium")) {
        ConfigReader r(top.at("fluxonium"), "config.fluxonium");
        r.number("e_c_GHz", c.fluxonium.e_c_ghz);
        r.number("e_j_GHz", c.fluxonium.e_j_ghz);
        r.number("e_l_GHz", c.fluxonium.e_l_ghz);
        r.integer("grid_points", c.fluxonium.grid_points);
        r.number("grid_halfwidth_rad", c.fluxonium.grid_halfwidth_rad);
        r.finish();
        try {
            validate(c.fluxonium);
        } catch (const InvalidParameter& e) {
            throw ConfigError("config.fluxonium." + e.field() + ": " + e.what());
        }
    }

    if (top.has("dac")) {
        ConfigReader r(top.at("dac"), "config.dac");
        r.number("usable_fraction", c.dac.usable_fraction);
        if (r.has("pulse_mode")) {
            std::string mode;
            r.read("pulse_mode", mode);
            try {
                c.dac.pulse_mode = parse_pulse_mode(mode);
            } catch (const ConfigError& e) {
                throw ConfigError("config.dac.pulse_mode: " + std::string(e.what()));
            }
        }
        r.integer("reference_digit", c.dac.reference_digit);
        r.integer("reset_cycles", c.dac.reset_cycles);
        if (r.has("pulse")) {
            ConfigReader p(r.at("pulse"), "config.dac.pulse");
            p.number("rise_tau", c.dac.pulse.rise_tau);
            p.number("hold_tau", c.dac.pulse.hold_tau);
            p.number("fall_tau", c.dac.pulse.fall_tau);
            p.finish();
        }
        r.finish();
        if (!(c.dac.usable_fraction > 0.0 && c.dac.usable_fraction <= 1.0))
            throw ConfigError("config.dac.usable_fraction: must lie in (0, 1]");
        if (c.dac.reset_cycles < 1) throw ConfigError("config.dac.reset_cycles: must be at least 1");
    }

    if (top.has("sfq")) {
        ConfigReader r(top.at("sfq"), "config.sfq");
        r.integer("jtl_stages", c.sfq.jtl.stages);
        r.number("jtl_delay_ticks", c.sfq.jtl.delay_per_stage);
        r.number("converter_bias_mA", c.sfq.converter_bias_ma);
        r.number("converter_margin_min_mA", c.sfq.converter.min_bias_ma);
        r.number("converter_margin_max_mA", c.sfq.converter.max_bias_ma);
        r.number("trigger_threshold_mA", c.sfq.trigger_threshold_ma);
        r.number("trigger_amplitude_mA", c.sfq.trigger_amplitude_ma);
        r.read("start_digits", c.sfq.start_digits);
        r.integer("max_pulses", c.sfq.max_pulses);
        r.finish();
        if (c.sfq.jtl.stages < 0) throw ConfigError("config.sfq.jtl_stages: must be non-negative");
        if (!(c.sfq.trigger_threshold_ma > 0.0)) throw ConfigError("config.sfq.trigger_threshold_mA: must be positive");
        if (c.sfq.max_pulses < 0) throw ConfigError("config.sfq.max_pulses: must be non-negative");
        if (c.sfq.start_digits.empty()) throw ConfigError("config.sfq.start_digits: must be non-empty");
    }

    if (top.has("qubit")) {
        ConfigReader r(top.at("qubit"), "config.qubit");
        r.number("global_bias_phi0", c.qubit.global_bias_phi0);
        r.read("dac_digits", c.qubit.dac_digits);
        r.read("include_dac_path", c.qubit.include_dac_path);
        r.finish();
    }

    if (top.has("noise")) {
        ConfigReader r(top.at("noise"), "config.noise");
        r.number("frequency_sigma_GHz", c.noise.frequency_sigma_ghz);
        r.number("flux_sigma_mPhi0", c.noise.flux_sigma_mphi0);
        r.number("rate_relative_sigma", c.noise.rate_relative_sigma);
        r.number("a_phi_ramsey_uPhi0", c.noise.a_phi_ramsey_uphi0);
        r.number("a_phi_echo_uPhi0", c.noise.a_phi_echo_uphi0);
        r.number("t1_mean_us", c.noise.t1.mean_us);
        r.number("t1_scatter_us", c.noise.t1.scatter_us);
        r.read("t1_by_path", c.noise.t1_by_path);
        r.finish();
        const auto& n = c.noise;
        if (n.frequency_sigma_ghz < 0.0 || n.flux_sigma_mphi0 < 0.0 || n.rate_relative_sigma < 0.0)
            throw ConfigError("config.noise: noise amplitudes must be non-negative");
        if (n.a_phi_ramsey_uphi0 < 0.0 || n.a_phi_echo_uphi0 < 0.0)
            throw ConfigError("config.noise: flux-noise amplitudes must be non-negative");
        if (!(n.t1.mean_us > 0.0) || n.t1.scatter_us < 0.0) throw ConfigError("config.noise: invalid T1 model");
    }

    if (top.has("dephasing")) {
        ConfigReader r(top.at("dephasing"), "config.dephasing");
        r.number("omega_ir_rad_s", c.dephasing.omega_ir_rad_s);
        r.number("t_measure_us", c.dephasing.t_measure_us);
        r.number("offset_per_us", c.dephasing.offset_per_us);
        r.finish();
        const double x = c.dephasing.omega_ir_rad_s * c.dephasing.t_measure_us * 1e-6;
        if (!(x > 0.0 && x < 1.0)) throw ConfigError("config.dephasing: omega_ir * t_measure must lie in (0, 1)");
    }

    if (top.has("sweep")) c.sweep = detail::parse_sweep(top.at("sweep"), "config.sweep");

    if (top.has("seed")) {
        if (!top.at("seed").is_number_unsigned()) throw ConfigError("config.seed: expected a non-negative integer");
        c.seed = top.at("seed").get<std::uint64_t>();
    }
    top.finish();
    return c;
}

inline ScenarioConfig load_scenario_file(const std::string& path,
                                         const std::vector<DevicePreset>& presets = builtin_presets()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": parse error at " + detail::line_context(text, e.byte) + ": " + e.what());
    }
    return parse_scenario(doc, presets);
}

/// Resolved snapshot; parsing it back gives the same configuration.
inline nlohmann::json to_json(const ScenarioConfig& c) {
    nlohmann::json device = device_params_to_json(c.device);
    device["name"] = c.device_name;
    nlohmann::json j{
        {"device", device},
        {"fluxonium",
         {{"e_c_GHz", c.fluxonium.e_c_ghz},
          {"e_j_GHz", c.fluxonium.e_j_ghz},
          {"e_l_GHz", c.fluxonium.e_l_ghz},
          {"grid_points", c.fluxonium.grid_points},
          {"grid_halfwidth_rad", c.fluxonium.grid_halfwidth_rad}}},
        {"dac",
         {{"usable_fraction", c.dac.usable_fraction},
          {"pulse_mode", to_string(c.dac.pulse_mode)},
          {"reference_digit", c.dac.reference_digit},
          {"reset_cycles", c.dac.reset_cycles},
          {"pulse",
           {{"rise_tau", c.dac.pulse.rise_tau},
            {"hold_tau", c.dac.pulse.hold_tau},
            {"fall_tau", c.dac.pulse.fall_tau}}}}},
        {"sfq",
         {{"jtl_stages", c.sfq.jtl.stages},
          {"jtl_delay_ticks", c.sfq.jtl.delay_per_stage},
          {"converter_bias_mA", c.sfq.converter_bias_ma},
          {"converter_margin_min_mA", c.sfq.converter.min_bias_ma},
          {"converter_margin_max_mA", c.sfq.converter.max_bias_ma},
          {"trigger_threshold_mA", c.sfq.trigger_threshold_ma},
          {"trigger_amplitude_mA", c.sfq.trigger_amplitude_ma},
          {"start_digits", c.sfq.start_digits},
          {"max_pulses", c.sfq.max_pulses}}},
        {"qubit",
         {{"global_bias_phi0", c.qubit.global_bias_phi0},
          {"dac_digits", c.qubit.dac_digits},
          {"include_dac_path", c.qubit.include_dac_path}}},
        {"noise",
         {{"frequency_sigma_GHz", c.noise.frequency_sigma_ghz},
          {"flux_sigma_mPhi0", c.noise.flux_sigma_mphi0},
          {"rate_relative_sigma", c.noise.rate_relative_sigma},
          {"a_phi_ramsey_uPhi0", c.noise.a_phi_ramsey_uphi0},
          {"a_phi_echo_uPhi0", c.noise.a_phi_echo_uphi0},
          {"t1_mean_us", c.noise.t1.mean_us},
          {"t1_scatter_us", c.noise.t1.scatter_us},
          {"t1_by_path", c.noise.t1_by_path}}},
        {"dephasing",
         {{"omega_ir_rad_s", c.dephasing.omega_ir_rad_s},
          {"t_measure_us", c.dephasing.t_measure_us},
          {"offset_per_us", c.dephasing.offset_per_us}}}};
    if (c.sweep) {
        if (!c.sweep->values.empty())
            j["sweep"] = {{"values", c.sweep->values}};
        else
            j["sweep"] = {{"start", c.sweep->start}, {"stop", c.sweep->stop}, {"points", c.sweep->points}};
    }
    if (c.seed) j["seed"] = *c.seed;
    return j;
}

}  // namespace fluxdac
