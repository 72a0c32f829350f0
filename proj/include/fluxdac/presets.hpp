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

// Named device presets loaded from a JSON document. Field names carry units
// (i_c_uA, l_storage_nH, m_coupling_pH, ...); see data/presets.json for the
// shipped table of characterized chips.

#include "fluxdac/builtin_presets.hpp"
#include "fluxdac/errors.hpp"
#include "fluxdac/units.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fluxdac {

/// Designed or measured characterization values for one DAC.
struct CharacterizedValues {
    std::optional<double> range_phi0;
    std::optional<double> step_mphi0;
    std::optional<double> step_upper_bound_mphi0;
    std::optional<double> m_ph;
    std::optional<double> i_c_ua;
};

struct DevicePreset {
    std::string name;
    std::string chip;
    int dac_index = 0;
    DeviceParams params;
    CharacterizedValues designed;
    CharacterizedValues measured;
};

namespace detail {

inline std::string line_context(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline std::optional<double> optional_number(const nlohmann::json& obj, const std::string& key,
                                             const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return it->get<double>();
}

inline double required_number(const nlohmann::json& obj, const std::string& key, const std::string& path) {
    auto v = optional_number(obj, key, path);
    if (!v) throw ConfigError(path + "." + key + ": missing required field");
    return *v;
}

inline CharacterizedValues parse_characterized(const nlohmann::json& obj, const std::string& path) {
    CharacterizedValues v;
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    v.range_phi0 = optional_number(obj, "range_phi0", path);
    v.step_mphi0 = optional_number(obj, "step_mphi0", path);
    v.step_upper_bound_mphi0 = optional_number(obj, "step_upper_bound_mphi0", path);
    v.m_ph = optional_number(obj, "m_pH", path);
    v.i_c_ua = optional_number(obj, "i_c_uA", path);
    return v;
}

}  // namespace detail

/// Parses one inline device object (the same fields as a preset entry).
inline DeviceParams parse_device_params(const nlohmann::json& obj, const std::string& path) {
    using detail::optional_number;
    using detail::required_number;
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    DeviceParams p;
    p.i_c_ua = required_number(obj, "i_c_uA", path);
    p.l_storage_nh = required_number(obj, "l_storage_nH", path);
    p.c_junction_pf = required_number(obj, "c_junction_pF", path);
    p.r_normal_ohm = required_number(obj, "r_normal_ohm", path);
    p.r_shunt_ohm = optional_number(obj, "r_shunt_ohm", path);
    p.m_coupling_ph = optional_number(obj, "m_coupling_pH", path);
    p.phi_trap_phi0 = optional_number(obj, "phi_trap_phi0", path).value_or(0.0);
    p.bias_coupling_phi0_per_ma = optional_number(obj, "bias_coupling_phi0_per_mA", path).value_or(1.0);
    try {
        validate(p);
    } catch (const InvalidParameter& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return p;
}

inline nlohmann::json device_params_to_json(const DeviceParams& p) {
    nlohmann::json j{{"i_c_uA", p.i_c_ua},
                     {"l_storage_nH", p.l_storage_nh},
                     {"c_junction_pF", p.c_junction_pf},
                     {"r_normal_ohm", p.r_normal_ohm},
                     {"phi_trap_phi0", p.phi_trap_phi0},
                     {"bias_coupling_phi0_per_mA", p.bias_coupling_phi0_per_ma}};
    j["r_shunt_ohm"] = p.r_shunt_ohm ? nlohmann::json(*p.r_shunt_ohm) : nlohmann::json(nullptr);
    j["m_coupling_pH"] = p.m_coupling_ph ? nlohmann::json(*p.m_coupling_ph) : nlohmann::json(nullptr);
    return j;
}

/// Loads presets from a JSON document of the form {"devices": [...]}.
/// A blank document yields an empty list.
inline std::vector<DevicePreset> load_device_presets(std::string_view text) {
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) return {};
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("presets parse error at " + detail::line_context(text, e.byte) + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("presets: top level must be an object");
    std::vector<DevicePreset> out;
    auto devices = doc.find("devices");
    if (devices == doc.end()) return out;
    if (!devices->is_array()) throw ConfigError("presets.devices: expected an array");
    for (std::size_t i = 0; i < devices->size(); ++i) {
        const auto& entry = (*devices)[i];
        const std::string path = "devices[" + std::to_string(i) + "]";
        if (!entry.is_object()) throw ConfigError(path + ": expected an object");
        DevicePreset preset;
        auto name = entry.find("name");
        if (name == entry.end() || !name->is_string()) throw ConfigError(path + ".name: missing required field");
        preset.name = name->get<std::string>();
        preset.chip = entry.value("chip", std::string{});
        preset.dac_index = entry.value("dac", 0);
        preset.params = parse_device_params(entry, path);
        if (auto it = entry.find("designed"); it != entry.end())
            preset.designed = detail::parse_characterized(*it, path + ".designed");
        if (auto it = entry.find("measured"); it != entry.end())
            preset.measured = detail::parse_characterized(*it, path + ".measured");
        out.push_back(std::move(preset));
    }
    return out;
}

inline const DevicePreset& find_preset(const std::vector<DevicePreset>& presets, std::string_view name) {
    auto it = std::find_if(presets.begin(), presets.end(), [&](const DevicePreset& p) { return p.name == name; });
    if (it == presets.end()) throw ConfigError("unknown device preset '" + std::string(name) + "'");
    return *it;
}

/// Presets compiled in from data/presets.json.
inline const std::vector<DevicePreset>& builtin_presets() {
    static const std::vector<DevicePreset> presets = load_device_presets(kBuiltinPresetsJson);
    return presets;
}

}  // namespace fluxdac
