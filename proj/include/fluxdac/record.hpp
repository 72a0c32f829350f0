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

// Run artifact written by the harness and read back by calibration. Data
// columns carry units; CSV headers append the unit to the column name.

#include "fluxdac/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <charconv>
#include <cstdio>
#include <deque>
#include <ctime>
#include <string>
#include <string_view>
#include <vector>

namespace fluxdac {

inline constexpr const char* kRecordSchemaVersion = "1.0";

struct Column {
    std::string name;
    std::string unit;  // empty for dimensionless or integer columns
    std::vector<double> values;
};

struct ExperimentRecord {
    std::string schema_version = kRecordSchemaVersion;
    std::string scenario;
    nlohmann::json config = nlohmann::json::object();
    std::uint64_t rng_seed = 0;
    Column sweep;
    std::deque<Column> outputs;  // deque: references from add() stay valid
    nlohmann::json metadata = nlohmann::json::object();
    nlohmann::json provenance = nlohmann::json::object();

    Column& add(std::string name, std::string unit) {
        outputs.push_back({std::move(name), std::move(unit), {}});
        return outputs.back();
    }
    const Column& column(std::string_view name) const {
        if (sweep.name == name) return sweep;
        for (const auto& c : outputs)
            if (c.name == name) return c;
        throw OutOfRange("record has no column '" + std::string(name) + "'");
    }
    bool has_column(std::string_view name) const {
        if (sweep.name == name) return true;
        for (const auto& c : outputs)
            if (c.name == name) return true;
        return false;
    }
};

inline void validate(const ExperimentRecord& r) {
    if (r.schema_version.empty()) throw ConfigError("record: schema_version missing");
    if (r.sweep.values.empty()) throw ConfigError("record: sweep is empty");
    for (const auto& c : r.outputs) {
        if (c.values.size() != r.sweep.values.size())
            throw DimensionMismatch("record: column '" + c.name + "' has " + std::to_string(c.values.size()) +
                                    " values, sweep has " + std::to_string(r.sweep.values.size()));
    }
}

/// ISO-8601 UTC time, for the provenance block only.
inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline nlohmann::json to_json(const Column& c) { return {{"name", c.name}, {"unit", c.unit}, {"values", c.values}}; }

/// Full record. With include_provenance = false the result is the data
/// block, which is byte-stable for a fixed config and seed.
inline nlohmann::json to_json(const ExperimentRecord& r, bool include_provenance = true) {
    validate(r);
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& c : r.outputs) outputs.push_back(to_json(c));
    nlohmann::json j{{"schema_version", r.schema_version}, {"scenario", r.scenario},
                     {"config", r.config},                 {"rng_seed", r.rng_seed},
                     {"sweep", to_json(r.sweep)},          {"outputs", outputs},
                     {"metadata", r.metadata}};
    if (include_provenance) j["provenance"] = r.provenance;
    return j;
}

namespace detail {

inline Column column_from_json(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    Column c;
    try {
        c.name = j.at("name").get<std::string>();
        c.unit = j.value("unit", std::string{});
        c.values = j.at("values").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return c;
}

}  // namespace detail

inline ExperimentRecord record_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("record: expected an object");
    ExperimentRecord r;
    auto require = [&](const char* key) -> const nlohmann::json& {
        auto it = j.find(key);
        if (it == j.end()) throw ConfigError(std::string("record.") + key + ": missing required field");
        return *it;
    };
    try {
        r.schema_version = require("schema_version").get<std::string>();
        r.scenario = require("scenario").get<std::string>();
        r.config = require("config");
        r.rng_seed = require("rng_seed").get<std::uint64_t>();
    } catch (const nlohmann::json::type_error& e) {
        throw ConfigError(std::string("record: ") + e.what());
    }
    if (r.schema_version != kRecordSchemaVersion)
        throw ConfigError("record.schema_version: unsupported version '" + r.schema_version + "'");
    r.sweep = detail::column_from_json(require("sweep"), "record.sweep");
    const auto& outputs = require("outputs");
    if (!outputs.is_array()) throw ConfigError("record.outputs: expected an array");
    for (std::size_t i = 0; i < outputs.size(); ++i)
        r.outputs.push_back(detail::column_from_json(outputs[i], "record.outputs[" + std::to_string(i) + "]"));
    r.metadata = j.value("metadata", nlohmann::json::object());
    r.provenance = j.value("provenance", nlohmann::json::object());
    validate(r);
    return r;
}

/// "f01" + "GHz" -> "f01_GHz"; "1/us" -> "per_us"; "GHz/Phi0" -> "GHz_per_Phi0".
inline std::string csv_header(const Column& c) {
    if (c.unit.empty()) return c.name;
    std::string u = c.unit.rfind("1/", 0) == 0 ? "per_" + c.unit.substr(2) : c.unit;
    for (std::size_t pos; (pos = u.find('/')) != std::string::npos;) u.replace(pos, 1, "_per_");
    return c.name + "_" + u;
}

/// Shortest text that reads back to the same double.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Sweep column first, then outputs. No timestamps.
inline std::string to_csv(const ExperimentRecord& r) {
    validate(r);
    std::string out = csv_header(r.sweep);
    for (const auto& c : r.outputs) out += "," + csv_header(c);
    out += '\n';
    for (std::size_t i = 0; i < r.sweep.values.size(); ++i) {
        out += format_number(r.sweep.values[i]);
        for (const auto& c : r.outputs) out += "," + format_number(c.values[i]);
        out += '\n';
    }
    return out;
}

}  // namespace fluxdac
