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

#include "doctest.h"

#include "fluxdac/harness.hpp"
#include "fluxdac/record.hpp"
#include "fluxdac/scenario.hpp"

#include <cmath>

using namespace fluxdac;
using nlohmann::json;

namespace {

std::string config_error(const json& doc) {
    try {
        parse_scenario(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("scenario defaults") {
    const auto c = parse_scenario(json());
    CHECK(c.device_name == "C4R1-DAC1");
    CHECK(*c.device.m_coupling_ph == 4.58);
    CHECK(c.fluxonium == FluxoniumParams{});
    CHECK(c.qubit.global_bias_phi0 == 0.5);
    CHECK_FALSE(c.seed.has_value());
}

TEST_CASE("device references") {
    CHECK(parse_scenario(json{{"device", "C1R5-DAC2"}}).device.m_coupling_ph == 4.70);
    const auto over = parse_scenario(json::parse(R"({"device": {"preset": "C4R1-DAC1", "phi_trap_phi0": 0.2}})"));
    CHECK(over.device.phi_trap_phi0 == 0.2);
    CHECK(over.device.i_c_ua == 80.0);
    const auto inline_dev = parse_scenario(json::parse(R"({"device": {"name": "mine", "i_c_uA": 100,
        "l_storage_nH": 1.0, "c_junction_pF": 3.5, "r_normal_ohm": 3.5, "m_coupling_pH": 5.0}})"));
    CHECK(inline_dev.device_name == "mine");
    CHECK(inline_dev.device.i_c_ua == 100.0);
}

TEST_CASE("config errors carry the field path") {
    CHECK(config_error(json{{"device", "C9"}}).find("config.device") != std::string::npos);
    CHECK(config_error(json::parse(R"({"fluxonium": {"e_c_GHz": "big"}})")).find("config.fluxonium.e_c_GHz") !=
          std::string::npos);
    CHECK(config_error(json::parse(R"({"fluxonium": {"e_c_GHz": -1}})")).find("config.fluxonium.e_c_GHz") !=
          std::string::npos);
    CHECK(config_error(json::parse(R"({"dac": {"usable_fraction": 0.9, "colour": 1}})")).find("config.dac.colour") !=
          std::string::npos);
    CHECK(config_error(json::parse(R"({"bogus": 1})")).find("config.bogus") != std::string::npos);
    CHECK(config_error(json::parse(R"({"dac": {"pulse_mode": "slow"}})")).find("pulse mode") != std::string::npos);
    CHECK_FALSE(config_error(json::parse(R"({"device": {"preset": "C4R1-DAC1", "phi_trap_phi0": 99}})")).empty());
}

TEST_CASE("scenario file loading") {
    try {
        load_scenario_file("/nonexistent/dir/config.json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/dir/config.json") != std::string::npos);
    }
}

TEST_CASE("sweep resolution") {
    const auto c = parse_scenario(json::parse(R"({"sweep": {"start": -1.0, "stop": 1.0, "points": 5}})"));
    REQUIRE(c.sweep);
    const auto v = c.sweep->resolve();
    REQUIRE(v.size() == 5);
    CHECK(v[0] == -1.0);
    CHECK(v[2] == 0.0);
    CHECK(v[1] == -v[3]);
    const auto explicit_values = parse_scenario(json::parse(R"({"sweep": {"values": [3, 1, 2]}})"));
    CHECK(explicit_values.sweep->resolve() == std::vector<double>{3, 1, 2});
}

TEST_CASE("config snapshot reloads to the same scenario") {
    const auto c = parse_scenario(json::parse(R"({"device": {"preset": "C1R5-DAC1", "phi_trap_phi0": -0.1},
        "fluxonium": {"e_j_GHz": 4.9, "grid_points": 4096}, "qubit": {"dac_digits": [-2, 0, 2]}, "seed": 12})"));
    const auto again = parse_scenario(to_json(c));
    CHECK(to_json(again) == to_json(c));
    CHECK(again.device == c.device);
    CHECK(again.fluxonium == c.fluxonium);
}

TEST_CASE("csv headers carry units") {
    CHECK(csv_header({"f01", "GHz", {}}) == "f01_GHz");
    CHECK(csv_header({"gamma_ramsey", "1/us", {}}) == "gamma_ramsey_per_us");
    CHECK(csv_header({"sensitivity", "GHz/Phi0", {}}) == "sensitivity_GHz_per_Phi0");
    CHECK(csv_header({"digit", "", {}}) == "digit");
    CHECK(format_number(4.58) == "4.58");
    CHECK(format_number(0.1 + 0.2) == "0.30000000000000004");
}

TEST_CASE("record round trip and validation") {
    ExperimentRecord r;
    r.scenario = "test";
    r.sweep = {"x", "mA", {1.0, 2.0}};
    r.add("y", "GHz").values = {3.0, 4.0};
    r.metadata["k"] = 1;
    const auto back = record_from_json(to_json(r));
    CHECK(back.column("y").values == std::vector<double>{3.0, 4.0});
    CHECK(back.column("x").unit == "mA");
    CHECK(to_json(back, false) == to_json(r, false));
    CHECK(to_csv(r) == "x_mA,y_GHz\n1,3\n2,4\n");

    r.add("z", "").values = {1.0};
    CHECK_THROWS_AS(to_json(r), DimensionMismatch);
    CHECK_THROWS_AS(r.column("missing"), OutOfRange);
}

TEST_CASE("records are deterministic apart from provenance") {
    auto cfg = parse_scenario(json::parse(R"({"noise": {"frequency_sigma_GHz": 1e-4, "rate_relative_sigma": 0.05}})"));
    using Runner = ExperimentRecord (*)(const ScenarioConfig&, std::uint64_t);
    for (Runner run : {Runner(run_plateau_scan), Runner(run_sfq_program), Runner(run_margin_sweep),
                       Runner(run_coherence)}) {
        const auto a = run(cfg, 11);
        const auto b = run(cfg, 11);
        CHECK(to_json(a, false).dump() == to_json(b, false).dump());
        CHECK(to_csv(a) == to_csv(b));
    }
    const auto c = run_coherence(cfg, 11);
    const auto d = run_coherence(cfg, 12);
    CHECK(to_csv(c) != to_csv(d));
}
