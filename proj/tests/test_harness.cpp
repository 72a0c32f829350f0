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

#include <cmath>
#include <map>

using namespace fluxdac;
using nlohmann::json;

namespace {

ScenarioConfig defaults() { return parse_scenario(json()); }

}  // namespace

TEST_CASE("plateau scan") {
    const auto rec = run_plateau_scan(defaults(), 0);
    const auto& amp = rec.column("amplitude").values;
    const auto& dd = rec.column("delta_digit").values;
    const auto& df = rec.column("delta_flux").values;
    const auto& pred = rec.metadata["predicted_thresholds_mA"];
    const auto& obs = rec.metadata["observed_thresholds_mA"];
    const double grid = rec.metadata["amplitude_grid_mA"];

    SUBCASE("plateau height is the step") {
        for (std::size_t i = 0; i < amp.size(); ++i) {
            CHECK(df[i] == doctest::Approx(dd[i] * 4.58).epsilon(1e-12));
            if (std::abs(dd[i]) == 1) CHECK(std::abs(df[i]) == doctest::Approx(4.58).epsilon(1e-12));
        }
    }
    SUBCASE("sub-threshold amplitudes do nothing") {
        const double t = pred["positive_single"];
        for (std::size_t i = 0; i < amp.size(); ++i)
            if (std::abs(amp[i]) < t) CHECK(df[i] == 0.0);
    }
    SUBCASE("edges coincide with the critical tilt to one grid step") {
        for (const char* key : {"positive_single", "positive_double", "negative_single", "negative_double"}) {
            const double p = pred[key], o = obs[key];
            CHECK(o >= p);
            CHECK(o - p <= grid);
        }
        const double c0 = zero_well_critical_tilt(derive(defaults().device).beta_l);
        CHECK(double(pred["positive_single"]) == doctest::Approx(c0 / kTwoPi).epsilon(1e-12));
    }
    SUBCASE("mirror symmetric without trapped flux") {
        CHECK(double(rec.metadata["threshold_asymmetry_mA"]) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
        const std::size_t n = amp.size();
        for (std::size_t i = 0; i < n; ++i) CHECK(dd[i] == -dd[n - 1 - i]);
    }
    SUBCASE("trapped flux makes the thresholds asymmetric") {
        const auto trapped =
            run_plateau_scan(parse_scenario(json::parse(R"({"device": {"preset": "C4R1-DAC1", "phi_trap_phi0": 0.2}})")), 0);
        CHECK(double(trapped.metadata["threshold_asymmetry_mA"]) == doctest::Approx(-0.4).epsilon(1e-9));
        const double pos = trapped.metadata["observed_thresholds_mA"]["positive_single"];
        const double neg = trapped.metadata["observed_thresholds_mA"]["negative_single"];
        CHECK(pos < neg);
    }
}

TEST_CASE("SFQ programming lines") {
    const auto rec = run_sfq_program(defaults(), 0);
    for (const auto& line : rec.metadata["lines"]) {
        const int pol = line["polarity"];
        CHECK(double(line["slope_mPhi0_per_pulse"]) == doctest::Approx(pol * 4.58).epsilon(1e-9));
        CHECK(double(line["residual_rms_Phi0"]) < 1e-12);
    }
    const auto& k = rec.column("pulse_count").values;
    const auto& start = rec.column("start_digit").values;
    const auto& pol = rec.column("polarity").values;
    const auto& phi = rec.column("phi_qubit").values;
    const auto& emitted = rec.column("pulses_emitted").values;
    std::map<std::tuple<double, double, double>, double> by_key;
    for (std::size_t i = 0; i < k.size(); ++i) {
        by_key[{start[i], pol[i], k[i]}] = phi[i];
        CHECK(emitted[i] == k[i]);
    }
    for (const auto& [key, value] : by_key) {
        const auto [s, p, n] = key;
        // zero pulses: flat; opposite trains mirror about the start flux
        const double base = by_key.at({s, p, 0.0});
        CHECK(by_key.at({s, 1.0, 0.0}) == by_key.at({s, -1.0, 0.0}));
        const double mirror = by_key.at({s, -p, n});
        CHECK(value - base == doctest::Approx(base - mirror).epsilon(1e-9));
    }
}

TEST_CASE("SFQ programming with the converter out of margin") {
    const auto rec = run_sfq_program(parse_scenario(json::parse(R"({"sfq": {"converter_bias_mA": 2.0}})")), 0);
    for (double v : rec.column("pulses_emitted").values) CHECK(v == 0.0);
}

TEST_CASE("margin sweep") {
    const auto rec = run_margin_sweep(defaults(), 0);
    const auto& d = rec.column("digit").values;
    const auto& pos = rec.column("positive_margin").values;
    const auto& neg = rec.column("negative_margin").values;
    const int span = rec.metadata["window"]["span"];
    CHECK(pos.front() == span);
    CHECK(neg.front() == 0.0);
    CHECK(pos.back() == 0.0);
    CHECK(neg.back() == span);
    CHECK(rec.metadata["constant_sum"] == true);
    CHECK(double(rec.metadata["positive_fit"]["slope"]) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(double(rec.metadata["negative_fit"]["slope"]) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(rec.column("sfq_positive_accepted").values[i] == pos[i]);
        CHECK(rec.column("sfq_negative_accepted").values[i] == neg[i]);
    }
}

TEST_CASE("spectroscopy") {
    const auto rec = run_spectroscopy(defaults(), 0);
    const auto& phi = rec.column("phi_ext").values;
    const auto& f = rec.column("f01").values;
    const auto& path = rec.column("control_path").values;
    const auto& digit = rec.column("dac_digit").values;

    SUBCASE("both paths lie on one curve") {
        const auto c = defaults();
        for (std::size_t i = 0; i < phi.size(); ++i) {
            if (path[i] != kDacPath) continue;
            CHECK(phi[i] == doctest::Approx(0.5 + digit[i] * 4.58e-3).epsilon(1e-14));
            CHECK(std::abs(f[i] - f01(c.fluxonium, phi[i])) < 1e-6);
        }
        // matching flux: digit 0 and the conventional point at 0.5
        double conv = 0.0, dac = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) {
            if (phi[i] != 0.5) continue;
            (path[i] == kDacPath ? dac : conv) = f[i];
        }
        CHECK(std::abs(conv - dac) < 1e-6);
    }
    SUBCASE("f01 is smallest at the sweet spot") {
        const auto best = std::min_element(f.begin(), f.end()) - f.begin();
        CHECK(phi[static_cast<std::size_t>(best)] == 0.5);
    }
}

TEST_CASE("coherence") {
    const auto rec = run_coherence(defaults(), 3);
    const auto& phi = rec.column("phi_ext").values;
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (phi[i] == 0.5) {
            CHECK(std::abs(rec.column("gamma_ramsey").values[i]) < 1e-6);
            CHECK(std::abs(rec.column("gamma_echo").values[i]) < 1e-6);
        }
    // T1 statistics with a larger draw for the check
    auto cfg = parse_scenario(json::parse(R"({"sweep": {"start": 0.47, "stop": 0.53, "points": 400},
                                             "qubit": {"include_dac_path": false}})"));
    const auto big = run_coherence(cfg, 3);
    CHECK(std::abs(double(big.metadata["t1_mean_us"]) - 82.0) < 17.0 * 4.0 / 20.0);
    CHECK(std::abs(double(big.metadata["t1_std_us"]) - 17.0) < 2.0);
}

TEST_CASE("calibration of harness records") {
    SUBCASE("coherence") {
        const auto fits = calibrate_record(run_coherence(defaults(), 1));
        CHECK(double(fits["fits"]["flux_noise_ramsey"]["parameters"][0]["value"]) == doctest::Approx(6.75));
        CHECK(double(fits["fits"]["flux_noise_echo"]["parameters"][0]["value"]) == doctest::Approx(10.47));
    }
    SUBCASE("sfq-program") {
        const auto fits = calibrate_record(run_sfq_program(defaults(), 1));
        CHECK(double(fits["fits"]["dac_step"]["parameters"][0]["value"]) == doctest::Approx(4.58).epsilon(1e-9));
    }
    SUBCASE("plateau") {
        const auto fits = calibrate_record(run_plateau_scan(defaults(), 1));
        CHECK(double(fits["fits"]["dac_step"]["parameters"][0]["value"]) == doctest::Approx(4.58).epsilon(1e-9));
    }
}

TEST_CASE("demux check") {
    const auto rep = demux_check(4, 1);
    CHECK(rep.passed());
    CHECK(rep.details["ports"] == 16);
    CHECK(rep.details["select_lines"] == 4);
    CHECK(demux_check(0, 2, 5).passed());
}

TEST_CASE("f01 inversion") {
    const FluxoniumParams p;
    for (double x : {0.46, 0.49, 0.52, 0.55}) {
        const int side = x < 0.5 ? -1 : 1;
        CHECK(invert_f01(p, f01(p, x), side) == doctest::Approx(x).epsilon(1e-9));
    }
}
