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

#include "fluxdac/calibration.hpp"

#include <cmath>
#include <random>

using namespace fluxdac;

namespace {

// The round-trip properties only need the generator and the fit to share a
// grid; a coarser one keeps them fast.
FluxoniumParams truth(int grid = 2048) {
    FluxoniumParams p;
    p.grid_points = grid;
    return p;
}

FluxoniumParams offset_guess(int grid = 2048) {
    FluxoniumParams p{1.15, 5.6, 0.75};
    p.grid_points = grid;
    return p;
}

std::vector<SpectroscopyPoint> synthetic(const FluxoniumParams& p, double noise_ghz = 0.0, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_ghz > 0.0 ? noise_ghz : 1.0);
    std::vector<SpectroscopyPoint> pts;
    for (int i = 0; i < 15; ++i) {
        const double x = 0.45 + 0.1 * i / 14.0;
        pts.push_back({x, f01(p, x) + (noise_ghz > 0.0 ? noise(rng) : 0.0)});
    }
    return pts;
}

void check_relative(const FitResult& r, const FluxoniumParams& expect, double tol) {
    CHECK(std::abs(r.value("E_C") / expect.e_c_ghz - 1.0) < tol);
    CHECK(std::abs(r.value("E_J") / expect.e_j_ghz - 1.0) < tol);
    CHECK(std::abs(r.value("E_L") / expect.e_l_ghz - 1.0) < tol);
}

}  // namespace

TEST_CASE("fluxonium fit: noiseless round trip") {
    const auto r = fit_fluxonium(synthetic(truth()), offset_guess());
    check_relative(r, truth(), 0.01);
    CHECK(r.residual_rms < 1e-6);
    CHECK(r.residual_unit == "GHz");
    for (const auto& p : r.parameters) CHECK(std::isfinite(p.std_error));
}

TEST_CASE("fluxonium fit: 100 kHz frequency noise") {
    const auto r = fit_fluxonium(synthetic(truth(), 1e-4, 77), offset_guess());
    check_relative(r, truth(), 0.03);
    CHECK(r.residual_rms < 2e-4);
}

TEST_CASE("fluxonium fit: harmonic limit with E_J fixed at zero") {
    // With E_J = 0 only the product E_C E_L is identifiable, so E_C is held
    // too. Data come from the analytic plasma frequency, not from the grid.
    const double omega_true = std::sqrt(8.0 * 1.3 * 0.806);
    std::vector<SpectroscopyPoint> data;
    for (int i = 0; i <= 8; ++i) data.push_back({0.1 * i, omega_true});
    FluxoniumParams guess{1.3, 0.0, 1.0};
    FluxoniumFitOptions opt;
    opt.fix_e_j = true;
    opt.fix_e_c = true;
    const auto r = fit_fluxonium(data, guess, opt);
    CHECK(r.value("E_J") == 0.0);
    const double omega = std::sqrt(8.0 * r.value("E_C") * r.value("E_L"));
    CHECK(omega == doctest::Approx(omega_true).epsilon(1e-6));
}

TEST_CASE("property: fluxonium fit is scale equivariant") {
    const auto base = fit_fluxonium(synthetic(truth()), offset_guess());
    auto data = synthetic(truth());
    for (auto& p : data) p.f01_ghz *= 2.0;
    auto guess = offset_guess();
    guess.e_c_ghz *= 2.0;
    guess.e_j_ghz *= 2.0;
    guess.e_l_ghz *= 2.0;
    const auto scaled = fit_fluxonium(data, guess);
    for (const char* name : {"E_C", "E_J", "E_L"})
        CHECK(scaled.value(name) == doctest::Approx(2.0 * base.value(name)).epsilon(1e-4));
}

TEST_CASE("property: refitting from the optimum is idempotent") {
    const auto data = synthetic(truth(), 1e-4, 5);
    const auto first = fit_fluxonium(data, offset_guess());
    const auto second = fit_fluxonium(data, fitted_params(first, truth()));
    for (const char* name : {"E_C", "E_J", "E_L"})
        CHECK(second.value(name) == doctest::Approx(first.value(name)).epsilon(1e-5));
    // closure: the refit reproduces the data to the noise floor
    const auto p = fitted_params(second, truth());
    for (const auto& pt : data) CHECK(std::abs(f01(p, pt.phi_ext_phi0) - pt.f01_ghz) < 5e-4);
}

TEST_CASE("fluxonium fit: degenerate input") {
    std::vector<SpectroscopyPoint> three{{0.4, 1.0}, {0.5, 0.4}, {0.6, 1.0}};
    CHECK_THROWS_AS(fit_fluxonium(three, truth()), InvalidParameter);
    std::vector<SpectroscopyPoint> same(5, {0.5, 0.4});
    CHECK_THROWS_AS(fit_fluxonium(same, truth()), DegenerateData);
}

TEST_CASE("line fit") {
    const std::vector<double> x{1.0, 3.0}, y{2.0, 8.0};
    const auto f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(3.0));
    CHECK(f.intercept == doctest::Approx(-1.0));
    CHECK(f.residual_rms == doctest::Approx(0.0));
    CHECK_THROWS_AS(fit_line(std::vector<double>{1.0, 1.0}, std::vector<double>{0.0, 1.0}), DegenerateData);
    CHECK_THROWS_AS(fit_line(std::vector<double>{1.0}, std::vector<double>{0.0, 1.0}), DimensionMismatch);
}

TEST_CASE("DAC step fit") {
    SUBCASE("noiseless") {
        std::vector<StepPoint> pts;
        for (int n = -10; n <= 10; ++n) pts.push_back({double(n), 0.5 + n * 4.58e-3});
        const auto r = fit_dac_step(pts);
        CHECK(r.value("step") == doctest::Approx(4.58).epsilon(1e-12));
        CHECK(r.value("intercept") == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(r.parameter("step").unit == "mPhi0");
    }
    SUBCASE("two points interpolate exactly") {
        const auto r = fit_dac_step({{0.0, 0.5}, {3.0, 0.5 + 3 * 4.58e-3}});
        CHECK(r.value("step") == doctest::Approx(4.58).epsilon(1e-12));
        CHECK(r.residual_rms < 1e-15);
    }
    SUBCASE("0.05 mPhi0 flux noise over 20 digits") {
        std::mt19937_64 rng(2026);
        std::normal_distribution<double> noise(0.0, 0.05e-3);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<StepPoint> pts;
            for (int n = 0; n < 20; ++n) pts.push_back({double(n), 0.5 + n * 4.58e-3 + noise(rng)});
            CHECK(std::abs(fit_dac_step(pts).value("step") - 4.58) <= 0.01);
        }
    }
    SUBCASE("degenerate") {
        CHECK_THROWS_AS(fit_dac_step({}), DegenerateData);
        CHECK_THROWS_AS(fit_dac_step({{1.0, 0.5}, {1.0, 0.6}}), DegenerateData);
    }
}

TEST_CASE("flux noise fit") {
    const DephasingModel model;
    auto data = [&](double a, DephasingKind kind, double rel_noise, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, 1.0);
        std::vector<DephasingPoint> pts;
        for (int i = 0; i < 25; ++i) {
            const double d = -6.0 + 0.5 * i;
            pts.push_back({d, dephasing_rate(a, d, kind, model) * (1.0 + rel_noise * noise(rng))});
        }
        return pts;
    };
    SUBCASE("noiseless") {
        CHECK(fit_flux_noise(data(6.75, DephasingKind::Ramsey, 0.0, 1), DephasingKind::Ramsey).value("A_phi") ==
              doctest::Approx(6.75).epsilon(1e-12));
        CHECK(fit_flux_noise(data(10.47, DephasingKind::Echo, 0.0, 1), DephasingKind::Echo).value("A_phi") ==
              doctest::Approx(10.47).epsilon(1e-12));
    }
    SUBCASE("10% rate scatter stays within the quoted uncertainties") {
        // Least squares through the origin with multiplicative scatter has
        // relative spread 0.1 * sqrt(sum x^4) / sum x^2 for this design.
        double sx2 = 0.0, sx4 = 0.0;
        for (int i = 0; i < 25; ++i) {
            const double x = std::abs(-6.0 + 0.5 * i);
            sx2 += x * x;
            sx4 += x * x * x * x;
        }
        const double rel_sigma = 0.1 * std::sqrt(sx4) / sx2;
        double mean_r = 0.0, mean_e = 0.0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const double r = fit_flux_noise(data(6.75, DephasingKind::Ramsey, 0.1, seed), DephasingKind::Ramsey)
                                 .value("A_phi");
            const double e =
                fit_flux_noise(data(10.47, DephasingKind::Echo, 0.1, seed), DephasingKind::Echo).value("A_phi");
            CHECK(std::abs(r - 6.75) <= 3.0 * rel_sigma * 6.75);
            CHECK(std::abs(e - 10.47) <= 3.0 * rel_sigma * 10.47);
            mean_r += r / 10.0;
            mean_e += e / 10.0;
        }
        CHECK(std::abs(mean_r - 6.75) <= 0.25);
        CHECK(std::abs(mean_e - 10.47) <= 0.35);
    }
    SUBCASE("zero rates") {
        auto pts = data(6.75, DephasingKind::Ramsey, 0.0, 1);
        for (auto& p : pts) p.gamma_per_us = 0.0;
        CHECK(fit_flux_noise(pts, DephasingKind::Ramsey).value("A_phi") == 0.0);
    }
    SUBCASE("optional offset") {
        auto pts = data(6.75, DephasingKind::Echo, 0.0, 1);
        for (auto& p : pts) p.gamma_per_us += 0.002;
        FluxNoiseFitOptions opt;
        opt.fit_offset = true;
        const auto r = fit_flux_noise(pts, DephasingKind::Echo, opt);
        CHECK(r.value("A_phi") == doctest::Approx(6.75).epsilon(1e-9));
        CHECK(r.value("offset") == doctest::Approx(0.002).epsilon(1e-9));
    }
    SUBCASE("degenerate") {
        CHECK_THROWS_AS(fit_flux_noise({{0.0, 1.0}, {0.0, 2.0}, {0.0, 3.0}}, DephasingKind::Echo), DegenerateData);
        CHECK_THROWS_AS(fit_flux_noise({{1.0, 1.0}, {-1.0, 2.0}, {1.0, 3.0}}, DephasingKind::Echo), DegenerateData);
        CHECK_THROWS_AS(fit_flux_noise({{1.0, 1.0}, {2.0, 2.0}}, DephasingKind::Echo), InvalidParameter);
    }
}

TEST_CASE("fit result json") {
    const auto r = fit_dac_step({{0.0, 0.5}, {1.0, 0.50458}});
    const auto j = to_json(r);
    CHECK(j["parameters"][0]["name"] == "step");
    CHECK(j["residual_unit"] == "Phi0");
    CHECK(j["converged"] == true);
}
