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

#include "fluxdac/fluxonium.hpp"
#include "fluxdac/presets.hpp"
#include "oracles/harmonic_fluxonium.hpp"

#include <cmath>
#include <random>

using namespace fluxdac;

namespace {

// Frozen from oracle::harmonic_basis_levels(1.3, 5.08, 0.806, 0.5, 120).
constexpr double kOracleSweetSpotGhz = 0.41741458348;
// Frozen central difference (h = 1e-5) of the default-grid f01 at 0.49.
constexpr double kSensitivityAt049 = -12.57301015;

FluxoniumParams reference() { return {}; }

double central_difference(const FluxoniumParams& p, double x, double h = 1e-5) {
    return (f01(p, x + h) - f01(p, x - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("harmonic limit") {
    FluxoniumParams p{1.3, 0.0, 0.806};
    const double exact = std::sqrt(8.0 * 1.3 * 0.806);
    CHECK(exact == doctest::Approx(2.8952).epsilon(1e-4));
    for (double x : {0.0, 0.3, 0.5}) CHECK(std::abs(f01(p, x) / exact - 1.0) < 1e-6);
}

TEST_CASE("harmonic-basis oracle is converged in its basis size") {
    const auto a = oracle::harmonic_basis_levels(1.3, 5.08, 0.806, 0.5, 120);
    const auto b = oracle::harmonic_basis_levels(1.3, 5.08, 0.806, 0.5, 160);
    CHECK(std::abs(a[1] - b[1]) < 1e-9);
    CHECK(std::abs(a[1] - kOracleSweetSpotGhz) < 1e-10);
}

TEST_CASE("grid and harmonic basis agree to 10 kHz") {
    const auto p = reference();
    CHECK(std::abs(f01(p, 0.5) - kOracleSweetSpotGhz) < 1e-5);
    // Operating range around the sweet spot at the default grid.
    for (double x = 0.25; x <= 0.75 + 1e-12; x += 0.025) {
        const double o = oracle::harmonic_basis_levels(1.3, 5.08, 0.806, x)[1];
        CHECK_MESSAGE(std::abs(f01(p, x) - o) < 1e-5, "flux " << x);
    }
    // Full period once the grid is doubled.
    auto fine = p;
    fine.grid_points = 16384;
    for (double x = 0.0; x <= 0.5 + 1e-12; x += 0.1) {
        const double o = oracle::harmonic_basis_levels(1.3, 5.08, 0.806, x)[1];
        CHECK_MESSAGE(std::abs(f01(fine, x) - o) < 1e-5, "flux " << x);
    }
}

TEST_CASE("spectrum symmetry and ordering") {
    const auto p = reference();
    for (double d : {0.01, 0.05}) CHECK(f01(p, 0.5 + d) == doctest::Approx(f01(p, 0.5 - d)).epsilon(1e-9));
    for (double x : {0.0, 0.2, 0.45, 0.5}) {
        const auto s = spectrum(p, x, 5);
        CHECK(s[0] == 0.0);
        for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] > s[i - 1]);
    }
    CHECK(f01(p, 1.3) == doctest::Approx(f01(p, 0.3)).epsilon(1e-9));
}

TEST_CASE("sweet spot") {
    const auto p = reference();
    CHECK(std::abs(flux_sensitivity(p, 0.5)) < 1e-4);
    // f01 has a minimum there, at both grid sizes.
    for (int n : {8192, 16384}) {
        auto q = p;
        q.grid_points = n;
        const double h = 1e-3;
        const double curvature = (f01(q, 0.5 + h) - 2.0 * f01(q, 0.5) + f01(q, 0.5 - h)) / (h * h);
        CHECK(curvature > 0.0);
    }
}

TEST_CASE("sensitivity at 0.49 Phi0") {
    const auto p = reference();
    CHECK(central_difference(p, 0.49) == doctest::Approx(kSensitivityAt049).epsilon(1e-7));
    CHECK(flux_sensitivity(p, 0.49) == doctest::Approx(kSensitivityAt049).epsilon(1e-5));
    CHECK(flux_sensitivity(p, 0.51) == doctest::Approx(-flux_sensitivity(p, 0.49)).epsilon(1e-6));
}

TEST_CASE("property: Hellmann-Feynman matches finite differences to 0.1%") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> flux(0.05, 0.95);
    const auto p = reference();
    for (int i = 0; i < 20; ++i) {
        const double x = flux(rng);
        const double fd = central_difference(p, x);
        const double hf = flux_sensitivity(p, x);
        CHECK_MESSAGE(std::abs(hf - fd) <= 1e-3 * std::abs(fd), "flux " << x);
    }
}

TEST_CASE("grid convergence near the operating point") {
    const auto p = reference();
    for (double x : {0.25, 0.4, 0.45, 0.5, 0.55, 0.6, 0.75}) CHECK(grid_convergence_shift(p, x) < 1e-5);
}

TEST_CASE("parameter validation") {
    FluxoniumParams p;
    p.e_c_ghz = 0.0;
    CHECK_THROWS_AS(f01(p, 0.5), InvalidParameter);
    p = {};
    p.e_j_ghz = -1.0;
    CHECK_THROWS_AS(f01(p, 0.5), InvalidParameter);
    p = {};
    p.grid_points = 100;
    CHECK_THROWS_AS(f01(p, 0.5), InvalidParameter);
    p = {};
    p.grid_halfwidth_rad = 5.0;
    CHECK_THROWS_AS(f01(p, 0.5), InvalidParameter);
    CHECK_THROWS_AS(spectrum(reference(), 0.5, 11), InvalidParameter);
}

TEST_CASE("dephasing rates") {
    const DephasingModel m;
    CHECK(dephasing_rate(6.75, 0.0, DephasingKind::Ramsey, m) == 0.0);
    CHECK(dephasing_rate(10.47, 0.0, DephasingKind::Echo, m) == 0.0);
    const double g = dephasing_rate(5.0, 2.0, DephasingKind::Echo, m);
    CHECK(dephasing_rate(10.0, 2.0, DephasingKind::Echo, m) == doctest::Approx(2.0 * g));
    CHECK(dephasing_rate(5.0, -4.0, DephasingKind::Echo, m) == doctest::Approx(2.0 * g));
    // 2 pi and the GHz * uPhi0 -> 1/us factor
    CHECK(g == doctest::Approx(std::sqrt(2.0 * std::log(2.0)) * kTwoPi * 2.0 * 5.0 * 1e-3));
    const double x = m.omega_ir_rad_s * m.t_measure_us * 1e-6;
    CHECK(dephasing_prefactor(DephasingKind::Ramsey, m) == doctest::Approx(std::sqrt(2.0 * std::log(1.0 / x))));
    DephasingModel bad;
    bad.t_measure_us = 1e9;
    CHECK_THROWS_AS(dephasing_prefactor(DephasingKind::Ramsey, bad), InvalidParameter);
    const auto both = dephasing_rates(6.75, 10.47, 3.0, m);
    CHECK(both.gamma_ramsey_per_us == dephasing_rate(6.75, 3.0, DephasingKind::Ramsey, m));
    CHECK(both.gamma_echo_per_us == dephasing_rate(10.47, 3.0, DephasingKind::Echo, m));
}

TEST_CASE("T1 sampling") {
    CHECK(t1_sample({82.0, 0.0}, 5) == 82.0);
    T1Sampler s(T1Model{}, 42);
    double sum = 0.0, sum2 = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const double v = s();
        CHECK(v > 0.0);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(std::abs(mean - 82.0) < 1.0);
    CHECK(std::abs(sd - 17.0) < 1.0);
    CHECK(T1Model::conventional_bias().mean_us == 58.0);
    CHECK(T1Model::dac_control().mean_us == 81.0);
    CHECK(t1_sample(T1Model{}, 9) == t1_sample(T1Model{}, 9));
    CHECK_THROWS_AS(T1Sampler(T1Model{0.0, 1.0}, 1), InvalidParameter);
}

TEST_CASE("total flux") {
    auto dac = make_dac(find_preset(builtin_presets(), "C4R1-DAC1").params);
    CHECK(total_flux(0.5, dac) == 0.5);
    dac.digit = 1;
    CHECK(total_flux(0.5, dac) == doctest::Approx(0.50458).epsilon(1e-14));
    for (int n1 : {-7, 0, 3})
        for (int n2 : {-2, 5}) {
            auto a = dac, b = dac;
            a.digit = n1 + n2;
            b.digit = n1;
            CHECK(total_flux(0.5, a) == doctest::Approx(total_flux(0.5, b) + 4.58e-3 * n2).epsilon(1e-13));
        }
}
