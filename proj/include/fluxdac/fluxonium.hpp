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

// Fluxonium qubit used as flux meter and coherence probe.
//
//     H = 4 E_C n^2 + (E_L / 2) phi^2 - E_J cos(phi - 2 pi Phi_ext/Phi0)
//
// is discretized on a uniform phase grid with the 3-point Laplacian for the
// charging term; the result is a symmetric tridiagonal matrix. Energies and
// frequencies are in GHz (E/h), external flux in units of Phi0.

#include "fluxdac/dac.hpp"
#include "fluxdac/errors.hpp"
#include "fluxdac/tridiagonal.hpp"
#include "fluxdac/units.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fluxdac {

struct FluxoniumParams {
    double e_c_ghz = 1.3;
    double e_j_ghz = 5.08;
    double e_l_ghz = 0.806;
    int grid_points = 8192;
    double grid_halfwidth_rad = 0.0;  // 0: narrowest width meeting the confinement criterion

    friend bool operator==(const FluxoniumParams&, const FluxoniumParams&) = default;
};

/// Half-width W with E_L W^2 / 2 = 30 E_J + 100 E_C.
inline double confinement_halfwidth(const FluxoniumParams& p) {
    return std::sqrt(2.0 * (30.0 * p.e_j_ghz + 100.0 * p.e_c_ghz) / p.e_l_ghz);
}

inline double grid_halfwidth(const FluxoniumParams& p) {
    return p.grid_halfwidth_rad > 0.0 ? p.grid_halfwidth_rad : confinement_halfwidth(p);
}

inline void validate(const FluxoniumParams& p) {
    if (!(p.e_c_ghz > 0.0) || !std::isfinite(p.e_c_ghz)) throw InvalidParameter("e_c_GHz", "must be positive");
    if (!(p.e_l_ghz > 0.0) || !std::isfinite(p.e_l_ghz)) throw InvalidParameter("e_l_GHz", "must be positive");
    // E_J = 0 is admitted: it is the harmonic limit.
    if (!(p.e_j_ghz >= 0.0) || !std::isfinite(p.e_j_ghz)) throw InvalidParameter("e_j_GHz", "must be non-negative");
    if (p.grid_points < 512) throw InvalidParameter("grid_points", "must be at least 512");
    const double w = grid_halfwidth(p);
    if (0.5 * p.e_l_ghz * w * w < 30.0 * p.e_j_ghz + 100.0 * p.e_c_ghz * (1.0 - 1e-12))
        throw InvalidParameter("grid_halfwidth_rad", "violates the confinement criterion");
}

namespace detail {

struct FluxoniumGrid {
    std::vector<double> phase;
    std::vector<double> diagonal;
    std::vector<double> offdiag;
};

inline FluxoniumGrid build_grid(const FluxoniumParams& p, double phi_ext) {
    validate(p);
    const auto n = static_cast<std::size_t>(p.grid_points);
    const double w = grid_halfwidth(p);
    const double h = 2.0 * w / static_cast<double>(n - 1);
    const double kinetic = 4.0 * p.e_c_ghz / (h * h);
    const double shift = kTwoPi * phi_ext;
    FluxoniumGrid g;
    g.phase.resize(n);
    g.diagonal.resize(n);
    g.offdiag.assign(n - 1, -kinetic);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -w + h * static_cast<double>(i);
        g.phase[i] = x;
        g.diagonal[i] = 2.0 * kinetic + 0.5 * p.e_l_ghz * x * x - p.e_j_ghz * std::cos(x - shift);
    }
    return g;
}

}  // namespace detail

/// Lowest n_levels eigenenergies (GHz), not shifted. `hints` are earlier
/// energies at nearby parameters and only speed up the search.
inline std::vector<double> absolute_levels(const FluxoniumParams& p, double phi_ext, int n_levels,
                                           std::span<const double> hints = {}) {
    if (n_levels < 1 || n_levels > 10) throw InvalidParameter("n_levels", "must lie in [1, 10]");
    const auto g = detail::build_grid(p, phi_ext);
    return lowest_tridiagonal_eigen(g.diagonal, g.offdiag, n_levels, false, hints).values;
}

/// Lowest n_levels eigenfrequencies (GHz) relative to the ground state.
inline std::vector<double> spectrum(const FluxoniumParams& p, double phi_ext, int n_levels = 2) {
    auto levels = absolute_levels(p, phi_ext, n_levels);
    const double e0 = levels.front();
    for (auto& v : levels) v -= e0;
    return levels;
}

inline double f01(const FluxoniumParams& p, double phi_ext) { return spectrum(p, phi_ext, 2)[1]; }

/// df01/dPhi_ext in GHz/Phi0 from the Hellmann-Feynman expectation of
/// dH/dPhi_ext = -2 pi E_J sin(phi - 2 pi Phi_ext) in the two lowest states.
/// Multiply by 2 pi for the angular-frequency sensitivity.
inline double flux_sensitivity(const FluxoniumParams& p, double phi_ext) {
    const auto g = detail::build_grid(p, phi_ext);
    const auto eig = lowest_tridiagonal_eigen(g.diagonal, g.offdiag, 2, true);
    const std::size_t n = g.phase.size();
    const double shift = kTwoPi * phi_ext;
    double expect[2] = {0.0, 0.0};
    for (int level = 0; level < 2; ++level) {
        const double* v = eig.vectors.data() + static_cast<std::size_t>(level) * n;
        double acc = 0.0, norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += v[i] * v[i] * std::sin(g.phase[i] - shift);
            norm += v[i] * v[i];
        }
        expect[level] = -kTwoPi * p.e_j_ghz * acc / norm;
    }
    return expect[1] - expect[0];
}

/// |f01(2N) - f01(N)| in GHz; above 1e-5 (10 kHz) the grid is too coarse.
inline double grid_convergence_shift(const FluxoniumParams& p, double phi_ext) {
    auto fine = p;
    fine.grid_points = 2 * p.grid_points;
    return std::abs(f01(fine, phi_ext) - f01(p, phi_ext));
}

enum class DephasingKind { Ramsey, Echo };

/// 1/f flux-noise dephasing constants. Ramsey prefactor depends on the
/// infrared cutoff and the measurement time.
struct DephasingModel {
    double omega_ir_rad_s = kTwoPi * 1.0;
    double t_measure_us = 10.0;
    double offset_per_us = 0.0;  // flux-independent rate, off by default
};

inline double dephasing_prefactor(DephasingKind kind, const DephasingModel& m) {
    if (kind == DephasingKind::Echo) return std::sqrt(2.0 * std::log(2.0));
    const double x = m.omega_ir_rad_s * m.t_measure_us * 1e-6;
    if (!(x > 0.0 && x < 1.0)) throw InvalidParameter("omega_ir * t_measure", "must lie in (0, 1)");
    return std::sqrt(2.0 * std::log(1.0 / x));
}

/// Gamma [1/us] = c * 2 pi |D| A with D in GHz/Phi0 and A in uPhi0.
inline double dephasing_rate(double a_phi_uphi0, double sensitivity_ghz_per_phi0, DephasingKind kind,
                             const DephasingModel& m = {}) {
    if (!(a_phi_uphi0 >= 0.0)) throw InvalidParameter("a_phi", "must be non-negative");
    // GHz * uPhi0 / Phi0 = 1e9 * 1e-6 1/s = 1e-3 1/us
    return dephasing_prefactor(kind, m) * kTwoPi * std::abs(sensitivity_ghz_per_phi0) * a_phi_uphi0 * 1e-3 +
           m.offset_per_us;
}

struct DephasingRates {
    double gamma_ramsey_per_us = 0.0;
    double gamma_echo_per_us = 0.0;
};

inline DephasingRates dephasing_rates(double a_phi_ramsey_uphi0, double a_phi_echo_uphi0,
                                      double sensitivity_ghz_per_phi0, const DephasingModel& m = {}) {
    return {dephasing_rate(a_phi_ramsey_uphi0, sensitivity_ghz_per_phi0, DephasingKind::Ramsey, m),
            dephasing_rate(a_phi_echo_uphi0, sensitivity_ghz_per_phi0, DephasingKind::Echo, m)};
}

/// Flux-independent T1 distribution: normal, truncated at zero.
struct T1Model {
    double mean_us = 82.0;
    double scatter_us = 17.0;

    static T1Model conventional_bias() { return {58.0, 17.0}; }
    static T1Model dac_control() { return {81.0, 17.0}; }
};

class T1Sampler {
public:
    T1Sampler(T1Model model, std::uint64_t seed) : model_(model), engine_(seed) {
        if (!(model.mean_us > 0.0)) throw InvalidParameter("t1_mean_us", "must be positive");
        if (!(model.scatter_us >= 0.0)) throw InvalidParameter("t1_scatter_us", "must be non-negative");
    }

    double operator()() {
        if (model_.scatter_us == 0.0) return model_.mean_us;
        std::normal_distribution<double> dist(model_.mean_us, model_.scatter_us);
        for (;;) {
            const double x = dist(engine_);
            if (x > 0.0) return x;
        }
    }

private:
    T1Model model_;
    std::mt19937_64 engine_;
};

inline double t1_sample(const T1Model& model, std::uint64_t seed) { return T1Sampler(model, seed)(); }

/// Qubit external flux (Phi0): global coarse bias plus the DAC output.
inline double total_flux(double global_bias_phi0, const DacState& dac) {
    return global_bias_phi0 + qubit_flux_shift(dac) * 1e-3;
}

struct QubitPoint {
    double phi_ext_qubit = 0.0;
    double f01_ghz = 0.0;
    double sensitivity_ghz_per_phi0 = 0.0;
    double gamma_ramsey_per_us = 0.0;
    double gamma_echo_per_us = 0.0;
    double t1_us = 0.0;
};

}  // namespace fluxdac
