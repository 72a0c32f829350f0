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

// Physical constants, per-device DAC cell parameters and the dimensionless
// groups derived from them.
//
// Flux convention: the internal flux variable is the phase phi = 2*pi*Phi/Phi0.
// In these units the rf-SQUID potential reads
//
//     U / E_J = (phi - phi_ext)^2 / (2 * beta_L) - cos(phi),
//     beta_L  = 2*pi * L * I_c / Phi0,
//
// which puts the metastable minima close to phi = 2*pi*N. Writing the same
// potential in Phi/Phi0 would move the factor (2*pi)^2 into the screening
// term; every downstream module works in the phase form.

#include "fluxdac/errors.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

namespace fluxdac {

/// Magnetic flux quantum h/2e in Wb (CODATA).
inline constexpr double kFluxQuantum = 2.067833848e-15;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

namespace units {
inline constexpr double kMicroAmp = 1e-6;
inline constexpr double kNanoHenry = 1e-9;
inline constexpr double kPicoHenry = 1e-12;
inline constexpr double kPicoFarad = 1e-12;
}  // namespace units

/// One flux-DAC cell. Units are carried in the field names and converted to
/// SI only inside derive().
struct DeviceParams {
    double i_c_ua = 80.0;
    double l_storage_nh = 1.0;
    double c_junction_pf = 3.5;
    double r_normal_ohm = 3.5;
    std::optional<double> r_shunt_ohm;       // absent: unshunted junction
    std::optional<double> m_coupling_ph;     // DAC-to-qubit mutual inductance
    double phi_trap_phi0 = 0.0;              // trapped flux, static offset to phi_ext
    double bias_coupling_phi0_per_ma = 1.0;  // bias-line current -> external flux

    friend bool operator==(const DeviceParams&, const DeviceParams&) = default;
};

struct DerivedParams {
    double beta_l = 0.0;
    double beta_c = 0.0;
    double omega_c_rad_s = 0.0;
    double r_eff_ohm = 0.0;

    friend bool operator==(const DerivedParams&, const DerivedParams&) = default;
};

inline double screening_parameter(double i_c_ua, double l_storage_nh) {
    return kTwoPi * (l_storage_nh * units::kNanoHenry) * (i_c_ua * units::kMicroAmp) / kFluxQuantum;
}

/// Throws InvalidParameter naming the first offending field.
inline void validate(const DeviceParams& p) {
    auto require_positive = [](double v, const char* field) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameter(field, "must be positive and finite");
    };
    require_positive(p.i_c_ua, "i_c_uA");
    require_positive(p.l_storage_nh, "l_storage_nH");
    require_positive(p.c_junction_pf, "c_junction_pF");
    require_positive(p.r_normal_ohm, "r_normal_ohm");
    if (p.r_shunt_ohm) require_positive(*p.r_shunt_ohm, "r_shunt_ohm");
    if (p.m_coupling_ph && (!std::isfinite(*p.m_coupling_ph) || *p.m_coupling_ph < 0.0))
        throw InvalidParameter("m_coupling_pH", "must be non-negative");
    require_positive(p.bias_coupling_phi0_per_ma, "bias_coupling_phi0_per_mA");
    // The trapped flux must stay inside the stability window, which spans
    // about beta_L/pi digits.
    const double span = screening_parameter(p.i_c_ua, p.l_storage_nh) / std::numbers::pi;
    if (!std::isfinite(p.phi_trap_phi0) || std::abs(p.phi_trap_phi0) >= span)
        throw InvalidParameter("phi_trap_phi0", "magnitude must be below the digit window span");
}

inline double effective_resistance(const DeviceParams& p) {
    if (!p.r_shunt_ohm) return p.r_normal_ohm;
    const double rs = *p.r_shunt_ohm;
    return p.r_normal_ohm * rs / (p.r_normal_ohm + rs);
}

inline DerivedParams derive(const DeviceParams& p) {
    validate(p);
    DerivedParams d;
    const double i_c = p.i_c_ua * units::kMicroAmp;
    const double c = p.c_junction_pf * units::kPicoFarad;
    d.r_eff_ohm = effective_resistance(p);
    d.beta_l = screening_parameter(p.i_c_ua, p.l_storage_nh);
    d.beta_c = kTwoPi * i_c * d.r_eff_ohm * d.r_eff_ohm * c / kFluxQuantum;
    d.omega_c_rad_s = kTwoPi * i_c * d.r_eff_ohm / kFluxQuantum;
    return d;
}

/// Qubit flux change per stored flux quantum, in mPhi0: M * Phi0 / L.
inline double step_mphi0(const DeviceParams& p) {
    if (!p.m_coupling_ph) throw InvalidParameter("m_coupling_pH", "not set for this device");
    // pH / nH = 1e-3, so the ratio is already in mPhi0.
    return *p.m_coupling_ph / p.l_storage_nh;
}

/// External phase (rad) produced by a bias-line current in mA.
inline double bias_to_phase(const DeviceParams& p, double current_ma) {
    return kTwoPi * p.bias_coupling_phi0_per_ma * current_ma;
}

inline double phase_to_bias(const DeviceParams& p, double phase_rad) {
    return phase_rad / (kTwoPi * p.bias_coupling_phi0_per_ma);
}

/// Baseline external phase contributed by trapped flux.
inline double trap_phase(const DeviceParams& p) { return kTwoPi * p.phi_trap_phi0; }

}  // namespace fluxdac
