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

// Digit-level model of the flux DAC: a value-type state machine driven by
// square bias pulses, with an exact mode that integrates the RCSJ equation
// and a fast mode that counts precomputed stability thresholds.

#include "fluxdac/errors.hpp"
#include "fluxdac/presets.hpp"
#include "fluxdac/squid.hpp"
#include "fluxdac/units.hpp"

#include <json.hpp>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fluxdac {

enum class PulseMode { ExactPhysics, ThresholdTable };

inline const char* to_string(PulseMode m) {
    return m == PulseMode::ExactPhysics ? "exact-physics" : "threshold-table";
}

inline PulseMode parse_pulse_mode(const std::string& s) {
    if (s == "exact-physics") return PulseMode::ExactPhysics;
    if (s == "threshold-table") return PulseMode::ThresholdTable;
    throw ConfigError("unknown pulse mode '" + s + "' (expected exact-physics or threshold-table)");
}

/// Square bias pulse timing in units of 1/omega_c.
struct PulseShape {
    double rise_tau = 1000.0;
    double hold_tau = 10000.0;
    double fall_tau = 1000.0;
};

struct DacConfig {
    double usable_fraction = 0.96;
    PulseShape pulse;
    RcsjOptions rcsj;
};

struct DigitWindow {
    int n_min = 0;
    int n_max = 0;

    int span() const { return n_max - n_min; }
    bool contains(int n) const { return n >= n_min && n <= n_max; }
    friend bool operator==(const DigitWindow&, const DigitWindow&) = default;
};

struct ProgramEvent {
    std::size_t ordinal = 0;
    std::string kind;  // bias_pulse | saturate | sfq_train
    int polarity = 1;
    std::optional<double> amplitude_ma;
    std::optional<int> pulses_requested;
    std::optional<int> pulses_applied;
    std::string mode;
    int digit_before = 0;
    int digit_after = 0;
};

struct DacState {
    int digit = 0;
    DigitWindow window;
    DeviceParams device;
    std::vector<ProgramEvent> event_log;

    void log(ProgramEvent e) {
        e.ordinal = event_log.size();
        event_log.push_back(std::move(e));
    }
};

struct PulseOutcome {
    DacState state;
    int delta_digit = 0;
};

struct PlateauScanResult {
    std::vector<double> amplitudes_ma;
    std::vector<double> delta_flux_mphi0;
    int polarity = 1;
};

struct OutputRange {
    double range_phi0 = 0.0;
    int step_count = 0;
    DigitWindow window;
};

inline void require_polarity(int polarity) {
    if (polarity != 1 && polarity != -1) throw InvalidParameter("polarity", "must be +1 or -1");
}

/// Wells stable at the trapped-flux baseline, before any usable-fraction cut.
inline DigitWindow ideal_window(const DeviceParams& device) {
    const auto d = derive(device);
    const auto [lo, hi] = stable_well_range(d.beta_l, trap_phase(device));
    return {lo, hi};
}

/// Usable window: a fraction of the ideal half-width around the digit
/// closest to the trapped-flux offset.
inline DigitWindow usable_window(const DeviceParams& device, double usable_fraction) {
    if (!(usable_fraction > 0.0 && usable_fraction <= 1.0))
        throw InvalidParameter("usable_fraction", "must lie in (0, 1]");
    const auto ideal = ideal_window(device);
    const int center = static_cast<int>(std::lround(device.phi_trap_phi0));
    const int half = static_cast<int>(std::floor(usable_fraction * (ideal.span() / 2) + 1e-9));
    return {std::max(ideal.n_min, center - half), std::min(ideal.n_max, center + half)};
}

inline DacState make_dac(const DeviceParams& device, double usable_fraction = 0.96, int digit = 0) {
    DacState s;
    s.device = device;
    s.window = usable_window(device, usable_fraction);
    if (!s.window.contains(digit)) throw WindowOverflow(digit, s.window.n_min, s.window.n_max);
    s.digit = digit;
    return s;
}

/// Bias amplitudes (mA) at which each well in the stable range is lost, for
/// positive and negative pulses applied on top of the trapped-flux baseline.
class ThresholdTable {
public:
    explicit ThresholdTable(const DeviceParams& device) : device_(device) {
        const auto d = derive(device);
        const double base = trap_phase(device);
        const auto [lo, hi] = stable_well_range(d.beta_l, base);
        n_lo_ = lo;
        for (int n = lo; n <= hi; ++n) {
            up_ma_.push_back(phase_to_bias(device, critical_tilt_at(d.beta_l, n, +1) - base));
            down_ma_.push_back(phase_to_bias(device, base - critical_tilt_at(d.beta_l, n, -1)));
        }
    }

    int n_lo() const { return n_lo_; }
    int n_hi() const { return n_lo_ + static_cast<int>(up_ma_.size()) - 1; }

    /// Smallest amplitude (mA) of the given polarity that moves well n.
    double threshold_ma(int n, int polarity) const {
        check(n);
        return polarity > 0 ? up_ma_[n - n_lo_] : down_ma_[n - n_lo_];
    }

    /// Signed number of wells a pulse moves the state from well n.
    int steps(int n, double amplitude_ma, int polarity) const {
        check(n);
        int k = n;
        if (polarity > 0) {
            while (k <= n_hi() && amplitude_ma >= up_ma_[k - n_lo_]) ++k;
            k = std::min(k, n_hi());  // slips back into the last stable well
        } else {
            while (k >= n_lo_ && amplitude_ma >= down_ma_[k - n_lo_]) --k;
            k = std::max(k, n_lo_);
        }
        return k - n;
    }

    /// Amplitude in the middle of the single-step plateau of well n.
    double single_step_amplitude(int n, int polarity) const {
        const int next = n + polarity;
        const double a = threshold_ma(n, polarity);
        if (next < n_lo_ || next > n_hi()) return a;
        return 0.5 * (a + threshold_ma(next, polarity));
    }

private:
    // Tilt at which well n vanishes; unlike critical_tilt this accepts wells
    // that only exist under the trapped-flux baseline.
    static double critical_tilt_at(double beta_l, int n, int direction) {
        return direction * zero_well_critical_tilt(beta_l) + kTwoPi * n;
    }
    void check(int n) const {
        if (n < n_lo_ || n > n_hi()) throw OutOfRange("well " + std::to_string(n) + " outside threshold table");
    }

    DeviceParams device_;
    int n_lo_ = 0;
    std::vector<double> up_ma_;
    std::vector<double> down_ma_;
};

/// One square bias pulse of |amplitude| mA and the given polarity.
inline PulseOutcome apply_bias_pulse(const DacState& state, double amplitude_ma, int polarity, PulseMode mode,
                                     const DacConfig& config = {}) {
    require_polarity(polarity);
    if (!(amplitude_ma >= 0.0) || !std::isfinite(amplitude_ma))
        throw InvalidParameter("amplitude_mA", "must be non-negative and finite");
    if (!state.window.contains(state.digit)) throw WindowOverflow(state.digit, state.window.n_min, state.window.n_max);

    int delta = 0;
    if (mode == PulseMode::ThresholdTable) {
        delta = ThresholdTable(state.device).steps(state.digit, amplitude_ma, polarity);
    } else {
        const auto d = derive(state.device);
        const double base = trap_phase(state.device);
        const double start = well_minimum(base, d.beta_l, state.digit).phi_min;
        const auto drive = PulseWaveform::square_pulse(base, polarity * bias_to_phase(state.device, amplitude_ma),
                                                       config.pulse.rise_tau, config.pulse.hold_tau,
                                                       config.pulse.fall_tau);
        const auto tr = rcsj_transient(start, drive, d, config.rcsj);
        if (tr.diverged || !tr.final_state) throw ConvergenceError("RCSJ transient diverged");
        delta = tr.final_state->index_n - state.digit;
    }
    const int next = state.digit + delta;
    if (!state.window.contains(next)) throw WindowOverflow(next, state.window.n_min, state.window.n_max);

    PulseOutcome out{state, delta};
    ProgramEvent e;
    e.kind = "bias_pulse";
    e.polarity = polarity;
    e.amplitude_ma = amplitude_ma;
    e.mode = to_string(mode);
    e.digit_before = state.digit;
    e.digit_after = next;
    out.state.digit = next;
    out.state.log(std::move(e));
    return out;
}

/// Alternately saturates the DAC to n_max and n_min `cycles` times, then
/// climbs from n_min to the reference digit with single-step pulses.
inline DacState reset(const DacState& state, int reference_digit, int cycles) {
    if (cycles < 1) throw InvalidParameter("cycles", "must be at least 1");
    if (!state.window.contains(reference_digit))
        throw InvalidParameter("reference_digit", "outside the digit window");
    DacState s = state;
    const ThresholdTable table(s.device);
    auto saturate = [&](int polarity) {
        ProgramEvent e;
        e.kind = "saturate";
        e.polarity = polarity;
        e.amplitude_ma = polarity > 0 ? table.threshold_ma(table.n_hi(), 1) : table.threshold_ma(table.n_lo(), -1);
        e.mode = to_string(PulseMode::ThresholdTable);
        e.digit_before = s.digit;
        s.digit = polarity > 0 ? s.window.n_max : s.window.n_min;
        e.digit_after = s.digit;
        s.log(std::move(e));
    };
    for (int c = 0; c < cycles; ++c) {
        saturate(+1);
        saturate(-1);
    }
    while (s.digit < reference_digit)
        s = apply_bias_pulse(s, table.single_step_amplitude(s.digit, +1), +1, PulseMode::ThresholdTable).state;
    return s;
}

/// DAC contribution to the qubit external flux, in mPhi0.
inline double qubit_flux_shift(const DacState& state) { return state.digit * step_mphi0(state.device); }

/// Per-amplitude qubit-flux change of one pulse, each point starting from
/// a fresh reset to `reference_digit`.
inline PlateauScanResult scan_plateau(const DacState& state, std::span<const double> amplitudes_ma, int polarity,
                                      PulseMode mode = PulseMode::ThresholdTable, const DacConfig& config = {},
                                      int reference_digit = 0, int reset_cycles = 1) {
    require_polarity(polarity);
    if (amplitudes_ma.empty()) throw InvalidParameter("amplitudes", "must be non-empty");
    for (std::size_t i = 1; i < amplitudes_ma.size(); ++i)
        if (!(amplitudes_ma[i] > amplitudes_ma[i - 1]))
            throw InvalidParameter("amplitudes", "must be strictly increasing");
    PlateauScanResult r;
    r.polarity = polarity;
    for (double a : amplitudes_ma) {
        const auto fresh = reset(state, reference_digit, reset_cycles);
        const auto out = apply_bias_pulse(fresh, a, polarity, mode, config);
        r.amplitudes_ma.push_back(a);
        r.delta_flux_mphi0.push_back(qubit_flux_shift(out.state) - qubit_flux_shift(fresh));
    }
    return r;
}

inline OutputRange output_range(const DeviceParams& device, double usable_fraction = 0.96) {
    OutputRange r;
    r.window = usable_window(device, usable_fraction);
    r.step_count = r.window.span();
    r.range_phi0 = r.step_count * step_mphi0(device) * 1e-3;
    return r;
}

/// Range and step count implied by a preset's measured table values.
inline std::optional<OutputRange> measured_output_range(const DevicePreset& preset) {
    if (!preset.measured.range_phi0 || !preset.measured.step_mphi0) return std::nullopt;
    OutputRange r;
    r.range_phi0 = *preset.measured.range_phi0;
    r.step_count = static_cast<int>(std::lround(r.range_phi0 / (*preset.measured.step_mphi0 * 1e-3)));
    return r;
}

inline nlohmann::json to_json(const ProgramEvent& e) {
    nlohmann::json j{{"ordinal", e.ordinal},         {"kind", e.kind},
                     {"polarity", e.polarity},       {"mode", e.mode},
                     {"digit_before", e.digit_before}, {"digit_after", e.digit_after}};
    if (e.amplitude_ma) j["amplitude_mA"] = *e.amplitude_ma;
    if (e.pulses_requested) j["pulses_requested"] = *e.pulses_requested;
    if (e.pulses_applied) j["pulses_applied"] = *e.pulses_applied;
    return j;
}

/// One JSON object per line, in event order.
inline std::string event_log_to_jsonl(const std::vector<ProgramEvent>& log) {
    std::string out;
    for (const auto& e : log) {
        out += to_json(e).dump();
        out += '\n';
    }
    return out;
}

}  // namespace fluxdac
