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

// Experiment orchestration: one function per figure-style run, each
// returning an ExperimentRecord, plus the calibration pass that reads a
// record back. Runs are deterministic for a fixed config and seed; noise is
// only injected when a noise amplitude is set.

#include "fluxdac/calibration.hpp"
#include "fluxdac/dac.hpp"
#include "fluxdac/fluxonium.hpp"
#include "fluxdac/record.hpp"
#include "fluxdac/scenario.hpp"
#include "fluxdac/sfq.hpp"
#include "fluxdac/waveform.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <tuple>
#include <string>
#include <vector>

namespace fluxdac {

inline constexpr const char* kToolVersion = "0.1.0";

/// Control-path codes used in the control_path column.
inline constexpr double kConventionalPath = 0.0;
inline constexpr double kDacPath = 1.0;

namespace detail {

inline ExperimentRecord start_record(const char* scenario, const ScenarioConfig& c, std::uint64_t seed) {
    ExperimentRecord r;
    r.scenario = scenario;
    r.config = to_json(c);
    r.config["seed"] = seed;
    r.rng_seed = seed;
    r.provenance = {{"created_utc", utc_timestamp()}, {"generator", "fluxdac"}, {"version", kToolVersion}};
    return r;
}

inline DacConfig dac_config(const ScenarioConfig& c) {
    DacConfig d;
    d.usable_fraction = c.dac.usable_fraction;
    d.pulse = c.dac.pulse;
    return d;
}

inline DacState reset_to(const ScenarioConfig& c, int digit) {
    const auto dac = make_dac(c.device, c.dac.usable_fraction);
    if (!dac.window.contains(digit)) throw WindowOverflow(digit, dac.window.n_min, dac.window.n_max);
    return reset(dac, digit, c.dac.reset_cycles);
}

inline std::vector<int> as_digits(const std::vector<double>& values) {
    std::vector<int> out;
    for (double v : values) {
        if (v != std::round(v)) throw ConfigError("config.sweep: digit values must be integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

inline std::vector<int> symmetric_digits(int half, const DigitWindow& w) {
    std::vector<int> out;
    for (int d = std::max(-half, w.n_min); d <= std::min(half, w.n_max); ++d) out.push_back(d);
    return out;
}

inline nlohmann::json path_codes() {
    return {{"0", "conventional"}, {"1", "dac"}};
}

}  // namespace detail

/// Single bias pulses of signed amplitude from a fresh reset to the
/// reference digit; records the resulting qubit-flux increment.
inline ExperimentRecord run_plateau_scan(const ScenarioConfig& c, std::uint64_t seed) {
    auto rec = detail::start_record("plateau", c, seed);
    const int ref = c.dac.reference_digit;
    const auto fresh = detail::reset_to(c, ref);
    const ThresholdTable table(c.device);
    const double step = step_mphi0(c.device);

    std::vector<double> amps;
    if (c.sweep) {
        amps = c.sweep->resolve();
    } else {
        const double reach = 1.1 * std::max(table.threshold_ma(ref + 1, +1), table.threshold_ma(ref - 1, -1));
        amps = SweepSpec{{}, -reach, reach, 801}.resolve();
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> readout(0.0, 1.0);
    const auto cfg = detail::dac_config(c);
    rec.sweep = {"amplitude", "mA", amps};
    auto& polarity = rec.add("polarity", "");
    auto& delta_digit = rec.add("delta_digit", "");
    auto& delta_flux = rec.add("delta_flux", "mPhi0");
    for (double a : amps) {
        const int pol = a < 0.0 ? -1 : 1;
        const auto out = apply_bias_pulse(fresh, std::abs(a), pol, c.dac.pulse_mode, cfg);
        double df = qubit_flux_shift(out.state) - qubit_flux_shift(fresh);
        if (c.noise.flux_sigma_mphi0 > 0.0) df += c.noise.flux_sigma_mphi0 * readout(rng);
        polarity.values.push_back(pol);
        delta_digit.values.push_back(out.delta_digit);
        delta_flux.values.push_back(df);
    }

    // Observed plateau edges: smallest |amplitude| giving >= 1 and >= 2 steps.
    auto edge = [&](int pol, int steps) -> nlohmann::json {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < amps.size(); ++i)
            if (polarity.values[i] == pol && std::abs(delta_digit.values[i]) >= steps)
                best = std::min(best, std::abs(amps[i]));
        return std::isfinite(best) ? nlohmann::json(best) : nlohmann::json(nullptr);
    };
    double grid = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < amps.size(); ++i) grid = std::min(grid, std::abs(amps[i] - amps[i - 1]));
    rec.metadata = {
        {"reference_digit", ref},
        {"step_mPhi0", step},
        {"pulse_mode", to_string(c.dac.pulse_mode)},
        {"amplitude_grid_mA", amps.size() > 1 ? nlohmann::json(grid) : nlohmann::json(nullptr)},
        {"predicted_thresholds_mA",
         {{"positive_single", table.threshold_ma(ref, +1)},
          {"positive_double", table.threshold_ma(ref + 1, +1)},
          {"negative_single", table.threshold_ma(ref, -1)},
          {"negative_double", table.threshold_ma(ref - 1, -1)}}},
        {"observed_thresholds_mA",
         {{"positive_single", edge(+1, 1)},
          {"positive_double", edge(+1, 2)},
          {"negative_single", edge(-1, 1)},
          {"negative_double", edge(-1, 2)}}},
        {"threshold_asymmetry_mA", table.threshold_ma(ref, +1) - table.threshold_ma(ref, -1)}};
    return rec;
}

/// Flux-vs-pulse-count lines: from each start digit, trains of k trigger
/// pulses of each polarity go through the dc/SFQ converter and the JTL into
/// the DAC.
inline ExperimentRecord run_sfq_program(const ScenarioConfig& c, std::uint64_t seed) {
    auto rec = detail::start_record("sfq-program", c, seed);
    std::vector<int> counts;
    if (c.sweep) {
        counts = detail::as_digits(c.sweep->resolve());
        for (int k : counts)
            if (k < 0) throw ConfigError("config.sweep: pulse counts must be non-negative");
    } else {
        for (int k = 0; k <= c.sfq.max_pulses; ++k) counts.push_back(k);
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> readout(0.0, 1.0);
    rec.sweep = {"pulse_count", "", {}};
    auto& start = rec.add("start_digit", "");
    auto& polarity = rec.add("polarity", "");
    auto& emitted = rec.add("pulses_emitted", "");
    auto& applied = rec.add("pulses_applied", "");
    auto& dropped = rec.add("pulses_dropped", "");
    auto& digit = rec.add("digit", "");
    auto& flux = rec.add("phi_qubit", "Phi0");

    nlohmann::json lines = nlohmann::json::array();
    for (int s : c.sfq.start_digits) {
        const auto fresh = detail::reset_to(c, s);
        for (int pol : {+1, -1}) {
            std::vector<double> xs, ys;
            for (int k : counts) {
                const std::vector<double> amps(static_cast<std::size_t>(k), pol * c.sfq.trigger_amplitude_ma);
                const auto trigger = k == 0 ? PulseWaveform::constant(0.0)
                                            : PulseWaveform::pulse_train(0.0, amps, 1.0, 2.0, 1.0, 4.0);
                const auto pulses =
                    dc_sfq_convert(trigger, c.sfq.converter_bias_ma, c.sfq.trigger_threshold_ma, c.sfq.converter);
                const auto out = program_dac_sfq(fresh, static_cast<int>(pulses.size()), pol, c.sfq.jtl);
                double phi = c.qubit.global_bias_phi0 + qubit_flux_shift(out.state) * 1e-3;
                if (c.noise.flux_sigma_mphi0 > 0.0) phi += c.noise.flux_sigma_mphi0 * 1e-3 * readout(rng);
                rec.sweep.values.push_back(k);
                start.values.push_back(s);
                polarity.values.push_back(pol);
                emitted.values.push_back(static_cast<double>(pulses.size()));
                applied.values.push_back(out.applied);
                dropped.values.push_back(out.dropped);
                digit.values.push_back(out.state.digit);
                flux.values.push_back(phi);
                xs.push_back(k);
                ys.push_back(phi);
            }
            nlohmann::json line{{"start_digit", s}, {"polarity", pol}};
            if (counts.size() >= 2 && counts.front() != counts.back()) {
                const auto f = fit_line(xs, ys);
                line["slope_mPhi0_per_pulse"] = f.slope * 1e3;
                line["residual_rms_Phi0"] = f.residual_rms;
            }
            lines.push_back(line);
        }
    }
    rec.metadata = {{"step_mPhi0", step_mphi0(c.device)}, {"lines", lines}};
    return rec;
}

/// Programming margins (Fig. 3b style) across initialization digits, both
/// from the window bookkeeping and by driving SFQ trains into saturation.
inline ExperimentRecord run_margin_sweep(const ScenarioConfig& c, std::uint64_t seed) {
    auto rec = detail::start_record("margins", c, seed);
    const auto window = make_dac(c.device, c.dac.usable_fraction).window;
    std::vector<int> digits;
    if (c.sweep) {
        digits = detail::as_digits(c.sweep->resolve());
    } else {
        for (int d = window.n_min; d <= window.n_max; ++d) digits.push_back(d);
    }

    rec.sweep = {"digit", "", {}};
    auto& pos = rec.add("positive_margin", "");
    auto& neg = rec.add("negative_margin", "");
    auto& sum = rec.add("margin_sum", "");
    auto& sfq_pos = rec.add("sfq_positive_accepted", "");
    auto& sfq_neg = rec.add("sfq_negative_accepted", "");
    const int flood = window.span() + 1;
    for (int d : digits) {
        const auto dac = detail::reset_to(c, d);
        const auto m = margins(dac);
        rec.sweep.values.push_back(d);
        pos.values.push_back(m.positive_margin);
        neg.values.push_back(m.negative_margin);
        sum.values.push_back(m.positive_margin + m.negative_margin);
        sfq_pos.values.push_back(program_dac_sfq(dac, flood, +1, c.sfq.jtl).applied);
        sfq_neg.values.push_back(program_dac_sfq(dac, flood, -1, c.sfq.jtl).applied);
    }

    rec.metadata = {{"window", {{"n_min", window.n_min}, {"n_max", window.n_max}, {"span", window.span()}}}};
    if (digits.size() >= 2 && *std::min_element(digits.begin(), digits.end()) !=
                                   *std::max_element(digits.begin(), digits.end())) {
        const auto fp = fit_line(rec.sweep.values, pos.values);
        const auto fn = fit_line(rec.sweep.values, neg.values);
        const bool constant_sum =
            std::all_of(sum.values.begin(), sum.values.end(), [&](double v) { return v == sum.values.front(); });
        rec.metadata["positive_fit"] = {{"slope", fp.slope}, {"intercept", fp.intercept}, {"residual_rms", fp.residual_rms}};
        rec.metadata["negative_fit"] = {{"slope", fn.slope}, {"intercept", fn.intercept}, {"residual_rms", fn.residual_rms}};
        rec.metadata["constant_sum"] = constant_sum;
    }
    return rec;
}

/// f01 against external flux, from the conventional flux line and from DAC
/// digits at a fixed global bias.
inline ExperimentRecord run_spectroscopy(const ScenarioConfig& c, std::uint64_t seed) {
    auto rec = detail::start_record("spectroscopy", c, seed);
    const auto fluxes = c.sweep ? c.sweep->resolve() : SweepSpec{{}, 0.45, 0.55, 15}.resolve();
    const auto blank = make_dac(c.device, c.dac.usable_fraction);
    const auto digits = !c.qubit.include_dac_path ? std::vector<int>{}
                        : c.qubit.dac_digits.empty() ? detail::symmetric_digits(10, blank.window)
                                                     : c.qubit.dac_digits;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    rec.sweep = {"phi_ext", "Phi0", {}};
    auto& f = rec.add("f01", "GHz");
    auto& path = rec.add("control_path", "");
    auto& bias = rec.add("global_bias", "Phi0");
    auto& dig = rec.add("dac_digit", "");
    auto emit = [&](double phi, double global, int digit, double code) {
        double v = f01(c.fluxonium, phi);
        if (c.noise.frequency_sigma_ghz > 0.0) v += c.noise.frequency_sigma_ghz * noise(rng);
        rec.sweep.values.push_back(phi);
        f.values.push_back(v);
        path.values.push_back(code);
        bias.values.push_back(global);
        dig.values.push_back(digit);
    };
    for (double phi : fluxes) emit(phi, phi, 0, kConventionalPath);
    for (int d : digits) {
        const auto dac = detail::reset_to(c, d);
        emit(total_flux(c.qubit.global_bias_phi0, dac), c.qubit.global_bias_phi0, d, kDacPath);
    }
    rec.metadata = {{"path_codes", detail::path_codes()},
                    {"step_mPhi0", step_mphi0(c.device)},
                    {"grid_points", c.fluxonium.grid_points}};
    return rec;
}

/// Flux sensitivity, Ramsey and echo dephasing rates and T1 near the sweet
/// spot, for both control paths.
inline ExperimentRecord run_coherence(const ScenarioConfig& c, std::uint64_t seed) {
    auto rec = detail::start_record("coherence", c, seed);
    const auto fluxes = c.sweep ? c.sweep->resolve() : SweepSpec{{}, 0.47, 0.53, 25}.resolve();
    const auto blank = make_dac(c.device, c.dac.usable_fraction);
    const auto digits = !c.qubit.include_dac_path ? std::vector<int>{}
                        : c.qubit.dac_digits.empty() ? detail::symmetric_digits(6, blank.window)
                                                     : c.qubit.dac_digits;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    T1Sampler t1_default(c.noise.t1, rng());
    T1Sampler t1_conventional(T1Model::conventional_bias(), rng());
    T1Sampler t1_dac(T1Model::dac_control(), rng());

    rec.sweep = {"phi_ext", "Phi0", {}};
    auto& f = rec.add("f01", "GHz");
    auto& sens = rec.add("sensitivity", "GHz/Phi0");
    auto& gr = rec.add("gamma_ramsey", "1/us");
    auto& ge = rec.add("gamma_echo", "1/us");
    auto& t1 = rec.add("t1", "us");
    auto& path = rec.add("control_path", "");
    auto& dig = rec.add("dac_digit", "");
    auto emit = [&](double phi, int digit, double code) {
        const double d = flux_sensitivity(c.fluxonium, phi);
        auto rates = dephasing_rates(c.noise.a_phi_ramsey_uphi0, c.noise.a_phi_echo_uphi0, d, c.dephasing);
        if (c.noise.rate_relative_sigma > 0.0) {
            rates.gamma_ramsey_per_us *= 1.0 + c.noise.rate_relative_sigma * noise(rng);
            rates.gamma_echo_per_us *= 1.0 + c.noise.rate_relative_sigma * noise(rng);
        }
        double t1_us = 0.0;
        if (!c.noise.t1_by_path)
            t1_us = t1_default();
        else
            t1_us = code == kDacPath ? t1_dac() : t1_conventional();
        rec.sweep.values.push_back(phi);
        f.values.push_back(f01(c.fluxonium, phi));
        sens.values.push_back(d);
        gr.values.push_back(rates.gamma_ramsey_per_us);
        ge.values.push_back(rates.gamma_echo_per_us);
        t1.values.push_back(t1_us);
        path.values.push_back(code);
        dig.values.push_back(digit);
    };
    for (double phi : fluxes) emit(phi, 0, kConventionalPath);
    for (int d : digits) emit(total_flux(c.qubit.global_bias_phi0, detail::reset_to(c, d)), d, kDacPath);

    double mean = 0.0, var = 0.0;
    for (double v : t1.values) mean += v;
    mean /= static_cast<double>(t1.values.size());
    for (double v : t1.values) var += (v - mean) * (v - mean);
    const double sd = t1.values.size() > 1 ? std::sqrt(var / static_cast<double>(t1.values.size() - 1)) : 0.0;
    rec.metadata = {{"path_codes", detail::path_codes()},
                    {"sensitivity_convention", "df01/dPhi_ext in GHz/Phi0; Gamma = c * 2 pi |D| A_Phi"},
                    {"prefactor_ramsey", dephasing_prefactor(DephasingKind::Ramsey, c.dephasing)},
                    {"prefactor_echo", dephasing_prefactor(DephasingKind::Echo, c.dephasing)},
                    {"t1_mean_us", mean},
                    {"t1_std_us", sd}};
    return rec;
}

struct DemuxCheckReport {
    bool bijection = false;
    bool isolation = false;
    int depth = 0;
    int schedules = 0;
    nlohmann::json details = nlohmann::json::object();

    bool passed() const { return bijection && isolation; }
};

/// Exhaustive select-word bijection for a tree of the given depth, plus
/// routing isolation over random schedules on an 8-DAC array: the final
/// digit of every DAC equals the one obtained by applying only its own
/// entries.
inline DemuxCheckReport demux_check(int depth, std::uint64_t seed, int schedules = 100,
                                    const DeviceParams& device = builtin_presets().front().params) {
    DemuxCheckReport rep;
    rep.depth = depth;
    rep.schedules = schedules;
    const DemuxTree tree(depth);
    std::vector<int> hits(static_cast<std::size_t>(tree.port_count()), 0);
    for (int p = 0; p < tree.port_count(); ++p) {
        const int port = demux_route(tree, tree.select_for(p));
        if (port >= 0 && port < tree.port_count()) ++hits[static_cast<std::size_t>(port)];
    }
    rep.bijection = std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });

    const DemuxTree array_tree(3);
    std::mt19937_64 rng(seed);
    const std::vector<DacState> dacs(static_cast<std::size_t>(array_tree.port_count()), make_dac(device));
    std::uniform_int_distribution<int> port_dist(0, array_tree.port_count() - 1);
    std::uniform_int_distribution<int> count_dist(0, 12);
    std::uniform_int_distribution<int> len_dist(1, 24);
    int failures = 0;
    for (int s = 0; s < schedules; ++s) {
        std::vector<ScheduleEntry> schedule;
        const int len = len_dist(rng);
        for (int i = 0; i < len; ++i)
            schedule.push_back({array_tree.select_for(port_dist(rng)), (rng() & 1) ? 1 : -1, count_dist(rng)});
        const auto full = program_array(dacs, array_tree, schedule);
        for (int p = 0; p < array_tree.port_count(); ++p) {
            const auto k = static_cast<std::size_t>(p);
            DacState solo = dacs[k];
            int requested = 0;
            for (const auto& e : schedule) {
                if (demux_route(array_tree, e.select) != p) continue;
                solo = program_dac_sfq(solo, e.count, e.polarity).state;
                requested += e.count;
            }
            if (solo.digit != full.dacs[k].digit) ++failures;
            if (full.applied[k] + full.dropped[k] != requested) ++failures;
        }
    }
    rep.isolation = failures == 0;
    rep.details = {{"ports", tree.port_count()},
                   {"select_lines", tree.select_lines()},
                   {"array_dacs", array_tree.port_count()},
                   {"isolation_failures", failures}};
    return rep;
}

inline nlohmann::json to_json(const DemuxCheckReport& r) {
    return {{"depth", r.depth},
            {"bijection", r.bijection},
            {"isolation", r.isolation},
            {"schedules", r.schedules},
            {"passed", r.passed()},
            {"details", r.details}};
}

struct CalibrationOptions {
    FluxoniumParams initial_guess;  // grid settings are taken from the record
    FluxoniumFitOptions fluxonium;
};

/// Flux on the sweet-spot branch selected by `side` (+1: above 0.5 Phi0)
/// at which f01 equals the target.
inline double invert_f01(const FluxoniumParams& p, double target_ghz, int side) {
    double lo = 0.5, hi = 0.5 + 0.5 * side;
    const double f_lo = f01(p, lo);
    const double f_hi = f01(p, hi);
    if (target_ghz <= f_lo) return lo;
    if (target_ghz > f_hi) throw OutOfRange("f01 target above the branch maximum");
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f01(p, mid) < target_ghz ? lo : hi) = mid;
        if (std::abs(hi - lo) < 1e-13) break;
    }
    return 0.5 * (lo + hi);
}

namespace detail {

inline FluxoniumParams record_fluxonium(const ExperimentRecord& r) {
    FluxoniumParams p;
    const auto it = r.config.find("fluxonium");
    if (it != r.config.end()) {
        p.e_c_ghz = it->value("e_c_GHz", p.e_c_ghz);
        p.e_j_ghz = it->value("e_j_GHz", p.e_j_ghz);
        p.e_l_ghz = it->value("e_l_GHz", p.e_l_ghz);
        p.grid_points = it->value("grid_points", p.grid_points);
        p.grid_halfwidth_rad = it->value("grid_halfwidth_rad", p.grid_halfwidth_rad);
    }
    return p;
}

inline DephasingModel record_dephasing(const ExperimentRecord& r) {
    DephasingModel m;
    const auto it = r.config.find("dephasing");
    if (it != r.config.end()) {
        m.omega_ir_rad_s = it->value("omega_ir_rad_s", m.omega_ir_rad_s);
        m.t_measure_us = it->value("t_measure_us", m.t_measure_us);
    }
    return m;
}

}  // namespace detail

/// Runs the fits matching the record's scenario and returns
/// {"scenario", "fits": {name: FitResult}}.
inline nlohmann::json calibrate_record(const ExperimentRecord& r, const CalibrationOptions& opt = {}) {
    nlohmann::json fits = nlohmann::json::object();
    const auto n = r.sweep.values.size();
    if (r.scenario == "plateau") {
        std::vector<StepPoint> pts;
        const auto& dd = r.column("delta_digit").values;
        const auto& df = r.column("delta_flux").values;
        for (std::size_t i = 0; i < n; ++i) pts.push_back({dd[i], df[i] * 1e-3});
        fits["dac_step"] = to_json(fit_dac_step(pts));
    } else if (r.scenario == "sfq-program") {
        std::vector<StepPoint> pts;
        const auto& digit = r.column("digit").values;
        const auto& phi = r.column("phi_qubit").values;
        for (std::size_t i = 0; i < n; ++i) pts.push_back({digit[i], phi[i]});
        fits["dac_step"] = to_json(fit_dac_step(pts));
    } else if (r.scenario == "margins") {
        for (const char* name : {"positive_margin", "negative_margin"}) {
            const auto f = fit_line(r.sweep.values, r.column(name).values);
            FitResult fr;
            fr.parameters = {{"slope", f.slope, "digit/digit", f.slope_std_error},
                             {"intercept", f.intercept, "digit", f.intercept_std_error}};
            fr.residual_rms = f.residual_rms;
            fr.residual_unit = "digit";
            fr.converged = true;
            fits[name] = to_json(fr);
        }
    } else if (r.scenario == "spectroscopy") {
        const auto& phi = r.sweep.values;
        const auto& f = r.column("f01").values;
        const auto& path = r.column("control_path").values;
        const auto& digit = r.column("dac_digit").values;
        std::vector<SpectroscopyPoint> conventional;
        for (std::size_t i = 0; i < n; ++i)
            if (path[i] == kConventionalPath) conventional.push_back({phi[i], f[i]});
        auto guess = opt.initial_guess;
        const auto from_record = detail::record_fluxonium(r);
        guess.grid_points = from_record.grid_points;
        guess.grid_halfwidth_rad = from_record.grid_halfwidth_rad;
        const auto fr = fit_fluxonium(conventional, guess, opt.fluxonium);
        fits["fluxonium"] = to_json(fr);
        // DAC rows: invert the fitted f01 to flux on the branch given by the
        // digit sign; digit 0 sits on the sweet spot and carries no slope
        // information.
        const auto fitted = fitted_params(fr, guess);
        std::vector<StepPoint> steps;
        for (std::size_t i = 0; i < n; ++i) {
            if (path[i] != kDacPath || digit[i] == 0.0) continue;
            const int side = digit[i] > 0 ? 1 : -1;
            steps.push_back({digit[i], invert_f01(fitted, f[i], side)});
        }
        if (steps.size() >= 2) fits["dac_step"] = to_json(fit_dac_step(steps));
    } else if (r.scenario == "coherence") {
        const auto model = detail::record_dephasing(r);
        const auto& d = r.column("sensitivity").values;
        for (auto [name, column, kind] : {std::tuple{"flux_noise_ramsey", "gamma_ramsey", DephasingKind::Ramsey},
                                          std::tuple{"flux_noise_echo", "gamma_echo", DephasingKind::Echo}}) {
            const auto& g = r.column(column).values;
            std::vector<DephasingPoint> pts;
            for (std::size_t i = 0; i < n; ++i) pts.push_back({d[i], g[i]});
            fits[name] = to_json(fit_flux_noise(pts, kind, {model, false}));
        }
    } else {
        throw ConfigError("calibrate: unsupported scenario '" + r.scenario + "'");
    }
    return {{"scenario", r.scenario}, {"source_seed", r.rng_seed}, {"fits", fits}};
}

}  // namespace fluxdac
