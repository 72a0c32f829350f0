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

// Event-level model of the SFQ control chain: dc/SFQ conversion of trigger
// pulses, JTL propagation with digit-dependent margins, SFQ programming of a
// DAC and binary DEMUX-tree addressing of DAC arrays.

#include "fluxdac/dac.hpp"
#include "fluxdac/errors.hpp"
#include "fluxdac/waveform.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fluxdac {

struct SfqPulse {
    int polarity = 1;
    double time = 0.0;  // ticks
    std::optional<int> target_port;
    bool delivered = true;  // false when dropped for lack of margin
};

struct MarginProfile {
    int digit = 0;
    int positive_margin = 0;
    int negative_margin = 0;
};

/// Bias interval (mA) inside which the dc/SFQ converter switches.
struct ConverterMargin {
    double min_bias_ma = 0.5;
    double max_bias_ma = 1.5;

    bool contains(double bias_ma) const { return bias_ma >= min_bias_ma && bias_ma <= max_bias_ma; }
};

struct JtlConfig {
    int stages = 4;
    double delay_per_stage = 1.0;  // ticks
};

class DemuxTree {
public:
    explicit DemuxTree(int depth) : depth_(depth) {
        if (depth < 0 || depth > 30) throw InvalidParameter("depth", "must lie in [0, 30]");
    }
    int depth() const { return depth_; }
    int select_lines() const { return depth_; }
    int port_count() const { return 1 << depth_; }

    /// Select word (first stage = most significant bit) that reaches `port`.
    std::string select_for(int port) const {
        if (port < 0 || port >= port_count()) throw OutOfRange("port " + std::to_string(port) + " outside tree");
        std::string s(static_cast<std::size_t>(depth_), '0');
        for (int i = 0; i < depth_; ++i)
            if (port & (1 << (depth_ - 1 - i))) s[static_cast<std::size_t>(i)] = '1';
        return s;
    }

private:
    int depth_;
};

inline MarginProfile margins(const DacState& dac) {
    if (!dac.window.contains(dac.digit)) throw WindowOverflow(dac.digit, dac.window.n_min, dac.window.n_max);
    return {dac.digit, dac.window.n_max - dac.digit, dac.digit - dac.window.n_min};
}

/// One SFQ pulse per trigger excursion beyond +/-threshold, emitted at the
/// crossing time with the sign of the excursion. Nothing is emitted while
/// the converter bias sits outside its operating margin.
inline std::vector<SfqPulse> dc_sfq_convert(const PulseWaveform& trigger, double bias_ma, double threshold_ma,
                                            const ConverterMargin& margin = {}) {
    if (!(threshold_ma > 0.0)) throw InvalidParameter("threshold_mA", "must be positive");
    std::vector<SfqPulse> out;
    if (!margin.contains(bias_ma)) return out;
    const auto& pts = trigger.points();
    auto region = [&](double v) { return v >= threshold_ma ? 1 : (v <= -threshold_ma ? -1 : 0); };
    int current = region(pts.front().value);
    if (current != 0) out.push_back({current, pts.front().time, std::nullopt, true});
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const auto& a = pts[i - 1];
        const auto& b = pts[i];
        // A linear segment visits the regions in monotone order; walk the
        // threshold levels it crosses.
        const int target = region(b.value);
        while (current != target) {
            const int step = target > current ? 1 : -1;
            const int next = current + step;
            // Level crossed moving from `current` to `next`.
            double level;
            if (step > 0)
                level = next == 1 ? threshold_ma : -threshold_ma;
            else
                level = next == -1 ? -threshold_ma : threshold_ma;
            const double w = (level - a.value) / (b.value - a.value);
            const double t = a.time + w * (b.time - a.time);
            if (next != 0) out.push_back({next, t, std::nullopt, true});
            current = next;
        }
    }
    return out;
}

/// Delays every pulse by stages * delay and marks as dropped the pulses
/// whose polarity has no remaining margin at the downstream DAC. The margin
/// profile is updated as delivered pulses change the downstream digit.
inline std::vector<SfqPulse> jtl_propagate(std::vector<SfqPulse> pulses, const JtlConfig& jtl,
                                           MarginProfile downstream) {
    if (jtl.stages < 0) throw InvalidParameter("stages", "must be non-negative");
    const double delay = jtl.stages * jtl.delay_per_stage;
    for (auto& p : pulses) {
        p.time += delay;
        if (!p.delivered) continue;
        int& remaining = p.polarity > 0 ? downstream.positive_margin : downstream.negative_margin;
        if (remaining <= 0) {
            p.delivered = false;
            continue;
        }
        --remaining;
        (p.polarity > 0 ? downstream.negative_margin : downstream.positive_margin) += 1;
        downstream.digit += p.polarity;
    }
    return pulses;
}

struct SfqProgramOutcome {
    DacState state;
    int applied = 0;
    int dropped = 0;
};

/// Sends `count` SFQ pulses of one polarity through the JTL into the DAC.
inline SfqProgramOutcome program_dac_sfq(const DacState& dac, int count, int polarity, const JtlConfig& jtl = {}) {
    require_polarity(polarity);
    if (count < 0) throw InvalidParameter("count", "must be non-negative");
    std::vector<SfqPulse> train;
    train.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) train.push_back({polarity, static_cast<double>(i), std::nullopt, true});
    const auto arrived = jtl_propagate(std::move(train), jtl, margins(dac));

    SfqProgramOutcome out{dac, 0, 0};
    for (const auto& p : arrived) (p.delivered ? out.applied : out.dropped) += 1;
    if (count == 0) return out;
    ProgramEvent e;
    e.kind = "sfq_train";
    e.polarity = polarity;
    e.pulses_requested = count;
    e.pulses_applied = out.applied;
    e.mode = "sfq";
    e.digit_before = dac.digit;
    out.state.digit = dac.digit + polarity * out.applied;
    e.digit_after = out.state.digit;
    out.state.log(std::move(e));
    return out;
}

/// Port addressed by a select word of '0'/'1' characters, first stage first.
inline int demux_route(const DemuxTree& tree, std::string_view select, const SfqPulse& pulse = {}) {
    (void)pulse;  // routing is independent of the pulse itself
    if (static_cast<int>(select.size()) != tree.depth())
        throw DimensionMismatch("select word has " + std::to_string(select.size()) + " bits, tree depth is " +
                                std::to_string(tree.depth()));
    int port = 0;
    for (char c : select) {
        if (c != '0' && c != '1') throw InvalidParameter("select", "must contain only '0' and '1'");
        port = (port << 1) | (c == '1' ? 1 : 0);
    }
    return port;
}

struct ScheduleEntry {
    std::string select;
    int polarity = 1;
    int count = 0;
};

struct ArrayResult {
    std::vector<DacState> dacs;
    std::vector<int> applied;  // per DAC, summed over entries
    std::vector<int> dropped;
};

/// Applies each schedule entry to the DAC its select word addresses.
inline ArrayResult program_array(const std::vector<DacState>& dacs, const DemuxTree& tree,
                                 const std::vector<ScheduleEntry>& schedule, const JtlConfig& jtl = {}) {
    if (static_cast<int>(dacs.size()) != tree.port_count())
        throw DimensionMismatch("array has " + std::to_string(dacs.size()) + " DACs, tree has " +
                                std::to_string(tree.port_count()) + " ports");
    ArrayResult r{dacs, std::vector<int>(dacs.size(), 0), std::vector<int>(dacs.size(), 0)};
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& entry = schedule[i];
        try {
            SfqPulse probe{entry.polarity, 0.0, std::nullopt, true};
            const int port = demux_route(tree, entry.select, probe);
            auto out = program_dac_sfq(r.dacs[static_cast<std::size_t>(port)], entry.count, entry.polarity, jtl);
            r.dacs[static_cast<std::size_t>(port)] = std::move(out.state);
            r.applied[static_cast<std::size_t>(port)] += out.applied;
            r.dropped[static_cast<std::size_t>(port)] += out.dropped;
        } catch (const InvalidParameter& e) {
            throw InvalidParameter("schedule[" + std::to_string(i) + "]", e.what());
        } catch (const DimensionMismatch& e) {
            throw DimensionMismatch("schedule[" + std::to_string(i) + "]: " + e.what());
        }
    }
    return r;
}

/// Parses [{"select": "101", "polarity": 1, "count": 12}, ...].
inline std::vector<ScheduleEntry> parse_schedule(const nlohmann::json& doc) {
    if (!doc.is_array()) throw ConfigError("schedule: expected an array");
    std::vector<ScheduleEntry> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& e = doc[i];
        const std::string path = "schedule[" + std::to_string(i) + "]";
        if (!e.is_object()) throw ConfigError(path + ": expected an object");
        if (!e.contains("select") || !e["select"].is_string()) throw ConfigError(path + ".select: missing string");
        if (!e.contains("count") || !e["count"].is_number_integer())
            throw ConfigError(path + ".count: missing integer");
        ScheduleEntry s;
        s.select = e["select"].get<std::string>();
        s.polarity = e.value("polarity", 1);
        s.count = e["count"].get<int>();
        if (s.polarity != 1 && s.polarity != -1) throw ConfigError(path + ".polarity: must be +1 or -1");
        if (s.count < 0) throw ConfigError(path + ".count: must be non-negative");
        out.push_back(std::move(s));
    }
    return out;
}

inline nlohmann::json array_report(const ArrayResult& r) {
    nlohmann::json dacs = nlohmann::json::array();
    for (std::size_t i = 0; i < r.dacs.size(); ++i)
        dacs.push_back({{"port", i},
                        {"digit", r.dacs[i].digit},
                        {"applied", r.applied[i]},
                        {"dropped", r.dropped[i]},
                        {"positive_margin", margins(r.dacs[i]).positive_margin},
                        {"negative_margin", margins(r.dacs[i]).negative_margin}});
    return {{"dacs", dacs}};
}

}  // namespace fluxdac
