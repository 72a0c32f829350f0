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

#include "fluxdac/errors.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace fluxdac {

/// Piecewise-linear drive in dimensionless time. Before the first breakpoint
/// the waveform holds its first value, after the last one its last value
/// (the baseline it returns to).
class PulseWaveform {
public:
    struct Point {
        double time;
        double value;
    };

    PulseWaveform() : points_{{0.0, 0.0}} {}

    explicit PulseWaveform(std::vector<Point> points) : points_(std::move(points)) {
        if (points_.empty()) throw InvalidParameter("waveform", "needs at least one breakpoint");
        for (std::size_t i = 1; i < points_.size(); ++i)
            if (!(points_[i].time > points_[i - 1].time))
                throw InvalidParameter("waveform", "breakpoint times must be strictly increasing");
    }

    static PulseWaveform constant(double value) { return PulseWaveform({{0.0, value}}); }

    /// Trapezoidal pulse: baseline -> baseline + amplitude over `rise`, held
    /// for `hold`, back to baseline over `fall`.
    static PulseWaveform square_pulse(double baseline, double amplitude, double rise, double hold, double fall,
                                      double delay = 0.0) {
        return pulse_train(baseline, std::vector<double>{amplitude}, rise, hold, fall, 0.0, delay);
    }

    /// Train of trapezoidal pulses separated by `gap` at baseline.
    static PulseWaveform pulse_train(double baseline, std::span<const double> amplitudes, double rise, double hold,
                                     double fall, double gap, double delay = 0.0) {
        if (rise <= 0.0 || fall <= 0.0 || hold < 0.0 || gap < 0.0 || delay < 0.0)
            throw InvalidParameter("waveform", "rise/fall must be positive; hold, gap, delay non-negative");
        std::vector<Point> pts{{0.0, baseline}};
        double t = delay;
        for (std::size_t i = 0; i < amplitudes.size(); ++i) {
            if (i > 0) t += gap;
            if (t > pts.back().time) pts.push_back({t, baseline});
            t += rise;
            pts.push_back({t, baseline + amplitudes[i]});
            if (hold > 0.0) {
                t += hold;
                pts.push_back({t, baseline + amplitudes[i]});
            }
            t += fall;
            pts.push_back({t, baseline});
        }
        return PulseWaveform(std::move(pts));
    }

    double value(double t) const {
        if (t <= points_.front().time) return points_.front().value;
        if (t >= points_.back().time) return points_.back().value;
        auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                                   [](double x, const Point& p) { return x < p.time; });
        auto lo = hi - 1;
        const double w = (t - lo->time) / (hi->time - lo->time);
        return lo->value + w * (hi->value - lo->value);
    }

    double start_time() const { return points_.front().time; }
    double end_time() const { return points_.back().time; }
    double baseline() const { return points_.back().value; }
    const std::vector<Point>& points() const { return points_; }

    /// If the waveform is constant on [t, T) for some T > t, returns T
    /// (infinity past the last breakpoint).
    std::optional<double> constant_until(double t) const {
        if (t >= points_.back().time) return std::numeric_limits<double>::infinity();
        if (t < points_.front().time) return points_.front().time;
        auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                                   [](double x, const Point& p) { return x < p.time; });
        auto lo = hi - 1;
        if (lo->value == hi->value) return hi->time;
        return std::nullopt;
    }

    PulseWaveform shifted(double offset) const {
        auto pts = points_;
        for (auto& p : pts) p.value += offset;
        return PulseWaveform(std::move(pts));
    }

private:
    std::vector<Point> points_;
};

}  // namespace fluxdac
