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

// Parameter extraction: fluxonium energies from f01 spectroscopy, DAC step
// from qubit flux vs digit, 1/f flux-noise amplitude from dephasing rates.

#include "fluxdac/errors.hpp"
#include "fluxdac/fluxonium.hpp"
#include "fluxdac/nelder_mead.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fluxdac {

struct FitParameter {
    std::string name;
    double value = 0.0;
    std::string unit;
    double std_error = 0.0;
};

struct FitResult {
    std::vector<FitParameter> parameters;
    double residual_rms = 0.0;
    std::string residual_unit;
    int iterations = 0;
    bool converged = false;

    const FitParameter& parameter(std::string_view name) const {
        for (const auto& p : parameters)
            if (p.name == name) return p;
        throw OutOfRange("fit result has no parameter '" + std::string(name) + "'");
    }
    double value(std::string_view name) const { return parameter(name).value; }
};

inline nlohmann::json to_json(const FitResult& r) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : r.parameters)
        params.push_back({{"name", p.name}, {"value", p.value}, {"unit", p.unit}, {"std_error", p.std_error}});
    return {{"parameters", params},
            {"residual_rms", r.residual_rms},
            {"residual_unit", r.residual_unit},
            {"iterations", r.iterations},
            {"converged", r.converged}};
}

struct SpectroscopyPoint {
    double phi_ext_phi0 = 0.0;
    double f01_ghz = 0.0;
};

struct FluxoniumFitOptions {
    double tolerance = 1e-9;
    int restarts = 3;
    double restart_spread = 0.3;
    int max_evaluations = 3000;  // per simplex run
    std::uint64_t seed = 1;
    bool fix_e_c = false;
    bool fix_e_j = false;
    bool fix_e_l = false;
};

namespace detail {

// Sum of squared f01 residuals. Level energies from the previous call seed
// the eigensolver for the next one.
class SpectroscopyObjective {
public:
    explicit SpectroscopyObjective(const std::vector<SpectroscopyPoint>& points)
        : points_(points), cache_(points.size()) {}

    double operator()(const FluxoniumParams& p) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < points_.size(); ++i) {
            cache_[i] = absolute_levels(p, points_[i].phi_ext_phi0, 2, cache_[i]);
            const double r = cache_[i][1] - cache_[i][0] - points_[i].f01_ghz;
            ssr += r * r;
        }
        return ssr;
    }

private:
    const std::vector<SpectroscopyPoint>& points_;
    std::vector<std::vector<double>> cache_;
};

}  // namespace detail

/// Least-squares fit of (E_C, E_J, E_L) to f01 data. Free energies are
/// optimized in log space; the best of the initial run and `restarts`
/// randomized starts is returned. Standard errors come from the curvature
/// of the residual sum along each parameter axis.
inline FitResult fit_fluxonium(const std::vector<SpectroscopyPoint>& points, const FluxoniumParams& initial_guess,
                               const FluxoniumFitOptions& opt = {}) {
    if (points.size() < 4) throw InvalidParameter("points", "need at least 4 spectroscopy points");
    bool spans = false;
    for (const auto& pt : points) {
        if (!std::isfinite(pt.phi_ext_phi0) || !std::isfinite(pt.f01_ghz))
            throw InvalidParameter("points", "non-finite value");
        if (pt.phi_ext_phi0 != points.front().phi_ext_phi0) spans = true;
    }
    if (!spans) throw DegenerateData("all spectroscopy points share one flux value");
    validate(initial_guess);

    const std::array<double FluxoniumParams::*, 3> fields = {&FluxoniumParams::e_c_ghz, &FluxoniumParams::e_j_ghz,
                                                             &FluxoniumParams::e_l_ghz};
    const std::array<const char*, 3> names = {"E_C", "E_J", "E_L"};
    const std::array<bool, 3> fixed = {opt.fix_e_c, opt.fix_e_j, opt.fix_e_l};
    std::vector<int> free;
    for (int i = 0; i < 3; ++i) {
        if (fixed[i]) continue;
        if (!(initial_guess.*fields[i] > 0.0)) throw InvalidParameter(names[i], "initial guess must be positive");
        free.push_back(i);
    }

    auto unpack = [&](const std::vector<double>& x) {
        FluxoniumParams p = initial_guess;
        for (std::size_t k = 0; k < free.size(); ++k) p.*fields[free[k]] = std::exp(x[k]);
        return p;
    };
    detail::SpectroscopyObjective ssr(points);
    auto objective = [&](const std::vector<double>& x) {
        try {
            return ssr(unpack(x));
        } catch (const InvalidParameter&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    std::vector<double> x0;
    for (int i : free) x0.push_back(std::log(initial_guess.*fields[i]));

    NelderMeadOptions nm;
    nm.tolerance = opt.tolerance;
    nm.max_evaluations = opt.max_evaluations;
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> jitter(-opt.restart_spread, opt.restart_spread);

    NelderMeadResult best;
    int iterations = 0;
    for (int run = 0; run <= opt.restarts; ++run) {
        std::vector<double> start = x0;
        if (run > 0)
            for (double& v : start) v += std::log1p(jitter(rng));
        auto r = nelder_mead(objective, start, nm);
        iterations += r.iterations;
        if (r.value < best.value) best = std::move(r);
    }
    if (!std::isfinite(best.value)) throw ConvergenceError("fluxonium fit found no admissible parameters");

    const FluxoniumParams fit = unpack(best.x);
    const std::size_t m = points.size();
    const double dof = static_cast<double>(m > free.size() ? m - free.size() : 1);
    const double s2 = best.value / dof;

    FitResult result;
    result.residual_rms = std::sqrt(best.value / static_cast<double>(m));
    result.residual_unit = "GHz";
    result.iterations = iterations;
    result.converged = best.converged;
    for (int i = 0; i < 3; ++i) {
        FitParameter p{names[i], fit.*fields[i], "GHz", 0.0};
        if (!fixed[i]) {
            const double h = 1e-3 * p.value;
            FluxoniumParams up = fit, down = fit;
            up.*fields[i] += h;
            down.*fields[i] -= h;
            const double curvature = (ssr(up) - 2.0 * best.value + ssr(down)) / (h * h);
            p.std_error = curvature > 0.0 ? std::sqrt(2.0 * s2 / curvature) : std::numeric_limits<double>::infinity();
        }
        result.parameters.push_back(std::move(p));
    }
    return result;
}

inline FluxoniumParams fitted_params(const FitResult& r, FluxoniumParams base = {}) {
    base.e_c_ghz = r.value("E_C");
    base.e_j_ghz = r.value("E_J");
    base.e_l_ghz = r.value("E_L");
    return base;
}

/// Ordinary least-squares line y = intercept + slope x with standard errors.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_std_error = 0.0;
    double intercept_std_error = 0.0;
    double residual_rms = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionMismatch("fit_line: x and y differ in length");
    const std::size_t m = x.size();
    if (m == 0) throw DegenerateData("fit_line: no points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw DegenerateData("fit_line: need at least 2 distinct x values");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ssr += r * r;
    }
    const double s2 = m > 2 ? ssr / static_cast<double>(m - 2) : 0.0;
    f.slope_std_error = std::sqrt(s2 / sxx);
    f.intercept_std_error = std::sqrt(s2 * (1.0 / static_cast<double>(m) + mx * mx / sxx));
    f.residual_rms = std::sqrt(ssr / static_cast<double>(m));
    return f;
}

struct StepPoint {
    double digit = 0.0;
    double phi_qubit_phi0 = 0.0;
};

/// Least-squares line through (digit, qubit flux). Reports the slope as a
/// step in mPhi0 and the intercept in Phi0.
inline FitResult fit_dac_step(const std::vector<StepPoint>& points) {
    std::vector<double> x, y;
    for (const auto& p : points) {
        x.push_back(p.digit);
        y.push_back(p.phi_qubit_phi0);
    }
    if (points.empty()) throw DegenerateData("no flux-vs-digit points");
    LineFit f;
    try {
        f = fit_line(x, y);
    } catch (const DegenerateData&) {
        throw DegenerateData("need at least 2 distinct digits");
    }
    FitResult result;
    result.parameters = {{"step", f.slope * 1e3, "mPhi0", f.slope_std_error * 1e3},
                         {"intercept", f.intercept, "Phi0", f.intercept_std_error}};
    result.residual_rms = f.residual_rms;
    result.residual_unit = "Phi0";
    result.converged = true;
    return result;
}

struct DephasingPoint {
    double sensitivity_ghz_per_phi0 = 0.0;
    double gamma_per_us = 0.0;
};

struct FluxNoiseFitOptions {
    DephasingModel model;
    bool fit_offset = false;  // adds a flux-independent rate to the fit
};

/// Least-squares fit of Gamma = c * 2 pi |D| A_Phi (+ offset). Without an
/// offset the line goes through the origin; the model offset is ignored.
inline FitResult fit_flux_noise(const std::vector<DephasingPoint>& points, DephasingKind kind,
                                const FluxNoiseFitOptions& opt = {}) {
    const std::size_t m = points.size();
    if (m < 3) throw InvalidParameter("points", "need at least 3 dephasing points");
    const double k = dephasing_prefactor(kind, opt.model) * kTwoPi * 1e-3;
    std::vector<double> x(m), y(m);
    bool distinct = false;
    for (std::size_t i = 0; i < m; ++i) {
        x[i] = k * std::abs(points[i].sensitivity_ghz_per_phi0);
        y[i] = points[i].gamma_per_us;
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidParameter("points", "non-finite value");
        if (x[i] != x[0]) distinct = true;
    }
    if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; }))
        throw DegenerateData("all flux sensitivities are zero");
    if (!distinct) throw DegenerateData("need at least 2 distinct |sensitivity| values");

    double a = 0.0, b = 0.0, se_a = 0.0, se_b = 0.0, ssr = 0.0;
    if (!opt.fit_offset) {
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            sxx += x[i] * x[i];
            sxy += x[i] * y[i];
        }
        a = sxy / sxx;
        for (std::size_t i = 0; i < m; ++i) ssr += (y[i] - a * x[i]) * (y[i] - a * x[i]);
        se_a = std::sqrt(ssr / static_cast<double>(m - 1) / sxx);
    } else {
        const auto f = fit_line(x, y);
        a = f.slope;
        b = f.intercept;
        se_a = f.slope_std_error;
        se_b = f.intercept_std_error;
        for (std::size_t i = 0; i < m; ++i) ssr += (y[i] - b - a * x[i]) * (y[i] - b - a * x[i]);
    }

    FitResult result;
    result.parameters.push_back({"A_phi", a, "uPhi0", se_a});
    if (opt.fit_offset) result.parameters.push_back({"offset", b, "1/us", se_b});
    result.residual_rms = std::sqrt(ssr / static_cast<double>(m));
    result.residual_unit = "1/us";
    result.converged = true;
    return result;
}

}  // namespace fluxdac
