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

// Continuous physics of the flux-storage rf-SQUID: tilted washboard
// potential, metastable wells, stability thresholds and RCSJ transients.
// All phases are in radians (phi = 2*pi*Phi/Phi0), energies in units of E_J
// and time in units of 1/omega_c.

#include "fluxdac/errors.hpp"
#include "fluxdac/units.hpp"
#include "fluxdac/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fluxdac {

struct MetastableState {
    int index_n = 0;
    double phi_min = 0.0;
    double energy = 0.0;     // U/E_J at the minimum
    double curvature = 0.0;  // d2(U/E_J)/dphi2 at the minimum
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> phases;
    std::vector<double> velocities;
    std::optional<MetastableState> final_state;
    bool diverged = false;
};

inline double potential(double phi, double phi_ext, double beta_l) {
    const double d = phi - phi_ext;
    return d * d / (2.0 * beta_l) - std::cos(phi);
}

inline double potential_gradient(double phi, double phi_ext, double beta_l) {
    return std::sin(phi) + (phi - phi_ext) / beta_l;
}

inline double potential_curvature(double phi, double beta_l) { return std::cos(phi) + 1.0 / beta_l; }

inline double mechanical_energy(double phi, double dphi, double phi_ext, double beta_l, double beta_c) {
    return 0.5 * beta_c * dphi * dphi + potential(phi, phi_ext, beta_l);
}

/// Digit label of a minimum at phi_min under tilt phi_ext: the nearest
/// integer of (phi_min - phi_ext/(1+beta_L)) / 2pi, ties toward zero.
inline int well_index(double phi_min, double phi_ext, double beta_l) {
    const double x = (phi_min - phi_ext / (1.0 + beta_l)) / kTwoPi;
    const double t = std::trunc(x);
    if (std::abs(x - t) == 0.5) return static_cast<int>(t);
    return static_cast<int>(std::lround(x));
}

namespace detail {

inline void require_beta_l(double beta_l) {
    if (!(beta_l > 0.0) || !std::isfinite(beta_l)) throw InvalidParameter("beta_l", "must be positive and finite");
}

// Root of the gradient on [a, b] where it rises from negative to positive.
inline double refine_minimum(double a, double b, double phi_ext, double beta_l) {
    constexpr double kResidual = 1e-12;
    double best = 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        const double g = potential_gradient(mid, phi_ext, beta_l);
        best = mid;
        if (std::abs(g) < 0.25 * kResidual) break;
        if (g < 0.0)
            a = mid;
        else
            b = mid;
        if (!(b - a > std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid)))) break;
    }
    // Newton polish; accepted only if it lowers the residual.
    const double curv = potential_curvature(best, beta_l);
    if (curv > 0.0) {
        const double cand = best - potential_gradient(best, phi_ext, beta_l) / curv;
        if (std::abs(potential_gradient(cand, phi_ext, beta_l)) < std::abs(potential_gradient(best, phi_ext, beta_l)))
            best = cand;
    }
    return best;
}

// Half-width of the rising stretches of the gradient, acos(-1/beta_L);
// pi when the gradient is monotone everywhere.
inline double stable_half_width(double beta_l) { return beta_l <= 1.0 ? std::numbers::pi : std::acos(-1.0 / beta_l); }

}  // namespace detail

/// All local minima of the potential at tilt phi_ext, sorted by phase.
///
/// Minima satisfy |phi - phi_ext| <= beta_L. The gradient is monotone on the
/// stretches [2pi k - a, 2pi k + a] with a = acos(-1/beta_L), so each stretch
/// is a bracket holding at most one minimum.
inline std::vector<MetastableState> find_minima(double phi_ext, double beta_l) {
    detail::require_beta_l(beta_l);
    const double lo = phi_ext - beta_l - 1.0;
    const double hi = phi_ext + beta_l + 1.0;
    std::vector<MetastableState> out;
    auto add = [&](double phi) {
        MetastableState s;
        s.phi_min = phi;
        s.energy = potential(phi, phi_ext, beta_l);
        s.curvature = potential_curvature(phi, beta_l);
        s.index_n = well_index(phi, phi_ext, beta_l);
        if (s.curvature > 0.0) out.push_back(s);
    };
    if (beta_l <= 1.0) {
        add(detail::refine_minimum(lo, hi, phi_ext, beta_l));
        return out;
    }
    const double half = detail::stable_half_width(beta_l);
    const auto k_lo = static_cast<long>(std::floor((lo + half) / kTwoPi));
    const auto k_hi = static_cast<long>(std::ceil((hi - half) / kTwoPi));
    for (long k = k_lo; k <= k_hi; ++k) {
        const double a = std::max(kTwoPi * static_cast<double>(k) - half, lo);
        const double b = std::min(kTwoPi * static_cast<double>(k) + half, hi);
        if (!(a < b)) continue;
        if (potential_gradient(a, phi_ext, beta_l) < 0.0 && potential_gradient(b, phi_ext, beta_l) > 0.0)
            add(detail::refine_minimum(a, b, phi_ext, beta_l));
    }
    return out;
}

/// Zero-tilt tilt magnitude at which well 0 loses stability:
/// acos(-1/beta_L) + beta_L * sqrt(1 - 1/beta_L^2). Infinite for beta_L <= 1.
inline double zero_well_critical_tilt(double beta_l) {
    detail::require_beta_l(beta_l);
    if (beta_l <= 1.0) return std::numeric_limits<double>::infinity();
    const double a = std::acos(-1.0 / beta_l);
    return a + beta_l * std::sin(a);
}

/// Wells that are stable at the given external phase: [n_lo, n_hi].
inline std::pair<int, int> stable_well_range(double beta_l, double phi_ext = 0.0) {
    const double c0 = zero_well_critical_tilt(beta_l);
    if (!std::isfinite(c0)) return {0, 0};
    // strict inequality |2 pi n - phi_ext| < c0
    const int n_lo = static_cast<int>(std::floor((phi_ext - c0) / kTwoPi)) + 1;
    const int n_hi = static_cast<int>(std::ceil((phi_ext + c0) / kTwoPi)) - 1;
    return {n_lo, n_hi};
}

/// Signed external phase at which well `from_index` stops being a local
/// minimum when the tilt is increased (direction +1) or decreased (-1).
inline double critical_tilt(double beta_l, int from_index, int direction) {
    if (direction != 1 && direction != -1) throw InvalidParameter("direction", "must be +1 or -1");
    const auto [n_lo, n_hi] = stable_well_range(beta_l);
    if (from_index < n_lo || from_index > n_hi)
        throw OutOfRange("well " + std::to_string(from_index) + " does not exist at zero tilt for beta_L = " +
                         std::to_string(beta_l));
    return direction * zero_well_critical_tilt(beta_l) + kTwoPi * from_index;
}

/// Minimum of well `index` at tilt phi_ext; throws OutOfRange if absent.
inline MetastableState well_minimum(double phi_ext, double beta_l, int index) {
    for (const auto& s : find_minima(phi_ext, beta_l))
        if (s.index_n == index) return s;
    throw OutOfRange("well " + std::to_string(index) + " not present at phi_ext = " + std::to_string(phi_ext));
}

struct RcsjOptions {
    double step = 0.005;
    double settle_tol = 1e-8;
    double settle_window = 50.0;
    double max_tau = 1e6;
    double sample_interval = 1.0;
    // Jump to the end of a constant drive segment once the phase has been
    // at rest for a full settle window inside it.
    bool skip_settled_holds = true;
};

/// Integrates beta_c phi'' + phi' = -sin(phi) - (phi - phi_ext(tau))/beta_L
/// from rest at phi0 with fixed-step RK4. beta_c == 0 integrates the
/// first-order overdamped limit.
inline Trajectory rcsj_transient(double phi0, const PulseWaveform& drive, const DerivedParams& derived,
                                 const RcsjOptions& opt = {}) {
    const double beta_l = derived.beta_l;
    const double beta_c = derived.beta_c;
    detail::require_beta_l(beta_l);
    if (!(beta_c >= 0.0)) throw InvalidParameter("beta_c", "must be non-negative");
    if (!(opt.step > 0.0)) throw InvalidParameter("step", "must be positive");
    if (!(opt.settle_tol > 0.0)) throw InvalidParameter("settle_tol", "must be positive");
    if (beta_c > 0.0 && opt.step > 2.5 * beta_c)
        throw InvalidParameter("step", "too large for beta_c; RK4 would be unstable");
    if (drive.start_time() < 0.0) throw InvalidParameter("waveform", "must start at tau >= 0");
    if (drive.end_time() > opt.max_tau) throw InvalidParameter("waveform", "extends beyond max_tau");

    const double dt = opt.step;
    const bool first_order = beta_c == 0.0;
    auto accel = [&](double tau, double phi, double v) {
        return (-v - std::sin(phi) - (phi - drive.value(tau)) / beta_l) / beta_c;
    };
    auto drift = [&](double tau, double phi) { return -std::sin(phi) - (phi - drive.value(tau)) / beta_l; };

    Trajectory tr;
    double phi = phi0;
    double v = first_order ? drift(0.0, phi) : 0.0;
    const long stride = std::max(1L, std::lround(opt.sample_interval / dt));
    auto sample = [&](double tau) {
        tr.times.push_back(tau);
        tr.phases.push_back(phi);
        tr.velocities.push_back(v);
    };
    sample(0.0);

    const double end = drive.end_time();
    double quiet_since = 0.0;
    bool quiet = std::abs(v) < opt.settle_tol;
    long k = 0;
    for (;;) {
        const double tau = static_cast<double>(k) * dt;
        if (quiet && tau >= end && tau - std::max(quiet_since, end) >= opt.settle_window) {
            if (tr.times.back() != tau) sample(tau);
            break;
        }
        if (tau > opt.max_tau) {
            std::ostringstream msg;
            msg << "RCSJ transient did not settle within max_tau = " << opt.max_tau;
            throw ConvergenceError(msg.str());
        }
        if (quiet && opt.skip_settled_holds && tau < end) {
            if (auto seg = drive.constant_until(tau)) {
                // Only quiet time accrued since the segment began counts.
                const double seg_start = [&] {
                    double s = 0.0;
                    for (const auto& p : drive.points())
                        if (p.time <= tau) s = p.time;
                    return s;
                }();
                if (tau - std::max(quiet_since, seg_start) >= opt.settle_window) {
                    const auto target = static_cast<long>(std::floor(std::min(*seg, end) / dt));
                    if (target > k) {
                        k = target;
                        quiet_since = static_cast<double>(k) * dt;
                        sample(quiet_since);
                        continue;
                    }
                }
            }
        }

        if (first_order) {
            const double h2 = 0.5 * dt;
            const double k1 = drift(tau, phi);
            const double k2 = drift(tau + h2, phi + h2 * k1);
            const double k3 = drift(tau + h2, phi + h2 * k2);
            const double k4 = drift(tau + dt, phi + dt * k3);
            phi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            v = drift(tau + dt, phi);
        } else {
            const double h2 = 0.5 * dt;
            const double p1 = v, a1 = accel(tau, phi, v);
            const double p2 = v + h2 * a1, a2 = accel(tau + h2, phi + h2 * p1, v + h2 * a1);
            const double p3 = v + h2 * a2, a3 = accel(tau + h2, phi + h2 * p2, v + h2 * a2);
            const double p4 = v + dt * a3, a4 = accel(tau + dt, phi + dt * p3, v + dt * a3);
            phi += dt / 6.0 * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
            v += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        }
        ++k;
        const double now = static_cast<double>(k) * dt;
        if (!std::isfinite(phi) || !std::isfinite(v)) {
            tr.diverged = true;
            return tr;
        }
        if (std::abs(v) < opt.settle_tol) {
            if (!quiet) quiet_since = now;
            quiet = true;
        } else {
            quiet = false;
        }
        if (k % stride == 0) sample(now);
    }

    const auto minima = find_minima(drive.baseline(), beta_l);
    auto nearest = std::min_element(minima.begin(), minima.end(), [&](const auto& a, const auto& b) {
        return std::abs(a.phi_min - phi) < std::abs(b.phi_min - phi);
    });
    if (nearest != minima.end()) tr.final_state = *nearest;
    return tr;
}

/// CSV with columns tau, phi, dphi.
inline std::string trajectory_to_csv(const Trajectory& tr) {
    std::ostringstream os;
    os.precision(17);
    os << "tau,phi,dphi\n";
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        os << tr.times[i] << ',' << tr.phases[i] << ',' << tr.velocities[i] << '\n';
    return os.str();
}

}  // namespace fluxdac
