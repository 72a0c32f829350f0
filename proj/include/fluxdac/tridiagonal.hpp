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

// Lowest eigenpairs of a real symmetric tridiagonal matrix.
//
// Each eigenvalue is isolated by Sturm-sequence bisection and then polished
// with shifted inverse iteration / Rayleigh quotient updates; the shifted
// systems are solved with LAPACK dgtsv (partial pivoting). Only a handful of
// O(n) sweeps are needed per level, which matters for fits that evaluate
// spectra thousands of times.

#include "fluxdac/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fluxdac {

struct TridiagonalEigen {
    std::vector<double> values;   // ascending
    std::vector<double> vectors;  // column-major, n x values.size(); empty unless requested
};

namespace detail {

// Number of eigenvalues strictly below x.
inline int sturm_count(std::span<const double> d, std::span<const double> e, double x) {
    constexpr double kTiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    int count = 0;
    double q = d[0] - x;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < d.size(); ++i) {
        if (q == 0.0) q = kTiny;
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if (q < 0.0) ++count;
    }
    return count;
}

class ShiftedSolver {
public:
    ShiftedSolver(std::span<const double> d, std::span<const double> e) : d_(d), e_(e) {}

    // Solves (T - sigma I) y = rhs in place; false if the shifted matrix is
    // exactly singular.
    bool solve(double sigma, std::vector<double>& rhs) {
        const std::size_t n = d_.size();
        lower_.assign(e_.begin(), e_.end());
        upper_.assign(e_.begin(), e_.end());
        diag_.resize(n);
        for (std::size_t i = 0; i < n; ++i) diag_[i] = d_[i] - sigma;
        const lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, static_cast<lapack_int>(n), 1, lower_.data(),
                                              diag_.data(), upper_.data(), rhs.data(), static_cast<lapack_int>(n));
        return info == 0;
    }

private:
    std::span<const double> d_, e_;
    std::vector<double> lower_, diag_, upper_;
};

inline void multiply(std::span<const double> d, std::span<const double> e, const std::vector<double>& x,
                     std::vector<double>& y) {
    const std::size_t n = d.size();
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = d[i] * x[i];
        if (i > 0) acc += e[i - 1] * x[i - 1];
        if (i + 1 < n) acc += e[i] * x[i + 1];
        y[i] = acc;
    }
}

inline double normalize(std::vector<double>& x) {
    const double norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    for (auto& v : x) v /= norm;
    return norm;
}

}  // namespace detail

/// Lowest `count` eigenpairs of the symmetric tridiagonal matrix with the
/// given diagonal and off-diagonal. `hints`, if given, are approximate
/// eigenvalues (ascending, one per level) used to seed the search; wrong
/// hints cost time, not accuracy.
inline TridiagonalEigen lowest_tridiagonal_eigen(std::span<const double> diagonal, std::span<const double> offdiag,
                                                 int count, bool want_vectors, std::span<const double> hints = {}) {
    const std::size_t n = diagonal.size();
    if (n == 0 || offdiag.size() + 1 != n) throw DimensionMismatch("tridiagonal: off-diagonal must have n-1 entries");
    if (count < 1 || static_cast<std::size_t>(count) > n) throw InvalidParameter("count", "must lie in [1, n]");

    double lower = std::numeric_limits<double>::infinity();
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (i > 0 ? std::abs(offdiag[i - 1]) : 0.0) + (i + 1 < n ? std::abs(offdiag[i]) : 0.0);
        lower = std::min(lower, diagonal[i] - r);
        norm = std::max(norm, std::abs(diagonal[i]) + r);
    }
    const double eps = std::numeric_limits<double>::epsilon();
    lower -= eps * norm + std::numeric_limits<double>::min();
    const double tol = 4.0 * eps * norm;

    // Every Sturm count taken so far; brackets for later levels reuse them.
    std::vector<std::pair<double, int>> probes{{lower, 0}};
    auto probe = [&](double x) {
        const int c = detail::sturm_count(diagonal, offdiag, x);
        probes.emplace_back(x, c);
        return c;
    };

    const bool hinted = hints.size() == static_cast<std::size_t>(count) && std::is_sorted(hints.begin(), hints.end()) &&
                        std::all_of(hints.begin(), hints.end(), [](double h) { return std::isfinite(h); });
    if (hinted) {
        for (int j = 0; j <= count; ++j) {
            if (j == 0) {
                const double gap = count > 1 ? hints[1] - hints[0] : 1.0;
                probe(hints[0] - 0.5 * gap);
            } else if (j == count) {
                const double gap = count > 1 ? hints[count - 1] - hints[count - 2] : 1.0;
                probe(hints[count - 1] + 0.5 * gap);
            } else {
                probe(0.5 * (hints[j - 1] + hints[j]));
            }
        }
    }

    TridiagonalEigen out;
    // Lower eigenvectors are kept even when not requested: projecting them
    // out keeps inverse iteration off a lower level when two levels are
    // closer than the Rayleigh-quotient resolution.
    std::vector<double> basis;
    basis.reserve(n * static_cast<std::size_t>(count));
    detail::ShiftedSolver solver(diagonal, offdiag);
    std::vector<double> x(n), y(n), tx(n);
    auto project_out = [&](std::vector<double>& v) {
        for (std::size_t k = 0; k * n < basis.size(); ++k) {
            const double* u = basis.data() + k * n;
            const double c = std::inner_product(v.begin(), v.end(), u, 0.0);
            for (std::size_t i = 0; i < n; ++i) v[i] -= c * u[i];
        }
    };

    for (int j = 0; j < count; ++j) {
        // Bracket [a, b] holding exactly eigenvalue j: count(a) == j and
        // count(b) == j + 1.
        double a = lower, b = std::numeric_limits<double>::infinity();
        int ca = 0, cb = static_cast<int>(n);
        for (const auto& [px, pc] : probes) {
            if (pc <= j && px > a) {
                a = px;
                ca = pc;
            } else if (pc > j && px < b) {
                b = px;
                cb = pc;
            }
        }
        double step = std::max(1.0, 1e-6 * norm);
        while (!std::isfinite(b)) {
            const double t = a + step;
            const int c = probe(t);
            if (c <= j) {
                a = t;
                ca = c;
                step *= 2.0;
            } else {
                b = t;
                cb = c;
            }
        }
        auto bisect_once = [&] {
            const double mid = 0.5 * (a + b);
            if (!(mid > a && mid < b)) return;
            const int cm = probe(mid);
            if (cm <= j) {
                a = mid;
                ca = cm;
            } else {
                b = mid;
                cb = cm;
            }
        };
        for (int it = 0; it < 200 && !(ca == j && cb == j + 1); ++it) bisect_once();
        const bool use_hint = hinted && hints[j] > a && hints[j] < b;
        // Without a hint, a few extra halvings put the starting shift well
        // inside the basin of eigenvalue j; cheaper than extra solves.
        if (!use_hint)
            for (int it = 0; it < 2; ++it) bisect_once();

        double lambda = 0.5 * (a + b);
        bool converged = false;
        for (int attempt = 0; attempt < 60 && !converged; ++attempt) {
            double sigma = attempt == 0 && use_hint ? hints[j] : 0.5 * (a + b);
            // Smooth start vector with no parity, so odd levels are not missed.
            for (std::size_t i = 0; i < n; ++i) x[i] = 0.5 + static_cast<double>(i) / static_cast<double>(n);
            project_out(x);
            detail::normalize(x);
            double previous = std::numeric_limits<double>::infinity();
            for (int it = 0; it < 40; ++it) {
                y = x;
                if (!solver.solve(sigma, y)) {
                    sigma += 8.0 * eps * std::max(1.0, std::abs(sigma));
                    continue;
                }
                project_out(y);
                detail::normalize(y);
                x.swap(y);
                detail::multiply(diagonal, offdiag, x, tx);
                lambda = std::inner_product(x.begin(), x.end(), tx.begin(), 0.0);
                if (std::abs(lambda - previous) <= tol) {
                    converged = true;
                    break;
                }
                if (!want_vectors && lambda > a && lambda < b) {
                    // The bracket holds no other eigenvalue, so the error of
                    // the Rayleigh quotient is at most r^2 / gap.
                    double r2 = 0.0;
                    for (std::size_t i = 0; i < n; ++i) r2 += (tx[i] - lambda * x[i]) * (tx[i] - lambda * x[i]);
                    if (r2 <= tol * std::min(lambda - a, b - lambda)) {
                        converged = true;
                        break;
                    }
                }
                previous = lambda;
                // Drifting towards a neighbour: give up on this shift.
                if (!(lambda > a - tol && lambda <= b + tol)) break;
                if (lambda > a && lambda < b) sigma = lambda;
            }
            if (converged && !(lambda > a - tol && lambda <= b + tol)) converged = false;
            if (!converged) {
                // Tighten the bracket so the next shift sits closer to level j.
                bisect_once();
                bisect_once();
            }
        }
        if (!converged) throw ConvergenceError("tridiagonal eigensolver: level " + std::to_string(j) + " did not converge");
        lambda = std::clamp(lambda, a, b);
        out.values.push_back(lambda);
        basis.insert(basis.end(), x.begin(), x.end());
    }
    if (want_vectors) out.vectors = std::move(basis);
    return out;
}

}  // namespace fluxdac
