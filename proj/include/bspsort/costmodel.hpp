//
// Copyright 2026 The bspsort Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bspsort/bsp/engine.hpp"

namespace bspsort {

//! BSP machine parameters in microseconds, converted to basic-op units
//! with comparisons_per_us.
struct MachinePreset {
    std::string name;
    std::size_t p = 1;
    double L_us = 0.0;
    double g_us = 0.0;
    double comparisons_per_us = 7.0;

    double L_ops() const { return L_us * comparisons_per_us; }
    double g_ops() const { return g_us * comparisons_per_us; }
    bsp::BspParams params() const { return {p, L_ops(), g_ops()}; }
};

//! Cray T3D figures for 16..128 processors.
inline std::vector<MachinePreset> builtin_presets() {
    return {
        {"t3d-16", 16, 130.0, 0.21, 7.0},
        {"t3d-32", 32, 175.0, 0.26, 7.0},
        {"t3d-64", 64, 364.0, 0.28, 7.0},
        {"t3d-128", 128, 762.0, 0.34, 7.0},
    };
}

inline const MachinePreset& find_preset(std::span<const MachinePreset> presets,
                                        const std::string& name) {
    for (const auto& p : presets)
        if (p.name == name)
            return p;
    std::string known;
    for (const auto& p : presets)
        known += (known.empty() ? "" : ", ") + p.name;
    throw std::invalid_argument("unknown preset '" + name + "' (known: " + known + ")");
}

struct CostTerm {
    std::string name;
    double ops = 0.0;
    //! false for terms standing in for an O(.) bound, evaluated with constant 1.
    bool leading = true;
};

struct Prediction {
    std::string algo;
    std::uint64_t n = 0;
    std::size_t p = 1;
    double omega = 1.0;
    double L = 0.0;
    double g = 0.0;
    std::vector<CostTerm> comp_terms;
    std::vector<CostTerm> comm_terms;

    double comp_leading = 0.0, comm_leading = 0.0;
    double comp_slack = 0.0, comm_slack = 0.0;

    //! Ratios against n lg n / p using the leading terms only.
    double pi = 1.0, mu = 0.0, efficiency = 1.0, speedup = 1.0;
    //! Same with the O(.) terms added at constant 1.
    double pi_slack = 1.0, mu_slack = 0.0, efficiency_slack = 1.0;
    //! The closed-form leading terms of pi and mu as stated for the
    //! algorithm (asymptotic simplification of the explicit sums).
    double pi_closed = 1.0, mu_closed = 0.0;

    std::vector<std::string> violated_preconditions;
};

namespace detail {

inline double lg2(double x) { return std::log2(x); }

inline void finish(Prediction& pr) {
    pr.comp_leading = pr.comm_leading = pr.comp_slack = pr.comm_slack = 0.0;
    for (const auto& t : pr.comp_terms)
        (t.leading ? pr.comp_leading : pr.comp_slack) += t.ops;
    for (const auto& t : pr.comm_terms)
        (t.leading ? pr.comm_leading : pr.comm_slack) += t.ops;
    const double n = static_cast<double>(pr.n);
    const double base = n * lg2(n) / static_cast<double>(pr.p);
    pr.pi = pr.comp_leading / base;
    pr.mu = pr.comm_leading / base;
    pr.pi_slack = (pr.comp_leading + pr.comp_slack) / base;
    pr.mu_slack = (pr.comm_leading + pr.comm_slack) / base;
    pr.efficiency = 1.0 / (pr.pi + pr.mu);
    pr.efficiency_slack = 1.0 / (pr.pi_slack + pr.mu_slack);
    pr.speedup = static_cast<double>(pr.p) * pr.efficiency;
}

inline Prediction start(const char* algo, std::uint64_t n, const bsp::BspParams& params,
                        double omega) {
    if (n < 2 || params.p == 0 || params.p > n)
        throw std::invalid_argument("prediction needs 1 <= p <= n and n >= 2");
    if (!(omega > 0.0))
        throw std::invalid_argument("omega must be positive");
    Prediction pr;
    pr.algo = algo;
    pr.n = n;
    pr.p = params.p;
    pr.omega = omega;
    pr.L = params.L;
    pr.g = params.g;
    return pr;
}

// One processor: the sequential sort and nothing else.
inline void sequential_only(Prediction& pr) {
    const double n = static_cast<double>(pr.n);
    pr.comp_terms = {{"local sort n lg n", n * lg2(n), true}};
    pr.comm_terms.clear();
    pr.pi_closed = 1.0;
    pr.mu_closed = 0.0;
    finish(pr);
}

} // namespace detail

//! Default omega of the deterministic algorithm: lg lg n.
inline double default_det_omega(std::uint64_t n) {
    return std::max(1.0, std::log2(std::max(1.0, std::log2(static_cast<double>(n)))));
}

//! Default omega of the randomized algorithms: omega^2 = lg n.
inline double default_ran_omega(std::uint64_t n) {
    return std::sqrt(std::max(1.0, std::log2(static_cast<double>(n))));
}

/*!
 * Deterministic regular oversampling with r = ceil(omega) and
 * n_max = (1 + 1/r) n/p + r p.
 *   computation   (n/p) lg(n/p) + n_max lg p        + O(p + omega p lg^2 p)
 *   communication g n_max + L lg^2 p / 2             + O(L + g omega p lg^2 p)
 */
inline Prediction predict_det(std::uint64_t n, const bsp::BspParams& params,
                              std::optional<double> omega_opt = {}) {
    const double omega = omega_opt.value_or(default_det_omega(n));
    Prediction pr = detail::start("det", n, params, omega);
    if (params.p == 1) {
        detail::sequential_only(pr);
        return pr;
    }
    using detail::lg2;
    const double N = static_cast<double>(n), p = static_cast<double>(params.p);
    const double r = std::ceil(omega);
    const double lgp = lg2(p), lgn = lg2(N), lgp2 = lgp * lgp;
    const double nmax = (1.0 + 1.0 / r) * N / p + r * p;
    const double g = params.g, L = params.L;

    pr.comp_terms = {
        {"local sort (n/p) lg(n/p)", N / p * lg2(N / p), true},
        {"merge n_max lg p", nmax * lgp, true},
        {"O(p)", p, false},
        {"O(omega p lg^2 p)", omega * p * lgp2, false},
    };
    pr.comm_terms = {
        {"routing g n_max", g * nmax, true},
        {"sample sort sync L lg^2 p / 2", L * lgp2 / 2.0, true},
        {"O(L)", L, false},
        {"O(g omega p lg^2 p)", g * omega * p * lgp2, false},
    };
    pr.pi_closed = 1.0 + lgp / (r * lgn);
    pr.mu_closed = (1.0 + 1.0 / r) * g / lgn + L * p * lgp2 / (2.0 * N * lgn);
    detail::finish(pr);

    if (p * p * omega * omega > N / lgn)
        pr.violated_preconditions.push_back("p^2 omega^2 <= n/lg n");
    if (L > 2.0 * N / (p * lgp2))
        pr.violated_preconditions.push_back("L <= 2n/(p lg^2 p)");
    return pr;
}

/*!
 * Randomized oversampling with s = 2 omega^2 lg n samples per processor.
 *   computation   (n/p) lg(n/p) + (1 + 1/omega)(n/p) lg p + 2 omega^2 lg n lg^2 p
 *                 + O(p lg(n/p) + omega^2 lg n lg p)
 *   communication (1 + 1/omega) g n/p + g omega^2 lg n lg^2 p + L lg^2 p / 2
 *                 + O(L lg p + g omega^2 lg n lg p + p g)
 */
inline Prediction predict_iran(std::uint64_t n, const bsp::BspParams& params,
                               std::optional<double> omega_opt = {}) {
    const double omega = omega_opt.value_or(default_ran_omega(n));
    Prediction pr = detail::start("iran", n, params, omega);
    if (params.p == 1) {
        detail::sequential_only(pr);
        return pr;
    }
    using detail::lg2;
    const double N = static_cast<double>(n), p = static_cast<double>(params.p);
    const double lgp = lg2(p), lgn = lg2(N), lgp2 = lgp * lgp, w2 = omega * omega;
    const double expand = 1.0 + 1.0 / omega;
    const double g = params.g, L = params.L;

    pr.comp_terms = {
        {"local sort (n/p) lg(n/p)", N / p * lg2(N / p), true},
        {"merge (1+1/omega)(n/p) lg p", expand * N / p * lgp, true},
        {"sample sort 2 omega^2 lg n lg^2 p", 2.0 * w2 * lgn * lgp2, true},
        {"O(p lg(n/p))", p * lg2(N / p), false},
        {"O(omega^2 lg n lg p)", w2 * lgn * lgp, false},
    };
    pr.comm_terms = {
        {"routing (1+1/omega) g n/p", expand * g * N / p, true},
        {"sample sort g omega^2 lg n lg^2 p", g * w2 * lgn * lgp2, true},
        {"sample sort sync L lg^2 p / 2", L * lgp2 / 2.0, true},
        {"O(L lg p)", L * lgp, false},
        {"O(g omega^2 lg n lg p)", g * w2 * lgn * lgp, false},
        {"O(p g)", p * g, false},
    };
    pr.pi_closed = 1.0 + lgp / (omega * lgn) + 2.0 * p * w2 * lgp2 / N;
    pr.mu_closed = expand * g / lgn + g * p * w2 * lgp2 / N + L * p * lgp2 / (2.0 * N * lgn);
    detail::finish(pr);

    if (2.0 * p * w2 * lgn >= N / 2.0)
        pr.violated_preconditions.push_back("2 p omega^2 lg n < n/2");
    if (p * p > N / (omega * lgn))
        pr.violated_preconditions.push_back("p^2 <= n/(omega lg n)");
    if (L > 2.0 * N / (p * lgp2))
        pr.violated_preconditions.push_back("L <= 2n/(p lg^2 p)");
    return pr;
}

/*!
 * Traditional sample sort, from the closed forms
 *   pi = 1 + 1/omega + 1/lg n + 2 p^2 omega^2 lg p / n
 *   mu = g p^2 omega^2 / n + g / lg n   (both O(.) bounds, taken at constant 1)
 * Terms are itemized in ops, i.e. scaled by n lg n / p.
 */
inline Prediction predict_ran(std::uint64_t n, const bsp::BspParams& params,
                              std::optional<double> omega_opt = {}) {
    const double omega = omega_opt.value_or(default_ran_omega(n));
    Prediction pr = detail::start("ran", n, params, omega);
    using detail::lg2;
    const double N = static_cast<double>(n), p = static_cast<double>(params.p);
    const double lgp = lg2(p), lgn = lg2(N), w2 = omega * omega;
    const double g = params.g;
    const double base = N * lgn / p;

    pr.comp_terms = {
        {"local sort of received keys", base, true},
        {"bucket expansion 1/omega", base / omega, true},
        {"bucketing 1/lg n", base / lgn, true},
        {"sample sort on processor 0", base * 2.0 * p * p * w2 * lgp / N, true},
    };
    pr.comm_terms = {
        {"sample gathering g p^2 omega^2 / n", base * g * p * p * w2 / N, true},
        {"routing g / lg n", base * g / lgn, true},
    };
    pr.pi_closed = 1.0 + 1.0 / omega + 1.0 / lgn + 2.0 * p * p * w2 * lgp / N;
    pr.mu_closed = g * p * p * w2 / N + g / lgn;
    detail::finish(pr);

    if (p * p > N)
        pr.violated_preconditions.push_back("p^2 <= n");
    if (2.0 * p * w2 * lgp >= N / 2.0)
        pr.violated_preconditions.push_back("2 p omega^2 lg p < n/2");
    return pr;
}

/*!
 * Right-hand side of the sample size bound
 *   s >= (1+eps)/eps^2 (2 rho lg n + lg(2 pi k^2 (ks-1) e^{1/(3(ks-1))})).
 * Logarithms are base 2.
 */
inline double claim1_rhs(double s, std::size_t k, double eps, double rho, double n) {
    const double kd = static_cast<double>(k);
    const double m = kd * s - 1.0;
    const double inner = 2.0 * std::numbers::pi * kd * kd * m * std::exp(1.0 / (3.0 * m));
    return (1.0 + eps) / (eps * eps) * (2.0 * rho * std::log2(n) + std::log2(inner));
}

inline bool claim1_holds(std::uint64_t s, std::size_t k, double eps, double rho, double n) {
    return s >= 1 && static_cast<double>(s) >= claim1_rhs(static_cast<double>(s), k, eps, rho, n);
}

/*!
 * Smallest integer s with s >= rhs(s). The right side grows with s, so
 * iterating s <- max(s, ceil(rhs(s))) from s = 1 climbs to the least
 * solution.
 */
inline std::uint64_t claim1_min_s(std::size_t k, double eps, double rho, double n,
                                  int max_iterations = 1000) {
    if (k < 2)
        throw std::invalid_argument("claim1_min_s: k must be at least 2");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("claim1_min_s: epsilon must lie in (0, 1)");
    if (!(rho > 0.0))
        throw std::invalid_argument("claim1_min_s: rho must be positive");
    if (!(n >= 1.0))
        throw std::invalid_argument("claim1_min_s: n must be at least 1");
    std::uint64_t s = 1;
    for (int it = 0; it < max_iterations; ++it) {
        const double rhs = claim1_rhs(static_cast<double>(s), k, eps, rho, n);
        if (static_cast<double>(s) >= rhs)
            return s;
        s = std::max(s + 1, static_cast<std::uint64_t>(std::ceil(rhs)));
    }
    throw std::runtime_error("claim1_min_s: no convergence");
}

//! One superstep as seen by the calibration fit, all in the same unit.
struct StepSample {
    double x = 0.0;
    double h = 0.0;
    double time = 0.0;
};

struct Calibration {
    double L = 0.0;
    double g = 0.0;
    std::size_t idle_samples = 0;
    std::size_t comm_samples = 0;
};

/*!
 * Inverts max(L, x + g h): L is the mean time of idle steps (x = 0, h = 0),
 * g the mean of (time - x)/h over communicating steps whose time exceeds L.
 */
inline Calibration empirical_calibrate(std::span<const StepSample> samples) {
    Calibration cal;
    double sum_l = 0.0;
    for (const auto& s : samples)
        if (s.x == 0.0 && s.h == 0.0) {
            sum_l += s.time;
            ++cal.idle_samples;
        }
    if (cal.idle_samples == 0)
        throw std::invalid_argument("empirical_calibrate: no idle supersteps to fit L");
    cal.L = sum_l / static_cast<double>(cal.idle_samples);
    double sum_g = 0.0;
    for (const auto& s : samples)
        if (s.h > 0.0 && s.time > cal.L) {
            sum_g += (s.time - s.x) / s.h;
            ++cal.comm_samples;
        }
    if (cal.comm_samples == 0)
        throw std::invalid_argument("empirical_calibrate: no communication-bound supersteps to fit g");
    cal.g = sum_g / static_cast<double>(cal.comm_samples);
    return cal;
}

//! Samples from the model charges of a ledger.
inline std::vector<StepSample> charged_samples(const bsp::CostLedger& ledger) {
    std::vector<StepSample> out;
    for (const auto& s : ledger.steps)
        out.push_back({static_cast<double>(s.x), static_cast<double>(s.h), s.charged});
    return out;
}

/*!
 * Samples from measured exchange times (microseconds scaled to ops).
 * Local work is excluded from the exchange time, so x is taken as 0.
 */
inline std::vector<StepSample> measured_samples(const bsp::CostLedger& ledger,
                                                double comparisons_per_us) {
    std::vector<StepSample> out;
    for (const auto& s : ledger.steps)
        if (s.barrier)
            out.push_back({0.0, static_cast<double>(s.h),
                           s.exchange_seconds * 1e6 * comparisons_per_us});
    return out;
}

} // namespace bspsort
