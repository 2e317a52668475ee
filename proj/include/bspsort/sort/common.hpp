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
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bspsort/bsp/engine.hpp"
#include "bspsort/primitives.hpp"
#include "bspsort/seq/element.hpp"
#include "bspsort/seq/loser_tree.hpp"
#include "bspsort/seq/quicksort.hpp"
#include "bspsort/seq/radix_sort.hpp"
#include "bspsort/seq/sampling.hpp"

namespace bspsort {

enum class SeqSorter { quick, radix };

inline std::string_view to_string(SeqSorter s) { return s == SeqSorter::quick ? "quick" : "radix"; }

//! Phase ids booked on the engine clocks. Id 0 is unused.
enum Phase : int {
    kPhaseInit = 1,
    kPhaseSeqSort = 2,
    kPhaseSampling = 3,
    kPhasePrefix = 4,
    kPhaseRouting = 5,
    kPhaseMerging = 6,
    kPhaseTermination = 7,
};

inline constexpr std::array<std::string_view, 7> kPhaseNames = {
    "Init", "SeqSort", "Sampling", "Prefix", "Routing", "Merging", "Termination"};

struct SortOptions {
    SeqSorter seq = SeqSorter::quick;
    //! Imbalance control. Deterministic: r = ceil(omega), default lg lg n.
    //! Randomized: s = 2 omega^2 lg n per processor, default omega^2 = lg n.
    std::optional<double> omega;
    //! Randomized only: explicit per-processor sample size.
    std::optional<std::size_t> sample_size;
    std::uint64_t seed = 1;
    //! Machine parameters (basic-op units) used for ledger charging.
    double L = 0.0;
    double g = 0.0;
    bsp::RunOptions run;
};

//! Oversampling parameters after defaults and clamping.
struct OversamplingConfig {
    double omega = 1.0;
    std::size_t r = 1;          // deterministic: ceil(omega)
    std::size_t s = 1;          // per-processor sample size
    std::size_t padded_local = 0;
    bool clamped = false;
    std::vector<std::string> warnings;
};

struct PhaseStat {
    std::string_view name;
    double seconds = 0.0;       // longest per-processor active time + exchange time
    std::uint64_t ops = 0;      // max over processors
    std::size_t first_step = 0;
    std::size_t supersteps = 0;
};

struct PhaseReport {
    std::array<PhaseStat, 7> phases;

    double total_seconds() const {
        double t = 0.0;
        for (const auto& p : phases)
            t += p.seconds;
        return t;
    }
};

struct ImbalanceStats {
    std::uint64_t n_max_observed = 0;
    double n_max_bound = 0.0;
    double bucket_expansion = 0.0;
    bool within_bound = true;
    std::vector<std::uint64_t> received;
};

template <SortElement T>
struct SortResult {
    std::vector<std::vector<T>> outputs;
    PhaseReport phases;
    ImbalanceStats imbalance;
    bsp::CostLedger ledger;
    OversamplingConfig config;
    std::uint64_t n = 0;
    std::size_t p = 0;
    double wall_seconds = 0.0;
    std::uint64_t biased_keys = 0;
    //! Ledger index of the data routing superstep.
    std::size_t routing_step = 0;
};

inline double lg(double x) { return std::log2(x); }

namespace detail {

//! ceil for parameters derived in floating point; sqrt(20)^2 must give 20.
inline std::size_t ceil_count(double x) {
    return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, std::abs(x))));
}

} // namespace detail

//! Appends sentinels up to target_len.
template <SortElement T>
void pad_to(std::vector<T>& data, std::size_t target_len) {
    if (target_len > data.size())
        data.resize(target_len, ElementTraits<T>::sentinel());
}

//! Removes trailing sentinel elements; returns how many were removed.
template <SortElement T>
std::size_t strip_padding(std::vector<T>& data) {
    std::size_t end = data.size();
    while (end > 0 && key_of(data[end - 1]) == kSentinelKey)
        --end;
    const std::size_t removed = data.size() - end;
    data.resize(end);
    return removed;
}

namespace detail {

template <SortElement T>
void set_key(T& v, Key k) {
    if constexpr (std::is_same_v<T, Key>)
        v = k;
    else
        v.key = k;
}

//! Moves real keys off the sentinel value; returns how many changed.
template <SortElement T>
std::uint64_t bias_sentinels(std::vector<T>& data) {
    std::uint64_t changed = 0;
    for (auto& v : data)
        if (key_of(v) == kSentinelKey) {
            set_key(v, kSentinelKey - 1);
            ++changed;
        }
    return changed;
}

template <SortElement T>
KernelStats run_seq_sort(SeqSorter which, std::span<T> data) {
    return which == SeqSorter::quick ? seq_sort_quick(data) : seq_sort_radix(data);
}

template <SortElement T>
struct ProcOut {
    std::vector<T> data;
    std::uint64_t received = 0;
    std::uint64_t biased = 0;
    std::size_t routing_step = 0;
};

inline std::uint64_t total_size(const auto& parts) {
    std::uint64_t n = 0;
    for (const auto& x : parts)
        n += x.size();
    return n;
}

inline void check_shape(std::uint64_t n, std::size_t p, bool needs_power_of_two) {
    if (p == 0)
        throw ConfigError("at least one processor is required");
    if (needs_power_of_two && !is_power_of_two(p))
        throw ConfigError("p must be a power of two (got " + std::to_string(p) + ")");
    if (n < p)
        throw ConfigError("n=" + std::to_string(n) + " is smaller than p=" + std::to_string(p));
}

/*!
 * Sends the last record of block i-1 (splitter i, i = 1..p-1) to rank 0,
 * which broadcasts all p-1 splitters.
 */
inline Task<std::vector<SampleRecord>> distribute_splitters(Context& ctx,
                                                            const std::vector<SampleRecord>& block) {
    const std::size_t p = ctx.nprocs();
    if (p == 1)
        co_return std::vector<SampleRecord>{};
    if (ctx.rank() + 1 < p)
        ctx.send_values(0, std::span<const SampleRecord>(&block.back(), 1));
    co_await ctx.sync();

    std::vector<Word> words;
    if (ctx.rank() == 0) {
        std::vector<SampleRecord> splitters;
        for (const auto& msg : ctx.inbox()) {
            auto rec = bsp::unpack_words<SampleRecord>(std::span<const Word>(msg.payload));
            splitters.insert(splitters.end(), rec.begin(), rec.end());
        }
        words = bsp::pack_words(std::span<const SampleRecord>(splitters));
    }
    const std::size_t n_words = 3 * (p - 1);
    const std::size_t t = choose_broadcast_arity(n_words, ctx.params());
    auto got = co_await broadcast(ctx, 0, std::move(words), n_words, t);
    co_return bsp::unpack_words<SampleRecord>(std::span<const Word>(got));
}

template <SortElement T>
struct Routed {
    std::vector<T> buffer;
    ExchangePlan plan;
    std::size_t routing_step = 0;
};

/*!
 * Ph4 + Ph5: exchanges bucket counts, then sends bucket d (a contiguous
 * range of `data` ending at bucket_end[d]) to processor d in one superstep.
 * Each run lands at the offset its sender was given, so the receive buffer
 * holds runs in sender order.
 */
template <SortElement T>
Task<Routed<T>> route_buckets(Context& ctx, std::span<const T> data,
                              std::span<const std::size_t> bucket_end) {
    const std::size_t p = ctx.nprocs();
    ctx.enter_phase(kPhasePrefix);
    std::vector<std::uint64_t> counts(p);
    for (std::size_t d = 0, begin = 0; d < p; ++d) {
        counts[d] = bucket_end[d] - begin;
        begin = bucket_end[d];
    }
    Routed<T> out;
    out.plan = co_await count_exchange(ctx, counts);

    ctx.enter_phase(kPhaseRouting);
    for (std::size_t d = 0, begin = 0; d < p; ++d) {
        if (counts[d] != 0)
            ctx.send_values(d, data.subspan(begin, counts[d]), out.plan.send_offsets[d]);
        begin = bucket_end[d];
    }
    ctx.charge(data.size());
    out.routing_step = ctx.superstep();
    co_await ctx.sync();

    out.buffer.resize(out.plan.recv_total);
    for (const auto& msg : ctx.inbox()) {
        const std::size_t count = bsp::payload_count<T>(msg.payload);
        if (msg.tag != out.plan.recv_offsets[msg.sender] ||
            count != out.plan.recv_counts[msg.sender])
            throw bsp::BspError("route_buckets: run from processor " +
                                std::to_string(msg.sender) + " does not match its offset");
        bsp::unpack_words(std::span<const Word>(msg.payload), out.buffer.data() + msg.tag);
    }
    ctx.charge(out.buffer.size());
    co_return out;
}

//! Runs as spans into the receive buffer, in sender order.
template <SortElement T>
std::vector<std::span<const T>> runs_of(const Routed<T>& routed) {
    std::vector<std::span<const T>> runs;
    for (std::size_t s = 0; s < routed.plan.recv_counts.size(); ++s)
        runs.emplace_back(routed.buffer.data() + routed.plan.recv_offsets[s],
                          routed.plan.recv_counts[s]);
    return runs;
}

/*!
 * Phase table from the engine clocks: per phase, the longest active time
 * of any processor plus the exchange time of supersteps ending in it.
 */
inline PhaseReport make_phase_report(const std::vector<bsp::PhaseClock>& clocks,
                                     const bsp::CostLedger& ledger) {
    PhaseReport rep;
    for (std::size_t i = 0; i < rep.phases.size(); ++i) {
        PhaseStat& st = rep.phases[i];
        const std::size_t id = i + 1;
        st.name = kPhaseNames[i];
        for (const auto& c : clocks) {
            st.seconds = std::max(st.seconds, c.seconds[id]);
            st.ops = std::max(st.ops, c.ops[id]);
        }
        bool first = true;
        for (const auto& s : ledger.steps) {
            if (s.phase != static_cast<int>(id))
                continue;
            st.seconds += s.exchange_seconds;
            if (first) {
                st.first_step = s.step;
                first = false;
            }
            ++st.supersteps;
        }
    }
    return rep;
}

template <SortElement T>
SortResult<T> collect(bsp::BspResult<ProcOut<T>>&& run, std::uint64_t n, OversamplingConfig cfg,
                      double bound, double wall) {
    SortResult<T> res;
    res.n = n;
    res.p = run.outputs.size();
    res.config = std::move(cfg);
    res.wall_seconds = wall;
    res.ledger = std::move(run.ledger);
    res.phases = make_phase_report(run.clocks, res.ledger);
    for (auto& o : run.outputs) {
        res.imbalance.received.push_back(o.received);
        res.imbalance.n_max_observed = std::max(res.imbalance.n_max_observed, o.received);
        res.biased_keys += o.biased;
        res.routing_step = o.routing_step;
        res.outputs.push_back(std::move(o.data));
    }
    const double avg = static_cast<double>(n) / static_cast<double>(res.p);
    res.imbalance.n_max_bound = bound;
    res.imbalance.bucket_expansion = static_cast<double>(res.imbalance.n_max_observed) / avg;
    res.imbalance.within_bound = static_cast<double>(res.imbalance.n_max_observed) <= bound;
    return res;
}

//! Stream for the random sample of processor `pid`, distinct from the
//! input generator streams.
inline Prng sampling_stream(std::uint64_t seed, std::size_t pid) {
    return Prng::stream(splitmix64(seed ^ 0x53414d504c45ULL), pid);
}

/*!
 * Randomized sample size: s = ceil(2 omega^2 lg n) per processor, default
 * omega^2 = lg n. Defaults are clamped to n/(2p) (and the smallest local
 * array) so the sample stays below half the input; explicit values that do
 * not fit raise ConfigError.
 */
inline OversamplingConfig resolve_randomized(std::uint64_t n, std::size_t p, std::size_t min_local,
                                             const SortOptions& opt) {
    OversamplingConfig cfg;
    const double lgn = std::max(1.0, lg(static_cast<double>(n)));
    cfg.omega = opt.omega ? *opt.omega : std::sqrt(lgn);
    if (!(cfg.omega > 0.0))
        throw ConfigError("omega must be positive");
    const bool explicit_s = opt.sample_size.has_value() || opt.omega.has_value();
    std::size_t s = opt.sample_size
                        ? *opt.sample_size
                        : detail::ceil_count(2.0 * cfg.omega * cfg.omega * lgn);
    s = std::max<std::size_t>(s, 1);
    const std::size_t cap =
        std::max<std::size_t>(1, std::min<std::size_t>(n / (2 * p), min_local));
    if (p > 1 && (s * p >= n || s > min_local)) {
        if (explicit_s)
            throw ConfigError("sample of " + std::to_string(s) + " per processor (" +
                              std::to_string(s * p) + " total) is not smaller than the input (n=" +
                              std::to_string(n) + ")");
        s = cap;
        cfg.clamped = true;
        cfg.warnings.push_back("default sample size clamped to " + std::to_string(s) +
                               " per processor for small n");
    }
    if (p == 1)
        s = std::min(s, std::max<std::size_t>(min_local, 1));
    cfg.s = s;
    cfg.r = detail::ceil_count(cfg.omega);
    const double w2 = cfg.omega * cfg.omega;
    const double lgp = lg(static_cast<double>(p));
    if (2.0 * static_cast<double>(p) * w2 * lgp >= static_cast<double>(n) / 2.0)
        cfg.warnings.push_back("2 p omega^2 lg p >= n/2: oversampling precondition not met");
    return cfg;
}

} // namespace detail

} // namespace bspsort
