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

/*
 * Collective operations built on the superstep engine:
 *
 *  - broadcast: pipelined t-ary tree, ceil(n/m) + h - 1 supersteps with
 *    h = ceil(log_t((t-1)p + 1)) - 1 and m = ceil(n/h).
 *  - parallel_prefix: n independent inclusive scans as an up-sweep and a
 *    down-sweep over a pipelined t-ary tree with p leaves,
 *    2(ceil(n/m) + h - 1) supersteps with h = ceil(log_t p).
 *  - bitonic_sort_blocks: Batcher's bitonic network with merge-split on
 *    sorted blocks of equal size.
 *  - count_exchange: per-destination write offsets for a personalized
 *    all-to-all, so receivers can place runs in sender order.
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bspsort/bsp/engine.hpp"

namespace bspsort {

using bsp::Context;
using bsp::Task;
using bsp::Word;

//! Arity and depth of a pipelined tree.
struct TreeShape {
    std::size_t t = 2;
    std::size_t h = 0;
};

namespace detail {

inline std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

inline void check_arity(std::size_t p, std::size_t t) {
    if (p > 1 && (t < 2 || t > p))
        throw bsp::BspError("arity t=" + std::to_string(t) + " outside [2, " +
                            std::to_string(p) + "]");
}

// Segment count of the pipeline: ceil(n / ceil(n/h)).
inline std::size_t pipeline_segments(std::size_t n, std::size_t h) {
    return ceil_div(n, ceil_div(n, h));
}

} // namespace detail

//! Depth of the complete t-ary tree with p nodes.
inline std::size_t broadcast_depth(std::size_t p, std::size_t t) {
    detail::check_arity(p, t);
    std::size_t depth = 0, nodes = 1, level = 1;
    while (nodes < p) {
        level *= t;
        nodes += level;
        ++depth;
    }
    return depth;
}

//! Depth of a t-ary tree with p leaves.
inline std::size_t prefix_depth(std::size_t p, std::size_t t) {
    detail::check_arity(p, t);
    std::size_t depth = 0, span = 1;
    while (span < p) {
        span *= t;
        ++depth;
    }
    return depth;
}

inline TreeShape broadcast_shape(std::size_t p, std::size_t t) { return {t, broadcast_depth(p, t)}; }
inline TreeShape prefix_shape(std::size_t p, std::size_t t) { return {t, prefix_depth(p, t)}; }

inline std::size_t broadcast_supersteps(std::size_t n, std::size_t p, std::size_t t) {
    const std::size_t h = broadcast_depth(p, t);
    if (p == 1 || n == 0)
        return 0;
    return detail::pipeline_segments(n, h) + h - 1;
}

inline std::size_t prefix_supersteps(std::size_t n, std::size_t p, std::size_t t) {
    const std::size_t h = prefix_depth(p, t);
    if (p == 1 || n == 0)
        return 0;
    return 2 * (detail::pipeline_segments(n, h) + h - 1);
}

//! Modelled broadcast time (max(L, g t m) per superstep).
inline double broadcast_cost(std::size_t n, const bsp::BspParams& params, std::size_t t) {
    const std::size_t steps = broadcast_supersteps(n, params.p, t);
    if (steps == 0)
        return 0.0;
    const std::size_t m = detail::ceil_div(n, broadcast_depth(params.p, t));
    return static_cast<double>(steps) *
           std::max(params.L, params.g * static_cast<double>(t * m));
}

//! Modelled prefix time, computation plus communication.
inline double prefix_cost(std::size_t n, const bsp::BspParams& params, std::size_t t) {
    const std::size_t steps = prefix_supersteps(n, params.p, t);
    if (steps == 0)
        return 0.0;
    const double m = static_cast<double>(detail::ceil_div(n, prefix_depth(params.p, t)));
    const double td = static_cast<double>(t);
    return static_cast<double>(steps) *
           (std::max(params.L, td * m) + std::max(params.L, params.g * 2.0 * td * m));
}

//! Arity in [2, p] minimizing the broadcast model; smallest t wins ties.
inline std::size_t choose_broadcast_arity(std::size_t n, const bsp::BspParams& params) {
    if (params.p <= 2)
        return 2;
    std::size_t best = 2;
    double best_cost = broadcast_cost(n, params, 2);
    for (std::size_t t = 3; t <= params.p; ++t) {
        const double c = broadcast_cost(n, params, t);
        if (c < best_cost) {
            best_cost = c;
            best = t;
        }
    }
    return best;
}

inline std::size_t choose_prefix_arity(std::size_t n, const bsp::BspParams& params) {
    if (params.p <= 2)
        return 2;
    std::size_t best = 2;
    double best_cost = prefix_cost(n, params, 2);
    for (std::size_t t = 3; t <= params.p; ++t) {
        const double c = prefix_cost(n, params, t);
        if (c < best_cost) {
            best_cost = c;
            best = t;
        }
    }
    return best;
}

/*!
 * Broadcasts n words from `source` to every processor.
 *
 * All processors must pass the same n, source and t; only the source's
 * `message` is read. Runs exactly broadcast_supersteps(n, p, t) supersteps.
 */
inline Task<std::vector<Word>> broadcast(Context& ctx, std::size_t source,
                                         std::vector<Word> message, std::size_t n,
                                         std::size_t t) {
    const std::size_t p = ctx.nprocs();
    if (source >= p)
        throw bsp::BspError("broadcast: source out of range");
    const std::size_t h = broadcast_depth(p, t);
    const std::size_t steps = broadcast_supersteps(n, p, t);
    const std::size_t v = (ctx.rank() + p - source) % p;
    if (v == 0 && message.size() != n)
        throw bsp::BspError("broadcast: source message has " + std::to_string(message.size()) +
                            " words, expected " + std::to_string(n));
    if (steps == 0)
        co_return message;

    const std::size_t m = detail::ceil_div(n, h);
    const std::size_t segments = detail::ceil_div(n, m);
    std::vector<Word> data = v == 0 ? std::move(message) : std::vector<Word>(n);

    auto forward = [&](std::size_t seg) {
        const std::size_t lo = seg * m, hi = std::min(n, lo + m);
        for (std::size_t c = v * t + 1; c <= v * t + t && c < p; ++c) {
            ctx.send(
                (c + source) % p,
                std::vector<Word>(data.begin() + static_cast<std::ptrdiff_t>(lo),
                                  data.begin() + static_cast<std::ptrdiff_t>(hi)),
                seg);
            ctx.charge(hi - lo);
        }
    };
    auto receive = [&]() {
        std::vector<std::size_t> got;
        for (const auto& msg : ctx.inbox()) {
            const std::size_t seg = msg.tag;
            std::copy(msg.payload.begin(), msg.payload.end(),
                      data.begin() + static_cast<std::ptrdiff_t>(seg * m));
            ctx.charge(msg.payload.size());
            got.push_back(seg);
        }
        return got;
    };

    for (std::size_t step = 0; step < steps; ++step) {
        if (v == 0) {
            if (step < segments)
                forward(step);
        } else {
            for (std::size_t seg : receive())
                forward(seg);
        }
        co_await ctx.sync();
    }
    receive();
    co_return data;
}

namespace detail {

inline constexpr std::uint64_t kPrefixDown = std::uint64_t{1} << 63;

inline std::uint64_t prefix_tag(bool down, std::size_t level, std::size_t seg) {
    return (down ? kPrefixDown : 0) | (std::uint64_t{level} << 48) | seg;
}

} // namespace detail

/*!
 * n independent inclusive prefix operations across ranks: processor i
 * receives, for each item j, values_0[j] op ... op values_i[j].
 *
 * `op` must be associative and `identity` its neutral element. T must be
 * trivially copyable and word-sized.
 */
template <typename T, typename Op>
Task<std::vector<T>> parallel_prefix(Context& ctx, std::vector<T> values, Op op, T identity,
                                     std::size_t t) {
    const std::size_t p = ctx.nprocs();
    const std::size_t n = values.size();
    const std::size_t h = prefix_depth(p, t);
    if (p == 1 || n == 0)
        co_return values;

    const std::size_t m = detail::ceil_div(n, h);
    const std::size_t segments = detail::ceil_div(n, m);
    const std::size_t sweep = segments + h - 1;
    const std::size_t r = ctx.rank();

    // span_of[l] = t^l; this rank hosts the level-l node iff r % t^l == 0.
    std::vector<std::size_t> span_of(h + 2, 1);
    for (std::size_t l = 1; l < span_of.size(); ++l)
        span_of[l] = span_of[l - 1] * t;
    auto hosts = [&](std::size_t l) { return r % span_of[l] == 0; };
    auto child_count = [&](std::size_t l) {
        std::size_t k = 0;
        while (k < t && r + k * span_of[l - 1] < p)
            ++k;
        return k;
    };

    // child_sums[l][k]: subtotal received from child k of the level-l node.
    // offsets[l]: exclusive prefix of the level-l node, filled on the way down.
    std::vector<std::vector<std::vector<T>>> child_sums(h + 1);
    std::vector<std::vector<T>> offsets(h + 1);
    for (std::size_t l = 0; l <= h; ++l) {
        if (!hosts(l))
            continue;
        if (l >= 1)
            child_sums[l].assign(child_count(l), std::vector<T>(n, identity));
        offsets[l].assign(n, identity);
    }

    auto seg_range = [&](std::size_t seg) {
        return std::pair{seg * m, std::min(n, seg * m + m)};
    };
    auto send_items = [&](std::size_t dest, const T* first, std::size_t count, std::uint64_t tag) {
        ctx.send_values(dest, std::span<const T>(first, count), tag);
    };
    auto absorb = [&]() {
        for (const auto& msg : ctx.inbox()) {
            const bool down = (msg.tag & detail::kPrefixDown) != 0;
            const std::size_t level = (msg.tag >> 48) & 0x7fff;
            const std::size_t seg = msg.tag & ((std::uint64_t{1} << 48) - 1);
            const auto [lo, hi] = seg_range(seg);
            if (down) {
                bsp::unpack_words(std::span<const Word>(msg.payload), offsets[level].data() + lo);
            } else {
                const std::size_t k = (msg.sender - r) / span_of[level];
                bsp::unpack_words(std::span<const Word>(msg.payload),
                                  child_sums[level + 1][k].data() + lo);
            }
            ctx.charge(hi - lo);
        }
    };
    auto parent_of = [&](std::size_t l) { return r - r % span_of[l + 1]; };

    std::vector<T> scratch(n);
    for (std::size_t step = 0; step < 2 * sweep; ++step) {
        absorb();
        if (step < sweep) {
            for (std::size_t l = 0; l < h && hosts(l); ++l) {
                if (step < l || step - l >= segments)
                    continue;
                const auto [lo, hi] = seg_range(step - l);
                for (std::size_t j = lo; j < hi; ++j) {
                    if (l == 0) {
                        scratch[j] = values[j];
                    } else {
                        T acc = child_sums[l][0][j];
                        for (std::size_t k = 1; k < child_sums[l].size(); ++k)
                            acc = op(acc, child_sums[l][k][j]);
                        scratch[j] = acc;
                    }
                }
                ctx.charge((hi - lo) * (l == 0 ? 1 : child_sums[l].size()));
                send_items(parent_of(l), scratch.data() + lo, hi - lo,
                           detail::prefix_tag(false, l, step - l));
            }
        } else {
            const std::size_t d = step - sweep;
            for (std::size_t l = h; l >= 1; --l) {
                if (!hosts(l))
                    continue;
                const std::size_t lag = h - l;
                if (d < lag || d - lag >= segments)
                    continue;
                const std::size_t seg = d - lag;
                const auto [lo, hi] = seg_range(seg);
                for (std::size_t k = 0; k < child_sums[l].size(); ++k) {
                    for (std::size_t j = lo; j < hi; ++j) {
                        T acc = offsets[l][j];
                        for (std::size_t q = 0; q < k; ++q)
                            acc = op(acc, child_sums[l][q][j]);
                        scratch[j] = acc;
                    }
                    ctx.charge((hi - lo) * (k + 1));
                    send_items(r + k * span_of[l - 1], scratch.data() + lo, hi - lo,
                               detail::prefix_tag(true, l - 1, seg));
                }
            }
        }
        co_await ctx.sync();
    }
    absorb();

    std::vector<T> result(n);
    for (std::size_t j = 0; j < n; ++j)
        result[j] = op(offsets[0][j], values[j]);
    ctx.charge(n);
    co_return result;
}

inline bool is_power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

/*!
 * Sorts p equal-sized blocks across processors so that the concatenation
 * over ranks is ordered by `less`. Each processor passes its own block,
 * already sorted. Requires p to be a power of two; runs
 * (lg^2 p + lg p)/2 supersteps.
 */
template <typename R, typename Less>
Task<std::vector<R>> bitonic_sort_blocks(Context& ctx, std::vector<R> block, Less less) {
    const std::size_t p = ctx.nprocs();
    const std::size_t r = ctx.rank();
    if (!is_power_of_two(p))
        throw bsp::BspError("bitonic_sort_blocks: p=" + std::to_string(p) +
                            " is not a power of two");
    if (!std::is_sorted(block.begin(), block.end(), less))
        throw bsp::BspError("bitonic_sort_blocks: input block on rank " + std::to_string(r) +
                            " is not sorted");
    const std::size_t s = block.size();
    std::vector<R> merged(2 * s);

    for (std::size_t k = 2; k <= p; k <<= 1) {
        for (std::size_t j = k >> 1; j > 0; j >>= 1) {
            const std::size_t partner = r ^ j;
            const bool ascending = (r & k) == 0;
            ctx.send_values(partner, std::span<const R>(block));
            co_await ctx.sync();

            auto in = ctx.inbox();
            if (in.size() != 1 || bsp::payload_count<R>(in[0].payload) != s)
                throw bsp::BspError("bitonic_sort_blocks: block sizes differ across ranks");
            std::vector<R> other = bsp::unpack_words<R>(std::span<const Word>(in[0].payload));

            // Lower rank's block first keeps ties in rank order.
            if (r < partner)
                std::merge(block.begin(), block.end(), other.begin(), other.end(),
                           merged.begin(), less);
            else
                std::merge(other.begin(), other.end(), block.begin(), block.end(),
                           merged.begin(), less);
            const bool keep_low = (r < partner) == ascending;
            const auto first = merged.begin() + (keep_low ? 0 : static_cast<std::ptrdiff_t>(s));
            std::copy(first, first + static_cast<std::ptrdiff_t>(s), block.begin());
            ctx.charge(2 * s);
        }
    }
    co_return block;
}

//! Offsets produced by count_exchange, all indexed by peer rank.
struct ExchangePlan {
    //! Where my run for destination d starts in d's receive buffer.
    std::vector<std::uint64_t> send_offsets;
    //! How many items each sender routes to me.
    std::vector<std::uint64_t> recv_counts;
    //! Where sender s's run starts in my receive buffer.
    std::vector<std::uint64_t> recv_offsets;
    std::uint64_t recv_total = 0;
};

/*!
 * Given counts[d] = items this processor will route to d, computes the
 * exclusive prefix over sender ranks for every destination. Two supersteps,
 * p words per processor in each: counts go to their destinations, which
 * answer with each sender's offset.
 */
inline Task<ExchangePlan> count_exchange(Context& ctx, std::span<const std::uint64_t> counts) {
    const std::size_t p = ctx.nprocs();
    if (counts.size() != p)
        throw bsp::BspError("count_exchange: expected one count per processor");
    ExchangePlan plan;
    plan.send_offsets.assign(p, 0);
    plan.recv_counts.assign(p, 0);
    plan.recv_offsets.assign(p, 0);

    for (std::size_t d = 0; d < p; ++d)
        ctx.send(d, {counts[d]});
    co_await ctx.sync();

    for (const auto& msg : ctx.inbox())
        plan.recv_counts[msg.sender] = msg.payload.at(0);
    std::uint64_t acc = 0;
    for (std::size_t s = 0; s < p; ++s) {
        plan.recv_offsets[s] = acc;
        acc += plan.recv_counts[s];
    }
    plan.recv_total = acc;
    ctx.charge(p);

    for (std::size_t s = 0; s < p; ++s)
        ctx.send(s, {plan.recv_offsets[s]});
    co_await ctx.sync();

    for (const auto& msg : ctx.inbox())
        plan.send_offsets[msg.sender] = msg.payload.at(0);
    co_return plan;
}

} // namespace bspsort
