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
#include <bit>
#include <chrono>
#include <vector>

#include "bspsort/sort/common.hpp"
#include "bspsort/sort/sort_iran_bsp.hpp"

namespace bspsort {

namespace detail {

template <SortElement T>
struct RanArgs {
    std::vector<T> data;
    std::size_t s;
    std::uint64_t seed;
    SeqSorter seq;
};

// Destination of a key: number of splitters below it, by binary search.
inline std::size_t bucket_of(Key key, std::uint64_t pid, std::uint64_t index,
                             std::span<const SampleRecord> splitters, std::uint64_t& cmps) {
    std::size_t lo = 0, hi = splitters.size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        ++cmps;
        if (local_less_than(key, pid, index, splitters[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

template <SortElement T>
Task<ProcOut<T>> ran_program(Context& ctx, RanArgs<T> in) {
    const std::size_t p = ctx.nprocs();
    const std::size_t rank = ctx.rank();
    ProcOut<T> out;

    ctx.enter_phase(kPhaseInit);
    std::vector<T> data = std::move(in.data);
    out.biased = bias_sentinels(data);
    ctx.charge(data.size());

    if (p == 1) {
        ctx.enter_phase(kPhaseSeqSort);
        ctx.charge(run_seq_sort(in.seq, std::span<T>(data)).ops());
        ctx.enter_phase(kPhaseTermination);
        out.received = data.size();
        out.data = std::move(data);
        co_return out;
    }

    // Sample records are tagged with positions in the unsorted local array,
    // the same positions used when keys are bucketed below.
    ctx.enter_phase(kPhaseSampling);
    Prng rng = sampling_stream(in.seed, rank);
    auto sample = select_random_sample(std::span<const T>(data), in.s, rng, rank);
    ctx.send_values(0, std::span<const SampleRecord>(sample));
    ctx.charge(sample.size());
    co_await ctx.sync();

    std::vector<Word> words;
    if (rank == 0) {
        std::vector<SampleRecord> all;
        for (const auto& msg : ctx.inbox()) {
            auto part = bsp::unpack_words<SampleRecord>(std::span<const Word>(msg.payload));
            all.insert(all.end(), part.begin(), part.end());
        }
        std::sort(all.begin(), all.end(), TaggedLess{});
        ctx.charge(all.size() * std::max<std::size_t>(1, std::bit_width(all.size())));
        std::vector<SampleRecord> splitters;
        for (std::size_t i = 1; i < p; ++i)
            splitters.push_back(all[i * in.s - 1]);
        words = bsp::pack_words(std::span<const SampleRecord>(splitters));
    }
    const std::size_t n_words = 3 * (p - 1);
    auto got = co_await broadcast(ctx, 0, std::move(words), n_words,
                                  choose_broadcast_arity(n_words, ctx.params()));
    const auto splitters = bsp::unpack_words<SampleRecord>(std::span<const Word>(got));

    // Stable counting sort by destination.
    ctx.enter_phase(kPhasePrefix);
    std::uint64_t cmps = 0;
    std::vector<std::uint32_t> dest(data.size());
    std::vector<std::size_t> bucket_end(p, 0);
    for (std::size_t j = 0; j < data.size(); ++j) {
        dest[j] = static_cast<std::uint32_t>(
            bucket_of(key_of(data[j]), rank, j, std::span<const SampleRecord>(splitters), cmps));
        ++bucket_end[dest[j]];
    }
    std::vector<std::size_t> cursor(p, 0);
    for (std::size_t d = 0, acc = 0; d < p; ++d) {
        cursor[d] = acc;
        acc += bucket_end[d];
        bucket_end[d] = acc;
    }
    std::vector<T> grouped(data.size());
    for (std::size_t j = 0; j < data.size(); ++j)
        grouped[cursor[dest[j]]++] = data[j];
    ctx.charge(cmps + 2 * data.size());

    auto routed = co_await route_buckets(ctx, std::span<const T>(grouped),
                                         std::span<const std::size_t>(bucket_end));
    out.routing_step = routed.routing_step;

    // Runs arrive in sender order, so a stable local sort keeps the
    // (origin processor, origin index) order of equal keys.
    ctx.enter_phase(kPhaseSeqSort);
    data = std::move(routed.buffer);
    ctx.charge(run_seq_sort(in.seq, std::span<T>(data)).ops());

    ctx.enter_phase(kPhaseTermination);
    out.received = data.size();
    out.data = std::move(data);
    co_return out;
}

} // namespace detail

/*!
 * Traditional random sample sort: samples are gathered and sorted on
 * processor 0, splitters are broadcast, every key is bucketed by binary
 * search, and each processor sorts what it receives. Any p >= 1.
 */
template <SortElement T>
SortResult<T> sort_ran_bsp(std::vector<std::vector<T>> input, const SortOptions& opt = {}) {
    const std::size_t p = input.size();
    const std::uint64_t n = detail::total_size(input);
    detail::check_shape(n, p, false);
    std::size_t min_local = input.front().size();
    for (const auto& x : input)
        min_local = std::min(min_local, x.size());
    OversamplingConfig cfg = detail::resolve_randomized(n, p, min_local, opt);
    if (static_cast<double>(p) * static_cast<double>(p) > static_cast<double>(n))
        cfg.warnings.push_back("p^2 > n: sample gathering dominates");

    std::vector<detail::RanArgs<T>> args;
    args.reserve(p);
    for (auto& x : input)
        args.push_back({std::move(x), cfg.s, opt.seed, opt.seq});

    const bsp::BspParams params{p, opt.L, opt.g};
    const auto t0 = std::chrono::steady_clock::now();
    auto run = bsp::run_bsp<detail::ProcOut<T>>(params, &detail::ran_program<T>, std::move(args),
                                                opt.run);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double bound = ran_nmax_bound(n, p, cfg.omega);
    return detail::collect(std::move(run), n, std::move(cfg), bound, wall);
}

} // namespace bspsort
