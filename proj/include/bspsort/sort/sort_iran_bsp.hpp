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

#include <chrono>
#include <vector>

#include "bspsort/sort/common.hpp"

namespace bspsort {

//! Target bound on keys per processor for the randomized algorithms.
inline double ran_nmax_bound(std::uint64_t n, std::size_t p, double omega) {
    return (1.0 + 1.0 / omega) * static_cast<double>(n) / static_cast<double>(p);
}

namespace detail {

template <SortElement T>
struct IRanArgs {
    std::vector<T> data;
    std::size_t s;
    std::size_t padded_local;
    std::uint64_t seed;
    SeqSorter seq;
};

template <SortElement T>
Task<ProcOut<T>> iran_program(Context& ctx, IRanArgs<T> in) {
    const std::size_t p = ctx.nprocs();
    ProcOut<T> out;

    ctx.enter_phase(kPhaseInit);
    std::vector<T> data = std::move(in.data);
    out.biased = bias_sentinels(data);
    const std::size_t real = data.size();
    pad_to(data, in.padded_local);
    ctx.charge(data.size());

    ctx.enter_phase(kPhaseSeqSort);
    ctx.charge(run_seq_sort(in.seq, std::span<T>(data)).ops());

    if (p == 1) {
        ctx.enter_phase(kPhaseTermination);
        data.resize(real);
        out.received = real;
        out.data = std::move(data);
        co_return out;
    }

    ctx.enter_phase(kPhaseSampling);
    Prng rng = sampling_stream(in.seed, ctx.rank());
    auto sample = select_random_sample(std::span<const T>(data.data(), real), in.s, rng, ctx.rank());
    ctx.charge(sample.size());
    auto sorted_sample = co_await bitonic_sort_blocks(ctx, std::move(sample), TaggedLess{});
    auto splitters = co_await distribute_splitters(ctx, sorted_sample);

    KernelStats search;
    auto bounds = splitter_search(std::span<const T>(data.data(), real),
                                  std::span<const SampleRecord>(splitters), ctx.rank(), &search);
    ctx.charge(search.ops());

    auto routed = co_await route_buckets(ctx, std::span<const T>(data.data(), real),
                                         std::span<const std::size_t>(bounds));
    out.routing_step = routed.routing_step;

    ctx.enter_phase(kPhaseMerging);
    data.assign(routed.buffer.size(), T{});
    auto runs = runs_of(routed);
    ctx.charge(multiway_merge<T>(runs, std::span<T>(data)).ops());

    ctx.enter_phase(kPhaseTermination);
    out.received = data.size();
    out.data = std::move(data);
    co_return out;
}

} // namespace detail

/*!
 * Randomized oversampling sort: each processor contributes s random
 * samples of its locally sorted keys, the sample is sorted with the
 * bitonic block sort, and p-1 evenly spaced sample records become the
 * splitters. p must be a power of two.
 */
template <SortElement T>
SortResult<T> sort_iran_bsp(std::vector<std::vector<T>> input, const SortOptions& opt = {}) {
    const std::size_t p = input.size();
    const std::uint64_t n = detail::total_size(input);
    detail::check_shape(n, p, true);
    std::size_t min_local = input.front().size();
    std::size_t max_local = 0;
    for (const auto& x : input) {
        min_local = std::min(min_local, x.size());
        max_local = std::max(max_local, x.size());
    }
    OversamplingConfig cfg = detail::resolve_randomized(n, p, min_local, opt);
    cfg.padded_local = std::max<std::size_t>(detail::ceil_div(n, p), max_local);

    std::vector<detail::IRanArgs<T>> args;
    args.reserve(p);
    for (auto& x : input)
        args.push_back({std::move(x), cfg.s, cfg.padded_local, opt.seed, opt.seq});

    const bsp::BspParams params{p, opt.L, opt.g};
    const auto t0 = std::chrono::steady_clock::now();
    auto run = bsp::run_bsp<detail::ProcOut<T>>(params, &detail::iran_program<T>, std::move(args),
                                                opt.run);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double bound = ran_nmax_bound(n, p, cfg.omega);
    return detail::collect(std::move(run), n, std::move(cfg), bound, wall);
}

} // namespace bspsort
