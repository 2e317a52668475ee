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
#include <cmath>
#include <vector>

#include "bspsort/sort/common.hpp"

namespace bspsort {

//! Bound on keys per processor after regular oversampling.
inline double det_nmax_bound(std::uint64_t n, std::size_t p, std::size_t r) {
    const double avg = static_cast<double>(n) / static_cast<double>(p);
    return std::ceil((1.0 + 1.0 / static_cast<double>(r)) * avg) + static_cast<double>(r * p);
}

/*!
 * r = ceil(omega) (default omega = lg lg n), s = r p. The default r is
 * lowered until r p <= ceil(n/p) so the sample never needs more padding
 * than data. Local arrays are padded to a multiple of s no smaller than
 * ceil(n/p).
 */
inline OversamplingConfig resolve_deterministic(std::uint64_t n, std::size_t p,
                                                std::size_t max_local, const SortOptions& opt) {
    OversamplingConfig cfg;
    const double lgn = std::max(1.0, lg(static_cast<double>(n)));
    cfg.omega = opt.omega ? *opt.omega : std::max(1.0, lg(lgn));
    if (!(cfg.omega > 0.0))
        throw ConfigError("omega must be positive");
    if (opt.sample_size)
        throw ConfigError("the deterministic algorithms take omega, not a sample size");
    cfg.r = std::max<std::size_t>(1, detail::ceil_count(cfg.omega));
    const std::size_t per = static_cast<std::size_t>(detail::ceil_div(n, p));
    if (!opt.omega && cfg.r * p > per && cfg.r > 1) {
        cfg.r = std::max<std::size_t>(1, per / p);
        cfg.clamped = true;
        cfg.warnings.push_back("default r lowered to " + std::to_string(cfg.r) +
                               " for small n/p");
    }
    cfg.s = cfg.r * p;
    const std::size_t base = std::max(per, max_local);
    cfg.padded_local = detail::ceil_div(base, cfg.s) * cfg.s;
    const double pw = static_cast<double>(p) * cfg.omega;
    if (pw * pw > static_cast<double>(n) / lgn)
        cfg.warnings.push_back("p^2 omega^2 > n/lg n: outside the regime of the cost bounds");
    return cfg;
}

namespace detail {

template <SortElement T>
struct DetArgs {
    std::vector<T> data;
    std::size_t r;
    std::size_t padded_local;
    SeqSorter seq;
};

template <SortElement T>
Task<ProcOut<T>> det_program(Context& ctx, DetArgs<T> in) {
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
    auto sample = select_regular_sample(std::span<const T>(data), in.r, p, ctx.rank());
    ctx.charge(sample.size());
    auto sorted_sample = co_await bitonic_sort_blocks(ctx, std::move(sample), TaggedLess{});
    auto splitters = co_await distribute_splitters(ctx, sorted_sample);

    KernelStats search;
    auto bounds = splitter_search(std::span<const T>(data), std::span<const SampleRecord>(splitters),
                                  ctx.rank(), &search);
    ctx.charge(search.ops());
    // Pads sort last and are never routed.
    for (auto& b : bounds)
        b = std::min(b, real);

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
 * Deterministic regular-oversampling sort. Input and output are one array
 * per processor; the concatenated output is ordered by (key, origin
 * processor, origin index). p must be a power of two.
 */
template <SortElement T>
SortResult<T> sort_det_bsp(std::vector<std::vector<T>> input, const SortOptions& opt = {}) {
    const std::size_t p = input.size();
    const std::uint64_t n = detail::total_size(input);
    detail::check_shape(n, p, true);
    std::size_t max_local = 0;
    for (const auto& x : input)
        max_local = std::max(max_local, x.size());
    OversamplingConfig cfg = resolve_deterministic(n, p, max_local, opt);

    std::vector<detail::DetArgs<T>> args;
    args.reserve(p);
    for (auto& x : input)
        args.push_back({std::move(x), cfg.r, cfg.padded_local, opt.seq});

    const bsp::BspParams params{p, opt.L, opt.g};
    const auto t0 = std::chrono::steady_clock::now();
    auto run = bsp::run_bsp<detail::ProcOut<T>>(params, &detail::det_program<T>, std::move(args),
                                                opt.run);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double bound = det_nmax_bound(n, p, cfg.r);
    return detail::collect(std::move(run), n, std::move(cfg), bound, wall);
}

} // namespace bspsort
