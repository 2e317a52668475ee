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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "bspsort/primitives.hpp"
#include "bspsort/seq/element.hpp"

using namespace bspsort;

namespace {

// Smallest k with t^k >= x.
std::size_t ceil_log(std::size_t t, std::size_t x) {
    std::size_t k = 0;
    for (std::size_t v = 1; v < x; v *= t)
        ++k;
    return k;
}

std::size_t oracle_bcast_steps(std::size_t n, std::size_t p, std::size_t t) {
    const std::size_t h = ceil_log(t, (t - 1) * p + 1) - 1;
    const std::size_t m = (n + h - 1) / h;
    return (n + m - 1) / m + h - 1;
}

std::size_t oracle_prefix_steps(std::size_t n, std::size_t p, std::size_t t) {
    const std::size_t h = ceil_log(t, p);
    const std::size_t m = (n + h - 1) / h;
    return 2 * ((n + m - 1) / m + h - 1);
}

TEST(TreeShapes, Depths) {
    EXPECT_EQ(broadcast_depth(8, 2), 3u);   // 1 + 2 + 4 < 8 <= 1 + 2 + 4 + 8
    EXPECT_EQ(broadcast_depth(7, 2), 2u);   // complete binary tree of 7 nodes
    EXPECT_EQ(broadcast_depth(16, 4), 2u);  // 1 + 4 + 16 >= 16
    EXPECT_EQ(broadcast_depth(16, 16), 1u);
    EXPECT_EQ(prefix_depth(8, 2), 3u);
    EXPECT_EQ(prefix_depth(16, 4), 2u);
    EXPECT_EQ(prefix_depth(9, 3), 2u);
    EXPECT_EQ(prefix_depth(10, 3), 3u);
    EXPECT_EQ(broadcast_supersteps(0, 8, 2), 0u);
    EXPECT_EQ(prefix_supersteps(5, 1, 2), 0u);
}

struct BcastCase {
    std::size_t p, t, n, source;
};

class Broadcast : public ::testing::TestWithParam<BcastCase> {};

TEST_P(Broadcast, EveryoneGetsTheMessageInTheTreeStepCount) {
    const auto c = GetParam();
    std::vector<Word> msg(c.n);
    std::iota(msg.begin(), msg.end(), 1000);
    auto program = [&](Context& ctx, int) -> Task<std::vector<Word>> {
        std::vector<Word> mine = ctx.rank() == c.source ? msg : std::vector<Word>{};
        const std::size_t before = ctx.superstep();
        auto got = co_await broadcast(ctx, c.source, mine, c.n, c.t);
        EXPECT_EQ(ctx.superstep() - before, oracle_bcast_steps(c.n, c.p, c.t));
        co_return got;
    };
    auto res = bsp::run_bsp<std::vector<Word>>({c.p, 0, 1}, program, std::vector<int>(c.p), {});
    for (const auto& got : res.outputs)
        EXPECT_EQ(got, msg);
    EXPECT_EQ(res.ledger.supersteps(), oracle_bcast_steps(c.n, c.p, c.t) + 1);
}

INSTANTIATE_TEST_SUITE_P(Shapes, Broadcast,
                         ::testing::Values(BcastCase{4, 2, 1, 0}, BcastCase{8, 2, 64, 3},
                                           BcastCase{8, 3, 10, 7}, BcastCase{16, 4, 64, 5},
                                           BcastCase{16, 16, 64, 0}, BcastCase{5, 2, 7, 2},
                                           BcastCase{6, 4, 100, 1}, BcastCase{13, 3, 2, 12}));

struct PrefixCase {
    std::size_t p, t, n;
};

class Prefix : public ::testing::TestWithParam<PrefixCase> {};

TEST_P(Prefix, InclusiveScanAcrossRanks) {
    const auto c = GetParam();
    std::mt19937_64 rng(c.p * 131 + c.t * 7 + c.n);
    std::vector<std::vector<std::uint64_t>> in(c.p, std::vector<std::uint64_t>(c.n));
    for (auto& v : in)
        for (auto& x : v)
            x = rng() % 1000;
    auto program = [&](Context& ctx, std::vector<std::uint64_t> v) -> Task<std::vector<std::uint64_t>> {
        const std::size_t before = ctx.superstep();
        auto out = co_await parallel_prefix<std::uint64_t>(ctx, std::move(v), std::plus<>{},
                                                           std::uint64_t{0}, c.t);
        EXPECT_EQ(ctx.superstep() - before, oracle_prefix_steps(c.n, c.p, c.t));
        co_return out;
    };
    auto res = bsp::run_bsp<std::vector<std::uint64_t>>({c.p, 0, 1}, program, in, {});
    std::vector<std::uint64_t> acc(c.n, 0);
    for (std::size_t r = 0; r < c.p; ++r) {
        for (std::size_t j = 0; j < c.n; ++j)
            acc[j] += in[r][j];
        EXPECT_EQ(res.outputs[r], acc) << "rank " << r;
    }
}

INSTANTIATE_TEST_SUITE_P(Shapes, Prefix,
                         ::testing::Values(PrefixCase{4, 2, 1}, PrefixCase{8, 2, 64},
                                           PrefixCase{8, 8, 3}, PrefixCase{16, 4, 64},
                                           PrefixCase{16, 3, 17}, PrefixCase{5, 2, 9},
                                           PrefixCase{7, 3, 1}));

TEST(Prefix, NonCommutativeOperatorKeepsRankOrder) {
    // Affine maps x -> x * mul + add compose associatively, not commutatively.
    struct Aff {
        std::int64_t mul, add;
    };
    const std::size_t p = 6;
    auto compose = [](Aff f, Aff g) { return Aff{f.mul * g.mul, f.add * g.mul + g.add}; };
    std::vector<std::vector<Aff>> in(p);
    for (std::size_t r = 0; r < p; ++r)
        in[r] = {Aff{static_cast<std::int64_t>(r % 3) + 1, static_cast<std::int64_t>(r) - 2}};
    auto program = [&](Context& ctx, std::vector<Aff> v) -> Task<std::vector<Aff>> {
        co_return co_await parallel_prefix<Aff>(ctx, std::move(v), compose, Aff{1, 0}, 2);
    };
    auto res = bsp::run_bsp<std::vector<Aff>>({p, 0, 1}, program, in, {});
    Aff acc{1, 0};
    for (std::size_t r = 0; r < p; ++r) {
        acc = compose(acc, in[r][0]);
        EXPECT_EQ(res.outputs[r][0].mul, acc.mul);
        EXPECT_EQ(res.outputs[r][0].add, acc.add);
    }
}

TEST(Bitonic, SortsBlocksInNetworkStepCount) {
    for (std::size_t p : {1u, 2u, 4u, 8u, 16u}) {
        const std::size_t s = 5;
        std::mt19937_64 rng(p);
        std::vector<std::vector<SampleRecord>> in(p);
        std::vector<SampleRecord> all;
        for (std::size_t r = 0; r < p; ++r) {
            for (std::size_t j = 0; j < s; ++j)
                in[r].push_back({static_cast<Key>(rng() % 7), r, j});
            std::sort(in[r].begin(), in[r].end(), TaggedLess{});
            all.insert(all.end(), in[r].begin(), in[r].end());
        }
        std::sort(all.begin(), all.end(), TaggedLess{});
        auto program = [](Context& ctx, std::vector<SampleRecord> b) -> Task<std::vector<SampleRecord>> {
            co_return co_await bitonic_sort_blocks(ctx, std::move(b), TaggedLess{});
        };
        auto res = bsp::run_bsp<std::vector<SampleRecord>>({p, 0, 1}, program, in, {});
        std::vector<SampleRecord> got;
        for (const auto& b : res.outputs)
            got.insert(got.end(), b.begin(), b.end());
        ASSERT_EQ(got.size(), all.size());
        for (std::size_t i = 0; i < got.size(); ++i)
            EXPECT_EQ(cmp_tagged(got[i], all[i]), std::strong_ordering::equal) << "p=" << p;
        const std::size_t lg = ceil_log(2, p);
        EXPECT_EQ(res.ledger.supersteps(), (lg * lg + lg) / 2 + 1) << "p=" << p;
    }
}

TEST(Bitonic, RejectsNonPowerOfTwo) {
    auto program = [](Context& ctx, std::vector<Key> b) -> Task<std::vector<Key>> {
        co_return co_await bitonic_sort_blocks(ctx, std::move(b), std::less<>{});
    };
    EXPECT_THROW((bsp::run_bsp<std::vector<Key>>({3, 0, 1}, program,
                                                  std::vector<std::vector<Key>>(3, {1}), {})),
                 bsp::BspError);
}

TEST(CountExchange, OffsetsMatchSenderOrderPrefix) {
    const std::size_t p = 6;
    std::mt19937_64 rng(9);
    std::vector<std::vector<std::uint64_t>> counts(p, std::vector<std::uint64_t>(p));
    for (auto& row : counts)
        for (auto& c : row)
            c = rng() % 5;
    auto program = [](Context& ctx, std::vector<std::uint64_t> c) -> Task<ExchangePlan> {
        co_return co_await count_exchange(ctx, std::span<const std::uint64_t>(c));
    };
    auto res = bsp::run_bsp<ExchangePlan>({p, 0, 1}, program, counts, {});
    EXPECT_EQ(res.ledger.supersteps(), 3u);
    for (std::size_t d = 0; d < p; ++d) {
        std::uint64_t acc = 0;
        for (std::size_t s = 0; s < p; ++s) {
            EXPECT_EQ(res.outputs[d].recv_counts[s], counts[s][d]);
            EXPECT_EQ(res.outputs[d].recv_offsets[s], acc);
            EXPECT_EQ(res.outputs[s].send_offsets[d], acc);
            acc += counts[s][d];
        }
        EXPECT_EQ(res.outputs[d].recv_total, acc);
    }
}

TEST(ArityChoice, MinimizesTheModel) {
    for (std::size_t p : {4u, 8u, 16u, 64u}) {
        for (double L : {0.0, 10.0, 1000.0}) {
            const bsp::BspParams params{p, L, 2.0};
            for (std::size_t n : {1u, 8u, 300u}) {
                const std::size_t t = choose_broadcast_arity(n, params);
                for (std::size_t u = 2; u <= p; ++u) {
                    EXPECT_LE(broadcast_cost(n, params, t), broadcast_cost(n, params, u));
                    if (u < t)
                        EXPECT_LT(broadcast_cost(n, params, t), broadcast_cost(n, params, u));
                }
                const std::size_t tp = choose_prefix_arity(n, params);
                for (std::size_t u = 2; u <= p; ++u)
                    EXPECT_LE(prefix_cost(n, params, tp), prefix_cost(n, params, u));
            }
        }
    }
}

TEST(ArityChoice, BroadcastCostFollowsPipelinedTree) {
    // p = 8, t = 2: h = 3, n = 6 -> m = 2, 3 + 3 - 1 = 5 supersteps of max(L, 2 g m).
    const bsp::BspParams params{8, 3.0, 1.5};
    EXPECT_DOUBLE_EQ(broadcast_cost(6, params, 2), 5 * std::max(3.0, 1.5 * 2 * 2));
}

} // namespace
