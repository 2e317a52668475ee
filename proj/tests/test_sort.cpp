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
#include <random>

#include "bspsort.hpp"

using namespace bspsort;

namespace {

using Parts = std::vector<std::vector<Traced>>;

Parts traced(const std::vector<std::vector<Key>>& keys) {
    Parts out(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i)
        for (std::size_t j = 0; j < keys[i].size(); ++j)
            out[i].push_back({keys[i][j], (std::uint64_t{i} << 32) | j});
    return out;
}

std::vector<Traced> flat(const Parts& parts) {
    std::vector<Traced> v;
    for (const auto& x : parts)
        v.insert(v.end(), x.begin(), x.end());
    return v;
}

std::vector<Traced> oracle(const Parts& in) {
    auto v = flat(in);
    std::stable_sort(v.begin(), v.end(), [](const Traced& a, const Traced& b) { return a.key < b.key; });
    return v;
}

::testing::AssertionResult matches_oracle(const Parts& in, const Parts& out) {
    const auto expect = oracle(in);
    const auto got = flat(out);
    if (got.size() != expect.size())
        return ::testing::AssertionFailure() << "size " << got.size() << " vs " << expect.size();
    for (std::size_t i = 0; i < got.size(); ++i)
        if (got[i].key != expect[i].key || got[i].origin != expect[i].origin)
            return ::testing::AssertionFailure()
                   << "mismatch at " << i << ": key " << got[i].key << " origin " << got[i].origin
                   << ", expected key " << expect[i].key << " origin " << expect[i].origin;
    return ::testing::AssertionSuccess();
}

Parts gen_traced(Dist kind, std::uint64_t n, std::size_t p, std::uint64_t seed = 1) {
    DistributionSpec spec;
    spec.kind = kind;
    spec.n = n;
    spec.p = p;
    spec.seed = seed;
    return traced(gen(spec));
}

enum class Which { det, iran, ran };

SortResult<Traced> run(Which w, Parts in, const SortOptions& opt = {}) {
    switch (w) {
    case Which::det: return sort_det_bsp(std::move(in), opt);
    case Which::iran: return sort_iran_bsp(std::move(in), opt);
    case Which::ran: return sort_ran_bsp(std::move(in), opt);
    }
    throw std::logic_error("unreachable");
}

class AllAlgorithms : public ::testing::TestWithParam<Which> {};

TEST_P(AllAlgorithms, AllEqualKeysKeepOriginOrder) {
    Parts in(4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < (1u << 14); ++j)
            in[i].push_back({7, (std::uint64_t{i} << 32) | j});
    auto res = run(GetParam(), in);
    // The stable oracle of all-equal keys is the input read in (rank, index) order.
    EXPECT_TRUE(matches_oracle(in, res.outputs));
    EXPECT_EQ(flat(res.outputs).front().origin, 0u);
    if (GetParam() == Which::det) {
        EXPECT_LE(res.imbalance.n_max_observed, res.imbalance.n_max_bound);
    }
}

TEST_P(AllAlgorithms, SortedInputIsUnchanged) {
    for (std::size_t p : {1u, 2u, 8u}) {
        Parts in(p);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < 512; ++j)
                in[i].push_back({static_cast<Key>(i * 512 + j), (std::uint64_t{i} << 32) | j});
        auto res = run(GetParam(), in);
        const auto got = flat(res.outputs);
        const auto want = flat(in);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i)
            ASSERT_EQ(got[i].origin, want[i].origin);
    }
}

TEST_P(AllAlgorithms, EveryDistributionBothSorters) {
    for (Dist d : {Dist::uniform, Dist::gaussian, Dist::bucket, Dist::group, Dist::staggered,
                   Dist::dup, Dist::worst_regular})
        for (SeqSorter seq : {SeqSorter::quick, SeqSorter::radix}) {
            auto in = gen_traced(d, 1 << 14, 8);
            SortOptions opt;
            opt.seq = seq;
            auto res = run(GetParam(), in, opt);
            EXPECT_TRUE(matches_oracle(in, res.outputs)) << static_cast<int>(d);
            if (GetParam() == Which::det)
                EXPECT_TRUE(res.imbalance.within_bound);
        }
}

TEST_P(AllAlgorithms, UnevenLocalSizes) {
    Parts in(4);
    std::mt19937_64 rng(17);
    const std::size_t sizes[] = {300, 1, 700, 50};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < sizes[i]; ++j)
            in[i].push_back({static_cast<Key>(rng() % 100), (std::uint64_t{i} << 32) | j});
    SortOptions opt;
    opt.sample_size = GetParam() == Which::det ? std::nullopt : std::optional<std::size_t>(1);
    auto res = run(GetParam(), in, opt);
    EXPECT_TRUE(matches_oracle(in, res.outputs));
}

TEST_P(AllAlgorithms, SentinelKeysAreBiased) {
    Parts in(2);
    const Key big = std::numeric_limits<Key>::max();
    for (std::size_t j = 0; j < 64; ++j) {
        in[0].push_back({j % 3 == 0 ? big : static_cast<Key>(j), j});
        in[1].push_back({static_cast<Key>(100 - j), (1ull << 32) | j});
    }
    auto res = run(GetParam(), in);
    EXPECT_EQ(res.biased_keys, 22u);
    const auto got = flat(res.outputs);
    ASSERT_EQ(got.size(), 128u);
    EXPECT_EQ(got.back().key, big - 1);
    EXPECT_TRUE(std::is_sorted(got.begin(), got.end(),
                               [](const Traced& a, const Traced& b) { return a.key < b.key; }));
}

TEST_P(AllAlgorithms, SequentialModeMatchesThreaded) {
    auto in = gen_traced(Dist::uniform, 1 << 15, 4, 3);
    SortOptions seq;
    seq.run.mode = bsp::ExecMode::sequential;
    auto a = run(GetParam(), in);
    auto b = run(GetParam(), in, seq);
    EXPECT_TRUE(matches_oracle(in, a.outputs));
    EXPECT_TRUE(matches_oracle(in, b.outputs));
    EXPECT_EQ(a.imbalance.received, b.imbalance.received);
    EXPECT_EQ(a.ledger.supersteps(), b.ledger.supersteps());
}

TEST_P(AllAlgorithms, OneDataRoundAndPhaseAccounting) {
    const std::uint64_t n = 1 << 16;
    const std::size_t p = 8;
    auto res = run(GetParam(), gen_traced(Dist::uniform, n, p));
    std::size_t big = 0, at = 0;
    for (const auto& s : res.ledger.steps)
        if (s.h >= n / p) {
            ++big;
            at = s.step;
        }
    // The baseline gathers p s tagged samples on one processor, which can
    // exceed n/p words; only the two-phase algorithms are held to one round.
    if (GetParam() != Which::ran) {
        EXPECT_EQ(big, 1u);
        EXPECT_EQ(at, res.routing_step);
    }
    EXPECT_EQ(res.ledger.steps[at].phase, kPhaseRouting);
    std::size_t steps = 0;
    for (const auto& ph : res.phases.phases)
        steps += ph.supersteps;
    EXPECT_EQ(steps, res.ledger.supersteps());
}

INSTANTIATE_TEST_SUITE_P(Sorts, AllAlgorithms, ::testing::Values(Which::det, Which::iran, Which::ran),
                         [](const auto& info) {
                             return std::string(info.param == Which::det    ? "det"
                                                : info.param == Which::iran ? "iran"
                                                                            : "ran");
                         });

TEST(Det, ReceivedKeysBoundAtOneMillion) {
    auto in = gen_traced(Dist::uniform, 1 << 20, 4);
    SortOptions opt;
    opt.omega = 5.0;
    auto res = sort_det_bsp(in, opt);
    EXPECT_EQ(res.config.r, 5u);
    EXPECT_EQ(res.imbalance.n_max_bound, 314593.0);
    EXPECT_LE(res.imbalance.n_max_observed, 314593u);
    EXPECT_TRUE(matches_oracle(in, res.outputs));
}

TEST(Det, DefaultOmegaIsLgLgN) {
    auto res = sort_det_bsp(gen_traced(Dist::uniform, 1 << 16, 4));
    EXPECT_DOUBLE_EQ(res.config.omega, 4.0);
    EXPECT_EQ(res.config.r, 4u);
    EXPECT_EQ(res.config.s, 16u);
}

TEST(Det, WorstRegularStaysWithinBound) {
    for (std::size_t p : {2u, 4u, 8u, 16u}) {
        auto in = gen_traced(Dist::worst_regular, 1 << 16, p);
        auto res = sort_det_bsp(in);
        EXPECT_TRUE(res.imbalance.within_bound) << p;
        EXPECT_TRUE(matches_oracle(in, res.outputs));
    }
}

TEST(Det, Errors) {
    EXPECT_THROW(sort_det_bsp(gen_traced(Dist::uniform, 300, 3)), ConfigError);
    EXPECT_THROW(sort_det_bsp(Parts{{{1, 0}}, {}, {}, {}}), ConfigError);
    SortOptions opt;
    opt.sample_size = 4;
    EXPECT_THROW(sort_det_bsp(gen_traced(Dist::uniform, 256, 2), opt), ConfigError);
}

TEST(IRan, SingleProcessorIsTheSequentialSort) {
    auto in = gen_traced(Dist::gaussian, 5000, 1);
    auto res = sort_iran_bsp(in);
    EXPECT_TRUE(matches_oracle(in, res.outputs));
    EXPECT_EQ(res.ledger.supersteps(), 1u);
}

TEST(IRan, SeededMillionKeysEightProcessors) {
    auto in = gen_traced(Dist::uniform, 1 << 20, 8);
    SortOptions opt;
    opt.omega = std::sqrt(20.0);
    opt.seed = 5;
    auto res = sort_iran_bsp(in, opt);
    EXPECT_TRUE(matches_oracle(in, res.outputs));
    EXPECT_EQ(res.config.s, 800u);  // 2 * 20 * lg 2^20
    EXPECT_LE(res.imbalance.bucket_expansion, 1.0 + 1.0 / std::sqrt(20.0));
}

TEST(IRan, SampleLargerThanInputIsAConfigError) {
    SortOptions opt;
    opt.sample_size = 64;
    EXPECT_THROW(sort_iran_bsp(gen_traced(Dist::uniform, 256, 4), opt), ConfigError);
    EXPECT_THROW(sort_iran_bsp(gen_traced(Dist::uniform, 1200, 3)), ConfigError);
}

TEST(IRan, SmallInputsClampTheDefaultSample) {
    auto res = sort_iran_bsp(gen_traced(Dist::uniform, 1024, 16));
    EXPECT_TRUE(res.config.clamped);
    EXPECT_EQ(res.config.s, 32u);
}

TEST(Ran, AnyProcessorCount) {
    for (std::size_t p : {1u, 3u, 5u, 6u}) {
        auto in = gen_traced(Dist::uniform, 3000 * p, p);
        auto res = sort_ran_bsp(in);
        EXPECT_TRUE(matches_oracle(in, res.outputs)) << p;
    }
}

TEST(Ran, SameOutputAsIRan) {
    auto in = gen_traced(Dist::uniform, 1 << 18, 4);
    SortOptions opt;
    opt.seed = 9;
    auto a = sort_ran_bsp(in, opt);
    auto b = sort_iran_bsp(in, opt);
    const auto fa = flat(a.outputs), fb = flat(b.outputs);
    ASSERT_EQ(fa.size(), fb.size());
    for (std::size_t i = 0; i < fa.size(); ++i)
        ASSERT_EQ(fa[i].origin, fb[i].origin);
    EXPECT_NE(a.ledger.supersteps(), b.ledger.supersteps());
}

TEST(Padding, PadAndStrip) {
    std::vector<Key> v = {1, 2};
    pad_to(v, 4);
    EXPECT_EQ(v, (std::vector<Key>{1, 2, kSentinelKey, kSentinelKey}));
    EXPECT_EQ(strip_padding(v), 2u);
    EXPECT_EQ(v, (std::vector<Key>{1, 2}));
    pad_to(v, 1);
    EXPECT_EQ(v.size(), 2u);
    std::vector<Traced> t = {{3, 9}};
    pad_to(t, 3);
    EXPECT_EQ(t[2].key, kSentinelKey);
    EXPECT_EQ(strip_padding(t), 2u);
    EXPECT_EQ(t.size(), 1u);
}

TEST(Padding, RealKeysConservedWhenPaddingIsNeeded) {
    // 1000 keys over 8 processors: ceil(n/p) = 125 is not a multiple of s.
    Parts in(8);
    std::mt19937_64 rng(4);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 125; ++j)
            in[i].push_back({static_cast<Key>(rng() % 50), (std::uint64_t{i} << 32) | j});
    auto res = sort_det_bsp(in);
    EXPECT_EQ(res.config.padded_local % res.config.s, 0u);
    EXPECT_GT(res.config.padded_local, 125u);
    EXPECT_TRUE(matches_oracle(in, res.outputs));
    EXPECT_TRUE(res.imbalance.within_bound);
}

} // namespace
