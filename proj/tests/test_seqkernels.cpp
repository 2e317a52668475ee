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
#include <cmath>
#include <limits>
#include <random>
#include <numeric>
#include <set>

#include "bspsort/seq/loser_tree.hpp"
#include "bspsort/seq/quicksort.hpp"
#include "bspsort/seq/radix_sort.hpp"
#include "bspsort/seq/sampling.hpp"

using namespace bspsort;

namespace {

std::vector<Traced> random_traced(std::size_t n, Key mod, std::uint64_t seed, bool negative = false) {
    std::mt19937_64 rng(seed);
    std::vector<Traced> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        Key k = static_cast<Key>(rng() % static_cast<std::uint64_t>(mod));
        if (negative && (rng() & 1))
            k = -k;
        v[i] = {k, i};
    }
    return v;
}

std::vector<Traced> stable_oracle(std::vector<Traced> v) {
    std::stable_sort(v.begin(), v.end(), [](const Traced& a, const Traced& b) { return a.key < b.key; });
    return v;
}

void expect_same(const std::vector<Traced>& a, const std::vector<Traced>& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].key, b[i].key) << "index " << i;
        ASSERT_EQ(a[i].origin, b[i].origin) << "index " << i;
    }
}

class SeqSorters : public ::testing::TestWithParam<int> {
protected:
    KernelStats sort(std::span<Traced> v) const {
        return GetParam() == 0 ? seq_sort_quick(v) : seq_sort_radix(v);
    }
    KernelStats sort(std::span<Key> v) const {
        return GetParam() == 0 ? seq_sort_quick(v) : seq_sort_radix(v);
    }
};

TEST_P(SeqSorters, StableOnDuplicatesAndNegatives) {
    for (std::size_t n : {0u, 1u, 2u, 15u, 16u, 17u, 1000u, 65536u})
        for (Key mod : {Key{1}, Key{3}, Key{1} << 40}) {
            auto v = random_traced(n, mod, n * 7 + static_cast<std::uint64_t>(mod), true);
            const auto expect = stable_oracle(v);
            sort(std::span<Traced>(v));
            expect_same(v, expect);
        }
}

TEST_P(SeqSorters, ExtremeKeys) {
    std::vector<Key> v = {0, std::numeric_limits<Key>::max(), -1, std::numeric_limits<Key>::min(), 1,
                          std::numeric_limits<Key>::min() + 1, 42, -42};
    auto expect = v;
    std::sort(expect.begin(), expect.end());
    sort(std::span<Key>(v));
    EXPECT_EQ(v, expect);
}

TEST_P(SeqSorters, SortedAndReversedInputs) {
    std::vector<Key> up(5000), down(5000);
    for (std::size_t i = 0; i < up.size(); ++i) {
        up[i] = static_cast<Key>(i);
        down[i] = static_cast<Key>(up.size() - i);
    }
    auto expect = up;
    sort(std::span<Key>(up));
    EXPECT_EQ(up, expect);
    sort(std::span<Key>(down));
    EXPECT_TRUE(std::is_sorted(down.begin(), down.end()));
}

INSTANTIATE_TEST_SUITE_P(Kernels, SeqSorters, ::testing::Values(0, 1),
                         [](const auto& info) { return info.param == 0 ? "quick" : "radix"; });

TEST(Quicksort, ComparisonCountIsNLogN) {
    std::mt19937_64 rng(3);
    std::vector<Key> v(1 << 16);
    for (auto& k : v)
        k = static_cast<Key>(rng());
    const auto st = seq_sort_quick(std::span<Key>(v));
    const double nlgn = v.size() * std::log2(v.size());
    EXPECT_GT(st.comparisons, 0.8 * nlgn);
    EXPECT_LT(st.comparisons, 2.0 * nlgn);
}

TEST(Radix, SkipsConstantDigits) {
    // Keys below 256: only the lowest byte varies, so one scatter pass.
    std::vector<Key> v = {5, 3, 200, 0, 7};
    const auto st = seq_sort_radix(std::span<Key>(v));
    EXPECT_EQ(st.moves, 2 * v.size());
    EXPECT_EQ(v, (std::vector<Key>{0, 3, 5, 7, 200}));
}

TEST(Tagged, StrictOrderOnKeyPidIndex) {
    EXPECT_TRUE((SampleRecord{5, 0, 3} < SampleRecord{7, 2, 0}));
    EXPECT_TRUE((SampleRecord{5, 1, 3} < SampleRecord{5, 2, 0}));
    EXPECT_TRUE((SampleRecord{5, 1, 3} < SampleRecord{5, 1, 4}));
    EXPECT_EQ(cmp_tagged({5, 1, 3}, {5, 1, 3}), std::strong_ordering::equal);
    EXPECT_EQ(cmp_tagged({5, 1, 4}, {5, 1, 3}), std::strong_ordering::greater);
    EXPECT_EQ(sizeof(SampleRecord), 3 * sizeof(std::uint64_t));
}

TEST(LoserTree, StableMergeOfRuns) {
    std::mt19937_64 rng(11);
    for (std::size_t k : {1u, 2u, 3u, 5u, 8u, 13u}) {
        std::vector<std::vector<Traced>> runs(k);
        std::vector<Traced> all;
        std::uint64_t origin = 0;
        for (auto& r : runs) {
            const std::size_t len = rng() % 50;
            for (std::size_t i = 0; i < len; ++i)
                r.push_back({static_cast<Key>(rng() % 10), origin++});
            std::stable_sort(r.begin(), r.end(), [](auto& a, auto& b) { return a.key < b.key; });
            all.insert(all.end(), r.begin(), r.end());
        }
        // Runs are concatenated in run order, so the stable sort of the
        // concatenation is the stable merge.
        expect_same(multiway_merge(runs), stable_oracle(all));
    }
}

TEST(LoserTree, ComparisonsPerElementAreLogK) {
    const std::size_t k = 16, len = 1000;
    std::vector<std::vector<Key>> runs(k);
    std::mt19937_64 rng(5);
    for (auto& r : runs) {
        for (std::size_t i = 0; i < len; ++i)
            r.push_back(static_cast<Key>(rng() % 100000));
        std::sort(r.begin(), r.end());
    }
    KernelStats st;
    auto out = multiway_merge(runs, &st);
    EXPECT_TRUE(std::is_sorted(out.begin(), out.end()));
    EXPECT_LE(st.comparisons, k * len * 4 + k);
}

TEST(Sampling, RegularSamplePositions) {
    std::vector<Key> v(40);
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = static_cast<Key>(10 * i);
    // r = 2, p = 4: s = 8 segments of x = 5; positions 4, 9, ..., 34 and the max.
    auto sample = select_regular_sample(std::span<const Key>(v), 2, 4, 3);
    ASSERT_EQ(sample.size(), 8u);
    for (std::size_t j = 0; j < 7; ++j) {
        EXPECT_EQ(sample[j].index, 5 * (j + 1) - 1);
        EXPECT_EQ(sample[j].key, v[5 * (j + 1) - 1]);
        EXPECT_EQ(sample[j].pid, 3u);
    }
    EXPECT_EQ(sample[7].index, 39u);
    EXPECT_THROW(select_regular_sample(std::span<const Key>(v.data(), 7), 2, 4, 0), ConfigError);
}

TEST(Sampling, RandomSampleIsDistinctAndOrdered) {
    std::vector<Key> v(100);
    std::iota(v.begin(), v.end(), 0);
    Prng rng(77);
    auto sample = select_random_sample(std::span<const Key>(v), 30, rng, 1);
    ASSERT_EQ(sample.size(), 30u);
    std::set<std::uint64_t> seen;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        seen.insert(sample[i].index);
        EXPECT_EQ(sample[i].key, static_cast<Key>(sample[i].index));
        if (i)
            EXPECT_LT(sample[i - 1].index, sample[i].index);
    }
    EXPECT_EQ(seen.size(), 30u);
    Prng again(77);
    auto same = select_random_sample(std::span<const Key>(v), 30, again, 1);
    for (std::size_t i = 0; i < 30; ++i)
        EXPECT_EQ(same[i].index, sample[i].index);
    Prng r2(1);
    auto all = select_random_sample(std::span<const Key>(v), 100, r2, 1);
    EXPECT_EQ(all.size(), 100u);
    EXPECT_THROW(select_random_sample(std::span<const Key>(v), 101, r2, 1), ConfigError);
}

TEST(Sampling, SplitterSearchAgainstLinearScan) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const std::uint64_t pid = rng() % 4;
        std::vector<Key> v(rng() % 60);
        for (auto& k : v)
            k = static_cast<Key>(rng() % 6);
        std::sort(v.begin(), v.end());
        std::vector<SampleRecord> spl(rng() % 6);
        for (auto& s : spl)
            s = {static_cast<Key>(rng() % 7), rng() % 4, rng() % 60};
        std::sort(spl.begin(), spl.end(), TaggedLess{});
        auto bounds = splitter_search(std::span<const Key>(v), std::span<const SampleRecord>(spl), pid);
        ASSERT_EQ(bounds.size(), spl.size() + 1);
        for (std::size_t d = 0; d < spl.size(); ++d) {
            std::size_t count = 0;
            for (std::size_t j = 0; j < v.size(); ++j)
                count += SampleRecord{v[j], pid, j} < spl[d];
            EXPECT_EQ(bounds[d], count);
        }
        EXPECT_EQ(bounds.back(), v.size());
    }
}

} // namespace
