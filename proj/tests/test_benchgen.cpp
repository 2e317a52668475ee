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
#include <set>

#include "bspsort.hpp"

using namespace bspsort;

namespace {

DistributionSpec spec_of(Dist kind, std::uint64_t n, std::size_t p, std::uint64_t seed = 1) {
    DistributionSpec s;
    s.kind = kind;
    s.n = n;
    s.p = p;
    s.seed = seed;
    return s;
}

TEST(Prng, GoldenValues) {
    Prng rng(42);
    EXPECT_EQ(rng.next(), 0x2bf2f3f755a98f57ull);
    EXPECT_EQ(rng.next(), 0xe24412b2066f34cbull);
    EXPECT_EQ(rng.next(), 0x65d90e5f26fab775ull);
}

TEST(Benchgen, UniformGolden) {
    const auto a = gen(spec_of(Dist::uniform, 8, 2));
    EXPECT_EQ(a[0], (std::vector<Key>{1545606037, 1749806618, 1387336396, 1410719834}));
    EXPECT_EQ(a[1], (std::vector<Key>{992090036, 617608888, 1490159440, 969489036}));
}

TEST(Benchgen, GaussianGolden) {
    const auto a = gen(spec_of(Dist::gaussian, 4, 1));
    EXPECT_EQ(a[0], (std::vector<Key>{1523367221, 1471684930, 609278198, 1212982995}));
}

TEST(Benchgen, AllKeysInRange) {
    for (Dist d : {Dist::uniform, Dist::gaussian, Dist::bucket, Dist::group, Dist::staggered,
                   Dist::dup, Dist::worst_regular})
        for (std::size_t p : {1u, 2u, 8u, 64u}) {
            const auto a = gen(spec_of(d, 1 << 14, p));
            ASSERT_EQ(a.size(), p);
            for (const auto& v : a) {
                ASSERT_EQ(v.size(), (1u << 14) / p);
                for (Key k : v) {
                    ASSERT_GE(k, 0);
                    ASSERT_LT(k, kIntMax);
                }
            }
        }
}

TEST(Benchgen, Reproducible) {
    const auto s = spec_of(Dist::staggered, 4096, 8, 7);
    EXPECT_EQ(gen(s), gen(s));
    EXPECT_NE(gen(s), gen(spec_of(Dist::staggered, 4096, 8, 8)));
}

TEST(Benchgen, GaussianMomentsOfMeanOfFour) {
    const auto a = gen(spec_of(Dist::gaussian, 1 << 18, 4));
    double sum = 0, sq = 0;
    std::size_t n = 0;
    for (const auto& v : a)
        for (Key k : v) {
            const double x = static_cast<double>(k) / static_cast<double>(kIntMax);
            sum += x;
            sq += x * x;
            ++n;
        }
    const double mean = sum / n, var = sq / n - mean * mean;
    // Mean of 4 uniforms on [0,1): mean 1/2, variance 1/48.
    EXPECT_NEAR(mean, 0.5, 0.005);
    EXPECT_NEAR(var, 1.0 / 48.0, 0.001);
}

TEST(Benchgen, BucketRangesForTwoProcessors) {
    const auto a = gen(spec_of(Dist::bucket, 1024, 2));
    for (const auto& v : a) {
        for (std::size_t j = 0; j < 256; ++j)
            EXPECT_LT(v[j], kIntMax / 2);
        for (std::size_t j = 256; j < 512; ++j)
            EXPECT_GE(v[j], kIntMax / 2);
    }
}

TEST(Benchgen, StaggeredRanges) {
    const std::size_t p = 8;
    const auto a = gen(spec_of(Dist::staggered, 8 * 256, p));
    for (std::size_t i = 0; i < p; ++i) {
        const std::uint64_t b = i < p / 2 ? 2 * i + 1 : i - p / 2;
        for (Key k : a[i]) {
            EXPECT_GE(k, static_cast<Key>(b) * kIntMax / 8);
            EXPECT_LT(k, static_cast<Key>(b + 1) * kIntMax / 8);
        }
    }
}

TEST(Benchgen, GroupRanges) {
    auto s = spec_of(Dist::group, 8 * 400, 8);
    s.g = 4;
    const auto a = gen(s);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 400; ++j) {
            const std::uint64_t b = ((i / 4) * 4 + 4 + j * 4 / 400) % 8;
            EXPECT_GE(a[i][j], static_cast<Key>(b) * kIntMax / 8);
            EXPECT_LT(a[i][j], static_cast<Key>(b + 1) * kIntMax / 8);
        }
    s.g = 3;
    EXPECT_THROW(gen(s), ConfigError);
    s.g = 64;  // clamped to p
    EXPECT_NO_THROW(gen(s));
}

TEST(Benchgen, DuplicatesHaveFewDistinctValues) {
    for (std::size_t p : {2u, 8u, 32u}) {
        const std::uint64_t n = 1 << 16;
        std::set<Key> distinct;
        for (const auto& v : gen(spec_of(Dist::dup, n, p)))
            distinct.insert(v.begin(), v.end());
        EXPECT_LE(distinct.size(), 16u + p);
        EXPECT_GE(distinct.size(), 2u);
    }
}

TEST(Benchgen, WorstRegularIsStrided) {
    const auto a = gen(spec_of(Dist::worst_regular, 64, 4));
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_TRUE(std::is_sorted(a[i].begin(), a[i].end()));
        for (std::size_t j = 0; j < 16; ++j)
            EXPECT_EQ(a[i][j], static_cast<Key>((i + j * 4) * kIntMax / 64));
    }
}

TEST(Benchgen, Errors) {
    EXPECT_THROW(gen(spec_of(Dist::uniform, 10, 3)), ConfigError);
    EXPECT_THROW(gen(spec_of(Dist::uniform, 10, 0)), ConfigError);
    EXPECT_THROW(parse_dist("zipf"), ConfigError);
    EXPECT_THROW(parse_dist("gg:x"), ConfigError);
    EXPECT_THROW(parse_dist("gg:0"), ConfigError);
}

TEST(Benchgen, ParseAndLabels) {
    EXPECT_EQ(parse_dist("U").kind, Dist::uniform);
    EXPECT_EQ(parse_dist("dd").kind, Dist::dup);
    EXPECT_EQ(parse_dist("wr").kind, Dist::worst_regular);
    auto g = parse_dist("gg:4");
    EXPECT_EQ(g.kind, Dist::group);
    EXPECT_EQ(g.g, 4u);
    EXPECT_EQ(dist_label(g), "4-G");
    EXPECT_EQ(parse_dist("2-g").g, 2u);
    EXPECT_EQ(dist_label(parse_dist("s")), "S");
    EXPECT_EQ(describe(parse_dist("u")), "uniform[0,2^31)");
    EXPECT_NE(describe(parse_dist("dd")).find("reconstruction"), std::string::npos);
    EXPECT_NE(describe(parse_dist("wr")).find("reconstruction"), std::string::npos);
}

} // namespace
