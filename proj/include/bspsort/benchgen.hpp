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
#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bspsort/prng.hpp"
#include "bspsort/seq/element.hpp"
#include "bspsort/seq/sampling.hpp"

namespace bspsort {

//! One past the largest value of C's random().
inline constexpr std::int64_t kIntMax = std::int64_t{1} << 31;

enum class Dist { uniform, gaussian, bucket, group, staggered, dup, worst_regular };

struct DistributionSpec {
    Dist kind = Dist::uniform;
    std::uint64_t n = 0;
    std::size_t p = 1;
    //! Base seed; processor i draws from stream 20 + seed + 1001 i, so the
    //! default seed 1 gives 21 + 1001 i.
    std::uint64_t seed = 1;
    //! Group size for Dist::group.
    std::size_t g = 2;
};

//! Parses u, g, b, gg:<g> (or <g>-g), s, dd, wr.
inline DistributionSpec parse_dist(const std::string& text) {
    DistributionSpec spec;
    std::string t;
    for (char c : text)
        t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto group_size = [&](const std::string& digits) {
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
            throw ConfigError("bad group size in distribution '" + text + "'");
        spec.kind = Dist::group;
        spec.g = std::stoul(digits);
        if (spec.g == 0)
            throw ConfigError("group size must be positive");
    };
    if (t == "u")
        spec.kind = Dist::uniform;
    else if (t == "g")
        spec.kind = Dist::gaussian;
    else if (t == "b")
        spec.kind = Dist::bucket;
    else if (t == "s")
        spec.kind = Dist::staggered;
    else if (t == "dd")
        spec.kind = Dist::dup;
    else if (t == "wr")
        spec.kind = Dist::worst_regular;
    else if (t.starts_with("gg:"))
        group_size(t.substr(3));
    else if (t.size() > 2 && t.ends_with("-g"))
        group_size(t.substr(0, t.size() - 2));
    else
        throw ConfigError("unknown distribution '" + text + "' (expected u, g, b, gg:<g>, s, dd, wr)");
    return spec;
}

inline std::string dist_label(const DistributionSpec& spec) {
    switch (spec.kind) {
    case Dist::uniform: return "U";
    case Dist::gaussian: return "G";
    case Dist::bucket: return "B";
    case Dist::group: return std::to_string(spec.g) + "-G";
    case Dist::staggered: return "S";
    case Dist::dup: return "DD";
    case Dist::worst_regular: return "WR";
    }
    return "?";
}

inline std::string describe(const DistributionSpec& spec) {
    switch (spec.kind) {
    case Dist::uniform: return "uniform[0,2^31)";
    case Dist::gaussian: return "gaussian: mean of 4 uniform[0,2^31) draws";
    case Dist::bucket: return "bucket sorted: p buckets of n/p^2 keys per processor";
    case Dist::group:
        return std::to_string(spec.g) + "-group: buckets shifted by p/2 within groups of " +
               std::to_string(spec.g) + " processors";
    case Dist::staggered: return "staggered: processor ranges interleaved by halves";
    case Dist::dup:
        return "deterministic duplicates (reconstruction): halving blocks of processors, "
               "then halving runs on the last processor, each filled with floor(lg(n/(p 2^(i-1))))";
    case Dist::worst_regular:
        return "worst regular (reconstruction): processor i holds i, i+p, i+2p, ... "
               "scaled into [0,2^31)";
    }
    return "?";
}

namespace detail {

inline std::int64_t range_lo(std::uint64_t b, std::size_t p) {
    return static_cast<std::int64_t>(b) * kIntMax / static_cast<std::int64_t>(p);
}

// Uniform in [b INT_MAX/p, (b+1) INT_MAX/p - 1].
inline Key draw_bucket(Prng& rng, std::uint64_t b, std::size_t p) {
    const std::int64_t lo = range_lo(b, p), hi = range_lo(b + 1, p);
    return lo + static_cast<Key>(rng.below(static_cast<std::uint64_t>(hi - lo)));
}

inline Key floor_lg_or_zero(std::uint64_t v) {
    return v == 0 ? 0 : static_cast<Key>(std::bit_width(v) - 1);
}

} // namespace detail

/*!
 * Per-processor key arrays for a benchmark distribution. Every key lies in
 * [0, 2^31). n must be divisible by p.
 */
inline std::vector<std::vector<Key>> gen(const DistributionSpec& spec) {
    const std::uint64_t n = spec.n;
    const std::size_t p = spec.p;
    if (p == 0)
        throw ConfigError("p must be positive");
    if (n % p != 0)
        throw ConfigError("n=" + std::to_string(n) + " is not divisible by p=" + std::to_string(p));
    const std::uint64_t m = n / p;
    std::size_t g = spec.g;
    if (spec.kind == Dist::group) {
        g = std::min(g, p);
        if (p % g != 0)
            throw ConfigError("group size " + std::to_string(spec.g) + " does not divide p=" +
                              std::to_string(p));
    }

    std::vector<std::vector<Key>> out(p, std::vector<Key>(m));
    for (std::size_t i = 0; i < p; ++i) {
        Prng rng = Prng::stream(20 + spec.seed, i);
        auto& a = out[i];
        switch (spec.kind) {
        case Dist::uniform:
            for (auto& k : a)
                k = rng.next_u31();
            break;
        case Dist::gaussian:
            for (auto& k : a) {
                std::uint64_t sum = 0;
                for (int c = 0; c < 4; ++c)
                    sum += rng.next_u31();
                k = static_cast<Key>(sum / 4);
            }
            break;
        case Dist::bucket:
            for (std::uint64_t j = 0; j < m; ++j)
                a[j] = detail::draw_bucket(rng, j * p / m, p);
            break;
        case Dist::group: {
            // The upper end of the range is taken from the same bucket, so
            // bucket p-1 does not wrap to an empty range.
            const std::uint64_t grp = i / g;
            for (std::uint64_t j = 0; j < m; ++j) {
                const std::uint64_t b = j * g / m;
                a[j] = detail::draw_bucket(rng, (grp * g + p / 2 + b) % p, p);
            }
            break;
        }
        case Dist::staggered: {
            const std::uint64_t b = i < p / 2 ? 2 * i + 1 : i - p / 2;
            for (auto& k : a)
                k = detail::draw_bucket(rng, b, p);
            break;
        }
        case Dist::dup:
            break;
        case Dist::worst_regular:
            for (std::uint64_t j = 0; j < m; ++j) {
                const unsigned __int128 v = static_cast<unsigned __int128>(i + j * p) *
                                            static_cast<unsigned __int128>(kIntMax);
                a[j] = static_cast<Key>(v / n);
            }
            break;
        }
    }

    if (spec.kind == Dist::dup) {
        // Leading blocks of p/2, p/4, ... processors, then the last
        // processor's array in halves, quarters, ...
        auto constant = [&](std::uint64_t level) {
            return detail::floor_lg_or_zero(n / (p * (std::uint64_t{1} << std::min<std::uint64_t>(level, 63))));
        };
        std::size_t start = 0;
        std::uint64_t level = 0;
        while (start + 1 < p) {
            const std::size_t size = std::max<std::size_t>(1, (p - start) / 2);
            for (std::size_t i = start; i < start + size; ++i)
                std::fill(out[i].begin(), out[i].end(), constant(level));
            start += size;
            ++level;
        }
        auto& last = out[p - 1];
        std::uint64_t pos = 0;
        level = 0;
        while (pos < m) {
            const std::uint64_t len = std::max<std::uint64_t>(1, (m - pos) / 2);
            std::fill(last.begin() + static_cast<std::ptrdiff_t>(pos),
                      last.begin() + static_cast<std::ptrdiff_t>(pos + len), constant(level));
            pos += len;
            ++level;
        }
    }
    return out;
}

} // namespace bspsort
