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
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bspsort/prng.hpp"
#include "bspsort/seq/element.hpp"

namespace bspsort {

class ConfigError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/*!
 * Regular sample of a locally sorted array: s = r*p records, the last
 * element of each of the s segments of size x = ceil(n/s), i.e. indices
 * x*j - 1 for j = 1..s-1, followed by the local maximum.
 *
 * Indices past the end (only possible when n is not a multiple of s) are
 * clamped to n - 1; padded inputs never hit that case.
 */
template <SortElement T>
std::vector<SampleRecord> select_regular_sample(std::span<const T> sorted, std::size_t r,
                                                std::size_t p, std::uint64_t pid) {
    const std::size_t s = r * p;
    const std::size_t n = sorted.size();
    if (s == 0 || n < s)
        throw ConfigError("select_regular_sample: " + std::to_string(n) +
                          " local keys cannot supply a sample of " + std::to_string(s));
    const std::size_t x = (n + s - 1) / s;
    std::vector<SampleRecord> sample;
    sample.reserve(s);
    for (std::size_t j = 1; j < s; ++j) {
        const std::size_t idx = std::min(x * j - 1, n - 1);
        sample.push_back({key_of(sorted[idx]), pid, idx});
    }
    sample.push_back({key_of(sorted[n - 1]), pid, n - 1});
    return sample;
}

/*!
 * s positions drawn uniformly without replacement (Floyd's method: for
 * j = n-s..n-1 draw t = rng.below(j+1), take t unless already taken, else j),
 * returned as tagged records in increasing position order.
 */
template <SortElement T>
std::vector<SampleRecord> select_random_sample(std::span<const T> sorted, std::size_t s, Prng& rng,
                                               std::uint64_t pid) {
    const std::size_t n = sorted.size();
    if (s > n)
        throw ConfigError("select_random_sample: sample of " + std::to_string(s) +
                          " exceeds " + std::to_string(n) + " local keys");
    std::vector<bool> taken(n, false);
    std::vector<std::size_t> positions;
    positions.reserve(s);
    for (std::size_t j = n - s; j < n; ++j) {
        const std::size_t t = static_cast<std::size_t>(rng.below(j + 1));
        const std::size_t pick = taken[t] ? j : t;
        taken[pick] = true;
        positions.push_back(pick);
    }
    std::sort(positions.begin(), positions.end());
    std::vector<SampleRecord> sample;
    sample.reserve(s);
    for (std::size_t idx : positions)
        sample.push_back({key_of(sorted[idx]), pid, idx});
    return sample;
}

/*!
 * Bucket boundaries of a sorted local array against p-1 tagged splitters.
 *
 * Local element j compares as (key, local_pid, j). bounds[d] for d < p-1 is
 * the number of local elements strictly below splitter d; bounds[p-1] = n.
 * Bucket d is [bounds[d-1], bounds[d]) with bounds[-1] = 0.
 */
template <SortElement T>
std::vector<std::size_t> splitter_search(std::span<const T> sorted,
                                         std::span<const SampleRecord> splitters,
                                         std::uint64_t local_pid, KernelStats* stats = nullptr) {
    const std::size_t n = sorted.size();
    std::vector<std::size_t> bounds(splitters.size() + 1, n);
    std::size_t from = 0;
    std::uint64_t cmps = 0;
    for (std::size_t d = 0; d < splitters.size(); ++d) {
        if (d > 0 && splitters[d] < splitters[d - 1])
            throw std::invalid_argument("splitter_search: splitters are not sorted");
        // Boundaries are monotone, so each search starts at the previous one.
        std::size_t lo = from, hi = n;
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            ++cmps;
            if (local_less_than(key_of(sorted[mid]), local_pid, mid, splitters[d]))
                lo = mid + 1;
            else
                hi = mid;
        }
        bounds[d] = lo;
        from = lo;
    }
    if (stats)
        stats->comparisons += cmps;
    return bounds;
}

} // namespace bspsort
