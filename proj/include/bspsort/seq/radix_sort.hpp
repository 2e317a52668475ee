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
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "bspsort/seq/element.hpp"

namespace bspsort {

/*!
 * LSD radix sort on 64-bit signed keys: 8-bit digits, up to 8 passes. The
 * sign bit is flipped so negative keys order first. Passes whose digit is
 * constant across the input are skipped. Stable.
 */
template <SortElement T>
KernelStats seq_sort_radix(std::span<T> data) {
    constexpr int kPasses = 8;
    constexpr std::uint64_t kSign = std::uint64_t{1} << 63;
    KernelStats stats;
    const std::size_t n = data.size();
    if (n < 2)
        return stats;

    auto ukey = [](const T& v) { return static_cast<std::uint64_t>(key_of(v)) ^ kSign; };

    std::array<std::array<std::size_t, 256>, kPasses> hist{};
    for (const T& v : data) {
        std::uint64_t k = ukey(v);
        for (int d = 0; d < kPasses; ++d, k >>= 8)
            ++hist[d][k & 0xff];
    }
    stats.moves += n;

    std::vector<T> buffer(n);
    std::span<T> src = data, dst(buffer);
    for (int d = 0; d < kPasses; ++d) {
        auto& h = hist[d];
        if (std::any_of(h.begin(), h.end(), [n](std::size_t c) { return c == n; }))
            continue;
        std::size_t sum = 0;
        for (auto& c : h) {
            const std::size_t t = c;
            c = sum;
            sum += t;
        }
        const int shift = 8 * d;
        for (const T& v : src)
            dst[h[(ukey(v) >> shift) & 0xff]++] = v;
        std::swap(src, dst);
        stats.moves += n;
    }
    if (src.data() != data.data())
        std::copy(src.begin(), src.end(), data.begin());
    return stats;
}

} // namespace bspsort
