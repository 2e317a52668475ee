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

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bspsort/seq/element.hpp"

namespace bspsort {

namespace detail {

struct KeyIndex {
    Key key;
    std::uint64_t index;
};

inline bool key_index_less(const KeyIndex& a, const KeyIndex& b) noexcept {
    return a.key < b.key || (a.key == b.key && a.index < b.index);
}

inline constexpr std::size_t kInsertionCutoff = 16;

inline void insertion_sort(KeyIndex* a, std::size_t n, std::uint64_t& cmps) {
    for (std::size_t i = 1; i < n; ++i) {
        KeyIndex v = a[i];
        std::size_t j = i;
        while (j > 0) {
            ++cmps;
            if (!key_index_less(v, a[j - 1]))
                break;
            a[j] = a[j - 1];
            --j;
        }
        a[j] = v;
    }
}

// Median-of-three quicksort over a strict order. Recurses on the smaller
// side, so stack depth stays O(log n).
inline void quicksort(KeyIndex* a, std::size_t n, std::uint64_t& cmps) {
    while (n > kInsertionCutoff) {
        const std::size_t mid = n / 2;
        std::uint64_t c = 0;
        auto less = [&](const KeyIndex& x, const KeyIndex& y) {
            ++c;
            return key_index_less(x, y);
        };
        if (less(a[mid], a[0]))
            std::swap(a[mid], a[0]);
        if (less(a[n - 1], a[0]))
            std::swap(a[n - 1], a[0]);
        if (less(a[n - 1], a[mid]))
            std::swap(a[n - 1], a[mid]);
        const KeyIndex pivot = a[mid];

        std::size_t i = 0, j = n - 1;
        for (;;) {
            while (less(a[i], pivot))
                ++i;
            while (less(pivot, a[j]))
                --j;
            if (i >= j)
                break;
            std::swap(a[i], a[j]);
            ++i;
            --j;
        }
        cmps += c;
        // [0, j] and [j+1, n) after Hoare partitioning.
        const std::size_t left = j + 1;
        if (left < n - left) {
            quicksort(a, left, cmps);
            a += left;
            n -= left;
        } else {
            quicksort(a + left, n - left, cmps);
            n = left;
        }
    }
    insertion_sort(a, n, cmps);
}

} // namespace detail

/*!
 * Stable quicksort. Elements are compared as (key, original index) pairs,
 * which makes the order strict, so equal keys keep their input order.
 */
template <SortElement T>
KernelStats seq_sort_quick(std::span<T> data) {
    KernelStats stats;
    const std::size_t n = data.size();
    if (n < 2)
        return stats;
    std::vector<detail::KeyIndex> items(n);
    for (std::size_t i = 0; i < n; ++i)
        items[i] = {key_of(data[i]), i};
    detail::quicksort(items.data(), n, stats.comparisons);

    if constexpr (std::is_same_v<T, Key>) {
        for (std::size_t i = 0; i < n; ++i)
            data[i] = items[i].key;
    } else {
        std::vector<T> tmp(data.begin(), data.end());
        for (std::size_t i = 0; i < n; ++i)
            data[i] = tmp[items[i].index];
    }
    stats.moves = n;
    return stats;
}

} // namespace bspsort
