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

#include <compare>
#include <concepts>
#include <cstdint>
#include <limits>
#include <type_traits>

namespace bspsort {

using Key = std::int64_t;

//! Reserved as the padding value; real inputs equal to it are biased down.
inline constexpr Key kSentinelKey = std::numeric_limits<Key>::max();

/*!
 * What the sorts need from an element type: its key, and a padding element
 * that orders after every real element. Only the key takes part in
 * comparisons; everything else rides along.
 */
template <typename T>
struct ElementTraits;

template <>
struct ElementTraits<Key> {
    static Key key(Key k) noexcept { return k; }
    static Key sentinel() noexcept { return kSentinelKey; }
};

//! Key with a caller-defined origin word, used to observe stability.
struct Traced {
    Key key = 0;
    std::uint64_t origin = 0;

    friend bool operator==(const Traced&, const Traced&) = default;
};

template <>
struct ElementTraits<Traced> {
    static Key key(const Traced& t) noexcept { return t.key; }
    static Traced sentinel() noexcept { return {kSentinelKey, ~std::uint64_t{0}}; }
};

template <typename T>
concept SortElement = std::is_trivially_copyable_v<T> && sizeof(T) % 8 == 0 && requires(const T& t) {
    { ElementTraits<T>::key(t) } -> std::convertible_to<Key>;
    { ElementTraits<T>::sentinel() } -> std::convertible_to<T>;
};

template <SortElement T>
inline Key key_of(const T& t) noexcept {
    return ElementTraits<T>::key(t);
}

/*!
 * Sample key tagged with where it lives: the processor holding it and its
 * index in that processor's locally sorted array. Three words.
 */
struct SampleRecord {
    Key key = 0;
    std::uint64_t pid = 0;
    std::uint64_t index = 0;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

static_assert(sizeof(SampleRecord) == 3 * sizeof(std::uint64_t));

//! Lexicographic (key, pid, index); distinct positions never compare equal.
inline std::strong_ordering cmp_tagged(const SampleRecord& a, const SampleRecord& b) noexcept {
    if (auto c = a.key <=> b.key; c != 0)
        return c;
    if (auto c = a.pid <=> b.pid; c != 0)
        return c;
    return a.index <=> b.index;
}

inline bool operator<(const SampleRecord& a, const SampleRecord& b) noexcept {
    return cmp_tagged(a, b) < 0;
}

struct TaggedLess {
    bool operator()(const SampleRecord& a, const SampleRecord& b) const noexcept {
        return cmp_tagged(a, b) < 0;
    }
};

//! Local element at `index` on `pid`, viewed as a tagged record.
inline bool local_less_than(Key key, std::uint64_t pid, std::uint64_t index,
                            const SampleRecord& splitter) noexcept {
    return cmp_tagged(SampleRecord{key, pid, index}, splitter) < 0;
}

//! Operation counts reported by the sequential kernels.
struct KernelStats {
    std::uint64_t comparisons = 0;
    std::uint64_t moves = 0;

    std::uint64_t ops() const noexcept { return comparisons + moves; }
};

} // namespace bspsort
