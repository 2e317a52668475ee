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

namespace bspsort {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/*!
 * 64-bit linear congruential generator (Knuth's MMIX constants) with a
 * splitmix64 output finalizer. The seed is passed through splitmix64 once so
 * nearby seeds (21, 1022, 2023, ...) start far apart.
 *
 * The generator is fully specified here so streams reproduce bit-for-bit on
 * every platform.
 */
class Prng
{
public:
    static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
    static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

    explicit Prng(std::uint64_t seed) : state_(splitmix64(seed)) {}

    //! Stream of processor i: seed base + 1001 * i.
    static Prng stream(std::uint64_t base, std::uint64_t i) { return Prng(base + 1001 * i); }

    std::uint64_t next() {
        state_ = state_ * kMultiplier + kIncrement;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    //! Value in [0, 2^31 - 1], the range of C's random().
    std::uint32_t next_u31() { return static_cast<std::uint32_t>(next() >> 33); }

    //! next() mod bound; bound must be positive.
    std::uint64_t below(std::uint64_t bound) { return next() % bound; }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

} // namespace bspsort
