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
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "bspsort/seq/element.hpp"

namespace bspsort {

/*!
 * Tournament tree over k sorted runs that keeps the loser at each internal
 * node. Equal keys are won by the lower run id, so merging is stable when
 * runs are given in origin order. Each pop costs ceil(lg k) comparisons.
 */
template <SortElement T>
class LoserTree
{
public:
    explicit LoserTree(std::span<const std::span<const T>> runs) : runs_(runs) {
        const std::size_t k = runs.size();
        leaves_ = 1;
        while (leaves_ < k)
            leaves_ <<= 1;
        pos_.assign(leaves_, 0);
        tree_.assign(leaves_, 0);
        tree_[0] = leaves_ == 1 ? 0 : init(1);
    }

    bool empty() const { return exhausted(tree_[0]); }

    //! Removes and returns the smallest head.
    const T& pop() {
        const std::size_t w0 = tree_[0];
        const T& out = runs_[w0][pos_[w0]++];
        std::size_t w = w0;
        for (std::size_t node = (w0 + leaves_) / 2; node >= 1; node /= 2) {
            if (beats(tree_[node], w))
                std::swap(tree_[node], w);
        }
        tree_[0] = w;
        return out;
    }

    std::uint64_t comparisons() const { return comparisons_; }

private:
    bool exhausted(std::size_t s) const { return s >= runs_.size() || pos_[s] >= runs_[s].size(); }

    bool beats(std::size_t a, std::size_t b) {
        if (exhausted(a))
            return false;
        if (exhausted(b))
            return true;
        ++comparisons_;
        const Key ka = key_of(runs_[a][pos_[a]]), kb = key_of(runs_[b][pos_[b]]);
        return ka < kb || (ka == kb && a < b);
    }

    std::size_t init(std::size_t node) {
        if (node >= leaves_)
            return node - leaves_;
        const std::size_t l = init(2 * node), r = init(2 * node + 1);
        if (beats(r, l)) {
            tree_[node] = l;
            return r;
        }
        tree_[node] = r;
        return l;
    }

    std::span<const std::span<const T>> runs_;
    std::size_t leaves_ = 1;
    std::vector<std::size_t> pos_;
    std::vector<std::size_t> tree_;
    std::uint64_t comparisons_ = 0;
};

//! Stable k-way merge of sorted runs into `out` (sized to the total length).
template <SortElement T>
KernelStats multiway_merge(std::span<const std::span<const T>> runs, std::span<T> out) {
    KernelStats stats;
    std::size_t total = 0;
    for (const auto& r : runs)
        total += r.size();
    if (out.size() != total)
        throw std::invalid_argument("multiway_merge: output size does not match input");

    std::size_t nonempty = 0, last = 0;
    for (std::size_t i = 0; i < runs.size(); ++i)
        if (!runs[i].empty()) {
            ++nonempty;
            last = i;
        }
    if (nonempty <= 1) {
        if (nonempty == 1)
            std::copy(runs[last].begin(), runs[last].end(), out.begin());
        stats.moves = total;
        return stats;
    }

    LoserTree<T> tree(runs);
    for (std::size_t i = 0; i < total; ++i)
        out[i] = tree.pop();
    stats.comparisons = tree.comparisons();
    stats.moves = total;
    return stats;
}

template <SortElement T>
std::vector<T> multiway_merge(const std::vector<std::vector<T>>& runs, KernelStats* stats = nullptr) {
    std::vector<std::span<const T>> views(runs.begin(), runs.end());
    std::size_t total = 0;
    for (const auto& r : runs)
        total += r.size();
    std::vector<T> out(total);
    const KernelStats s = multiway_merge<T>(views, out);
    if (stats)
        *stats = s;
    return out;
}

} // namespace bspsort
