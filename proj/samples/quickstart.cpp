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

// Sorts 2^20 uniform keys on 8 logical processors with each algorithm and
// prints the time and the largest bucket.

#include <algorithm>
#include <cstdio>

#include "bspsort.hpp"

int main() {
    bspsort::DistributionSpec spec;
    spec.kind = bspsort::Dist::uniform;
    spec.n = 1 << 20;
    spec.p = 8;
    const auto input = bspsort::gen(spec);

    bspsort::SortOptions opt;
    opt.seq = bspsort::SeqSorter::quick;

    auto report = [&](const char* name, const auto& res) {
        bool sorted = true;
        bspsort::Key prev = INT64_MIN;
        for (const auto& part : res.outputs)
            for (bspsort::Key k : part) {
                sorted = sorted && prev <= k;
                prev = k;
            }
        std::printf("%-13s %.4f s  n_max %llu (bound %.0f)  %zu supersteps  %s\n", name,
                    res.wall_seconds, static_cast<unsigned long long>(res.imbalance.n_max_observed),
                    res.imbalance.n_max_bound, res.ledger.supersteps(),
                    sorted ? "sorted" : "NOT SORTED");
    };
    report("deterministic", bspsort::sort_det_bsp(input, opt));
    report("randomized", bspsort::sort_iran_bsp(input, opt));
    report("ran-baseline", bspsort::sort_ran_bsp(input, opt));
}
