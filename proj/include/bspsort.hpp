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

#include "bspsort/benchgen.hpp"
#include "bspsort/bsp/engine.hpp"
#include "bspsort/costmodel.hpp"
#include "bspsort/primitives.hpp"
#include "bspsort/prng.hpp"
#include "bspsort/seq/element.hpp"
#include "bspsort/seq/loser_tree.hpp"
#include "bspsort/seq/quicksort.hpp"
#include "bspsort/seq/radix_sort.hpp"
#include "bspsort/seq/sampling.hpp"
#include "bspsort/sort/common.hpp"
#include "bspsort/sort/sort_det_bsp.hpp"
#include "bspsort/sort/sort_iran_bsp.hpp"
#include "bspsort/sort/sort_ran_bsp.hpp"
