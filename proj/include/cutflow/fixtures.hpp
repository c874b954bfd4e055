// Copyright 2026 The cutflow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cutflow/ir.hpp"

namespace cutflow::fixtures {

/// R = ((A*B) -> tmp1 -> U) * C -> V, then R = V * D, in one state. Each
/// product is a map over (i, j) around an initializing tasklet and a nested
/// reduction map over k. tmp1 is transient, everything else is external.
Program matrix_chain();

/// y = f(x) and z = g(x) in two maps, then a map computing
/// out = h(y, z * 2) through an intermediate `tmp`. With `live_tmp`, tmp also
/// leaves the map and a later map computes w = tmp + 1.
Program fgh(bool live_tmp = false);

/// Doubles my_arr[0:10] of an array of length N >= 10.
Program first_ten();

/// Sequential loop i = 4, 3, 2, 1 computing A[i-1] = B[i-1] + i.
Program negative_step_loop();

/// out = select(v > 900, select(v > 990, x - 1, x + 1), x + 1) with
/// v = x * 1000; the inner branch is rarely taken by uniform inputs.
Program branchy(bool modified = false);

std::vector<std::pair<std::string, Program>> all();

}  // namespace cutflow::fixtures
