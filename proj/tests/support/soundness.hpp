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

#include <cstdint>
#include <string>

#include "cutflow/cutout.hpp"
#include "cutflow/xform.hpp"

namespace cutflow::testing {

struct SoundnessTally {
  std::size_t checked = 0;         // inputs where the original program completed
  std::size_t whole_differs = 0;   // ... and the transformed program disagreed
  std::size_t counterexamples = 0; // ... but no captured cutout entry did
  std::string first;               // description of the first counterexample
};

/// Runs `inputs` random whole-program inputs through p and T(p) and checks
/// that every observable difference is reproduced by the cutout pair on one
/// of the inputs captured at the cutout's entry.
void check_soundness(const Program& p, const TransformationInstance& t, const Program& transformed,
                     const Cutout& c, int inputs, std::uint64_t seed, SoundnessTally& tally);

}  // namespace cutflow::testing
