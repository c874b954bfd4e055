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

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cutflow/interp.hpp"
#include "cutflow/ir.hpp"
#include "cutflow/xform.hpp"

namespace cutflow {

/// A container region in the original program's index space.
struct DataRef {
  std::string container;
  SubsetRange range;

  std::string str() const;
  friend bool operator==(const DataRef&, const DataRef&) = default;
};

/// Standalone sub-program around a change set. Copied nodes and states keep
/// their original IDs, so transformation sites stay valid inside it.
struct Cutout {
  Program program;
  std::map<NodeId, NodeId> origin;  // cutout node -> original node
  std::set<StateId> region;         // original states the cutout covers
  bool whole_states = false;        // true when region states are copied in full
  std::set<NodeId> nodes;           // original nodes copied
  std::vector<std::string> input_symbols;
  std::vector<DataRef> input_configuration;
  std::vector<DataRef> system_state;
  // Index origin of containers shrunk to the accessed hull; absent = no shift.
  std::map<std::string, std::vector<SymExpr>> offsets;
  std::vector<std::string> warnings;

  std::vector<std::string> input_containers() const;
  std::vector<std::string> system_state_containers() const;
  /// Total elements in the input configuration. Throws kUnboundSymbol.
  std::int64_t input_volume(const Binding& binding) const;
};

/// Throws Error(kEmptyChangeSet) or Error(kUnknownElement).
Cutout extract(const Program& p, const ChangeSet& delta);
/// Extraction around explicit nodes of one state.
Cutout extract_nodes(const Program& p, StateId state, const std::set<NodeId>& nodes);

/// Containers the cutout writes that are external or read after it.
std::vector<DataRef> compute_system_state(const Program& p, const Cutout& c);
/// Containers the cutout reads that are external or written before it.
std::vector<DataRef> compute_input_config(const Program& p, const Cutout& c);

/// Per-container hull of a tasklet memlet over all enclosing map ranges.
/// Dimensions that cannot be bounded fall back to the full extent.
SubsetRange propagate_subset(const Program& p, const State& s, NodeId tasklet, const std::string& container,
                             const SubsetRange& subset);

/// `cutout-meta.json` text: origin map, inputs, system state, offsets.
std::string cutout_meta_json(const Cutout& c);

/// Runs `p` on `in` and records the input the cutout sees each time
/// execution enters it, up to `max_entries` entries.
std::vector<ExecutionInput> capture_inputs(const Program& p, const Cutout& c, const ExecutionInput& in,
                                           std::size_t max_entries = 16, ExecutionOutcome* whole = nullptr,
                                           std::uint64_t budget = kDefaultBudget);

}  // namespace cutflow
