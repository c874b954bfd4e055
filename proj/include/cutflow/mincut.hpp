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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cutflow/cutout.hpp"

namespace cutflow {

/// Capacitated directed graph with a dummy source and sink. Index 0 is S,
/// index 1 is T.
struct FlowNetwork {
  static constexpr std::size_t kSource = 0;
  static constexpr std::size_t kSink = 1;

  struct Arc {
    std::size_t from = 0;
    std::size_t to = 0;
    std::optional<std::int64_t> capacity;  // nullopt = infinite
    std::string memlet;                    // originating memlet, if any
  };

  std::vector<NodeId> nodes{kNoNode, kNoNode};  // original node per index
  std::vector<std::string> labels{"S", "T"};
  std::vector<Arc> arcs;

  std::size_t add_node(NodeId original = kNoNode, std::string label = {});
  void add_arc(std::size_t from, std::size_t to, std::optional<std::int64_t> capacity, std::string memlet = {});
  /// Strictly greater than the sum of all finite capacities.
  std::int64_t infinity() const;
  std::string dot() const;
};

struct FlowResult {
  std::int64_t value = 0;
  std::vector<bool> source_side;  // residual reachability from S, per node index
};

/// Edmonds-Karp: shortest augmenting paths, exact on integer capacities.
FlowResult max_flow(const FlowNetwork& net);

/// Flow network around a single-state cutout. Top-level map nests collapse
/// into their entry node. Throws kUnboundSymbol or kInvalidArgument for
/// whole-state cutouts.
FlowNetwork prepare(const Program& p, const Cutout& c, const Binding& binding);

struct CutResult {
  std::int64_t flow = 0;
  std::set<NodeId> extension;  // original nodes added to the cutout
  std::int64_t old_volume = 0;
  std::int64_t new_volume = 0;
  bool extended = false;  // false when the original cutout was kept
  Cutout cutout;
};

/// Every free symbol of `p` bound to `fallback`, overridden by `given`.
Binding concretize(const Program& p, const Binding& given = {}, std::int64_t fallback = 64);

/// Extends the cutout by the sink side of the minimum input-flow cut and
/// keeps it only if the input volume strictly drops. Whole-state cutouts
/// are returned unchanged.
CutResult minimize_inputs(const Program& p, const Cutout& c, const Binding& binding);

}  // namespace cutflow
