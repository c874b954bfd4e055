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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cutflow/ir.hpp"

namespace cutflow {

struct LoopStates {
  StateId guard = 0;
  StateId body = 0;
  StateId after = 0;
};

struct MapScope {
  NodeId entry = kNoNode;
  NodeId exit = kNoNode;
};

// One side of a mapped tasklet: connector, the access node outside the map,
// and the per-iteration subset.
struct MappedIo {
  std::string conn;
  NodeId access = kNoNode;
  std::string subset;
  Wcr wcr = Wcr::kNone;
};

struct MappedTasklet {
  NodeId entry = kNoNode;
  NodeId exit = kNoNode;
  NodeId tasklet = kNoNode;
};

/// Incremental construction of a Program. Every add_* call hands out a fresh
/// ID from the program's counter. The first state added becomes the start.
class ProgramBuilder {
 public:
  explicit ProgramBuilder(std::string name);

  void add_symbol(const std::string& name, std::optional<std::int64_t> min = std::nullopt,
                  std::optional<std::int64_t> max = std::nullopt);
  void add_container(const std::string& name, DType dtype, std::vector<SymExpr> shape, bool transient);

  StateId add_state(const std::string& label);
  NodeId add_access(StateId state, const std::string& container);
  /// `code` holds (outlet, expression text) pairs.
  NodeId add_tasklet(StateId state, const std::string& label, std::vector<std::string> inputs,
                     std::vector<std::string> outputs, const std::vector<std::pair<std::string, std::string>>& code);
  MapScope add_map(StateId state, const std::string& label, std::vector<std::string> params, std::vector<Range> ranges);
  NodeId add_opaque(StateId state, const std::string& label, bool may_have_side_effects);

  void add_memlet(StateId state, NodeId src, const std::string& src_conn, NodeId dst, const std::string& dst_conn,
                  const std::string& container, const SubsetRange& subset, Wcr wcr = Wcr::kNone);
  void add_memlet(StateId state, NodeId src, const std::string& src_conn, NodeId dst, const std::string& dst_conn,
                  const std::string& container, const std::string& subset, Wcr wcr = Wcr::kNone);
  /// Ordering-only edge.
  void add_edge(StateId state, NodeId src, NodeId dst);

  void add_interstate(StateId src, StateId dst, const std::string& guard = "",
                      const std::vector<std::pair<std::string, std::string>>& assignments = {});

  /// Sequential counted loop after `before`: before -> guard (var := begin),
  /// guard -> body while the condition holds, body -> guard (var := var +
  /// step), guard -> after otherwise. `step` must be a nonzero constant; its
  /// sign picks `<` or `>` for the condition. Declares `var` if needed.
  LoopStates add_loop(StateId before, const std::string& var, const SymExpr& begin, const SymExpr& end,
                      std::int64_t step, const std::string& label = "loop");

  /// A map around a single tasklet. Inputs enter through the map entry from
  /// their access nodes; outputs leave through the exit. A tasklet without
  /// inputs gets an ordering edge from the entry.
  MappedTasklet add_mapped_tasklet(StateId state, const std::string& label, std::vector<std::string> params,
                                   std::vector<Range> ranges, const std::vector<MappedIo>& inputs,
                                   const std::vector<std::pair<std::string, std::string>>& code,
                                   const std::vector<MappedIo>& outputs);

  Program& program() { return p_; }
  /// Returns the program; throws Error(kMalformedDocument) listing the
  /// diagnostics when validation fails.
  Program build() const;

 private:
  State& state(StateId id);
  void require_container(const std::string& name) const;

  Program p_;
};

/// "RankMismatch at node 4: ..." lines, one per diagnostic.
std::string format_diagnostics(const std::vector<Diagnostic>& diags);

}  // namespace cutflow
