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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cutflow/expr.hpp"
#include "cutflow/symexpr.hpp"

namespace cutflow {

// Node and state IDs share one counter per program and are never reused.
using NodeId = std::uint64_t;
using StateId = std::uint64_t;
inline constexpr NodeId kNoNode = 0;

enum class DType { kF64, kF32, kI64, kI32, kBool };

std::string_view to_string(DType t);
DType dtype_from_string(std::string_view s);
bool is_float(DType t);
std::size_t dtype_size(DType t);

struct DataDescriptor {
  std::string name;
  DType dtype = DType::kF64;
  std::vector<SymExpr> shape;  // empty shape is a scalar
  bool transient = false;

  std::size_t rank() const { return shape.size(); }
  SubsetRange full() const { return SubsetRange::full(shape); }
  std::int64_t total_size(const Binding& binding) const;
  friend bool operator==(const DataDescriptor&, const DataDescriptor&) = default;
};

struct SymbolDecl {
  std::string name;
  std::optional<std::int64_t> min;
  std::optional<std::int64_t> max;
  friend bool operator==(const SymbolDecl&, const SymbolDecl&) = default;
};

enum class Wcr { kNone, kSum, kMin, kMax };
std::string_view to_string(Wcr w);
Wcr wcr_from_string(std::string_view s);

// An edge without a container is a pure ordering dependency.
struct Memlet {
  std::string container;
  SubsetRange subset;
  Wcr wcr = Wcr::kNone;

  bool empty() const { return container.empty(); }
  std::string str() const;
  friend bool operator==(const Memlet&, const Memlet&) = default;
};

struct AccessNode {
  std::string container;
  friend bool operator==(const AccessNode&, const AccessNode&) = default;
};

struct TaskletNode {
  std::string label;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  // One single-assignment expression per outlet.
  std::vector<std::pair<std::string, ScalarExpr>> code;
  friend bool operator==(const TaskletNode&, const TaskletNode&) = default;
};

struct MapEntryNode {
  std::string label;
  std::vector<std::string> params;
  std::vector<Range> ranges;
  NodeId exit = kNoNode;
  friend bool operator==(const MapEntryNode&, const MapEntryNode&) = default;
};

struct MapExitNode {
  NodeId entry = kNoNode;
  friend bool operator==(const MapExitNode&, const MapExitNode&) = default;
};

struct OpaqueNode {
  std::string label;
  bool may_have_side_effects = true;
  friend bool operator==(const OpaqueNode&, const OpaqueNode&) = default;
};

enum class NodeKind { kAccess, kTasklet, kMapEntry, kMapExit, kOpaque };
std::string_view to_string(NodeKind k);

struct Node {
  NodeId id = kNoNode;
  std::variant<AccessNode, TaskletNode, MapEntryNode, MapExitNode, OpaqueNode> data;

  NodeKind kind() const { return static_cast<NodeKind>(data.index()); }
  template <typename T>
  bool is() const { return std::holds_alternative<T>(data); }
  template <typename T>
  const T& as() const { return std::get<T>(data); }
  template <typename T>
  T& as() { return std::get<T>(data); }
  std::string label() const;
  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  NodeId src = kNoNode;
  std::string src_conn;
  NodeId dst = kNoNode;
  std::string dst_conn;
  Memlet memlet;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct State {
  StateId id = 0;
  std::string label;
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  const Node* find(NodeId id) const;
  Node* find(NodeId id);
  std::vector<const Edge*> in_edges(NodeId id) const;
  std::vector<const Edge*> out_edges(NodeId id) const;
  /// Kahn order with smallest-ID tie breaking. Nodes on a cycle are omitted.
  std::vector<NodeId> topological_order() const;
  /// Innermost enclosing MapEntry per node (kNoNode at top level). A MapExit
  /// belongs to the scope opened by its own entry.
  std::map<NodeId, NodeId> scopes() const;
  void remove_node(NodeId id);
  friend bool operator==(const State&, const State&) = default;
};

struct InterstateEdge {
  StateId src = 0;
  StateId dst = 0;
  ScalarExpr guard;  // null means unconditional
  std::vector<std::pair<std::string, SymExpr>> assignments;
  friend bool operator==(const InterstateEdge&, const InterstateEdge&) = default;
};

struct Program {
  std::string name;
  std::vector<SymbolDecl> symbols;
  std::map<std::string, DataDescriptor> containers;
  std::vector<State> states;
  std::vector<InterstateEdge> interstate;
  StateId start = 0;
  std::uint64_t next_id = 1;

  std::uint64_t fresh_id() { return next_id++; }
  const State* state(StateId id) const;
  State* state(StateId id);
  const State* state_of(NodeId node) const;
  State* state_of(NodeId node);
  const Node* node(NodeId id) const;
  const SymbolDecl* symbol(std::string_view name) const;
  bool has_symbol(std::string_view name) const { return symbol(name) != nullptr; }
  const DataDescriptor& container(const std::string& name) const;
  /// Symbols assigned on some interstate edge, e.g. loop variables.
  std::set<std::string> assigned_symbols() const;
  /// Bounds from symbol declarations; assigned symbols are left unbounded.
  Assumptions assumptions() const;
  friend bool operator==(const Program&, const Program&) = default;
};

enum class DiagnosticKind {
  kRankMismatch,
  kUnbalancedScope,
  kUnknownContainer,
  kUnknownSymbol,
  kUnknownName,
  kNameCollision,
  kDuplicateId,
  kDanglingEdge,
  kCycle,
  kBadConnector,
  kIllegalEdge,
  kMissingStart,
  kUnreachableState,
};
std::string_view to_string(DiagnosticKind k);

struct Diagnostic {
  DiagnosticKind kind;
  std::string element;  // "node 12", "state 3", "container A", ...
  std::string message;
};

std::vector<Diagnostic> validate(const Program& p);

/// Memlet executed by a tasklet: reads are tasklet in-edges, writes are
/// tasklet out-edges. Subsets may mention enclosing map parameters.
struct Access {
  NodeId tasklet = kNoNode;
  std::string container;
  SubsetRange subset;
  bool write = false;
  Wcr wcr = Wcr::kNone;
};
std::vector<Access> collect_accesses(const State& s);

/// Functions callable from tasklet code.
bool is_builtin_function(std::string_view name);

}  // namespace cutflow
