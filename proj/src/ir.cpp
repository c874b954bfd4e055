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

#include "cutflow/ir.hpp"

#include <algorithm>
#include <queue>

#include "cutflow/error.hpp"

namespace cutflow {

std::string_view to_string(DType t) {
  switch (t) {
    case DType::kF64: return "f64";
    case DType::kF32: return "f32";
    case DType::kI64: return "i64";
    case DType::kI32: return "i32";
    case DType::kBool: return "bool";
  }
  return "?";
}

DType dtype_from_string(std::string_view s) {
  for (DType t : {DType::kF64, DType::kF32, DType::kI64, DType::kI32, DType::kBool}) {
    if (to_string(t) == s) return t;
  }
  throw Error(ErrorCode::kMalformedDocument, "unknown dtype '" + std::string(s) + "'");
}

bool is_float(DType t) { return t == DType::kF64 || t == DType::kF32; }

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::kF64:
    case DType::kI64: return 8;
    case DType::kF32:
    case DType::kI32: return 4;
    case DType::kBool: return 1;
  }
  return 0;
}

std::int64_t DataDescriptor::total_size(const Binding& binding) const {
  std::int64_t n = 1;
  for (const auto& s : shape) {
    std::int64_t d = s.eval(binding);
    if (d < 0) throw Error(ErrorCode::kNegativeExtent, "container '" + name + "' has extent " + std::to_string(d));
    n *= d;
  }
  return n;
}

std::string_view to_string(Wcr w) {
  switch (w) {
    case Wcr::kNone: return "none";
    case Wcr::kSum: return "sum";
    case Wcr::kMin: return "min";
    case Wcr::kMax: return "max";
  }
  return "?";
}

Wcr wcr_from_string(std::string_view s) {
  for (Wcr w : {Wcr::kNone, Wcr::kSum, Wcr::kMin, Wcr::kMax}) {
    if (to_string(w) == s) return w;
  }
  throw Error(ErrorCode::kMalformedDocument, "unknown wcr '" + std::string(s) + "'");
}

std::string Memlet::str() const {
  if (empty()) return "";
  std::string out = container + "[" + subset.str() + "]";
  if (wcr != Wcr::kNone) out += " (" + std::string(to_string(wcr)) + ")";
  return out;
}

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::kAccess: return "access";
    case NodeKind::kTasklet: return "tasklet";
    case NodeKind::kMapEntry: return "map_entry";
    case NodeKind::kMapExit: return "map_exit";
    case NodeKind::kOpaque: return "opaque";
  }
  return "?";
}

std::string Node::label() const {
  switch (kind()) {
    case NodeKind::kAccess: return as<AccessNode>().container;
    case NodeKind::kTasklet: return as<TaskletNode>().label;
    case NodeKind::kMapEntry: return as<MapEntryNode>().label;
    case NodeKind::kMapExit: return "exit " + std::to_string(as<MapExitNode>().entry);
    case NodeKind::kOpaque: return as<OpaqueNode>().label;
  }
  return "";
}

const Node* State::find(NodeId id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

Node* State::find(NodeId id) {
  return const_cast<Node*>(static_cast<const State*>(this)->find(id));
}

std::vector<const Edge*> State::in_edges(NodeId id) const {
  std::vector<const Edge*> out;
  for (const auto& e : edges) {
    if (e.dst == id) out.push_back(&e);
  }
  return out;
}

std::vector<const Edge*> State::out_edges(NodeId id) const {
  std::vector<const Edge*> out;
  for (const auto& e : edges) {
    if (e.src == id) out.push_back(&e);
  }
  return out;
}

std::vector<NodeId> State::topological_order() const {
  std::map<NodeId, int> indegree;
  std::map<NodeId, std::vector<NodeId>> succ;
  for (const auto& n : nodes) indegree[n.id] = 0;
  for (const auto& e : edges) {
    if (!indegree.count(e.src) || !indegree.count(e.dst)) continue;
    ++indegree[e.dst];
    succ[e.src].push_back(e.dst);
  }
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (const auto& [id, d] : indegree) {
    if (d == 0) ready.push(id);
  }
  std::vector<NodeId> order;
  while (!ready.empty()) {
    NodeId n = ready.top();
    ready.pop();
    order.push_back(n);
    for (NodeId m : succ[n]) {
      if (--indegree[m] == 0) ready.push(m);
    }
  }
  return order;
}

std::map<NodeId, NodeId> State::scopes() const {
  std::map<NodeId, NodeId> scope;
  for (NodeId id : topological_order()) {
    const Node* n = find(id);
    if (n->is<MapExitNode>()) {
      scope[id] = n->as<MapExitNode>().entry;
      continue;
    }
    NodeId s = kNoNode;
    for (const Edge* e : in_edges(id)) {
      const Node* p = find(e->src);
      if (!p) continue;
      if (p->is<MapEntryNode>()) {
        s = p->id;
      } else if (p->is<MapExitNode>()) {
        auto it = scope.find(p->as<MapExitNode>().entry);
        s = it == scope.end() ? kNoNode : it->second;
      } else {
        s = scope[p->id];
      }
      break;
    }
    scope[id] = s;
  }
  return scope;
}

void State::remove_node(NodeId id) {
  nodes.erase(std::remove_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; }), nodes.end());
  edges.erase(std::remove_if(edges.begin(), edges.end(),
                             [&](const Edge& e) { return e.src == id || e.dst == id; }),
              edges.end());
}

const State* Program::state(StateId id) const {
  for (const auto& s : states) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

State* Program::state(StateId id) {
  return const_cast<State*>(static_cast<const Program*>(this)->state(id));
}

const State* Program::state_of(NodeId node) const {
  for (const auto& s : states) {
    if (s.find(node)) return &s;
  }
  return nullptr;
}

State* Program::state_of(NodeId node) {
  return const_cast<State*>(static_cast<const Program*>(this)->state_of(node));
}

const Node* Program::node(NodeId id) const {
  const State* s = state_of(id);
  return s ? s->find(id) : nullptr;
}

const SymbolDecl* Program::symbol(std::string_view name) const {
  for (const auto& s : symbols) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const DataDescriptor& Program::container(const std::string& name) const {
  auto it = containers.find(name);
  if (it == containers.end()) throw Error(ErrorCode::kUnknownContainer, "container '" + name + "'");
  return it->second;
}

std::set<std::string> Program::assigned_symbols() const {
  std::set<std::string> out;
  for (const auto& e : interstate) {
    for (const auto& [name, value] : e.assignments) out.insert(name);
  }
  return out;
}

Assumptions Program::assumptions() const {
  Assumptions as;
  auto assigned = assigned_symbols();
  for (const auto& s : symbols) {
    if (assigned.count(s.name)) {
      as.bounds[s.name] = Interval{};
      continue;
    }
    Interval iv;
    iv.lo = s.min ? s.min : as.default_lower;
    iv.hi = s.max;
    as.bounds[s.name] = iv;
  }
  return as;
}

std::vector<Access> collect_accesses(const State& s) {
  std::vector<Access> out;
  for (const auto& n : s.nodes) {
    if (!n.is<TaskletNode>()) continue;
    for (const Edge* e : s.in_edges(n.id)) {
      if (!e->memlet.empty()) out.push_back({n.id, e->memlet.container, e->memlet.subset, false, e->memlet.wcr});
    }
    for (const Edge* e : s.out_edges(n.id)) {
      if (!e->memlet.empty()) out.push_back({n.id, e->memlet.container, e->memlet.subset, true, e->memlet.wcr});
    }
  }
  return out;
}

bool is_builtin_function(std::string_view name) {
  static const char* kNames[] = {"select", "min", "max", "abs", "sqrt", "exp", "log", "sin",
                                 "cos", "tanh", "floor", "ceil", "pow", "float", "int"};
  return std::any_of(std::begin(kNames), std::end(kNames), [&](const char* n) { return name == n; });
}

}  // namespace cutflow
