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

#include <algorithm>
#include <functional>
#include <queue>

#include "cutflow/ir.hpp"

namespace cutflow {

std::string_view to_string(DiagnosticKind k) {
  switch (k) {
    case DiagnosticKind::kRankMismatch: return "RankMismatch";
    case DiagnosticKind::kUnbalancedScope: return "UnbalancedScope";
    case DiagnosticKind::kUnknownContainer: return "UnknownContainer";
    case DiagnosticKind::kUnknownSymbol: return "UnknownSymbol";
    case DiagnosticKind::kUnknownName: return "UnknownName";
    case DiagnosticKind::kNameCollision: return "NameCollision";
    case DiagnosticKind::kDuplicateId: return "DuplicateId";
    case DiagnosticKind::kDanglingEdge: return "DanglingEdge";
    case DiagnosticKind::kCycle: return "Cycle";
    case DiagnosticKind::kBadConnector: return "BadConnector";
    case DiagnosticKind::kIllegalEdge: return "IllegalEdge";
    case DiagnosticKind::kMissingStart: return "MissingStart";
    case DiagnosticKind::kUnreachableState: return "UnreachableState";
  }
  return "?";
}

namespace {

std::string node_ref(NodeId id) { return "node " + std::to_string(id); }
std::string state_ref(StateId id) { return "state " + std::to_string(id); }

class Validator {
 public:
  explicit Validator(const Program& p) : p_(p) {
    for (const auto& s : p.symbols) symbols_.insert(s.name);
  }

  std::vector<Diagnostic> run() {
    check_names();
    check_ids();
    for (const auto& s : p_.states) check_state(s);
    check_interstate();
    return std::move(out_);
  }

 private:
  void report(DiagnosticKind k, std::string element, std::string message) {
    out_.push_back({k, std::move(element), std::move(message)});
  }

  void check_symbols(const std::set<std::string>& used, const std::set<std::string>& extra,
                     const std::string& element) {
    for (const auto& u : used) {
      if (!symbols_.count(u) && !extra.count(u)) {
        report(DiagnosticKind::kUnknownSymbol, element, "undeclared symbol '" + u + "'");
      }
    }
  }

  void check_names() {
    std::set<std::string> seen;
    for (const auto& s : p_.symbols) {
      if (!seen.insert(s.name).second) {
        report(DiagnosticKind::kNameCollision, "symbol " + s.name, "declared twice");
      }
      if (p_.containers.count(s.name)) {
        report(DiagnosticKind::kNameCollision, "symbol " + s.name, "also names a container");
      }
    }
    for (const auto& [name, desc] : p_.containers) {
      if (desc.name != name) {
        report(DiagnosticKind::kNameCollision, "container " + name, "descriptor is named '" + desc.name + "'");
      }
      std::set<std::string> used;
      for (const auto& d : desc.shape) d.collect_symbols(used);
      check_symbols(used, {}, "container " + name);
    }
  }

  void check_ids() {
    std::set<std::uint64_t> ids;
    auto claim = [&](std::uint64_t id, const std::string& element) {
      if (id == 0 || id >= p_.next_id || !ids.insert(id).second) {
        report(DiagnosticKind::kDuplicateId, element, "id is reused or not below next_id");
      }
    };
    for (const auto& s : p_.states) {
      claim(s.id, state_ref(s.id));
      for (const auto& n : s.nodes) claim(n.id, node_ref(n.id));
    }
  }

  // Parameters of every map scope enclosing `id`, including the node itself
  // when it is a MapEntry or MapExit.
  std::set<std::string> params_in_scope(const State& s, const std::map<NodeId, NodeId>& scope, NodeId id) {
    std::set<std::string> params;
    const Node* n = s.find(id);
    NodeId cur = kNoNode;
    if (n && n->is<MapEntryNode>()) {
      cur = id;
    } else {
      auto it = scope.find(id);
      cur = it == scope.end() ? kNoNode : it->second;
    }
    std::set<NodeId> visited;
    while (cur != kNoNode && visited.insert(cur).second) {
      const Node* e = s.find(cur);
      if (!e || !e->is<MapEntryNode>()) break;
      for (const auto& prm : e->as<MapEntryNode>().params) params.insert(prm);
      auto it = scope.find(cur);
      cur = it == scope.end() ? kNoNode : it->second;
    }
    return params;
  }

  void check_state(const State& s) {
    auto order = s.topological_order();
    if (order.size() != s.nodes.size()) {
      report(DiagnosticKind::kCycle, state_ref(s.id), "dataflow graph has a cycle");
      return;
    }
    for (const auto& e : s.edges) {
      if (!s.find(e.src) || !s.find(e.dst)) {
        report(DiagnosticKind::kDanglingEdge, state_ref(s.id),
               "edge " + std::to_string(e.src) + " -> " + std::to_string(e.dst) + " has a missing endpoint");
      }
    }
    auto scope = s.scopes();
    check_scopes(s, scope);
    for (const auto& n : s.nodes) check_node(s, scope, n);
    for (const auto& e : s.edges) check_edge(s, scope, e);
  }

  NodeId pred_scope(const State& s, const std::map<NodeId, NodeId>& scope, NodeId pred) {
    const Node* p = s.find(pred);
    if (!p) return kNoNode;
    if (p->is<MapEntryNode>()) return p->id;
    if (p->is<MapExitNode>()) {
      auto it = scope.find(p->as<MapExitNode>().entry);
      return it == scope.end() ? kNoNode : it->second;
    }
    return scope.at(pred);
  }

  void check_scopes(const State& s, const std::map<NodeId, NodeId>& scope) {
    for (const auto& n : s.nodes) {
      if (n.is<MapEntryNode>()) {
        const auto& me = n.as<MapEntryNode>();
        const Node* x = s.find(me.exit);
        if (!x || !x->is<MapExitNode>() || x->as<MapExitNode>().entry != n.id) {
          report(DiagnosticKind::kUnbalancedScope, node_ref(n.id), "map entry has no matching exit");
        }
        if (me.params.size() != me.ranges.size() || me.params.empty()) {
          report(DiagnosticKind::kUnbalancedScope, node_ref(n.id), "map parameters and ranges differ in count");
        }
      }
      if (n.is<MapExitNode>()) {
        const Node* en = s.find(n.as<MapExitNode>().entry);
        if (!en || !en->is<MapEntryNode>() || en->as<MapEntryNode>().exit != n.id) {
          report(DiagnosticKind::kUnbalancedScope, node_ref(n.id), "map exit has no matching entry");
          continue;
        }
      }
      auto ins = s.in_edges(n.id);
      if (ins.empty()) continue;
      NodeId expected = n.is<MapExitNode>() ? n.as<MapExitNode>().entry : pred_scope(s, scope, ins[0]->src);
      for (const Edge* e : ins) {
        if (!s.find(e->src)) continue;
        if (pred_scope(s, scope, e->src) != expected) {
          report(DiagnosticKind::kUnbalancedScope, node_ref(n.id), "predecessors belong to different map scopes");
          break;
        }
      }
    }
  }

  void check_node(const State& s, const std::map<NodeId, NodeId>& scope, const Node& n) {
    if (n.is<AccessNode>()) {
      if (!p_.containers.count(n.as<AccessNode>().container)) {
        report(DiagnosticKind::kUnknownContainer, node_ref(n.id),
               "unknown container '" + n.as<AccessNode>().container + "'");
      }
    } else if (n.is<MapEntryNode>()) {
      auto outer = params_in_scope(s, scope, scope.at(n.id));
      std::set<std::string> used;
      for (const auto& r : n.as<MapEntryNode>().ranges) {
        r.begin.collect_symbols(used);
        r.end.collect_symbols(used);
        r.step.collect_symbols(used);
      }
      check_symbols(used, outer, node_ref(n.id));
      for (const auto& prm : n.as<MapEntryNode>().params) {
        if (symbols_.count(prm) || p_.containers.count(prm)) {
          report(DiagnosticKind::kNameCollision, node_ref(n.id), "map parameter '" + prm + "' shadows a name");
        }
      }
    } else if (n.is<TaskletNode>()) {
      check_tasklet(s, scope, n);
    }
  }

  void check_tasklet(const State& s, const std::map<NodeId, NodeId>& scope, const Node& n) {
    const auto& t = n.as<TaskletNode>();
    std::set<std::string> inputs(t.inputs.begin(), t.inputs.end());
    std::set<std::string> outputs(t.outputs.begin(), t.outputs.end());
    if (inputs.size() != t.inputs.size() || outputs.size() != t.outputs.size()) {
      report(DiagnosticKind::kBadConnector, node_ref(n.id), "duplicate connector name");
    }
    std::set<std::string> assigned;
    for (const auto& [out, expr] : t.code) {
      if (!outputs.count(out) || !assigned.insert(out).second) {
        report(DiagnosticKind::kBadConnector, node_ref(n.id), "code assigns '" + out + "' which is not a fresh outlet");
      }
    }
    if (assigned.size() != outputs.size()) {
      report(DiagnosticKind::kBadConnector, node_ref(n.id), "some outlet has no code");
    }
    auto params = params_in_scope(s, scope, n.id);
    std::function<void(const ScalarExpr&)> check_calls = [&](const ScalarExpr& e) {
      if (e.is_null()) return;
      if (e.kind() == ScalarExpr::Kind::kCall && !is_builtin_function(e.identifier())) {
        report(DiagnosticKind::kUnknownName, node_ref(n.id), "unknown function '" + e.identifier() + "'");
      }
      for (const auto& c : e.children()) check_calls(c);
    };
    for (const auto& [out, expr] : t.code) {
      check_calls(expr);
      for (const auto& name : expr.names()) {
        if (!inputs.count(name) && !params.count(name) && !symbols_.count(name)) {
          report(DiagnosticKind::kUnknownName, node_ref(n.id), "code references unknown name '" + name + "'");
        }
      }
    }
    std::map<std::string, int> fed;
    for (const Edge* e : s.in_edges(n.id)) {
      if (e->memlet.empty()) continue;
      if (!inputs.count(e->dst_conn)) {
        report(DiagnosticKind::kBadConnector, node_ref(n.id), "no inlet named '" + e->dst_conn + "'");
      }
      ++fed[e->dst_conn];
    }
    for (const auto& in : t.inputs) {
      if (fed[in] != 1) {
        report(DiagnosticKind::kBadConnector, node_ref(n.id), "inlet '" + in + "' must have exactly one memlet");
      }
    }
    for (const Edge* e : s.out_edges(n.id)) {
      if (!e->memlet.empty() && !outputs.count(e->src_conn)) {
        report(DiagnosticKind::kBadConnector, node_ref(n.id), "no outlet named '" + e->src_conn + "'");
      }
    }
  }

  void check_edge(const State& s, const std::map<NodeId, NodeId>& scope, const Edge& e) {
    const Node* a = s.find(e.src);
    const Node* b = s.find(e.dst);
    if (!a || !b || e.memlet.empty()) return;
    std::string element = "edge " + std::to_string(e.src) + " -> " + std::to_string(e.dst);
    if (a->is<TaskletNode>() && b->is<TaskletNode>()) {
      report(DiagnosticKind::kIllegalEdge, element, "tasklets must communicate through an access node");
    }
    if (a->is<AccessNode>() && b->is<AccessNode>()) {
      report(DiagnosticKind::kIllegalEdge, element, "container copies are not supported");
    }
    auto it = p_.containers.find(e.memlet.container);
    if (it == p_.containers.end()) {
      report(DiagnosticKind::kUnknownContainer, element, "unknown container '" + e.memlet.container + "'");
      return;
    }
    for (const Node* end : {a, b}) {
      if (end->is<AccessNode>() && end->as<AccessNode>().container != e.memlet.container) {
        report(DiagnosticKind::kIllegalEdge, element, "memlet container differs from its access node");
      }
    }
    if (e.memlet.subset.rank() != it->second.rank()) {
      report(DiagnosticKind::kRankMismatch, element,
             "subset rank " + std::to_string(e.memlet.subset.rank()) + " on container '" + e.memlet.container +
                 "' of rank " + std::to_string(it->second.rank()));
    }
    auto params = params_in_scope(s, scope, e.src);
    auto more = params_in_scope(s, scope, e.dst);
    params.insert(more.begin(), more.end());
    if (b->is<MapExitNode>()) {
      auto inner = params_in_scope(s, scope, b->as<MapExitNode>().entry);
      params.insert(inner.begin(), inner.end());
    }
    check_symbols(e.memlet.subset.symbols(), params, element);
  }

  void check_interstate() {
    if (!p_.state(p_.start)) {
      report(DiagnosticKind::kMissingStart, "program", "start state " + std::to_string(p_.start) + " does not exist");
      return;
    }
    for (std::size_t i = 0; i < p_.interstate.size(); ++i) {
      const auto& e = p_.interstate[i];
      std::string element = "interstate edge " + std::to_string(i);
      if (!p_.state(e.src) || !p_.state(e.dst)) {
        report(DiagnosticKind::kDanglingEdge, element, "endpoint state does not exist");
      }
      check_symbols(e.guard.is_null() ? std::set<std::string>{} : e.guard.names(), {}, element);
      for (const auto& [name, value] : e.assignments) {
        if (!symbols_.count(name)) report(DiagnosticKind::kUnknownSymbol, element, "assigns undeclared '" + name + "'");
        check_symbols(value.symbols(), {}, element);
      }
    }
    std::set<StateId> seen{p_.start};
    std::queue<StateId> work;
    work.push(p_.start);
    while (!work.empty()) {
      StateId s = work.front();
      work.pop();
      for (const auto& e : p_.interstate) {
        if (e.src == s && seen.insert(e.dst).second) work.push(e.dst);
      }
    }
    for (const auto& s : p_.states) {
      if (!seen.count(s.id)) report(DiagnosticKind::kUnreachableState, state_ref(s.id), "not reachable from start");
    }
  }

  const Program& p_;
  std::set<std::string> symbols_;
  std::vector<Diagnostic> out_;
};

}  // namespace

std::vector<Diagnostic> validate(const Program& p) { return Validator(p).run(); }

}  // namespace cutflow
