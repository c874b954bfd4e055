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

#include "cutflow/cutout.hpp"

#include <algorithm>
#include <deque>

#include "cutflow/error.hpp"
#include "json.hpp"

namespace cutflow {

namespace {

using NodeSet = std::set<NodeId>;

// Extreme of `e` as `param` ranges over [first, last]; nullopt if `param`
// occurs non-affinely.
std::optional<SymExpr> bound_over(const SymExpr& e, const std::string& param, const SymExpr& first,
                                  const SymExpr& last, bool want_min) {
  if (!e.depends_on(param)) return e;
  Affine a = Affine::of(e);
  for (const auto& [key, term] : a.terms) {
    if (key != param && term.first.depends_on(param)) return std::nullopt;
  }
  bool up = a.coefficient(param) >= 0;
  const SymExpr& at = (want_min == up) ? first : last;
  return e.substitute({{param, at}}).simplify();
}

// Top-level ancestor of every node: the outermost map entry for scoped
// nodes, the node itself at top level.
std::map<NodeId, NodeId> top_level(const State& s) {
  auto scopes = s.scopes();
  std::map<NodeId, NodeId> top;
  for (const auto& n : s.nodes) {
    NodeId cur = n.id;
    while (scopes.count(cur) && scopes.at(cur) != kNoNode) cur = scopes.at(cur);
    top[n.id] = cur;
  }
  return top;
}

NodeSet reach(const State& s, const NodeSet& from, bool forward) {
  NodeSet seen;
  std::deque<NodeId> q(from.begin(), from.end());
  while (!q.empty()) {
    NodeId n = q.front();
    q.pop_front();
    for (const Edge* e : forward ? s.out_edges(n) : s.in_edges(n)) {
      NodeId m = forward ? e->dst : e->src;
      if (seen.insert(m).second) q.push_back(m);
    }
  }
  return seen;
}

std::set<StateId> state_reach(const Program& p, const std::set<StateId>& from, bool forward,
                              const std::set<StateId>& blocked) {
  std::set<StateId> seen;
  std::deque<StateId> q(from.begin(), from.end());
  while (!q.empty()) {
    StateId s = q.front();
    q.pop_front();
    for (const auto& e : p.interstate) {
      StateId a = forward ? e.src : e.dst, b = forward ? e.dst : e.src;
      if (a != s || blocked.count(b)) continue;
      if (seen.insert(b).second) q.push_back(b);
    }
  }
  return seen;
}

NodeSet close_nodes(const State& s, NodeSet inc) {
  auto top = top_level(s);
  while (true) {
    NodeSet next = inc;
    std::set<NodeId> tops;
    for (NodeId n : inc) tops.insert(top.at(n));
    for (const auto& n : s.nodes) {
      if (tops.count(top.at(n.id))) next.insert(n.id);
    }
    for (NodeId t : tops) {
      const Node* tn = s.find(t);
      if (tn->is<AccessNode>()) continue;
      std::vector<NodeId> ends{t};
      if (tn->is<MapEntryNode>()) ends.push_back(tn->as<MapEntryNode>().exit);
      for (NodeId id : ends) {
        for (const Edge* e : s.in_edges(id)) {
          if (s.find(e->src)->is<AccessNode>()) next.insert(e->src);
        }
        for (const Edge* e : s.out_edges(id)) {
          if (s.find(e->dst)->is<AccessNode>()) next.insert(e->dst);
        }
      }
    }
    NodeSet fwd = reach(s, next, true), bwd = reach(s, next, false);
    for (NodeId n : fwd) {
      if (bwd.count(n)) next.insert(n);
    }
    if (next == inc) return inc;
    inc = std::move(next);
  }
}

std::set<StateId> convex_states(const Program& p, std::set<StateId> r) {
  auto fwd = state_reach(p, r, true, {}), bwd = state_reach(p, r, false, {});
  for (StateId s : fwd) {
    if (bwd.count(s)) r.insert(s);
  }
  return r;
}

std::map<StateId, std::set<StateId>> dominators(const Program& p) {
  std::set<StateId> all;
  for (const auto& s : p.states) all.insert(s.id);
  std::map<StateId, std::set<StateId>> dom;
  for (StateId s : all) dom[s] = s == p.start ? std::set<StateId>{s} : all;
  bool changed = true;
  while (changed) {
    changed = false;
    for (StateId s : all) {
      if (s == p.start) continue;
      std::optional<std::set<StateId>> meet;
      for (const auto& e : p.interstate) {
        if (e.dst != s) continue;
        if (!meet) {
          meet = dom[e.src];
        } else {
          std::set<StateId> both;
          std::set_intersection(meet->begin(), meet->end(), dom[e.src].begin(), dom[e.src].end(),
                                std::inserter(both, both.begin()));
          meet = both;
        }
      }
      std::set<StateId> d = meet.value_or(std::set<StateId>{});
      d.insert(s);
      if (d != dom[s]) {
        dom[s] = d;
        changed = true;
      }
    }
  }
  return dom;
}

std::vector<StateId> entries_of(const Program& p, const std::set<StateId>& r) {
  std::set<StateId> out;
  if (r.count(p.start)) out.insert(p.start);
  for (const auto& e : p.interstate) {
    if (r.count(e.dst) && !r.count(e.src)) out.insert(e.dst);
  }
  return {out.begin(), out.end()};
}

// Single-entry region covering the touched states.
std::set<StateId> single_entry_region(const Program& p, std::set<StateId> r) {
  r = convex_states(p, r);
  auto dom = dominators(p);
  while (true) {
    auto entries = entries_of(p, r);
    if (entries.size() <= 1) return r;
    std::set<StateId> common = dom.at(entries[0]);
    for (StateId e : entries) {
      std::set<StateId> both;
      std::set_intersection(common.begin(), common.end(), dom.at(e).begin(), dom.at(e).end(),
                            std::inserter(both, both.begin()));
      common = both;
    }
    StateId deepest = *common.begin();
    for (StateId d : common) {
      if (dom.at(d).size() > dom.at(deepest).size()) deepest = d;
    }
    r.insert(deepest);
    r = convex_states(p, r);
  }
}

struct Located {
  Access access;
  SubsetRange range;  // container level, original coordinates
  StateId state;
};

std::vector<Located> accesses_of(const Program& p, const State& s, const NodeSet* only) {
  std::vector<Located> out;
  for (auto& a : collect_accesses(s)) {
    if (only && !only->count(a.tasklet)) continue;
    SubsetRange r = propagate_subset(p, s, a.tasklet, a.container, a.subset);
    out.push_back({std::move(a), std::move(r), s.id});
  }
  return out;
}

bool reads(const Access& a) { return !a.write || a.wcr != Wcr::kNone; }

// Dimensions indexed by symbols that change during execution cover the
// whole extent when compared across program points.
SubsetRange widen(const Program& p, const std::string& container, const SubsetRange& r) {
  auto assigned = p.assigned_symbols();
  const auto& shape = p.container(container).shape;
  std::vector<Range> dims = r.dims();
  for (std::size_t d = 0; d < dims.size(); ++d) {
    bool moving = false;
    for (const auto& sym : dims[d].begin.symbols()) moving |= assigned.count(sym) > 0;
    for (const auto& sym : dims[d].end.symbols()) moving |= assigned.count(sym) > 0;
    if (moving) dims[d] = Range{SymExpr(0), shape[d], SymExpr(1)};
  }
  return SubsetRange(std::move(dims));
}

std::optional<SymExpr> extreme(const std::vector<SymExpr>& xs, const Assumptions& as, bool want_min) {
  for (const auto& x : xs) {
    bool ok = true;
    for (const auto& y : xs) ok = ok && (want_min ? provably_le(x, y, as) : provably_le(y, x, as));
    if (ok) return x;
  }
  return std::nullopt;
}

// Per-dimension hull; dimensions that cannot be resolved keep the full extent.
SubsetRange hull(const Program& p, const std::string& container, const std::vector<SubsetRange>& ranges) {
  const auto& shape = p.container(container).shape;
  Assumptions as = p.assumptions();
  std::vector<Range> dims;
  for (std::size_t d = 0; d < shape.size(); ++d) {
    std::vector<SymExpr> lo, hi;
    for (const auto& r : ranges) {
      lo.push_back(r.dims()[d].begin);
      hi.push_back(r.dims()[d].end);
    }
    auto a = extreme(lo, as, true), b = extreme(hi, as, false);
    if (ranges.empty() || !a || !b) {
      dims.push_back(Range{SymExpr(0), shape[d], SymExpr(1)});
    } else {
      dims.push_back(Range{*a, *b, SymExpr(1)});
    }
  }
  return SubsetRange(std::move(dims));
}

SubsetRange region_of(const Cutout& c, const Program& p, const std::string& container) {
  auto it = c.offsets.find(container);
  if (it == c.offsets.end()) return p.container(container).full();
  const auto& shape = c.program.container(container).shape;
  std::vector<Range> dims;
  for (std::size_t d = 0; d < shape.size(); ++d) {
    dims.push_back(Range{it->second[d], (it->second[d] + shape[d]).simplify(), SymExpr(1)});
  }
  return SubsetRange(std::move(dims));
}

// Tasklets of the cutout, in original IDs.
NodeSet cutout_tasklets(const Program& p, const Cutout& c) {
  NodeSet out;
  for (NodeId id : c.nodes) {
    const Node* n = p.node(id);
    if (n && n->is<TaskletNode>()) out.insert(id);
  }
  return out;
}

std::vector<Located> cutout_accesses(const Program& p, const Cutout& c) {
  NodeSet ts = cutout_tasklets(p, c);
  std::vector<Located> out;
  for (StateId sid : c.region) {
    auto part = accesses_of(p, *p.state(sid), &ts);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

// Accesses outside the cutout that may execute before (upstream) or after
// (downstream) it.
std::vector<Located> neighbour_accesses(const Program& p, const Cutout& c, bool upstream) {
  std::vector<Located> out;
  std::set<StateId> states;
  if (c.whole_states) {
    std::set<StateId> border;
    for (const auto& e : p.interstate) {
      StateId inside = upstream ? e.dst : e.src, outside = upstream ? e.src : e.dst;
      if (c.region.count(inside) && !c.region.count(outside)) border.insert(outside);
    }
    states = state_reach(p, border, !upstream, c.region);
    states.insert(border.begin(), border.end());
  } else {
    StateId sid = *c.region.begin();
    const State& s = *p.state(sid);
    // Downstream tasklets cannot run before the cutout, upstream ones cannot run after it.
    NodeSet ordered = reach(s, c.nodes, upstream);
    NodeSet others;
    for (const auto& n : s.nodes) {
      if (n.is<TaskletNode>() && !c.nodes.count(n.id) && !ordered.count(n.id)) others.insert(n.id);
    }
    auto part = accesses_of(p, s, &others);
    out.insert(out.end(), part.begin(), part.end());
    std::set<StateId> adjacent;
    for (const auto& e : p.interstate) {
      if ((upstream ? e.dst : e.src) == sid) adjacent.insert(upstream ? e.src : e.dst);
    }
    states = state_reach(p, adjacent, !upstream, {});
    states.insert(adjacent.begin(), adjacent.end());
  }
  for (StateId sid : states) {
    auto part = accesses_of(p, *p.state(sid), nullptr);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

bool may_overlap(const Program& p, const std::string& container, const SubsetRange& a, const SubsetRange& b) {
  return disjoint(widen(p, container, a), widen(p, container, b), p.assumptions()) == Overlap::kMayOverlap;
}

std::set<std::string> opaque_containers(const Program& p, const Cutout& c) {
  std::set<std::string> out;
  for (NodeId id : c.nodes) {
    const State* s = p.state_of(id);
    const Node* n = s->find(id);
    if (!n->is<OpaqueNode>()) continue;
    for (const Edge* e : s->in_edges(id)) {
      if (s->find(e->src)->is<AccessNode>()) out.insert(s->find(e->src)->as<AccessNode>().container);
    }
    for (const Edge* e : s->out_edges(id)) {
      if (s->find(e->dst)->is<AccessNode>()) out.insert(s->find(e->dst)->as<AccessNode>().container);
    }
  }
  return out;
}

void collect_symbols(const Program& p, const Program& c, std::set<std::string>& out) {
  auto add = [&](const std::set<std::string>& names) {
    for (const auto& n : names) {
      if (p.has_symbol(n)) out.insert(n);
    }
  };
  for (const auto& [name, d] : c.containers) {
    for (const auto& e : d.shape) add(e.symbols());
  }
  for (const auto& s : c.states) {
    for (const auto& n : s.nodes) {
      if (n.is<MapEntryNode>()) {
        for (const auto& r : n.as<MapEntryNode>().ranges) {
          add(r.begin.symbols());
          add(r.end.symbols());
          add(r.step.symbols());
        }
      } else if (n.is<TaskletNode>()) {
        for (const auto& [o, e] : n.as<TaskletNode>().code) add(e.names());
      }
    }
    for (const auto& e : s.edges) add(e.memlet.subset.symbols());
  }
  for (const auto& e : c.interstate) {
    if (!e.guard.is_null()) add(e.guard.names());
    for (const auto& [name, v] : e.assignments) {
      out.insert(name);
      add(v.symbols());
    }
  }
}

bool tasklet_edge(const State& s, const Edge& e) {
  return s.find(e.src)->is<TaskletNode>() || s.find(e.dst)->is<TaskletNode>();
}

// Shrinks containers to the hull of what the cutout touches and rebases the
// cutout's memlets onto the new origin.
void shrink_containers(const Program& p, Cutout& c) {
  Assumptions as = p.assumptions();
  std::set<std::string> inner_assigned;
  for (const auto& e : c.program.interstate) {
    for (const auto& [name, v] : e.assignments) inner_assigned.insert(name);
  }
  std::map<std::string, std::vector<SubsetRange>> touched;
  for (const auto& l : cutout_accesses(p, c)) touched[l.access.container].push_back(l.range);
  for (auto& [name, desc] : c.program.containers) {
    auto it = touched.find(name);
    if (it == touched.end()) continue;
    SubsetRange h = hull(p, name, it->second);
    std::vector<SymExpr> origin, shape;
    bool shrunk = false;
    for (std::size_t d = 0; d < desc.shape.size(); ++d) {
      const Range& r = h.dims()[d];
      const SymExpr& extent = desc.shape[d];
      bool fixed = true;
      for (const auto& sym : r.begin.symbols()) fixed &= !inner_assigned.count(sym);
      for (const auto& sym : r.end.symbols()) fixed &= !inner_assigned.count(sym);
      bool inside = fixed && provably_le(SymExpr(0), r.begin, as) && provably_le(r.end, extent, as) &&
                    provably_le(r.begin, r.end, as);
      bool whole = provably_equal(r.begin, SymExpr(0)) && provably_equal(r.end, extent);
      if (inside && !whole) {
        origin.push_back(r.begin);
        shape.push_back((r.end - r.begin).simplify());
        shrunk = true;
      } else {
        origin.push_back(SymExpr(0));
        shape.push_back(extent);
      }
    }
    if (!shrunk) continue;
    desc.shape = shape;
    c.offsets[name] = origin;
  }
  for (auto& s : c.program.states) {
    for (auto& e : s.edges) {
      auto it = c.offsets.find(e.memlet.container);
      if (it == c.offsets.end()) continue;
      if (tasklet_edge(s, e)) {
        e.memlet.subset = e.memlet.subset.offset_by(it->second);
      } else {
        e.memlet.subset = c.program.containers.at(e.memlet.container).full();
      }
    }
  }
}

void finish(const Program& p, Cutout& c) {
  std::set<std::string> used;
  for (const auto& s : c.program.states) {
    for (const auto& n : s.nodes) {
      if (n.is<AccessNode>()) used.insert(n.as<AccessNode>().container);
    }
    for (const auto& e : s.edges) {
      if (!e.memlet.empty()) used.insert(e.memlet.container);
    }
  }
  for (const auto& name : used) c.program.containers[name] = p.container(name);
  for (const auto& s : c.program.states) {
    for (const auto& n : s.nodes) c.origin[n.id] = n.id;
  }
  shrink_containers(p, c);

  std::set<std::string> syms;
  collect_symbols(p, c.program, syms);
  for (const auto& decl : p.symbols) {
    if (syms.count(decl.name)) c.program.symbols.push_back(decl);
  }
  std::set<std::string> assigned = c.program.assigned_symbols();
  for (const auto& decl : c.program.symbols) {
    if (!assigned.count(decl.name)) c.input_symbols.push_back(decl.name);
  }

  c.input_configuration = compute_input_config(p, c);
  c.system_state = compute_system_state(p, c);
  for (const auto& r : c.input_configuration) c.program.containers.at(r.container).transient = false;
  for (const auto& r : c.system_state) c.program.containers.at(r.container).transient = false;
  for (NodeId id : c.nodes) {
    const Node* n = p.node(id);
    if (n->is<OpaqueNode>()) c.warnings.push_back("opaque node " + std::to_string(id) + " (" + n->label() + ") may have side effects");
  }
  if (c.system_state.empty()) c.warnings.push_back("empty system state: the cutout has no observable effect");
}

}  // namespace

// ---- public -----------------------------------------------------------------

std::string DataRef::str() const { return range.rank() ? container + "[" + range.str() + "]" : container; }

std::vector<std::string> Cutout::input_containers() const {
  std::vector<std::string> out;
  for (const auto& r : input_configuration) out.push_back(r.container);
  return out;
}

std::vector<std::string> Cutout::system_state_containers() const {
  std::vector<std::string> out;
  for (const auto& r : system_state) out.push_back(r.container);
  return out;
}

std::int64_t Cutout::input_volume(const Binding& binding) const {
  std::int64_t total = 0;
  for (const auto& r : input_configuration) total += r.range.volume(binding);
  return total;
}

SubsetRange propagate_subset(const Program& p, const State& s, NodeId tasklet, const std::string& container,
                             const SubsetRange& subset) {
  auto scopes = s.scopes();
  const auto& shape = p.container(container).shape;
  std::vector<Range> dims = subset.dims();
  std::vector<bool> full(dims.size(), false);
  NodeId scope = scopes.at(tasklet);
  while (scope != kNoNode) {
    const auto& me = s.find(scope)->as<MapEntryNode>();
    for (std::size_t k = 0; k < me.params.size(); ++k) {
      const Range& r = me.ranges[k];
      SymExpr last = (r.end - SymExpr(1)).simplify();
      for (std::size_t d = 0; d < dims.size(); ++d) {
        if (full[d]) continue;
        auto lo = bound_over(dims[d].begin, me.params[k], r.begin, last, true);
        auto hi = bound_over(dims[d].end, me.params[k], r.begin, last, false);
        if (!lo || !hi) {
          full[d] = true;
        } else {
          dims[d] = Range{*lo, *hi, SymExpr(1)};
        }
      }
    }
    scope = scopes.at(scope);
  }
  for (std::size_t d = 0; d < dims.size(); ++d) {
    if (full[d]) {
      dims[d] = Range{SymExpr(0), shape[d], SymExpr(1)};
    } else {
      dims[d] = Range{dims[d].begin.simplify(), dims[d].end.simplify(), SymExpr(1)};
    }
  }
  return SubsetRange(std::move(dims));
}

Cutout extract_nodes(const Program& p, StateId state, const std::set<NodeId>& nodes) {
  const State* s = p.state(state);
  if (!s) throw Error(ErrorCode::kUnknownElement, "state " + std::to_string(state));
  for (NodeId id : nodes) {
    if (!s->find(id)) throw Error(ErrorCode::kUnknownElement, "node " + std::to_string(id) + " is not in state " + std::to_string(state));
  }
  if (nodes.empty()) throw Error(ErrorCode::kEmptyChangeSet, "empty change set");
  Cutout c;
  c.nodes = close_nodes(*s, nodes);
  c.region = {state};
  c.program.name = p.name + "_cutout";
  c.program.next_id = p.next_id;
  c.program.start = state;
  State copy;
  copy.id = state;
  copy.label = s->label;
  for (const auto& n : s->nodes) {
    if (c.nodes.count(n.id)) copy.nodes.push_back(n);
  }
  for (const auto& e : s->edges) {
    if (c.nodes.count(e.src) && c.nodes.count(e.dst)) copy.edges.push_back(e);
  }
  c.program.states.push_back(std::move(copy));
  finish(p, c);
  return c;
}

Cutout extract(const Program& p, const ChangeSet& delta) {
  if (delta.empty()) throw Error(ErrorCode::kEmptyChangeSet, "empty change set");
  std::set<StateId> touched;
  std::map<StateId, NodeSet> seeds;
  for (const auto* ids : {&delta.modified, &delta.removed}) {
    for (NodeId id : *ids) {
      const State* s = p.state_of(id);
      if (!s) throw Error(ErrorCode::kUnknownElement, "node " + std::to_string(id) + " is not in the program");
      touched.insert(s->id);
      seeds[s->id].insert(id);
    }
  }
  for (StateId id : delta.states) {
    if (p.state(id)) touched.insert(id);
  }
  if (touched.empty()) throw Error(ErrorCode::kEmptyChangeSet, "change set touches nothing in the program");
  if (touched.size() == 1 && delta.added_states.empty() && seeds.count(*touched.begin())) {
    return extract_nodes(p, *touched.begin(), seeds.at(*touched.begin()));
  }

  Cutout c;
  c.whole_states = true;
  c.region = single_entry_region(p, touched);
  c.program.name = p.name + "_cutout";
  c.program.next_id = p.next_id;
  for (const auto& s : p.states) {
    if (!c.region.count(s.id)) continue;
    c.program.states.push_back(s);
    for (const auto& n : s.nodes) c.nodes.insert(n.id);
  }
  StateId entry = entries_of(p, c.region).at(0);
  c.program.start = entry;

  // A single incoming edge whose assignments do not depend on changing
  // symbols is replayed from a fresh start state.
  std::vector<const InterstateEdge*> incoming;
  for (const auto& e : p.interstate) {
    if (e.dst == entry && !c.region.count(e.src)) incoming.push_back(&e);
  }
  auto assigned = p.assigned_symbols();
  if (incoming.size() == 1 && !incoming[0]->assignments.empty()) {
    std::vector<std::pair<std::string, SymExpr>> replay;
    for (const auto& [name, v] : incoming[0]->assignments) {
      bool stable = true;
      for (const auto& sym : v.symbols()) stable &= !assigned.count(sym);
      if (stable) replay.emplace_back(name, v);
    }
    if (!replay.empty()) {
      State start;
      start.id = c.program.fresh_id();
      start.label = "cutout_entry";
      c.program.states.insert(c.program.states.begin(), start);
      c.program.interstate.push_back(InterstateEdge{start.id, entry, {}, replay});
      c.program.start = start.id;
    }
  }
  StateId exit = 0;
  for (const auto& e : p.interstate) {
    if (!c.region.count(e.src)) continue;
    InterstateEdge copy = e;
    if (!c.region.count(e.dst)) {
      if (!exit) {
        State done;
        done.id = c.program.fresh_id();
        done.label = "cutout_exit";
        c.program.states.push_back(done);
        exit = done.id;
      }
      copy.dst = exit;
    }
    c.program.interstate.push_back(copy);
  }
  finish(p, c);
  return c;
}

std::vector<DataRef> compute_input_config(const Program& p, const Cutout& c) {
  std::map<std::string, std::vector<SubsetRange>> read;
  for (const auto& l : cutout_accesses(p, c)) {
    if (reads(l.access)) read[l.access.container].push_back(l.range);
  }
  std::set<std::string> inputs = opaque_containers(p, c);
  auto before = neighbour_accesses(p, c, true);
  for (const auto& [name, ranges] : read) {
    if (!p.container(name).transient) {
      inputs.insert(name);
      continue;
    }
    for (const auto& w : before) {
      if (!w.access.write || w.access.container != name) continue;
      for (const auto& r : ranges) {
        if (may_overlap(p, name, w.range, r)) inputs.insert(name);
      }
    }
  }
  std::vector<DataRef> out;
  for (const auto& name : inputs) out.push_back({name, region_of(c, p, name)});
  return out;
}

std::vector<DataRef> compute_system_state(const Program& p, const Cutout& c) {
  std::map<std::string, std::vector<SubsetRange>> written;
  for (const auto& l : cutout_accesses(p, c)) {
    if (l.access.write) written[l.access.container].push_back(l.range);
  }
  std::set<std::string> state;
  auto after = neighbour_accesses(p, c, false);
  for (const auto& [name, ranges] : written) {
    if (!p.container(name).transient) {
      state.insert(name);
      continue;
    }
    for (const auto& r : after) {
      if (!reads(r.access) || r.access.container != name) continue;
      for (const auto& w : ranges) {
        if (may_overlap(p, name, w, r.range)) state.insert(name);
      }
    }
  }
  std::vector<DataRef> out;
  auto forced = opaque_containers(p, c);
  for (const auto& name : forced) {
    if (!written.count(name)) out.push_back({name, region_of(c, p, name)});
  }
  for (const auto& name : state) out.push_back({name, hull(p, name, written.at(name))});
  for (const auto& name : forced) {
    if (written.count(name) && !state.count(name)) out.push_back({name, hull(p, name, written.at(name))});
  }
  std::sort(out.begin(), out.end(), [](const DataRef& a, const DataRef& b) { return a.container < b.container; });
  return out;
}

std::string cutout_meta_json(const Cutout& c) {
  nlohmann::json j;
  j["cutout_meta_version"] = 1;
  j["whole_states"] = c.whole_states;
  j["region"] = c.region;
  nlohmann::json origin = nlohmann::json::array();
  for (const auto& [a, b] : c.origin) origin.push_back({a, b});
  j["origin"] = origin;
  j["input_symbols"] = c.input_symbols;
  auto refs = [](const std::vector<DataRef>& v) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : v) out.push_back({{"container", r.container}, {"range", r.range.str()}});
    return out;
  };
  j["input_configuration"] = refs(c.input_configuration);
  j["system_state"] = refs(c.system_state);
  nlohmann::json offsets = nlohmann::json::object();
  for (const auto& [name, origin_dims] : c.offsets) {
    std::vector<std::string> dims;
    for (const auto& e : origin_dims) dims.push_back(e.str());
    offsets[name] = dims;
  }
  j["offsets"] = offsets;
  j["warnings"] = c.warnings;
  return j.dump(2) + "\n";
}

}  // namespace cutflow

namespace cutflow {

namespace {

Buffer slice(const Buffer& src, const DataDescriptor& desc, const std::vector<SymExpr>* origin, const Binding& b) {
  std::vector<std::int64_t> shape, from;
  for (std::size_t d = 0; d < desc.shape.size(); ++d) {
    shape.push_back(std::max<std::int64_t>(0, desc.shape[d].eval(b)));
    from.push_back(origin ? (*origin)[d].eval(b) : 0);
  }
  Buffer out = Buffer::zeros(desc.dtype, shape);
  std::vector<std::int64_t> idx(shape.size(), 0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::size_t flat = 0;
    bool inside = true;
    for (std::size_t d = 0; d < shape.size(); ++d) {
      std::int64_t at = from[d] + idx[d];
      inside &= at >= 0 && at < src.shape[d];
      flat = inside ? flat * static_cast<std::size_t>(src.shape[d]) + static_cast<std::size_t>(at) : 0;
    }
    if (inside) {
      if (is_float(desc.dtype)) {
        out.f[k] = src.as_double(flat);
      } else {
        out.i[k] = is_float(src.dtype) ? static_cast<std::int64_t>(src.f[flat]) : src.i[flat];
      }
    }
    for (std::size_t d = shape.size(); d-- > 0;) {
      if (++idx[d] < shape[d]) break;
      idx[d] = 0;
    }
  }
  return out;
}

}  // namespace

std::vector<ExecutionInput> capture_inputs(const Program& p, const Cutout& c, const ExecutionInput& in,
                                           std::size_t max_entries, ExecutionOutcome* whole, std::uint64_t budget) {
  std::vector<ExecutionInput> entries;
  std::set<std::string> pending;  // containers still to capture for the open entry
  bool open = false;
  StateId previous = 0;
  bool first = true;
  NodeSet tasklets = cutout_tasklets(p, c);
  std::map<NodeId, std::set<std::string>> touches;
  for (NodeId t : tasklets) {
    const State* s = p.state_of(t);
    for (const Edge* e : s->in_edges(t)) {
      if (!e->memlet.empty()) touches[t].insert(e->memlet.container);
    }
    for (const Edge* e : s->out_edges(t)) {
      if (!e->memlet.empty()) touches[t].insert(e->memlet.container);
    }
  }
  std::set<std::string> touched_by_tasklets;
  for (const auto& [t, names] : touches) touched_by_tasklets.insert(names.begin(), names.end());
  std::set<std::string> wanted;
  for (const auto& [name, desc] : c.program.containers) {
    if (!desc.transient) wanted.insert(name);
  }

  auto take = [&](const std::string& name, const MemoryView& mem) {
    ExecutionInput& e = entries.back();
    const auto& desc = c.program.containers.at(name);
    auto off = c.offsets.find(name);
    e.data[name] = slice(mem.buffer(name), desc, off == c.offsets.end() ? nullptr : &off->second, e.symbols);
    pending.erase(name);
  };
  auto begin_entry = [&](const MemoryView& mem) {
    open = entries.size() < max_entries;
    if (!open) return;
    ExecutionInput e;
    Binding now = mem.symbols();
    for (const auto& decl : c.program.symbols) {
      auto it = now.find(decl.name);
      if (it != now.end()) e.symbols[decl.name] = it->second;
    }
    entries.push_back(std::move(e));
    pending = wanted;
  };

  Hooks hooks;
  StateId entry_state = c.whole_states ? entries_of(p, c.region).at(0) : *c.region.begin();
  hooks.on_state = [&](StateId s, const MemoryView& mem) {
    bool enter = c.whole_states ? (s == entry_state && (first || !c.region.count(previous))) : s == entry_state;
    first = false;
    previous = s;
    if (open && !pending.empty() && !c.whole_states) {
      // Containers whose tasklets did not run in the last visit.
      for (const auto& name : std::set<std::string>(pending)) take(name, mem);
    }
    if (!enter) return;
    begin_entry(mem);
    if (!open) return;
    for (const auto& name : std::set<std::string>(pending)) {
      if (c.whole_states || !touched_by_tasklets.count(name)) take(name, mem);
    }
  };
  if (!c.whole_states) {
    hooks.before_tasklet = [&](NodeId t, const MemoryView& mem) {
      if (!open || pending.empty()) return;
      auto it = touches.find(t);
      if (it == touches.end()) return;
      for (const auto& name : it->second) {
        if (pending.count(name)) take(name, mem);
      }
    };
  }
  Interpreter interp(p);
  ExecutionOutcome out = interp.run(in, budget, &hooks);
  if (whole) *whole = std::move(out);
  return entries;
}

}  // namespace cutflow
