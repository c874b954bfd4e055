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

#include "cutflow/xform.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <optional>

#include "cutflow/error.hpp"

namespace cutflow {

namespace {

constexpr std::int64_t kMaxUnrollTrips = 64;

[[noreturn]] void stale(const TransformationInstance& t, const std::string& why) {
  throw Error(ErrorCode::kSiteStale, t.id() + ": " + why);
}

// Applies edits to a program while recording what they touch.
class Editor {
 public:
  Editor(Program& p, ChangeSet& cs) : p_(p), cs_(cs) {
    for (const auto& s : p.states) original_states_.insert(s.id);
  }

  void touch_state(StateId id) {
    (original_states_.count(id) ? cs_.states : cs_.added_states).insert(id);
  }

  void modify(State& s, NodeId id) {
    cs_.modified.insert(id);
    touch_state(s.id);
  }

  NodeId add_node(State& s, decltype(Node::data) data) {
    NodeId id = p_.fresh_id();
    s.nodes.push_back(Node{id, std::move(data)});
    cs_.added.insert(id);
    touch_state(s.id);
    return id;
  }

  void remove_node(State& s, NodeId id) {
    remove_edges(s, [&](const Edge& e) { return e.src == id || e.dst == id; });
    s.nodes.erase(std::remove_if(s.nodes.begin(), s.nodes.end(), [&](const Node& n) { return n.id == id; }),
                  s.nodes.end());
    cs_.removed.insert(id);
    touch_state(s.id);
  }

  void add_edge(State& s, Edge e) {
    cs_.modified.insert(e.src);
    cs_.modified.insert(e.dst);
    touch_state(s.id);
    s.edges.push_back(std::move(e));
  }

  void remove_edges(State& s, const std::function<bool(const Edge&)>& pred) {
    auto it = std::stable_partition(s.edges.begin(), s.edges.end(), [&](const Edge& e) { return !pred(e); });
    for (auto k = it; k != s.edges.end(); ++k) {
      cs_.modified.insert(k->src);
      cs_.modified.insert(k->dst);
      touch_state(s.id);
    }
    s.edges.erase(it, s.edges.end());
  }

  void finish() {
    for (NodeId id : cs_.added) cs_.modified.erase(id);
    for (NodeId id : cs_.removed) cs_.modified.erase(id);
  }

 private:
  Program& p_;
  ChangeSet& cs_;
  std::set<StateId> original_states_;
};

std::string join_ids(const std::vector<std::uint64_t>& ids) {
  std::string out;
  for (std::size_t k = 0; k < ids.size(); ++k) out += (k ? "," : "") + std::to_string(ids[k]);
  return out;
}

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

std::string unique_name(const Program& p, const State& s, const std::string& base) {
  std::set<std::string> taken;
  for (const auto& sym : p.symbols) taken.insert(sym.name);
  for (const auto& [name, d] : p.containers) taken.insert(name);
  for (const auto& n : s.nodes) {
    if (n.is<MapEntryNode>()) taken.insert(n.as<MapEntryNode>().params.begin(), n.as<MapEntryNode>().params.end());
  }
  std::string name = base;
  for (int k = 1; taken.count(name); ++k) name = base + "_" + std::to_string(k);
  return name;
}

// ---- map tiling ----------------------------------------------------------

bool tiling_applies(const Program& p, NodeId entry) {
  const State* s = p.state_of(entry);
  if (!s) return false;
  const Node* n = s->find(entry);
  if (!n->is<MapEntryNode>()) return false;
  auto scopes = s->scopes();
  if (scopes.at(entry) != kNoNode) return false;
  for (const auto& r : n->as<MapEntryNode>().ranges) {
    if (r.step.as_const() != std::optional<std::int64_t>(1)) return false;
  }
  for (const auto& m : s->nodes) {
    if (m.is<MapEntryNode>() && scopes.at(m.id) == entry) return true;
  }
  return false;
}

void apply_tiling(const TransformationInstance& t, Program& p, Editor& ed) {
  if (t.site.size() != 1 || !tiling_applies(p, t.site[0])) stale(t, "no top-level map nest at the site");
  if (t.tile_size < 1) throw Error(ErrorCode::kInvalidArgument, "tile size must be at least 1");
  State& s = *p.state_of(t.site[0]);
  NodeId entry = t.site[0];
  MapEntryNode me = s.find(entry)->as<MapEntryNode>();
  NodeId exit = me.exit;

  MapEntryNode tiles;
  tiles.label = me.label + "_tiles";
  std::vector<Range> inner;
  for (std::size_t k = 0; k < me.params.size(); ++k) {
    std::string tp = unique_name(p, s, me.params[k] + "_tile");
    const Range& r = me.ranges[k];
    tiles.params.push_back(tp);
    tiles.ranges.push_back(Range{r.begin, r.end, SymExpr(t.tile_size)});
    SymExpr origin = SymExpr::sym(tp);
    SymExpr stop = origin + SymExpr(t.tile_size);
    switch (t.bug) {
      case BugFlag::kTilingNoBoundGuard: break;
      case BugFlag::kTilingOffByOne: stop = min(stop, r.end) + SymExpr(1); break;
      default: stop = min(stop, r.end); break;
    }
    inner.push_back(Range{origin, stop.simplify(), SymExpr(1)});
  }
  NodeId tentry = ed.add_node(s, tiles);
  NodeId texit = ed.add_node(s, MapExitNode{tentry});
  s.find(tentry)->as<MapEntryNode>().exit = texit;
  s.find(entry)->as<MapEntryNode>().ranges = inner;
  ed.modify(s, entry);

  std::vector<Edge> ins, outs;
  for (const Edge* e : s.in_edges(entry)) ins.push_back(*e);
  for (const Edge* e : s.out_edges(exit)) outs.push_back(*e);
  ed.remove_edges(s, [&](const Edge& e) { return e.dst == entry || e.src == exit; });
  auto inner_conn = [](const std::string& conn, const char* from, const char* to) {
    if (conn.rfind(from, 0) == 0) return to + conn.substr(std::string(from).size());
    return conn.empty() ? conn : std::string(to) + conn;
  };
  for (const Edge& e : ins) {
    ed.add_edge(s, Edge{e.src, e.src_conn, tentry, e.dst_conn, e.memlet});
    ed.add_edge(s, Edge{tentry, inner_conn(e.dst_conn, "IN_", "OUT_"), entry, e.dst_conn, e.memlet});
  }
  if (ins.empty()) ed.add_edge(s, Edge{tentry, "", entry, "", {}});
  for (const Edge& e : outs) {
    ed.add_edge(s, Edge{exit, e.src_conn, texit, inner_conn(e.src_conn, "OUT_", "IN_"), e.memlet});
    ed.add_edge(s, Edge{texit, e.src_conn, e.dst, e.dst_conn, e.memlet});
  }
  if (outs.empty()) ed.add_edge(s, Edge{exit, "", texit, "", {}});
}

// ---- loop unrolling -------------------------------------------------------

struct LoopShape {
  StateId guard = 0, body = 0, before = 0, after = 0;
  std::size_t init = 0, enter = 0, back = 0, leave = 0;
  std::string var;
  std::int64_t begin = 0, end = 0, step = 0, trips = 0;
};

std::optional<LoopShape> loop_at(const Program& p, StateId guard) {
  const State* g = p.state(guard);
  if (!g || !g->nodes.empty()) return std::nullopt;
  std::vector<std::size_t> ins, outs;
  for (std::size_t k = 0; k < p.interstate.size(); ++k) {
    if (p.interstate[k].dst == guard) ins.push_back(k);
    if (p.interstate[k].src == guard) outs.push_back(k);
  }
  if (ins.size() != 2 || outs.size() != 2) return std::nullopt;
  LoopShape L;
  L.guard = guard;
  // The entering edge carries `var < end` or `var > end`.
  for (std::size_t k : outs) {
    const ScalarExpr& cond = p.interstate[k].guard;
    if (cond.is_null() || cond.kind() != ScalarExpr::Kind::kBinary) continue;
    if (cond.op() != ScalarExpr::Op::kLt && cond.op() != ScalarExpr::Op::kGt) continue;
    const auto& lhs = cond.children()[0];
    const auto& rhs = cond.children()[1];
    if (lhs.kind() != ScalarExpr::Kind::kName || rhs.kind() != ScalarExpr::Kind::kInt) continue;
    L.enter = k;
    L.var = lhs.identifier();
    L.end = rhs.int_value();
    L.body = p.interstate[k].dst;
  }
  if (L.var.empty()) return std::nullopt;
  L.leave = outs[0] == L.enter ? outs[1] : outs[0];
  L.after = p.interstate[L.leave].dst;
  const ScalarExpr& exit_cond = p.interstate[L.leave].guard;
  if (exit_cond != ScalarExpr::unary(ScalarExpr::Op::kNot, p.interstate[L.enter].guard)) return std::nullopt;
  bool less = p.interstate[L.enter].guard.op() == ScalarExpr::Op::kLt;

  bool have_back = false, have_init = false;
  for (std::size_t k : ins) {
    const auto& e = p.interstate[k];
    if (!e.guard.is_null()) return std::nullopt;
    if (e.src == L.body) {
      if (e.assignments.size() != 1 || e.assignments[0].first != L.var) return std::nullopt;
      Affine a = Affine::of(e.assignments[0].second);
      if (a.terms.size() != 1 || a.coefficient(L.var) != 1 || a.constant == 0) return std::nullopt;
      L.step = a.constant;
      L.back = k;
      have_back = true;
    } else {
      for (const auto& [name, value] : e.assignments) {
        if (name != L.var) continue;
        auto c = value.simplify().as_const();
        if (!c) return std::nullopt;
        L.begin = *c;
        have_init = true;
      }
      L.init = k;
      L.before = e.src;
    }
  }
  if (!have_back || !have_init || (L.step > 0) != less) return std::nullopt;
  std::set<StateId> distinct{L.guard, L.body, L.before, L.after};
  if (distinct.size() != 4) return std::nullopt;
  // The body is entered only from the guard and only returns to it.
  for (std::size_t k = 0; k < p.interstate.size(); ++k) {
    const auto& e = p.interstate[k];
    if (e.dst == L.body && k != L.enter) return std::nullopt;
    if (e.src == L.body && k != L.back) return std::nullopt;
  }
  std::int64_t span = L.step > 0 ? L.end - L.begin : L.begin - L.end;
  std::int64_t mag = L.step > 0 ? L.step : -L.step;
  L.trips = span <= 0 ? 0 : (span + mag - 1) / mag;
  if (L.trips > kMaxUnrollTrips) return std::nullopt;
  return L;
}

void apply_unroll(const TransformationInstance& t, Program& p, Editor& ed) {
  if (t.site.size() != 1) stale(t, "expected one loop guard state");
  auto L = loop_at(p, t.site[0]);
  if (!L) stale(t, "no counted loop at the site");
  std::int64_t copies = L->trips;
  if (t.bug == BugFlag::kUnrollIgnoresNegativeStep && L->step < 0) copies = (L->trips + 1) / 2;

  const State body = *p.state(L->body);
  InterstateEdge init = p.interstate[L->init];
  ed.touch_state(L->before);
  ed.touch_state(L->after);
  ed.touch_state(L->guard);
  ed.touch_state(L->body);
  for (const auto& n : body.nodes) ed.remove_node(*p.state(L->body), n.id);

  std::vector<StateId> chain;
  for (std::int64_t k = 0; k < copies; ++k) {
    State c;
    c.id = p.fresh_id();
    c.label = body.label + "_" + std::to_string(k);
    p.states.push_back(c);
    State& cs = p.states.back();
    ed.touch_state(cs.id);
    std::map<NodeId, NodeId> ids;
    for (const auto& n : body.nodes) ids[n.id] = ed.add_node(cs, n.data);
    for (auto& n : cs.nodes) {
      if (n.is<MapEntryNode>()) n.as<MapEntryNode>().exit = ids.at(n.as<MapEntryNode>().exit);
      if (n.is<MapExitNode>()) n.as<MapExitNode>().entry = ids.at(n.as<MapExitNode>().entry);
    }
    for (const auto& e : body.edges) ed.add_edge(cs, Edge{ids.at(e.src), e.src_conn, ids.at(e.dst), e.dst_conn, e.memlet});
    chain.push_back(cs.id);
  }

  auto assign_var = [&](std::int64_t k) {
    return std::vector<std::pair<std::string, SymExpr>>{{L->var, SymExpr(L->begin + k * L->step)}};
  };
  std::vector<InterstateEdge> edges;
  for (std::size_t k = 0; k < p.interstate.size(); ++k) {
    if (k == L->init) {
      InterstateEdge first = init;
      first.dst = chain.empty() ? L->after : chain.front();
      edges.push_back(first);
    } else if (k != L->enter && k != L->back && k != L->leave) {
      edges.push_back(p.interstate[k]);
    }
  }
  for (std::size_t k = 0; k < chain.size(); ++k) {
    StateId next = k + 1 < chain.size() ? chain[k + 1] : L->after;
    // The last copy leaves the variable at its exit value even when copies are missing.
    std::int64_t after = k + 1 < chain.size() ? static_cast<std::int64_t>(k) + 1 : L->trips;
    edges.push_back(InterstateEdge{chain[k], next, {}, assign_var(after)});
  }
  p.interstate = std::move(edges);
  p.states.erase(std::remove_if(p.states.begin(), p.states.end(),
                                [&](const State& s) { return s.id == L->guard || s.id == L->body; }),
                 p.states.end());
}

// ---- tasklet fusion -------------------------------------------------------

struct FusionShape {
  NodeId access = kNoNode, producer = kNoNode, consumer = kNoNode;
  std::string consumer_inlet;
  bool live = false;
};

std::optional<FusionShape> fusion_at(const Program& p, NodeId access) {
  const State* s = p.state_of(access);
  if (!s) return std::nullopt;
  const Node* a = s->find(access);
  if (!a->is<AccessNode>()) return std::nullopt;
  const std::string& container = a->as<AccessNode>().container;
  DType dt = p.container(container).dtype;
  if (dt != DType::kF64 && dt != DType::kI64) return std::nullopt;
  auto ins = s->in_edges(access);
  if (ins.size() != 1 || ins[0]->memlet.empty() || ins[0]->memlet.wcr != Wcr::kNone) return std::nullopt;
  const Node* prod = s->find(ins[0]->src);
  if (!prod->is<TaskletNode>() || prod->as<TaskletNode>().outputs.size() != 1) return std::nullopt;
  if (s->out_edges(prod->id).size() != 1) return std::nullopt;

  FusionShape f;
  f.access = access;
  f.producer = prod->id;
  bool exported = false;
  for (const Edge* e : s->out_edges(access)) {
    const Node* d = s->find(e->dst);
    if (d->is<TaskletNode>()) {
      if (f.consumer != kNoNode) return std::nullopt;
      f.consumer = d->id;
      f.consumer_inlet = e->dst_conn;
      const auto& w = ins[0]->memlet.subset;
      const auto& r = e->memlet.subset;
      if (w.rank() != r.rank()) return std::nullopt;
      for (std::size_t k = 0; k < w.rank(); ++k) {
        if (!provably_equal(w.dims()[k].begin, r.dims()[k].begin) || !provably_equal(w.dims()[k].end, r.dims()[k].end)) {
          return std::nullopt;
        }
      }
    } else if (d->is<MapExitNode>()) {
      exported = true;
    } else {
      return std::nullopt;
    }
  }
  if (f.consumer == kNoNode) return std::nullopt;
  auto scopes = s->scopes();
  if (scopes.at(f.producer) != scopes.at(f.consumer)) return std::nullopt;
  // Dead only if nothing but this producer/consumer pair ever touches the
  // container.
  bool other_use = false;
  for (const auto& st : p.states) {
    for (const auto& acc : collect_accesses(st)) {
      if (acc.container == container && acc.tasklet != f.producer && acc.tasklet != f.consumer) other_use = true;
    }
  }
  f.live = exported || other_use || !p.container(container).transient;
  return f;
}

void apply_fusion(const TransformationInstance& t, Program& p, Editor& ed) {
  if (t.site.size() != 1) stale(t, "expected one access node");
  auto F = fusion_at(p, t.site[0]);
  if (!F) stale(t, "no producer/consumer pair at the site");
  State& s = *p.state_of(F->access);
  const TaskletNode P = s.find(F->producer)->as<TaskletNode>();
  const TaskletNode Q = s.find(F->consumer)->as<TaskletNode>();
  const std::string& container = s.find(F->access)->as<AccessNode>().container;
  bool keep_write = F->live && t.bug != BugFlag::kFusionDropsLiveWrite;

  std::set<std::string> used(Q.inputs.begin(), Q.inputs.end());
  used.insert(Q.outputs.begin(), Q.outputs.end());
  std::map<std::string, std::string> rename;
  auto fresh = [&](const std::string& base) {
    std::string name = base;
    for (int k = 1; used.count(name); ++k) name = base + "_" + std::to_string(k);
    used.insert(name);
    return name;
  };
  TaskletNode fused;
  fused.label = P.label + "_" + Q.label;
  for (const auto& in : P.inputs) {
    rename[in] = fresh(in);
    fused.inputs.push_back(rename[in]);
  }
  for (const auto& in : Q.inputs) {
    if (in != F->consumer_inlet) fused.inputs.push_back(in);
  }
  fused.outputs = Q.outputs;
  ScalarExpr produced = P.code.at(0).second.rename(rename);
  produced = ScalarExpr::call(p.container(container).dtype == DType::kF64 ? "float" : "int", {produced});
  for (const auto& [out, e] : Q.code) fused.code.emplace_back(out, e.substitute({{F->consumer_inlet, produced}}));
  std::string kept_outlet;
  if (keep_write) {
    kept_outlet = fresh(P.outputs[0]);
    fused.outputs.push_back(kept_outlet);
    fused.code.emplace_back(kept_outlet, P.code.at(0).second.rename(rename));
  }

  std::vector<Edge> p_in, q_in, q_out;
  Edge write = *s.in_edges(F->access)[0];
  for (const Edge* e : s.in_edges(F->producer)) p_in.push_back(*e);
  for (const Edge* e : s.in_edges(F->consumer)) {
    if (e->src != F->access) q_in.push_back(*e);
  }
  for (const Edge* e : s.out_edges(F->consumer)) q_out.push_back(*e);

  NodeId f = ed.add_node(s, fused);
  for (const Edge& e : p_in) ed.add_edge(s, Edge{e.src, e.src_conn, f, rename.count(e.dst_conn) ? rename[e.dst_conn] : e.dst_conn, e.memlet});
  for (const Edge& e : q_in) ed.add_edge(s, Edge{e.src, e.src_conn, f, e.dst_conn, e.memlet});
  for (const Edge& e : q_out) ed.add_edge(s, Edge{f, e.src_conn, e.dst, e.dst_conn, e.memlet});
  ed.remove_node(s, F->producer);
  ed.remove_node(s, F->consumer);
  if (keep_write) {
    ed.add_edge(s, Edge{f, kept_outlet, F->access, write.dst_conn, write.memlet});
  } else {
    ed.remove_node(s, F->access);
  }
}

}  // namespace

// ---- names ------------------------------------------------------------------

std::string_view to_string(TransformKind k) {
  switch (k) {
    case TransformKind::kMapTiling: return "map-tiling";
    case TransformKind::kLoopUnroll: return "loop-unroll";
    case TransformKind::kTaskletFusion: return "tasklet-fusion";
    case TransformKind::kIdentity: return "identity";
  }
  return "?";
}

TransformKind transform_kind_from_string(std::string_view s) {
  for (TransformKind k : {TransformKind::kMapTiling, TransformKind::kLoopUnroll, TransformKind::kTaskletFusion,
                          TransformKind::kIdentity}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown transformation '" + std::string(s) + "'");
}

const std::vector<TransformKind>& builtin_transformations() {
  static const std::vector<TransformKind> kinds{TransformKind::kMapTiling, TransformKind::kLoopUnroll,
                                                TransformKind::kTaskletFusion};
  return kinds;
}

std::string_view to_string(BugFlag b) {
  switch (b) {
    case BugFlag::kNone: return "none";
    case BugFlag::kTilingOffByOne: return "off-by-one";
    case BugFlag::kTilingNoBoundGuard: return "no-bound-guard";
    case BugFlag::kUnrollIgnoresNegativeStep: return "ignores-negative-step";
    case BugFlag::kFusionDropsLiveWrite: return "drops-live-write";
  }
  return "?";
}

BugFlag bug_from_string(std::string_view s) {
  for (BugFlag b : {BugFlag::kNone, BugFlag::kTilingOffByOne, BugFlag::kTilingNoBoundGuard,
                    BugFlag::kUnrollIgnoresNegativeStep, BugFlag::kFusionDropsLiveWrite}) {
    if (to_string(b) == s) return b;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown bug flag '" + std::string(s) + "'");
}

TransformKind bug_owner(BugFlag b) {
  switch (b) {
    case BugFlag::kTilingOffByOne:
    case BugFlag::kTilingNoBoundGuard: return TransformKind::kMapTiling;
    case BugFlag::kUnrollIgnoresNegativeStep: return TransformKind::kLoopUnroll;
    case BugFlag::kFusionDropsLiveWrite: return TransformKind::kTaskletFusion;
    case BugFlag::kNone: break;
  }
  return TransformKind::kIdentity;
}

std::string TransformationInstance::id() const {
  std::string out(to_string(kind));
  if (!site.empty()) out += "@" + join_ids(site);
  std::vector<std::string> params;
  if (kind == TransformKind::kMapTiling && tile_size != 32) params.push_back("tile=" + std::to_string(tile_size));
  if (bug != BugFlag::kNone) params.push_back("bug=" + std::string(to_string(bug)));
  for (std::size_t k = 0; k < params.size(); ++k) out += (k ? "&" : "?") + params[k];
  return out;
}

TransformationInstance TransformationInstance::parse(std::string_view text) {
  TransformationInstance t;
  std::string_view head = text, query;
  if (auto q = text.find('?'); q != std::string_view::npos) {
    head = text.substr(0, q);
    query = text.substr(q + 1);
  }
  std::string_view kind = head;
  if (auto at = head.find('@'); at != std::string_view::npos) {
    kind = head.substr(0, at);
    std::string_view ids = head.substr(at + 1);
    while (true) {
      auto comma = ids.find(',');
      t.site.push_back(parse_u64(ids.substr(0, comma), "site id"));
      if (comma == std::string_view::npos) break;
      ids = ids.substr(comma + 1);
    }
  }
  t.kind = transform_kind_from_string(kind);
  while (!query.empty()) {
    auto amp = query.find('&');
    std::string_view kv = query.substr(0, amp);
    auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::kInvalidArgument, "bad parameter '" + std::string(kv) + "'");
    std::string_view key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (key == "tile") {
      t.tile_size = static_cast<std::int64_t>(parse_u64(value, "tile size"));
    } else if (key == "bug") {
      t.bug = bug_from_string(value);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown parameter '" + std::string(key) + "'");
    }
    if (amp == std::string_view::npos) break;
    query = query.substr(amp + 1);
  }
  if (t.bug != BugFlag::kNone && bug_owner(t.bug) != t.kind) {
    throw Error(ErrorCode::kInvalidArgument, std::string(to_string(t.bug)) + " is not a " + std::string(kind) + " bug");
  }
  return t;
}

// ---- change sets ------------------------------------------------------------

bool ChangeSet::empty() const {
  return modified.empty() && added.empty() && removed.empty() && states.empty() && added_states.empty();
}

bool ChangeSet::covers(const ChangeSet& o) const {
  auto sub = [](const auto& a, const auto& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); };
  return sub(o.modified, modified) && sub(o.added, added) && sub(o.removed, removed) && sub(o.states, states) &&
         sub(o.added_states, added_states);
}

std::string ChangeSet::str() const {
  if (empty()) return "no changes\n";
  std::string out;
  auto line = [&](const char* label, const std::set<std::uint64_t>& ids) {
    if (ids.empty()) return;
    out += label;
    for (auto id : ids) out += " " + std::to_string(id);
    out += "\n";
  };
  line("modified:", modified);
  line("added:", added);
  line("removed:", removed);
  line("states:", states);
  line("added states:", added_states);
  return out;
}

// ---- match / apply ----------------------------------------------------------

std::vector<TransformationInstance> match(TransformKind kind, const Program& p) {
  std::vector<TransformationInstance> out;
  auto push = [&](std::uint64_t id) {
    TransformationInstance t;
    t.kind = kind;
    t.site = {id};
    out.push_back(t);
  };
  switch (kind) {
    case TransformKind::kIdentity: out.push_back(TransformationInstance{}); break;
    case TransformKind::kMapTiling:
      for (const auto& s : p.states) {
        for (const auto& n : s.nodes) {
          if (tiling_applies(p, n.id)) push(n.id);
        }
      }
      break;
    case TransformKind::kLoopUnroll:
      for (const auto& s : p.states) {
        if (loop_at(p, s.id)) push(s.id);
      }
      break;
    case TransformKind::kTaskletFusion:
      for (const auto& s : p.states) {
        for (const auto& n : s.nodes) {
          if (fusion_at(p, n.id)) push(n.id);
        }
      }
      break;
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.site < b.site; });
  return out;
}

Applied apply(const TransformationInstance& t, const Program& p) {
  Applied r{p, {}};
  Editor ed(r.program, r.changes);
  switch (t.kind) {
    case TransformKind::kIdentity: break;
    case TransformKind::kMapTiling: apply_tiling(t, r.program, ed); break;
    case TransformKind::kLoopUnroll: apply_unroll(t, r.program, ed); break;
    case TransformKind::kTaskletFusion: apply_fusion(t, r.program, ed); break;
  }
  ed.finish();
  return r;
}

// ---- structural diff --------------------------------------------------------

ChangeSet diff(const Program& a, const Program& b) {
  ChangeSet cs;
  struct Where {
    StateId state;
    const Node* node;
  };
  auto index = [](const Program& p) {
    std::map<NodeId, Where> m;
    for (const auto& s : p.states) {
      for (const auto& n : s.nodes) m[n.id] = {s.id, &n};
    }
    return m;
  };
  auto ia = index(a), ib = index(b);
  auto touch = [&](StateId s) { (a.state(s) ? cs.states : cs.added_states).insert(s); };
  for (const auto& [id, w] : ia) {
    auto it = ib.find(id);
    if (it == ib.end()) {
      cs.removed.insert(id);
      touch(w.state);
    } else if (it->second.state != w.state || !(*it->second.node == *w.node)) {
      cs.modified.insert(id);
      touch(w.state);
      touch(it->second.state);
    }
  }
  for (const auto& [id, w] : ib) {
    if (!ia.count(id)) {
      cs.added.insert(id);
      touch(w.state);
    }
  }
  auto edge_key = [](const Edge& e) {
    return std::to_string(e.src) + "|" + e.src_conn + "|" + std::to_string(e.dst) + "|" + e.dst_conn + "|" +
           e.memlet.str();
  };
  std::set<StateId> ids;
  for (const auto& s : a.states) ids.insert(s.id);
  for (const auto& s : b.states) ids.insert(s.id);
  for (StateId id : ids) {
    const State* sa = a.state(id);
    const State* sb = b.state(id);
    if (!sa || !sb || sa->label != sb->label) touch(id);
    std::multiset<std::string> ea, eb;
    std::map<std::string, const Edge*> any;
    if (sa) {
      for (const auto& e : sa->edges) ea.insert(edge_key(e)), any[edge_key(e)] = &e;
    }
    if (sb) {
      for (const auto& e : sb->edges) eb.insert(edge_key(e)), any[edge_key(e)] = &e;
    }
    std::vector<std::string> only;
    std::set_symmetric_difference(ea.begin(), ea.end(), eb.begin(), eb.end(), std::back_inserter(only));
    for (const auto& k : only) {
      const Edge* e = any.at(k);
      for (NodeId n : {e->src, e->dst}) {
        if (ia.count(n) && ib.count(n)) cs.modified.insert(n);
      }
      touch(id);
    }
  }
  auto isedge_key = [](const InterstateEdge& e) {
    std::string k = std::to_string(e.src) + ">" + std::to_string(e.dst) + "|" + (e.guard.is_null() ? "" : e.guard.str());
    for (const auto& [n, v] : e.assignments) k += "|" + n + "=" + v.str();
    return k;
  };
  std::multiset<std::string> ia_edges, ib_edges;
  std::map<std::string, const InterstateEdge*> any;
  for (const auto& e : a.interstate) ia_edges.insert(isedge_key(e)), any[isedge_key(e)] = &e;
  for (const auto& e : b.interstate) ib_edges.insert(isedge_key(e)), any[isedge_key(e)] = &e;
  std::vector<std::string> only;
  std::set_symmetric_difference(ia_edges.begin(), ia_edges.end(), ib_edges.begin(), ib_edges.end(),
                                std::back_inserter(only));
  for (const auto& k : only) {
    touch(any.at(k)->src);
    touch(any.at(k)->dst);
  }
  if (a.start != b.start) {
    touch(a.start);
    touch(b.start);
  }
  for (NodeId id : cs.added) cs.modified.erase(id);
  for (NodeId id : cs.removed) cs.modified.erase(id);
  return cs;
}

}  // namespace cutflow
