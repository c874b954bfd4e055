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

#include "cutflow/mincut.hpp"

#include <deque>
#include <limits>
#include <map>
#include <sstream>

#include "cutflow/error.hpp"

namespace cutflow {

std::size_t FlowNetwork::add_node(NodeId original, std::string label) {
  nodes.push_back(original);
  labels.push_back(label.empty() ? std::to_string(original) : std::move(label));
  return nodes.size() - 1;
}

void FlowNetwork::add_arc(std::size_t from, std::size_t to, std::optional<std::int64_t> capacity, std::string memlet) {
  arcs.push_back({from, to, capacity, std::move(memlet)});
}

std::int64_t FlowNetwork::infinity() const {
  std::int64_t sum = 0;
  for (const auto& a : arcs) sum += a.capacity.value_or(0);
  return sum + 1;
}

std::string FlowNetwork::dot() const {
  std::ostringstream os;
  os << "digraph flow {\n";
  for (std::size_t k = 0; k < nodes.size(); ++k) os << "  n" << k << " [label=\"" << labels[k] << "\"];\n";
  for (const auto& a : arcs) {
    os << "  n" << a.from << " -> n" << a.to << " [label=\"" << (a.capacity ? std::to_string(*a.capacity) : "inf")
       << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

FlowResult max_flow(const FlowNetwork& net) {
  struct Res {
    std::size_t to;
    std::int64_t cap;
    std::size_t rev;
  };
  const std::size_t n = net.nodes.size();
  const std::int64_t inf = net.infinity();
  std::vector<std::vector<Res>> g(n);
  for (const auto& a : net.arcs) {
    if (a.from == a.to) continue;
    g[a.from].push_back({a.to, a.capacity.value_or(inf), g[a.to].size()});
    g[a.to].push_back({a.from, 0, g[a.from].size() - 1});
  }
  FlowResult r;
  auto bfs = [&](std::vector<std::pair<std::size_t, std::size_t>>& parent) {
    parent.assign(n, {n, 0});
    parent[FlowNetwork::kSource] = {FlowNetwork::kSource, 0};
    std::deque<std::size_t> q{FlowNetwork::kSource};
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop_front();
      for (std::size_t k = 0; k < g[u].size(); ++k) {
        const Res& e = g[u][k];
        if (e.cap <= 0 || parent[e.to].first != n) continue;
        parent[e.to] = {u, k};
        q.push_back(e.to);
      }
    }
  };
  std::vector<std::pair<std::size_t, std::size_t>> parent;
  while (true) {
    bfs(parent);
    if (parent[FlowNetwork::kSink].first == n) break;
    std::int64_t push = std::numeric_limits<std::int64_t>::max();
    for (std::size_t v = FlowNetwork::kSink; v != FlowNetwork::kSource; v = parent[v].first) {
      push = std::min(push, g[parent[v].first][parent[v].second].cap);
    }
    for (std::size_t v = FlowNetwork::kSink; v != FlowNetwork::kSource; v = parent[v].first) {
      Res& e = g[parent[v].first][parent[v].second];
      e.cap -= push;
      g[v][e.rev].cap += push;
    }
    r.value += push;
  }
  r.source_side.resize(n);
  for (std::size_t k = 0; k < n; ++k) r.source_side[k] = parent[k].first != n;
  return r;
}

namespace {

// Top-level representative per node: the outermost enclosing map entry.
std::map<NodeId, NodeId> representatives(const State& s) {
  auto scopes = s.scopes();
  std::map<NodeId, NodeId> rep;
  for (const auto& n : s.nodes) {
    NodeId cur = n.id;
    while (scopes.at(cur) != kNoNode) cur = scopes.at(cur);
    if (n.is<MapExitNode>() && scopes.at(n.id) == kNoNode) cur = n.as<MapExitNode>().entry;
    rep[n.id] = cur;
  }
  return rep;
}

struct Collapsed {
  std::map<NodeId, NodeId> rep;
  std::set<NodeId> tops;
  std::vector<const Edge*> edges;  // edges between distinct representatives
};

Collapsed collapse(const State& s) {
  Collapsed c;
  c.rep = representatives(s);
  for (const auto& [n, r] : c.rep) c.tops.insert(r);
  for (const auto& e : s.edges) {
    if (c.rep.at(e.src) != c.rep.at(e.dst)) c.edges.push_back(&e);
  }
  return c;
}

}  // namespace

Binding concretize(const Program& p, const Binding& given, std::int64_t fallback) {
  Binding b;
  for (const auto& decl : p.symbols) {
    std::int64_t v = fallback;
    if (decl.min) v = std::max(v, *decl.min);
    if (decl.max) v = std::min(v, *decl.max);
    b[decl.name] = v;
  }
  for (const auto& [name, v] : given) b[name] = v;
  return b;
}

FlowNetwork prepare(const Program& p, const Cutout& c, const Binding& binding) {
  if (c.whole_states || c.region.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "input-flow cut needs a single-state cutout");
  }
  const State& s = *p.state(*c.region.begin());
  Collapsed g = collapse(s);
  FlowNetwork net;
  std::map<NodeId, std::size_t> index;
  for (NodeId t : g.tops) {
    if (c.nodes.count(t)) continue;
    index[t] = net.add_node(t, s.find(t)->label());
  }
  auto is_data = [&](NodeId n) { return s.find(n)->is<AccessNode>(); };
  auto size_of = [&](NodeId n) {
    return p.container(s.find(n)->as<AccessNode>().container).total_size(binding);
  };
  std::set<std::string> inputs;
  for (const auto& r : c.input_configuration) inputs.insert(r.container);

  // Reachability towards the cutout in the collapsed graph.
  std::set<NodeId> reaches_cutout;
  for (NodeId t : g.tops) {
    if (c.nodes.count(t)) reaches_cutout.insert(t);
  }
  for (bool grew = true; grew;) {
    grew = false;
    for (const Edge* e : g.edges) {
      NodeId a = g.rep.at(e->src), b = g.rep.at(e->dst);
      if (reaches_cutout.count(b) && reaches_cutout.insert(a).second) grew = true;
    }
  }

  std::map<NodeId, int> in_degree;
  for (const Edge* e : g.edges) ++in_degree[g.rep.at(e->dst)];

  // Source arcs into the cutout carry what the cutout reads, once per container.
  std::set<std::string> fed;
  for (NodeId t : g.tops) {
    bool external = is_data(t) && !p.container(s.find(t)->as<AccessNode>().container).transient;
    bool source = in_degree[t] == 0 || external;
    if (!source) continue;
    if (!c.nodes.count(t)) {
      net.add_arc(FlowNetwork::kSource, index.at(t), is_data(t) ? size_of(t) : 0);
    } else if (is_data(t)) {
      const std::string& name = s.find(t)->as<AccessNode>().container;
      if (inputs.count(name)) fed.insert(name);
    }
  }
  for (const auto& r : c.input_configuration) {
    if (fed.count(r.container)) net.add_arc(FlowNetwork::kSource, FlowNetwork::kSink, r.range.volume(binding), r.container);
  }

  for (const Edge* e : g.edges) {
    NodeId a = g.rep.at(e->src), b = g.rep.at(e->dst);
    bool in_a = c.nodes.count(a), in_b = c.nodes.count(b);
    if (in_a && in_b) continue;
    std::string label = e->memlet.str();
    std::int64_t volume = e->memlet.empty() ? 0 : e->memlet.subset.volume(binding);
    if (!in_a && in_b) {
      // Only data the cutout actually consumes costs anything.
      if (is_data(b) && inputs.count(s.find(b)->as<AccessNode>().container)) {
        net.add_arc(index.at(a), FlowNetwork::kSink, volume, label);
      }
      continue;
    }
    if (in_a && !in_b) {
      if (reaches_cutout.count(b)) {
        net.add_arc(FlowNetwork::kSource, FlowNetwork::kSink, 0, label);
      } else {
        net.add_arc(FlowNetwork::kSink, index.at(b), volume, label);
      }
      continue;
    }
    std::optional<std::int64_t> cap = volume;
    bool external_dst = is_data(b) && !p.container(s.find(b)->as<AccessNode>().container).transient;
    if (is_data(a) || external_dst) cap = std::nullopt;
    net.add_arc(index.at(a), index.at(b), cap, label);
  }
  return net;
}

CutResult minimize_inputs(const Program& p, const Cutout& c, const Binding& binding) {
  CutResult r;
  r.cutout = c;
  r.old_volume = r.new_volume = c.input_volume(binding);
  if (c.whole_states || c.region.size() != 1) return r;
  FlowNetwork net = prepare(p, c, binding);
  FlowResult flow = max_flow(net);
  r.flow = flow.value;

  // Sink-side nodes with a path to T join the cutout.
  std::set<std::size_t> to_sink{FlowNetwork::kSink};
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& a : net.arcs) {
      if (a.from == FlowNetwork::kSource || a.from == FlowNetwork::kSink) continue;
      if (to_sink.count(a.to) && !flow.source_side[a.from] && to_sink.insert(a.from).second) grew = true;
    }
  }
  for (std::size_t k : to_sink) {
    if (k != FlowNetwork::kSink) r.extension.insert(net.nodes[k]);
  }
  if (r.extension.empty()) return r;
  std::set<NodeId> grown = c.nodes;
  grown.insert(r.extension.begin(), r.extension.end());
  Cutout bigger = extract_nodes(p, *c.region.begin(), grown);
  std::int64_t volume = bigger.input_volume(binding);
  if (volume < r.old_volume) {
    r.cutout = std::move(bigger);
    r.new_volume = volume;
    r.extended = true;
  }
  return r;
}

}  // namespace cutflow
