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

#include "cutflow/ir_io.hpp"

#include <fstream>
#include <sstream>

#include "cutflow/error.hpp"
#include "json.hpp"

namespace cutflow {

using json = nlohmann::json;

namespace {

json range_to_json(const Range& r) { return json::array({r.begin.str(), r.end.str(), r.step.str()}); }

json node_to_json(const Node& n) {
  json j;
  j["id"] = n.id;
  j["kind"] = std::string(to_string(n.kind()));
  switch (n.kind()) {
    case NodeKind::kAccess: j["container"] = n.as<AccessNode>().container; break;
    case NodeKind::kTasklet: {
      const auto& t = n.as<TaskletNode>();
      j["label"] = t.label;
      j["inputs"] = t.inputs;
      j["outputs"] = t.outputs;
      json code = json::array();
      for (const auto& [out, expr] : t.code) code.push_back(json::array({out, expr.str()}));
      j["code"] = code;
      break;
    }
    case NodeKind::kMapEntry: {
      const auto& m = n.as<MapEntryNode>();
      j["label"] = m.label;
      j["params"] = m.params;
      json ranges = json::array();
      for (const auto& r : m.ranges) ranges.push_back(range_to_json(r));
      j["ranges"] = ranges;
      j["exit"] = m.exit;
      break;
    }
    case NodeKind::kMapExit: j["entry"] = n.as<MapExitNode>().entry; break;
    case NodeKind::kOpaque:
      j["label"] = n.as<OpaqueNode>().label;
      j["side_effects"] = n.as<OpaqueNode>().may_have_side_effects;
      break;
  }
  return j;
}

json edge_to_json(const Edge& e) {
  json j;
  j["src"] = e.src;
  j["src_conn"] = e.src_conn;
  j["dst"] = e.dst;
  j["dst_conn"] = e.dst_conn;
  if (!e.memlet.empty()) {
    j["container"] = e.memlet.container;
    j["subset"] = e.memlet.subset.str();
    j["wcr"] = std::string(to_string(e.memlet.wcr));
  }
  return j;
}

Range range_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kMalformedDocument, "range must be [begin, end, step]");
  return {SymExpr::parse(j[0].get<std::string>()), SymExpr::parse(j[1].get<std::string>()),
          SymExpr::parse(j[2].get<std::string>())};
}

Node node_from_json(const json& j) {
  Node n;
  n.id = j.at("id").get<NodeId>();
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "access") {
    n.data = AccessNode{j.at("container").get<std::string>()};
  } else if (kind == "tasklet") {
    TaskletNode t;
    t.label = j.at("label").get<std::string>();
    t.inputs = j.at("inputs").get<std::vector<std::string>>();
    t.outputs = j.at("outputs").get<std::vector<std::string>>();
    for (const auto& c : j.at("code")) {
      t.code.emplace_back(c.at(0).get<std::string>(), ScalarExpr::parse(c.at(1).get<std::string>()));
    }
    n.data = std::move(t);
  } else if (kind == "map_entry") {
    MapEntryNode m;
    m.label = j.at("label").get<std::string>();
    m.params = j.at("params").get<std::vector<std::string>>();
    for (const auto& r : j.at("ranges")) m.ranges.push_back(range_from_json(r));
    m.exit = j.at("exit").get<NodeId>();
    n.data = std::move(m);
  } else if (kind == "map_exit") {
    n.data = MapExitNode{j.at("entry").get<NodeId>()};
  } else if (kind == "opaque") {
    n.data = OpaqueNode{j.at("label").get<std::string>(), j.at("side_effects").get<bool>()};
  } else {
    throw Error(ErrorCode::kMalformedDocument, "unknown node kind '" + kind + "'");
  }
  return n;
}

Edge edge_from_json(const json& j) {
  Edge e;
  e.src = j.at("src").get<NodeId>();
  e.src_conn = j.at("src_conn").get<std::string>();
  e.dst = j.at("dst").get<NodeId>();
  e.dst_conn = j.at("dst_conn").get<std::string>();
  if (j.contains("container")) {
    e.memlet.container = j.at("container").get<std::string>();
    e.memlet.subset = SubsetRange::parse(j.at("subset").get<std::string>());
    e.memlet.wcr = wcr_from_string(j.at("wcr").get<std::string>());
  }
  return e;
}

}  // namespace

std::string serialize(const Program& p) {
  json j;
  j["cfprog_version"] = kProgramFormatVersion;
  j["name"] = p.name;
  j["start"] = p.start;
  j["next_id"] = p.next_id;
  json symbols = json::array();
  for (const auto& s : p.symbols) {
    json js{{"name", s.name}};
    if (s.min) js["min"] = *s.min;
    if (s.max) js["max"] = *s.max;
    symbols.push_back(js);
  }
  j["symbols"] = symbols;
  json containers = json::array();
  for (const auto& [name, d] : p.containers) {
    json shape = json::array();
    for (const auto& s : d.shape) shape.push_back(s.str());
    containers.push_back({{"name", name}, {"dtype", std::string(to_string(d.dtype))}, {"shape", shape},
                          {"transient", d.transient}});
  }
  j["containers"] = containers;
  json states = json::array();
  for (const auto& s : p.states) {
    json nodes = json::array();
    for (const auto& n : s.nodes) nodes.push_back(node_to_json(n));
    json edges = json::array();
    for (const auto& e : s.edges) edges.push_back(edge_to_json(e));
    states.push_back({{"id", s.id}, {"label", s.label}, {"nodes", nodes}, {"edges", edges}});
  }
  j["states"] = states;
  json inter = json::array();
  for (const auto& e : p.interstate) {
    json assigns = json::array();
    for (const auto& [name, value] : e.assignments) assigns.push_back(json::array({name, value.str()}));
    inter.push_back({{"src", e.src}, {"dst", e.dst}, {"guard", e.guard.is_null() ? "" : e.guard.str()},
                     {"assignments", assigns}});
  }
  j["interstate"] = inter;
  return j.dump(2) + "\n";
}

Program deserialize(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
  try {
    if (!j.is_object() || !j.contains("cfprog_version")) {
      throw Error(ErrorCode::kMalformedDocument, "missing cfprog_version");
    }
    int version = j.at("cfprog_version").get<int>();
    if (version != kProgramFormatVersion) {
      throw Error(ErrorCode::kUnknownVersion, "cfprog_version " + std::to_string(version));
    }
    Program p;
    p.name = j.at("name").get<std::string>();
    p.start = j.at("start").get<StateId>();
    p.next_id = j.at("next_id").get<std::uint64_t>();
    for (const auto& s : j.at("symbols")) {
      SymbolDecl d{s.at("name").get<std::string>(), std::nullopt, std::nullopt};
      if (s.contains("min")) d.min = s.at("min").get<std::int64_t>();
      if (s.contains("max")) d.max = s.at("max").get<std::int64_t>();
      p.symbols.push_back(d);
    }
    for (const auto& c : j.at("containers")) {
      DataDescriptor d;
      d.name = c.at("name").get<std::string>();
      d.dtype = dtype_from_string(c.at("dtype").get<std::string>());
      for (const auto& s : c.at("shape")) d.shape.push_back(SymExpr::parse(s.get<std::string>()));
      d.transient = c.at("transient").get<bool>();
      p.containers[d.name] = d;
    }
    for (const auto& js : j.at("states")) {
      State s;
      s.id = js.at("id").get<StateId>();
      s.label = js.at("label").get<std::string>();
      for (const auto& n : js.at("nodes")) s.nodes.push_back(node_from_json(n));
      for (const auto& e : js.at("edges")) s.edges.push_back(edge_from_json(e));
      p.states.push_back(std::move(s));
    }
    for (const auto& je : j.at("interstate")) {
      InterstateEdge e;
      e.src = je.at("src").get<StateId>();
      e.dst = je.at("dst").get<StateId>();
      std::string guard = je.at("guard").get<std::string>();
      if (!guard.empty()) e.guard = ScalarExpr::parse(guard);
      for (const auto& a : je.at("assignments")) {
        e.assignments.emplace_back(a.at(0).get<std::string>(), SymExpr::parse(a.at(1).get<std::string>()));
      }
      p.interstate.push_back(std::move(e));
    }
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw Error(ErrorCode::kMalformedDocument, e.what());
    throw;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to '" + path + "'");
}

Program load_program(const std::string& path) { return deserialize(read_file(path)); }

void save_program(const Program& p, const std::string& path) { write_file(path, serialize(p)); }

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string to_dot(const Program& p) {
  std::ostringstream os;
  os << "digraph \"" << dot_escape(p.name) << "\" {\n  compound=true;\n";
  for (const auto& s : p.states) {
    os << "  subgraph cluster_" << s.id << " {\n    label=\"" << dot_escape(s.label) << " (" << s.id << ")\";\n";
    os << "    s" << s.id << " [shape=point];\n";
    for (const auto& n : s.nodes) {
      const char* shape = "box";
      switch (n.kind()) {
        case NodeKind::kAccess: shape = "ellipse"; break;
        case NodeKind::kTasklet: shape = "octagon"; break;
        case NodeKind::kMapEntry: shape = "trapezium"; break;
        case NodeKind::kMapExit: shape = "invtrapezium"; break;
        case NodeKind::kOpaque: shape = "box3d"; break;
      }
      os << "    n" << n.id << " [shape=" << shape << ", label=\"" << dot_escape(n.label()) << "\\n#" << n.id
         << "\"];\n";
    }
    for (const auto& e : s.edges) {
      os << "    n" << e.src << " -> n" << e.dst;
      if (e.memlet.empty()) {
        os << " [style=dashed]";
      } else {
        os << " [label=\"" << dot_escape(e.memlet.str()) << "\"]";
      }
      os << ";\n";
    }
    os << "  }\n";
  }
  for (const auto& e : p.interstate) {
    std::string label = e.guard.is_null() ? "" : e.guard.str();
    for (const auto& [name, value] : e.assignments) {
      label += (label.empty() ? "" : "; ") + name + " := " + value.str();
    }
    os << "  s" << e.src << " -> s" << e.dst << " [ltail=cluster_" << e.src << ", lhead=cluster_" << e.dst
       << ", label=\"" << dot_escape(label) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace cutflow
