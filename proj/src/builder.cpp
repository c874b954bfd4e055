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

#include "cutflow/builder.hpp"

#include "cutflow/error.hpp"

namespace cutflow {

ProgramBuilder::ProgramBuilder(std::string name) { p_.name = std::move(name); }

void ProgramBuilder::add_symbol(const std::string& name, std::optional<std::int64_t> min,
                                std::optional<std::int64_t> max) {
  if (p_.has_symbol(name) || p_.containers.count(name)) {
    throw Error(ErrorCode::kDuplicateName, "'" + name + "' is already declared");
  }
  p_.symbols.push_back({name, min, max});
}

void ProgramBuilder::add_container(const std::string& name, DType dtype, std::vector<SymExpr> shape,
                                   bool transient) {
  if (p_.has_symbol(name) || p_.containers.count(name)) {
    throw Error(ErrorCode::kDuplicateName, "'" + name + "' is already declared");
  }
  p_.containers[name] = DataDescriptor{name, dtype, std::move(shape), transient};
}

StateId ProgramBuilder::add_state(const std::string& label) {
  State s;
  s.id = p_.fresh_id();
  s.label = label;
  if (p_.states.empty()) p_.start = s.id;
  p_.states.push_back(std::move(s));
  return p_.states.back().id;
}

State& ProgramBuilder::state(StateId id) {
  State* s = p_.state(id);
  if (!s) throw Error(ErrorCode::kUnknownElement, "state " + std::to_string(id));
  return *s;
}

void ProgramBuilder::require_container(const std::string& name) const {
  if (!p_.containers.count(name)) throw Error(ErrorCode::kUnknownContainer, "container '" + name + "'");
}

NodeId ProgramBuilder::add_access(StateId st, const std::string& container) {
  require_container(container);
  State& s = state(st);
  Node n{p_.fresh_id(), AccessNode{container}};
  s.nodes.push_back(n);
  return n.id;
}

NodeId ProgramBuilder::add_tasklet(StateId st, const std::string& label, std::vector<std::string> inputs,
                                   std::vector<std::string> outputs,
                                   const std::vector<std::pair<std::string, std::string>>& code) {
  State& s = state(st);
  TaskletNode t{label, std::move(inputs), std::move(outputs), {}};
  for (const auto& [out, text] : code) t.code.emplace_back(out, ScalarExpr::parse(text));
  Node n{p_.fresh_id(), std::move(t)};
  s.nodes.push_back(std::move(n));
  return s.nodes.back().id;
}

MapScope ProgramBuilder::add_map(StateId st, const std::string& label, std::vector<std::string> params,
                                 std::vector<Range> ranges) {
  State& s = state(st);
  NodeId entry = p_.fresh_id();
  NodeId exit = p_.fresh_id();
  s.nodes.push_back(Node{entry, MapEntryNode{label, std::move(params), std::move(ranges), exit}});
  s.nodes.push_back(Node{exit, MapExitNode{entry}});
  return {entry, exit};
}

NodeId ProgramBuilder::add_opaque(StateId st, const std::string& label, bool may_have_side_effects) {
  State& s = state(st);
  Node n{p_.fresh_id(), OpaqueNode{label, may_have_side_effects}};
  s.nodes.push_back(n);
  return n.id;
}

void ProgramBuilder::add_memlet(StateId st, NodeId src, const std::string& src_conn, NodeId dst,
                                const std::string& dst_conn, const std::string& container,
                                const SubsetRange& subset, Wcr wcr) {
  require_container(container);
  State& s = state(st);
  if (!s.find(src) || !s.find(dst)) throw Error(ErrorCode::kUnknownElement, "memlet endpoint not in state");
  s.edges.push_back(Edge{src, src_conn, dst, dst_conn, Memlet{container, subset, wcr}});
}

void ProgramBuilder::add_memlet(StateId st, NodeId src, const std::string& src_conn, NodeId dst,
                                const std::string& dst_conn, const std::string& container,
                                const std::string& subset, Wcr wcr) {
  add_memlet(st, src, src_conn, dst, dst_conn, container, SubsetRange::parse(subset), wcr);
}

void ProgramBuilder::add_edge(StateId st, NodeId src, NodeId dst) {
  State& s = state(st);
  if (!s.find(src) || !s.find(dst)) throw Error(ErrorCode::kUnknownElement, "edge endpoint not in state");
  s.edges.push_back(Edge{src, "", dst, "", Memlet{}});
}

void ProgramBuilder::add_interstate(StateId src, StateId dst, const std::string& guard,
                                    const std::vector<std::pair<std::string, std::string>>& assignments) {
  state(src);
  state(dst);
  InterstateEdge e{src, dst, guard.empty() ? ScalarExpr() : ScalarExpr::parse(guard), {}};
  for (const auto& [name, value] : assignments) e.assignments.emplace_back(name, SymExpr::parse(value));
  p_.interstate.push_back(std::move(e));
}

LoopStates ProgramBuilder::add_loop(StateId before, const std::string& var, const SymExpr& begin,
                                    const SymExpr& end, std::int64_t step, const std::string& label) {
  if (step == 0) throw Error(ErrorCode::kInvalidStep, "loop step must be nonzero");
  if (!p_.has_symbol(var)) add_symbol(var);
  LoopStates ls;
  ls.guard = add_state(label + "_guard");
  ls.body = add_state(label + "_body");
  ls.after = add_state(label + "_after");
  std::string bound = end.is_const() || end.is_sym() ? end.str() : "(" + end.str() + ")";
  std::string cond = var + (step > 0 ? " < " : " > ") + bound;
  SymExpr increment = (SymExpr::sym(var) + SymExpr(step)).simplify();
  add_interstate(before, ls.guard, "", {{var, begin.str()}});
  add_interstate(ls.guard, ls.body, cond);
  add_interstate(ls.body, ls.guard, "", {{var, increment.str()}});
  add_interstate(ls.guard, ls.after, "!(" + cond + ")");
  return ls;
}

MappedTasklet ProgramBuilder::add_mapped_tasklet(StateId st, const std::string& label, std::vector<std::string> params,
                                                 std::vector<Range> ranges, const std::vector<MappedIo>& inputs,
                                                 const std::vector<std::pair<std::string, std::string>>& code,
                                                 const std::vector<MappedIo>& outputs) {
  MapScope m = add_map(st, label + "_map", std::move(params), std::move(ranges));
  std::vector<std::string> in_names, out_names;
  for (const auto& io : inputs) in_names.push_back(io.conn);
  for (const auto& io : outputs) out_names.push_back(io.conn);
  NodeId t = add_tasklet(st, label, in_names, out_names, code);
  State& s = state(st);
  auto container_of = [&](NodeId access) {
    const Node* n = s.find(access);
    if (!n || !n->is<AccessNode>()) throw Error(ErrorCode::kUnknownElement, "expected an access node");
    return n->as<AccessNode>().container;
  };
  for (const auto& io : inputs) {
    std::string c = container_of(io.access);
    add_memlet(st, io.access, "", m.entry, "IN_" + io.conn, c, p_.containers.at(c).full());
    add_memlet(st, m.entry, "OUT_" + io.conn, t, io.conn, c, io.subset);
  }
  if (inputs.empty()) add_edge(st, m.entry, t);
  for (const auto& io : outputs) {
    std::string c = container_of(io.access);
    add_memlet(st, t, io.conn, m.exit, "IN_" + io.conn, c, io.subset, io.wcr);
    add_memlet(st, m.exit, "OUT_" + io.conn, io.access, "", c, p_.containers.at(c).full(), io.wcr);
  }
  return {m.entry, m.exit, t};
}

Program ProgramBuilder::build() const {
  auto diags = validate(p_);
  if (!diags.empty()) throw Error(ErrorCode::kMalformedDocument, format_diagnostics(diags));
  return p_;
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += '\n';
    out += std::string(to_string(d.kind)) + " at " + d.element + ": " + d.message;
  }
  return out;
}

}  // namespace cutflow
