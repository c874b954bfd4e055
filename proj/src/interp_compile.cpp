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

#include "cutflow/error.hpp"
#include "interp_code.hpp"

namespace cutflow::detail {

namespace {

using Names = std::map<std::string, int>;

void emit_int(const SymExpr& e, const Names& names, IntCode& out) {
  using Op = SymExpr::Op;
  switch (e.op()) {
    case Op::kConst: out.ops.push_back({IOp::kConst, e.value()}); return;
    case Op::kSym: {
      auto it = names.find(e.name());
      if (it == names.end()) throw Error(ErrorCode::kUnboundSymbol, "'" + e.name() + "' is not in scope");
      out.ops.push_back({IOp::kLoad, it->second});
      return;
    }
    default: break;
  }
  emit_int(e.lhs(), names, out);
  emit_int(e.rhs(), names, out);
  IOp op = IOp::kAdd;
  switch (e.op()) {
    case Op::kAdd: op = IOp::kAdd; break;
    case Op::kSub: op = IOp::kSub; break;
    case Op::kMul: op = IOp::kMul; break;
    case Op::kFloorDiv: op = IOp::kFloorDiv; break;
    case Op::kMod: op = IOp::kMod; break;
    case Op::kMin: op = IOp::kMin; break;
    case Op::kMax: op = IOp::kMax; break;
    default: break;
  }
  out.ops.push_back({op, 0});
}

IntCode compile_int(const SymExpr& e, const Names& names) {
  IntCode code;
  if (auto c = e.as_const()) {
    code.is_const = true;
    code.value = *c;
  }
  emit_int(e, names, code);
  return code;
}

DimCode compile_dim(const Range& r, const Names& names) {
  DimCode d;
  d.begin = compile_int(r.begin, names);
  d.end = compile_int(r.end, names);
  d.step = compile_int(r.step, names);
  d.unit = provably_equal(r.step, SymExpr(1)) && provably_equal(r.end, r.begin + SymExpr(1));
  return d;
}

struct FnInfo {
  const char* name;
  Fn fn;
  int arity;
};

constexpr FnInfo kFunctions[] = {
    {"min", Fn::kMin, 2},     {"max", Fn::kMax, 2},   {"abs", Fn::kAbs, 1},     {"sqrt", Fn::kSqrt, 1},
    {"exp", Fn::kExp, 1},     {"log", Fn::kLog, 1},   {"sin", Fn::kSin, 1},     {"cos", Fn::kCos, 1},
    {"tanh", Fn::kTanh, 1},   {"floor", Fn::kFloor, 1}, {"ceil", Fn::kCeil, 1}, {"pow", Fn::kPow, 2},
    {"float", Fn::kFloat, 1}, {"int", Fn::kInt, 1},
};

class ScalarCompiler {
 public:
  ScalarCompiler(const Names& inlets, const Names& slots, Compiled& c, NodeId tasklet, std::uint32_t& ordinal)
      : inlets_(inlets), slots_(slots), c_(c), tasklet_(tasklet), ordinal_(ordinal) {}

  void emit(const ScalarExpr& e, ScalarCode& out) {
    using K = ScalarExpr::Kind;
    switch (e.kind()) {
      case K::kInt: {
        SInstr in{SOp::kInt};
        in.i = e.int_value();
        out.ops.push_back(in);
        return;
      }
      case K::kFloat: {
        SInstr in{SOp::kFloat};
        in.f = e.float_value();
        out.ops.push_back(in);
        return;
      }
      case K::kName: {
        SInstr in{SOp::kInlet};
        if (auto it = inlets_.find(e.identifier()); it != inlets_.end()) {
          in.a = it->second;
        } else if (auto jt = slots_.find(e.identifier()); jt != slots_.end()) {
          in.op = SOp::kSlot;
          in.a = jt->second;
        } else {
          throw Error(ErrorCode::kUnboundSymbol, "'" + e.identifier() + "' is not in scope");
        }
        out.ops.push_back(in);
        return;
      }
      case K::kUnary: {
        emit(e.children()[0], out);
        out.ops.push_back(SInstr{e.op() == ScalarExpr::Op::kNeg ? SOp::kNeg : SOp::kNot});
        return;
      }
      case K::kBinary: {
        emit(e.children()[0], out);
        emit(e.children()[1], out);
        SInstr in{SOp::kBinary};
        in.bop = e.op();
        out.ops.push_back(in);
        return;
      }
      case K::kCall: emit_call(e, out); return;
    }
  }

 private:
  void emit_call(const ScalarExpr& e, ScalarCode& out) {
    const auto& args = e.children();
    if (e.identifier() == "select") {
      if (args.size() != 3) throw Error(ErrorCode::kMalformedDocument, "select takes 3 arguments");
      int site = static_cast<int>(c_.selects.size());
      c_.selects.push_back({tasklet_, ordinal_++});
      emit(args[0], out);
      std::size_t jf = out.ops.size();
      SInstr j{SOp::kJumpIfFalse};
      j.i = site;
      out.ops.push_back(j);
      emit(args[1], out);
      std::size_t jend = out.ops.size();
      out.ops.push_back(SInstr{SOp::kJump});
      out.ops[jf].a = static_cast<std::int32_t>(out.ops.size());
      emit(args[2], out);
      out.ops[jend].a = static_cast<std::int32_t>(out.ops.size());
      return;
    }
    for (const auto& f : kFunctions) {
      if (e.identifier() != f.name) continue;
      if (static_cast<int>(args.size()) != f.arity) {
        throw Error(ErrorCode::kMalformedDocument, std::string(f.name) + " takes " + std::to_string(f.arity) + " arguments");
      }
      for (const auto& a : args) emit(a, out);
      SInstr in{SOp::kCall};
      in.fn = f.fn;
      out.ops.push_back(in);
      return;
    }
    throw Error(ErrorCode::kMalformedDocument, "unknown function '" + e.identifier() + "'");
  }

  const Names& inlets_;
  const Names& slots_;
  Compiled& c_;
  NodeId tasklet_;
  std::uint32_t& ordinal_;
};

int index_of(const std::vector<std::string>& v, const std::string& s) {
  auto it = std::find(v.begin(), v.end(), s);
  return it == v.end() ? -1 : static_cast<int>(it - v.begin());
}

MemletCode compile_memlet(const Compiled& c, const Memlet& m, int conn, const Names& names) {
  MemletCode mc;
  mc.container = c.container_index.at(m.container);
  mc.conn = conn;
  mc.wcr = m.wcr;
  for (const auto& r : m.subset.dims()) mc.dims.push_back(compile_dim(r, names));
  return mc;
}

void compile_state(const State& s, Compiled& c) {
  StateCode sc;
  sc.id = s.id;
  auto scopes = s.scopes();
  std::map<NodeId, int> map_index;
  std::map<NodeId, Names> scope_names;
  scope_names[kNoNode] = c.symbol_slot;
  auto items_of = [&](NodeId scope) -> std::vector<Item>& {
    if (scope == kNoNode) return sc.items;
    return c.maps[map_index.at(scope)].body;
  };
  for (NodeId id : s.topological_order()) {
    const Node& n = *s.find(id);
    NodeId scope = scopes.at(id);
    const Names& names = scope_names.at(scope);
    switch (n.kind()) {
      case NodeKind::kAccess:
      case NodeKind::kMapExit: break;
      case NodeKind::kOpaque:
        c.has_opaque = true;
        items_of(scope).push_back({Item::kOpaque, 0});
        break;
      case NodeKind::kMapEntry: {
        const auto& me = n.as<MapEntryNode>();
        MapCode mc;
        mc.id = id;
        Names inner = names;
        for (std::size_t k = 0; k < me.params.size(); ++k) {
          mc.ranges.push_back(compile_dim(me.ranges[k], names));
          int slot = static_cast<int>(c.slot_names.size());
          c.slot_names.push_back(me.params[k]);
          mc.slots.push_back(slot);
          inner[me.params[k]] = slot;
        }
        scope_names[id] = std::move(inner);
        int index = static_cast<int>(c.maps.size());
        map_index[id] = index;
        c.maps.push_back(std::move(mc));
        items_of(scope).push_back({Item::kMap, index});
        break;
      }
      case NodeKind::kTasklet: {
        const auto& t = n.as<TaskletNode>();
        TaskletCode tc;
        tc.id = id;
        tc.n_inlets = static_cast<int>(t.inputs.size());
        Names inlets;
        for (std::size_t k = 0; k < t.inputs.size(); ++k) inlets[t.inputs[k]] = static_cast<int>(k);
        for (const Edge* e : s.in_edges(id)) {
          if (e->memlet.empty()) continue;
          tc.reads.push_back(compile_memlet(c, e->memlet, index_of(t.inputs, e->dst_conn), names));
        }
        for (const Edge* e : s.out_edges(id)) {
          if (e->memlet.empty()) continue;
          tc.writes.push_back(compile_memlet(c, e->memlet, index_of(t.outputs, e->src_conn), names));
        }
        tc.outs.resize(t.outputs.size());
        std::uint32_t ordinal = 0;
        ScalarCompiler sc_compiler(inlets, names, c, id, ordinal);
        for (const auto& [out, expr] : t.code) {
          int k = index_of(t.outputs, out);
          if (k >= 0) sc_compiler.emit(expr, tc.outs[static_cast<std::size_t>(k)]);
        }
        int index = static_cast<int>(c.tasklets.size());
        c.tasklets.push_back(std::move(tc));
        items_of(scope).push_back({Item::kTasklet, index});
        break;
      }
    }
  }
  c.state_index[s.id] = static_cast<int>(c.states.size());
  c.states.push_back(std::move(sc));
}

}  // namespace

Compiled compile(const Program& p) {
  Compiled c;
  c.start = p.start;
  for (const auto& [name, desc] : p.containers) {
    c.container_index[name] = static_cast<int>(c.containers.size());
    c.containers.push_back({name, desc});
  }
  for (const auto& s : p.symbols) {
    c.symbol_slot[s.name] = static_cast<int>(c.slot_names.size());
    c.slot_names.push_back(s.name);
  }
  for (const auto& s : p.states) compile_state(s, c);
  c.out_edges.resize(c.states.size());
  for (std::size_t k = 0; k < p.interstate.size(); ++k) {
    const auto& e = p.interstate[k];
    EdgeCode ec;
    ec.src = e.src;
    ec.dst = e.dst;
    if (!e.guard.is_null()) {
      ec.has_guard = true;
      std::uint32_t ordinal = 0;
      Names none;
      ScalarCompiler sc(none, c.symbol_slot, c, kNoNode, ordinal);
      sc.emit(e.guard, ec.guard);
    }
    for (const auto& [name, value] : e.assignments) {
      auto it = c.symbol_slot.find(name);
      if (it == c.symbol_slot.end()) throw Error(ErrorCode::kUnboundSymbol, "assignment to undeclared '" + name + "'");
      ec.assignments.emplace_back(it->second, compile_int(value, c.symbol_slot));
    }
    c.out_edges[static_cast<std::size_t>(c.state_index.at(e.src))].push_back(static_cast<int>(c.edges.size()));
    c.edges.push_back(std::move(ec));
  }
  return c;
}

}  // namespace cutflow::detail
