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

#include "cutflow/interp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

#include "cutflow/error.hpp"
#include "interp_code.hpp"

namespace cutflow {

using detail::Value;

std::string_view to_string(Status s) {
  switch (s) {
    case Status::kCompleted: return "Completed";
    case Status::kFault: return "Fault";
    case Status::kTimeout: return "Timeout";
  }
  return "?";
}

std::string_view to_string(FaultKind k) {
  switch (k) {
    case FaultKind::kOutOfBounds: return "OutOfBounds";
    case FaultKind::kUnboundSymbol: return "UnboundSymbol";
    case FaultKind::kDivisionByZero: return "DivisionByZero";
    case FaultKind::kWriteConflict: return "WriteConflict";
    case FaultKind::kInvalidRange: return "InvalidRange";
    case FaultKind::kNonScalarAccess: return "NonScalarAccess";
    case FaultKind::kTypeError: return "TypeError";
  }
  return "?";
}

Buffer Buffer::zeros(DType dtype, std::vector<std::int64_t> shape) {
  Buffer b;
  b.dtype = dtype;
  std::size_t n = 1;
  for (auto d : shape) n *= static_cast<std::size_t>(std::max<std::int64_t>(d, 0));
  b.shape = std::move(shape);
  if (is_float(dtype)) {
    b.f.assign(n, 0.0);
  } else {
    b.i.assign(n, 0);
  }
  return b;
}

std::vector<std::uint64_t> Coverage::features() const {
  std::vector<std::uint64_t> out;
  for (auto e : interstate_edges) out.push_back((std::uint64_t{1} << 63) | e);
  for (const auto& [node, ordinal, taken] : branches) {
    out.push_back((node << 20) ^ (std::uint64_t{ordinal} << 1) ^ (taken ? 1u : 0u));
  }
  return out;
}

namespace {

struct FaultSignal {
  FaultKind kind;
  NodeId node;
  std::string detail;
};
struct TimeoutSignal {};

std::int64_t wadd(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wsub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wmul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

double as_f(const Value& v) { return v.fl ? v.f : static_cast<double>(v.i); }
bool truthy(const Value& v) { return v.fl ? v.f != 0.0 : v.i != 0; }
Value iv(std::int64_t x) { return Value{false, x, 0}; }
Value fv(double x) { return Value{true, 0, x}; }

}  // namespace

struct Interpreter::Impl {
  detail::Compiled c;

  struct Ctx {
    const Impl* impl;
    std::vector<Buffer> bufs;
    std::vector<std::int64_t> env;
    std::vector<std::uint8_t> bound;
    std::uint64_t steps = 0;
    std::uint64_t budget = 0;
    std::vector<std::uint8_t> selects;  // bit 1: true taken, bit 2: false taken
    std::vector<Value> stack;
    std::vector<Value> inlets;
    std::vector<Value> outs;
    std::vector<std::int64_t> istack;
    // Write-conflict tracking inside one top-level map execution.
    std::vector<std::pair<NodeId, std::int64_t>> iter;
    std::vector<std::vector<std::pair<NodeId, std::int64_t>>> tuples;
    bool tuple_stored = false;
    std::unordered_map<std::uint64_t, std::size_t> writers;
    const Hooks* hooks = nullptr;
    std::vector<std::string> warnings;

    void tick() {
      if (++steps > budget) throw TimeoutSignal{};
    }
  };

  class View : public MemoryView {
   public:
    explicit View(const Ctx& ctx) : ctx_(ctx) {}
    const Buffer& buffer(const std::string& name) const override {
      auto it = ctx_.impl->c.container_index.find(name);
      if (it == ctx_.impl->c.container_index.end()) throw Error(ErrorCode::kUnknownContainer, name);
      return ctx_.bufs[static_cast<std::size_t>(it->second)];
    }
    Binding symbols() const override {
      Binding b;
      for (const auto& [name, slot] : ctx_.impl->c.symbol_slot) {
        if (ctx_.bound[static_cast<std::size_t>(slot)]) b[name] = ctx_.env[static_cast<std::size_t>(slot)];
      }
      return b;
    }

   private:
    const Ctx& ctx_;
  };

  std::int64_t eval_int(Ctx& ctx, const detail::IntCode& code, NodeId node) const {
    if (code.is_const) return code.value;
    auto& st = ctx.istack;
    st.clear();
    for (const auto& in : code.ops) {
      switch (in.op) {
        case detail::IOp::kConst: st.push_back(in.arg); continue;
        case detail::IOp::kLoad: {
          auto slot = static_cast<std::size_t>(in.arg);
          if (!ctx.bound[slot]) {
            throw FaultSignal{FaultKind::kUnboundSymbol, node, "symbol '" + c.slot_names[slot] + "' is unbound"};
          }
          st.push_back(ctx.env[slot]);
          continue;
        }
        default: break;
      }
      std::int64_t b = st.back();
      st.pop_back();
      std::int64_t& a = st.back();
      switch (in.op) {
        case detail::IOp::kAdd: a = wadd(a, b); break;
        case detail::IOp::kSub: a = wsub(a, b); break;
        case detail::IOp::kMul: a = wmul(a, b); break;
        case detail::IOp::kFloorDiv:
        case detail::IOp::kMod:
          if (b == 0) throw FaultSignal{FaultKind::kDivisionByZero, node, "integer division by zero in index"};
          a = in.op == detail::IOp::kFloorDiv ? floordiv(a, b) : floormod(a, b);
          break;
        case detail::IOp::kMin: a = std::min(a, b); break;
        case detail::IOp::kMax: a = std::max(a, b); break;
        default: break;
      }
    }
    return st.back();
  }

  Value binary(ScalarExpr::Op op, const Value& a, const Value& b, NodeId node) const {
    using O = ScalarExpr::Op;
    switch (op) {
      case O::kAnd: return iv(truthy(a) && truthy(b));
      case O::kOr: return iv(truthy(a) || truthy(b));
      default: break;
    }
    if (!a.fl && !b.fl) {
      std::int64_t x = a.i, y = b.i;
      switch (op) {
        case O::kAdd: return iv(wadd(x, y));
        case O::kSub: return iv(wsub(x, y));
        case O::kMul: return iv(wmul(x, y));
        case O::kDiv:
        case O::kFloorDiv:
        case O::kMod:
          if (y == 0) throw FaultSignal{FaultKind::kDivisionByZero, node, "integer division by zero"};
          return iv(op == O::kMod ? floormod(x, y) : floordiv(x, y));
        case O::kLt: return iv(x < y);
        case O::kLe: return iv(x <= y);
        case O::kGt: return iv(x > y);
        case O::kGe: return iv(x >= y);
        case O::kEq: return iv(x == y);
        case O::kNe: return iv(x != y);
        default: break;
      }
      return iv(0);
    }
    double x = as_f(a), y = as_f(b);
    switch (op) {
      case O::kAdd: return fv(x + y);
      case O::kSub: return fv(x - y);
      case O::kMul: return fv(x * y);
      case O::kDiv: return fv(x / y);
      case O::kFloorDiv: return fv(std::floor(x / y));
      case O::kMod: return fv(x - y * std::floor(x / y));
      case O::kLt: return iv(x < y);
      case O::kLe: return iv(x <= y);
      case O::kGt: return iv(x > y);
      case O::kGe: return iv(x >= y);
      case O::kEq: return iv(x == y);
      case O::kNe: return iv(x != y);
      default: break;
    }
    return iv(0);
  }

  Value call(detail::Fn fn, Value* args, NodeId node) const {
    using detail::Fn;
    switch (fn) {
      case Fn::kMin:
      case Fn::kMax: {
        if (!args[0].fl && !args[1].fl) {
          return iv(fn == Fn::kMin ? std::min(args[0].i, args[1].i) : std::max(args[0].i, args[1].i));
        }
        double x = as_f(args[0]), y = as_f(args[1]);
        if (std::isnan(x) || std::isnan(y)) return fv(std::numeric_limits<double>::quiet_NaN());
        return fv(fn == Fn::kMin ? (y < x ? y : x) : (x < y ? y : x));
      }
      case Fn::kAbs:
        if (!args[0].fl) return iv(args[0].i < 0 ? wsub(0, args[0].i) : args[0].i);
        return fv(std::fabs(args[0].f));
      case Fn::kSqrt: return fv(std::sqrt(as_f(args[0])));
      case Fn::kExp: return fv(std::exp(as_f(args[0])));
      case Fn::kLog: return fv(std::log(as_f(args[0])));
      case Fn::kSin: return fv(std::sin(as_f(args[0])));
      case Fn::kCos: return fv(std::cos(as_f(args[0])));
      case Fn::kTanh: return fv(std::tanh(as_f(args[0])));
      case Fn::kFloor: return fv(std::floor(as_f(args[0])));
      case Fn::kCeil: return fv(std::ceil(as_f(args[0])));
      case Fn::kPow: return fv(std::pow(as_f(args[0]), as_f(args[1])));
      case Fn::kFloat: return fv(as_f(args[0]));
      case Fn::kInt: return iv(to_int(args[0], node));
    }
    return iv(0);
  }

  static std::int64_t to_int(const Value& v, NodeId node) {
    if (!v.fl) return v.i;
    double t = std::trunc(v.f);
    if (!(t >= -9.2e18 && t <= 9.2e18)) {
      throw FaultSignal{FaultKind::kTypeError, node, "float value cannot be converted to an integer"};
    }
    return static_cast<std::int64_t>(t);
  }

  Value eval_scalar(Ctx& ctx, const detail::ScalarCode& code, NodeId node) const {
    auto& st = ctx.stack;
    st.clear();
    const auto& ops = code.ops;
    for (std::size_t pc = 0; pc < ops.size();) {
      const auto& in = ops[pc];
      switch (in.op) {
        case detail::SOp::kInt: st.push_back(iv(in.i)); break;
        case detail::SOp::kFloat: st.push_back(fv(in.f)); break;
        case detail::SOp::kInlet: st.push_back(ctx.inlets[static_cast<std::size_t>(in.a)]); break;
        case detail::SOp::kSlot: {
          auto slot = static_cast<std::size_t>(in.a);
          if (!ctx.bound[slot]) {
            throw FaultSignal{FaultKind::kUnboundSymbol, node, "symbol '" + c.slot_names[slot] + "' is unbound"};
          }
          st.push_back(iv(ctx.env[slot]));
          break;
        }
        case detail::SOp::kNeg: {
          Value& v = st.back();
          if (v.fl) {
            v.f = -v.f;
          } else {
            v.i = wsub(0, v.i);
          }
          break;
        }
        case detail::SOp::kNot: st.back() = iv(!truthy(st.back())); break;
        case detail::SOp::kBinary: {
          Value b = st.back();
          st.pop_back();
          st.back() = binary(in.bop, st.back(), b, node);
          break;
        }
        case detail::SOp::kCall: {
          int arity = (in.fn == detail::Fn::kMin || in.fn == detail::Fn::kMax || in.fn == detail::Fn::kPow) ? 2 : 1;
          Value* args = st.data() + st.size() - static_cast<std::size_t>(arity);
          Value r = call(in.fn, args, node);
          st.resize(st.size() - static_cast<std::size_t>(arity));
          st.push_back(r);
          break;
        }
        case detail::SOp::kJumpIfFalse: {
          bool cond = truthy(st.back());
          st.pop_back();
          ctx.selects[static_cast<std::size_t>(in.i)] |= cond ? 1 : 2;
          if (!cond) {
            pc = static_cast<std::size_t>(in.a);
            continue;
          }
          break;
        }
        case detail::SOp::kJump: pc = static_cast<std::size_t>(in.a); continue;
      }
      ++pc;
    }
    return st.back();
  }

  // Flat element index of a single-element memlet, with bounds checks.
  std::size_t locate(Ctx& ctx, const detail::MemletCode& m, NodeId node) const {
    const Buffer& buf = ctx.bufs[static_cast<std::size_t>(m.container)];
    std::size_t flat = 0;
    for (std::size_t d = 0; d < m.dims.size(); ++d) {
      const auto& dim = m.dims[d];
      std::int64_t idx = eval_int(ctx, dim.begin, node);
      if (!dim.unit) {
        std::int64_t end = eval_int(ctx, dim.end, node);
        std::int64_t step = eval_int(ctx, dim.step, node);
        if (!(step >= 1 && end > idx && end - idx <= step)) {
          throw FaultSignal{FaultKind::kNonScalarAccess, node,
                            "memlet on '" + c.containers[static_cast<std::size_t>(m.container)].name +
                                "' does not address a single element"};
        }
      }
      std::int64_t extent = buf.shape[d];
      if (idx < 0 || idx >= extent) {
        throw FaultSignal{FaultKind::kOutOfBounds, node,
                          "index " + std::to_string(idx) + " outside [0, " + std::to_string(extent) + ") of '" +
                              c.containers[static_cast<std::size_t>(m.container)].name + "' dimension " +
                              std::to_string(d)};
      }
      flat = flat * static_cast<std::size_t>(extent) + static_cast<std::size_t>(idx);
    }
    return flat;
  }

  static Value load(const Buffer& b, std::size_t k) {
    if (is_float(b.dtype)) return fv(b.f[k]);
    return iv(b.i[k]);
  }

  static void store(Buffer& b, std::size_t k, const Value& v, NodeId node) {
    switch (b.dtype) {
      case DType::kF64: b.f[k] = as_f(v); return;
      case DType::kF32: b.f[k] = static_cast<double>(static_cast<float>(as_f(v))); return;
      case DType::kI64: b.i[k] = to_int(v, node); return;
      case DType::kI32: b.i[k] = static_cast<std::int32_t>(static_cast<std::uint32_t>(to_int(v, node))); return;
      case DType::kBool: b.i[k] = truthy(v) ? 1 : 0; return;
    }
  }

  static Value combine(Wcr w, const Value& old, const Value& v, NodeId node) {
    switch (w) {
      case Wcr::kSum:
        if (!old.fl && !v.fl) return iv(wadd(old.i, v.i));
        return fv(as_f(old) + as_f(v));
      case Wcr::kMin:
      case Wcr::kMax: {
        bool take_min = w == Wcr::kMin;
        if (!old.fl && !v.fl) return iv(take_min ? std::min(old.i, v.i) : std::max(old.i, v.i));
        double x = as_f(old), y = as_f(v);
        if (std::isnan(x) || std::isnan(y)) return fv(std::numeric_limits<double>::quiet_NaN());
        return fv(take_min ? (y < x ? y : x) : (x < y ? y : x));
      }
      case Wcr::kNone: break;
    }
    (void)node;
    return v;
  }

  void note_write(Ctx& ctx, int container, std::size_t flat, NodeId node) const {
    if (ctx.iter.empty()) return;
    if (!ctx.tuple_stored) {
      ctx.tuples.push_back(ctx.iter);
      ctx.tuple_stored = true;
    }
    std::size_t mine = ctx.tuples.size() - 1;
    std::uint64_t key = (static_cast<std::uint64_t>(container) << 48) ^ flat;
    auto [it, inserted] = ctx.writers.try_emplace(key, mine);
    if (inserted || it->second == mine) return;
    const auto& a = ctx.tuples[it->second];
    const auto& b = ctx.tuples[mine];
    std::size_t n = std::min(a.size(), b.size());
    if (!std::equal(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n), b.begin())) {
      throw FaultSignal{FaultKind::kWriteConflict, node,
                        "two map iterations write element " + std::to_string(flat) + " of '" +
                            c.containers[static_cast<std::size_t>(container)].name + "' without a combiner"};
    }
    it->second = mine;
  }

  void exec_tasklet(Ctx& ctx, const detail::TaskletCode& t) const {
    ctx.tick();
    if (ctx.hooks && ctx.hooks->before_tasklet) ctx.hooks->before_tasklet(t.id, View(ctx));
    ctx.inlets.resize(static_cast<std::size_t>(t.n_inlets));
    for (const auto& r : t.reads) {
      std::size_t k = locate(ctx, r, t.id);
      if (r.conn >= 0) ctx.inlets[static_cast<std::size_t>(r.conn)] = load(ctx.bufs[static_cast<std::size_t>(r.container)], k);
    }
    ctx.outs.resize(t.outs.size());
    for (std::size_t k = 0; k < t.outs.size(); ++k) ctx.outs[k] = eval_scalar(ctx, t.outs[k], t.id);
    for (const auto& w : t.writes) {
      std::size_t k = locate(ctx, w, t.id);
      Buffer& buf = ctx.bufs[static_cast<std::size_t>(w.container)];
      const Value& v = ctx.outs[static_cast<std::size_t>(w.conn)];
      if (w.wcr == Wcr::kNone) {
        note_write(ctx, w.container, k, t.id);
        store(buf, k, v, t.id);
      } else {
        store(buf, k, combine(w.wcr, load(buf, k), v, t.id), t.id);
      }
    }
  }

  void exec_items(Ctx& ctx, const std::vector<detail::Item>& items) const {
    for (const auto& item : items) {
      switch (item.kind) {
        case detail::Item::kTasklet: exec_tasklet(ctx, c.tasklets[static_cast<std::size_t>(item.index)]); break;
        case detail::Item::kMap: exec_map(ctx, c.maps[static_cast<std::size_t>(item.index)]); break;
        case detail::Item::kOpaque: break;
      }
    }
  }

  void exec_map(Ctx& ctx, const detail::MapCode& m) const {
    bool top = ctx.iter.empty();
    if (top) {
      ctx.writers.clear();
      ctx.tuples.clear();
    }
    std::size_t rank = m.ranges.size();
    std::vector<std::int64_t> begin(rank), end(rank), step(rank);
    for (std::size_t d = 0; d < rank; ++d) {
      begin[d] = eval_int(ctx, m.ranges[d].begin, m.id);
      end[d] = eval_int(ctx, m.ranges[d].end, m.id);
      step[d] = eval_int(ctx, m.ranges[d].step, m.id);
      if (step[d] < 1) {
        throw FaultSignal{FaultKind::kInvalidRange, m.id, "map step " + std::to_string(step[d]) + " is not positive"};
      }
      if (end[d] <= begin[d]) return;
    }
    std::size_t base = ctx.iter.size();
    for (std::size_t d = 0; d < rank; ++d) {
      ctx.iter.emplace_back(m.id, begin[d]);
      ctx.env[static_cast<std::size_t>(m.slots[d])] = begin[d];
      ctx.bound[static_cast<std::size_t>(m.slots[d])] = 1;
    }
    while (true) {
      ctx.tick();
      ctx.tuple_stored = false;
      exec_items(ctx, m.body);
      // Advance the innermost dimension, carrying outward.
      std::size_t d = rank;
      while (d > 0) {
        --d;
        auto slot = static_cast<std::size_t>(m.slots[d]);
        std::int64_t next = ctx.env[slot] + step[d];
        if (next < end[d]) {
          ctx.env[slot] = next;
          ctx.iter[base + d].second = next;
          break;
        }
        ctx.env[slot] = begin[d];
        ctx.iter[base + d].second = begin[d];
        if (d == 0) {
          d = rank + 1;
          break;
        }
      }
      if (d == rank + 1) break;
      ctx.tuple_stored = false;
    }
    ctx.iter.resize(base);
    ctx.tuple_stored = false;
    for (int slot : m.slots) ctx.bound[static_cast<std::size_t>(slot)] = 0;
  }
};

Interpreter::Interpreter(const Program& p) : impl_(std::make_unique<Impl>()) { impl_->c = detail::compile(p); }
Interpreter::~Interpreter() = default;
Interpreter::Interpreter(Interpreter&&) noexcept = default;
Interpreter& Interpreter::operator=(Interpreter&&) noexcept = default;

std::map<std::string, std::vector<std::int64_t>> Interpreter::shapes(const Binding& symbols) const {
  std::map<std::string, std::vector<std::int64_t>> out;
  for (const auto& ci : impl_->c.containers) {
    std::vector<std::int64_t> shape;
    for (const auto& d : ci.desc.shape) {
      std::int64_t v;
      try {
        v = d.eval(symbols);
      } catch (const Error& e) {
        throw Error(ErrorCode::kInputShapeMismatch, "shape of '" + ci.name + "': " + e.what());
      }
      if (v < 0) throw Error(ErrorCode::kInputShapeMismatch, "shape of '" + ci.name + "' is negative");
      shape.push_back(v);
    }
    out[ci.name] = std::move(shape);
  }
  return out;
}

ExecutionOutcome Interpreter::run(const ExecutionInput& in, std::uint64_t budget, const Hooks* hooks) const {
  const auto& c = impl_->c;
  Impl::Ctx ctx;
  ctx.impl = impl_.get();
  ctx.budget = budget;
  ctx.hooks = hooks;
  ctx.env.assign(c.slot_names.size(), 0);
  ctx.bound.assign(c.slot_names.size(), 0);
  ctx.selects.assign(c.selects.size(), 0);
  for (const auto& [name, value] : in.symbols) {
    auto it = c.symbol_slot.find(name);
    if (it == c.symbol_slot.end()) continue;
    ctx.env[static_cast<std::size_t>(it->second)] = value;
    ctx.bound[static_cast<std::size_t>(it->second)] = 1;
  }
  auto shape_of = shapes(in.symbols);
  for (const auto& ci : c.containers) {
    const auto& shape = shape_of.at(ci.name);
    auto it = in.data.find(ci.name);
    if (!ci.desc.transient && it != in.data.end()) {
      const Buffer& b = it->second;
      if (b.dtype != ci.desc.dtype || b.shape != shape || b.size() != Buffer::zeros(b.dtype, shape).size()) {
        throw Error(ErrorCode::kInputShapeMismatch, "input '" + ci.name + "' does not match its descriptor");
      }
      ctx.bufs.push_back(b);
    } else {
      ctx.bufs.push_back(Buffer::zeros(ci.desc.dtype, shape));
    }
  }
  if (c.has_opaque) ctx.warnings.push_back("opaque nodes are not executed");

  ExecutionOutcome out;
  int state = c.state_index.count(c.start) ? c.state_index.at(c.start) : -1;
  bool warned = false;
  try {
    while (state >= 0) {
      const auto& sc = c.states[static_cast<std::size_t>(state)];
      if (hooks && hooks->on_state) hooks->on_state(sc.id, Impl::View(ctx));
      impl_->exec_items(ctx, sc.items);
      int next = -1;
      for (int e : c.out_edges[static_cast<std::size_t>(state)]) {
        const auto& ec = c.edges[static_cast<std::size_t>(e)];
        bool ok = !ec.has_guard || truthy(impl_->eval_scalar(ctx, ec.guard, sc.id));
        if (!ok) continue;
        if (next < 0) {
          next = e;
        } else if (!warned) {
          ctx.warnings.push_back("NondeterminismWarning: several interstate guards hold in state " +
                                 std::to_string(sc.id));
          warned = true;
        }
      }
      if (next < 0) break;
      const auto& ec = c.edges[static_cast<std::size_t>(next)];
      std::vector<std::int64_t> values;
      for (const auto& [slot, code] : ec.assignments) values.push_back(impl_->eval_int(ctx, code, sc.id));
      for (std::size_t k = 0; k < values.size(); ++k) {
        auto slot = static_cast<std::size_t>(ec.assignments[k].first);
        ctx.env[slot] = values[k];
        ctx.bound[slot] = 1;
      }
      out.coverage.interstate_edges.insert(static_cast<std::size_t>(next));
      ctx.tick();
      state = c.state_index.at(ec.dst);
    }
  } catch (const FaultSignal& f) {
    out.status = Status::kFault;
    out.fault = Fault{f.kind, f.node, f.detail};
  } catch (const TimeoutSignal&) {
    out.status = Status::kTimeout;
  }
  out.steps = std::min(ctx.steps, budget + 1);
  for (std::size_t k = 0; k < c.selects.size(); ++k) {
    if (ctx.selects[k] & 1) out.coverage.branches.emplace(c.selects[k].tasklet, c.selects[k].ordinal, true);
    if (ctx.selects[k] & 2) out.coverage.branches.emplace(c.selects[k].tasklet, c.selects[k].ordinal, false);
  }
  for (std::size_t k = 0; k < c.containers.size(); ++k) {
    if (!c.containers[k].desc.transient) out.containers[c.containers[k].name] = std::move(ctx.bufs[k]);
  }
  out.warnings = std::move(ctx.warnings);
  return out;
}

ExecutionOutcome run(const Program& p, const ExecutionInput& in, std::uint64_t budget) {
  return Interpreter(p).run(in, budget);
}

std::string Comparison::str() const {
  switch (kind) {
    case Kind::kEqual: return "Equal";
    case Kind::kStatusMismatch: return "StatusMismatch";
    case Kind::kDiffers: break;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "Differs(%s[%zu]: %.17g vs %.17g)", container.c_str(), index, a_value, b_value);
  return buf;
}

namespace {

bool float_differs(double x, double y, double tol, DType t) {
  if (tol == 0) {
    if (t == DType::kF32) {
      float fx = static_cast<float>(x), fy = static_cast<float>(y);
      return std::memcmp(&fx, &fy, sizeof fx) != 0;
    }
    return std::memcmp(&x, &y, sizeof x) != 0;
  }
  bool nx = std::isnan(x), ny = std::isnan(y);
  if (nx || ny) return nx != ny;
  if (x == y) return false;  // equal infinities
  return std::fabs(x - y) > tol * (1 + std::max(std::fabs(x), std::fabs(y)));
}

}  // namespace

Comparison compare_states(const ExecutionOutcome& a, const ExecutionOutcome& b,
                          const std::vector<std::string>& containers, double tol) {
  Comparison r;
  bool fa = a.status != Status::kCompleted, fb = b.status != Status::kCompleted;
  if (fa != fb) {
    r.kind = Comparison::Kind::kStatusMismatch;
    return r;
  }
  for (const auto& name : containers) {
    auto ia = a.containers.find(name);
    auto ib = b.containers.find(name);
    if (ia == a.containers.end() || ib == b.containers.end()) {
      throw Error(ErrorCode::kUnknownContainer, "'" + name + "' missing from an outcome");
    }
    const Buffer& x = ia->second;
    const Buffer& y = ib->second;
    if (x.size() != y.size() || x.dtype != y.dtype) {
      r.kind = Comparison::Kind::kDiffers;
      r.container = name;
      return r;
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
      bool differs = is_float(x.dtype) ? float_differs(x.f[k], y.f[k], tol, x.dtype) : x.i[k] != y.i[k];
      if (differs) {
        r.kind = Comparison::Kind::kDiffers;
        r.container = name;
        r.index = k;
        r.a_value = x.as_double(k);
        r.b_value = y.as_double(k);
        return r;
      }
    }
  }
  return r;
}

}  // namespace cutflow
