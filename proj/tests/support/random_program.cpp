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

#include "support/random_program.hpp"

#include <map>
#include <random>
#include <string>
#include <vector>

#include "cutflow/builder.hpp"

namespace cutflow::testing {

namespace {

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed * 0x9E3779B97F4A7C15ULL + 1), b_("random_" + std::to_string(seed)) {}

  Program run() {
    b_.add_symbol("N", 1);
    int n_vec = uniform(3, 5);
    for (int k = 0; k < n_vec; ++k) {
      std::string name = "v" + std::to_string(k);
      bool transient = k > 0 && chance(0.35);
      b_.add_container(name, chance(0.25) ? DType::kI64 : DType::kF64, {SymExpr::sym("N")}, transient);
      vectors_.push_back(name);
    }
    b_.add_container("m", DType::kF64, {SymExpr::sym("N"), SymExpr::sym("N")}, false);
    b_.add_container("L0", DType::kF64, {SymExpr(8)}, false);
    b_.add_container("L1", DType::kF64, {SymExpr(8)}, chance(0.5));

    int n_states = uniform(1, 3);
    int loop_at = chance(0.4) ? uniform(0, n_states - 1) : -1;
    StateId prev = 0;
    for (int s = 0; s < n_states; ++s) {
      StateId st = b_.add_state("s" + std::to_string(s));
      if (prev) b_.add_interstate(prev, st);
      fill_state(st);
      prev = st;
      if (s == loop_at) prev = add_loop(prev);
    }
    return b_.build();
  }

 private:
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))]; }

  std::string expr(const std::vector<std::string>& inlets, int depth) {
    if (depth == 0 || chance(0.3)) {
      if (chance(0.25)) return std::to_string(uniform(-3, 3)) + ".5";
      return pick(inlets);
    }
    std::string a = expr(inlets, depth - 1), c = expr(inlets, depth - 1);
    switch (uniform(0, 5)) {
      case 0: return "(" + a + " + " + c + ")";
      case 1: return "(" + a + " - " + c + ")";
      case 2: return "(" + a + " * " + c + ")";
      case 3: return "select(" + a + " > " + c + ", " + a + ", " + c + ")";
      case 4: return "min(" + a + ", " + c + ")";
      default: return "(" + a + " / (abs(" + c + ") + 1))";
    }
  }

  // Access node to read `c` from: the node that last produced it in this
  // state, so the reader is ordered after the writer.
  NodeId reader(StateId st, const std::string& c) {
    auto it = produced_.find(c);
    if (it != produced_.end()) return it->second;
    NodeId a = b_.add_access(st, c);
    produced_[c] = a;
    return a;
  }

  // Containers not yet touched in this state may be written; this avoids
  // write-after-read and write-after-write hazards between units.
  std::string writable(const std::vector<std::string>& pool) {
    std::vector<std::string> free;
    for (const auto& c : pool) {
      if (!touched_.count(c)) free.push_back(c);
    }
    if (free.empty()) return "";
    return pick(free);
  }

  void fill_state(StateId st) {
    produced_.clear();
    touched_.clear();
    int units = uniform(1, 2);
    for (int u = 0; u < units; ++u) {
      switch (uniform(0, 3)) {
        case 0: elementwise(st); break;
        case 1: stencil(st); break;
        case 2: reduction(st); break;
        default: chain(st); break;
      }
    }
  }

  void elementwise(StateId st) {
    std::string in1 = pick(vectors_), in2 = pick(vectors_);
    NodeId a1 = reader(st, in1), a2 = reader(st, in2);
    touched_.insert(in1);
    touched_.insert(in2);
    std::string out = writable(vectors_);
    if (out.empty()) return;
    touched_.insert(out);
    NodeId o = b_.add_access(st, out);
    b_.add_mapped_tasklet(st, "ew", {"i"}, {Range{0, SymExpr::sym("N"), 1}}, {{"a", a1, "i"}, {"b", a2, "i"}},
                          {{"o", expr({"a", "b", "i"}, 2)}}, {{"o", o, "i"}});
    produced_[out] = o;
  }

  void stencil(StateId st) {
    std::string in = pick(vectors_);
    NodeId a = reader(st, in);
    touched_.insert(in);
    std::string out = writable(vectors_);
    if (out.empty()) return;
    touched_.insert(out);
    NodeId o = b_.add_access(st, out);
    SymExpr n = SymExpr::sym("N");
    b_.add_mapped_tasklet(st, "stencil", {"i"}, {Range{1, n, 1}}, {{"a", a, "i - 1"}, {"b", a, "i"}},
                          {{"o", expr({"a", "b"}, 2)}}, {{"o", o, "i"}});
    produced_[out] = o;
  }

  // out[i] = sum_j m[i, j] * in[j]: an (i) map around an init tasklet and a
  // nested j reduction, the shape map tiling applies to.
  void reduction(StateId st) {
    std::string in = pick(vectors_);
    NodeId m = reader(st, "m");
    NodeId a = reader(st, in);
    touched_.insert(in);
    touched_.insert("m");
    std::string out = writable(vectors_);
    if (out.empty()) return;
    touched_.insert(out);
    SymExpr n = SymExpr::sym("N");
    const Program& p = b_.program();
    MapScope outer = b_.add_map(st, "rows", {"i"}, {Range{0, n, 1}});
    b_.add_memlet(st, m, "", outer.entry, "IN_m", "m", p.containers.at("m").full());
    b_.add_memlet(st, a, "", outer.entry, "IN_v", in, p.containers.at(in).full());
    NodeId init = b_.add_tasklet(st, "init", {}, {"o"}, {{"o", std::to_string(uniform(0, 2)) + ".0"}});
    b_.add_edge(st, outer.entry, init);
    NodeId acc = b_.add_access(st, out);
    b_.add_memlet(st, init, "o", acc, "", out, "i");
    MapScope inner = b_.add_map(st, "cols", {"j"}, {Range{0, n, 1}});
    b_.add_memlet(st, outer.entry, "OUT_m", inner.entry, "IN_m", "m", "i, 0:N");
    b_.add_memlet(st, outer.entry, "OUT_v", inner.entry, "IN_v", in, "0:N");
    b_.add_edge(st, acc, inner.entry);
    NodeId t = b_.add_tasklet(st, "mac", {"x", "y"}, {"o"}, {{"o", "x * y"}});
    b_.add_memlet(st, inner.entry, "OUT_m", t, "x", "m", "i, j");
    b_.add_memlet(st, inner.entry, "OUT_v", t, "y", in, "j");
    Wcr w = chance(0.7) ? Wcr::kSum : Wcr::kMax;
    b_.add_memlet(st, t, "o", inner.exit, "IN_o", out, "i", w);
    b_.add_memlet(st, inner.exit, "OUT_o", outer.exit, "IN_o", out, "i", w);
    NodeId o = b_.add_access(st, out);
    b_.add_memlet(st, outer.exit, "OUT_o", o, "", out, "0:N", w);
    produced_[out] = o;
  }

  // Inside one map: t1 writes an intermediate element that t2 consumes. The
  // intermediate sometimes also leaves the map.
  void chain(StateId st) {
    std::string in = pick(vectors_);
    NodeId a = reader(st, in);
    touched_.insert(in);
    std::string mid = writable(vectors_);
    if (mid.empty()) return;
    touched_.insert(mid);
    std::string out = writable(vectors_);
    if (out.empty()) return;
    touched_.insert(out);
    SymExpr n = SymExpr::sym("N");
    MapScope m = b_.add_map(st, "chain", {"i"}, {Range{0, n, 1}});
    b_.add_memlet(st, a, "", m.entry, "IN_a", in, "0:N");
    NodeId t1 = b_.add_tasklet(st, "first", {"x"}, {"o"}, {{"o", expr({"x", "i"}, 2)}});
    b_.add_memlet(st, m.entry, "OUT_a", t1, "x", in, "i");
    NodeId mid_node = b_.add_access(st, mid);
    b_.add_memlet(st, t1, "o", mid_node, "", mid, "i");
    NodeId t2 = b_.add_tasklet(st, "second", {"x", "y"}, {"o"}, {{"o", expr({"x", "y"}, 2)}});
    b_.add_memlet(st, mid_node, "", t2, "x", mid, "i");
    b_.add_memlet(st, m.entry, "OUT_a2", t2, "y", in, "i");
    b_.add_memlet(st, t2, "o", m.exit, "IN_o", out, "i");
    NodeId o = b_.add_access(st, out);
    b_.add_memlet(st, m.exit, "OUT_o", o, "", out, "0:N");
    produced_[out] = o;
    if (chance(0.5)) {
      b_.add_memlet(st, mid_node, "", m.exit, "IN_mid", mid, "i");
      NodeId mo = b_.add_access(st, mid);
      b_.add_memlet(st, m.exit, "OUT_mid", mo, "", mid, "0:N");
      produced_[mid] = mo;
    }
  }

  // Counted loop over L0/L1 with constant bounds; returns the exit state.
  StateId add_loop(StateId before) {
    int step = pick(std::vector<int>{1, 2, -1});
    int begin, end;
    if (step > 0) {
      begin = uniform(0, 3);
      end = uniform(begin, 8);
    } else {
      begin = uniform(3, 7);
      end = uniform(-1, begin);
    }
    std::string var = "k" + std::to_string(loops_++);
    LoopStates ls = b_.add_loop(before, var, SymExpr(begin), SymExpr(end), step, "loop");
    StateId st = ls.body;
    bool forward = chance(0.5);
    std::string src = forward ? "L0" : "L1", dst = forward ? "L1" : "L0";
    NodeId a = b_.add_access(st, src);
    NodeId v = b_.add_access(st, pick(vectors_));
    NodeId o = b_.add_access(st, dst);
    std::string vname = b_.program().state(st)->find(v)->as<AccessNode>().container;
    NodeId t = b_.add_tasklet(st, "body", {"x", "y"}, {"o"}, {{"o", expr({"x", "y", var}, 2)}});
    b_.add_memlet(st, a, "", t, "x", src, var);
    b_.add_memlet(st, v, "", t, "y", vname, "0");
    b_.add_memlet(st, t, "o", o, "", dst, var);
    return ls.after;
  }

  std::mt19937_64 rng_;
  ProgramBuilder b_;
  std::vector<std::string> vectors_;
  std::map<std::string, NodeId> produced_;
  std::set<std::string> touched_;
  int loops_ = 0;
};

}  // namespace

Program random_program(std::uint64_t seed) { return Generator(seed).run(); }

ExecutionInput random_input(const Program& p, std::mt19937_64& rng, std::int64_t size_max) {
  ExecutionInput in;
  auto assigned = p.assigned_symbols();
  for (const auto& s : p.symbols) {
    if (assigned.count(s.name)) continue;
    std::int64_t lo = std::max<std::int64_t>(1, s.min.value_or(1));
    std::int64_t hi = std::max(lo, s.max ? std::min(*s.max, size_max) : size_max);
    in.symbols[s.name] = std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  }
  std::uniform_real_distribution<double> real(-2, 2);
  std::uniform_int_distribution<std::int64_t> whole(-5, 5);
  for (const auto& [name, d] : p.containers) {
    if (d.transient) continue;
    std::vector<std::int64_t> shape;
    for (const auto& e : d.shape) shape.push_back(e.eval(in.symbols));
    Buffer b = Buffer::zeros(d.dtype, shape);
    for (auto& v : b.f) v = d.dtype == DType::kF32 ? static_cast<float>(real(rng)) : real(rng);
    for (auto& v : b.i) v = d.dtype == DType::kBool ? whole(rng) & 1 : whole(rng);
    in.data[name] = std::move(b);
  }
  return in;
}

}  // namespace cutflow::testing
