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

#include "cutflow/fixtures.hpp"

#include "cutflow/builder.hpp"

namespace cutflow::fixtures {

namespace {

const SymExpr kN = SymExpr::sym("N");

Range upto(const SymExpr& end) { return Range{SymExpr(0), end, SymExpr(1)}; }

// out = lhs * rhs as an (i, j) map around an init tasklet and a k reduction.
void add_matmul(ProgramBuilder& b, StateId st, const std::string& tag, NodeId lhs, NodeId rhs, NodeId out) {
  Program& p = b.program();
  State* s = p.state(st);
  auto container = [&](NodeId id) { return s->find(id)->as<AccessNode>().container; };
  std::string a = container(lhs), bb = container(rhs), o = container(out);

  MapScope outer = b.add_map(st, tag + "_ij", {"i", "j"}, {upto(kN), upto(kN)});
  b.add_memlet(st, lhs, "", outer.entry, "IN_a", a, p.containers.at(a).full());
  b.add_memlet(st, rhs, "", outer.entry, "IN_b", bb, p.containers.at(bb).full());
  NodeId init = b.add_tasklet(st, tag + "_init", {}, {"o"}, {{"o", "0.0"}});
  b.add_edge(st, outer.entry, init);
  NodeId inner_out = b.add_access(st, o);
  b.add_memlet(st, init, "o", inner_out, "", o, "i, j");

  MapScope inner = b.add_map(st, tag + "_k", {"k"}, {upto(kN)});
  b.add_memlet(st, outer.entry, "OUT_a", inner.entry, "IN_a", a, "i, 0:N");
  b.add_memlet(st, outer.entry, "OUT_b", inner.entry, "IN_b", bb, "0:N, j");
  b.add_edge(st, inner_out, inner.entry);
  NodeId mul = b.add_tasklet(st, tag + "_mul", {"x", "y"}, {"o"}, {{"o", "x * y"}});
  b.add_memlet(st, inner.entry, "OUT_a", mul, "x", a, "i, k");
  b.add_memlet(st, inner.entry, "OUT_b", mul, "y", bb, "k, j");
  b.add_memlet(st, mul, "o", inner.exit, "IN_o", o, "i, j", Wcr::kSum);
  b.add_memlet(st, inner.exit, "OUT_o", outer.exit, "IN_o", o, "i, 0:N", Wcr::kSum);
  b.add_memlet(st, outer.exit, "OUT_o", out, "", o, "0:N, 0:N", Wcr::kSum);
}

}  // namespace

Program matrix_chain() {
  ProgramBuilder b("matrix_chain");
  b.add_symbol("N", 1);
  for (const char* name : {"A", "B", "C", "D", "U", "V", "R"}) b.add_container(name, DType::kF64, {kN, kN}, false);
  b.add_container("tmp1", DType::kF64, {kN, kN}, true);
  StateId st = b.add_state("chain");

  NodeId a = b.add_access(st, "A"), bm = b.add_access(st, "B");
  NodeId tmp1 = b.add_access(st, "tmp1");
  add_matmul(b, st, "mm1", a, bm, tmp1);

  NodeId u = b.add_access(st, "U");
  b.add_mapped_tasklet(st, "copy", {"i", "j"}, {upto(kN), upto(kN)}, {{"x", tmp1, "i, j"}}, {{"o", "x"}},
                       {{"o", u, "i, j"}});

  NodeId c = b.add_access(st, "C"), v = b.add_access(st, "V");
  add_matmul(b, st, "mm2", u, c, v);
  NodeId d = b.add_access(st, "D"), r = b.add_access(st, "R");
  add_matmul(b, st, "mm3", v, d, r);
  return b.build();
}

Program fgh(bool live_tmp) {
  ProgramBuilder b(live_tmp ? "fgh_live" : "fgh");
  b.add_symbol("N", 1);
  b.add_container("x", DType::kF64, {kN}, false);
  for (const char* name : {"y", "z", "tmp"}) b.add_container(name, DType::kF64, {kN}, true);
  b.add_container("out", DType::kF64, {kN}, false);
  if (live_tmp) b.add_container("w", DType::kF64, {kN}, false);
  StateId st = b.add_state("main");

  NodeId x = b.add_access(st, "x"), y = b.add_access(st, "y"), z = b.add_access(st, "z");
  b.add_mapped_tasklet(st, "f", {"i"}, {upto(kN)}, {{"a", x, "i"}}, {{"o", "sin(a) + 1.5"}}, {{"o", y, "i"}});
  b.add_mapped_tasklet(st, "g", {"i"}, {upto(kN)}, {{"a", x, "i"}}, {{"o", "a * a - 0.5"}}, {{"o", z, "i"}});

  MapScope m = b.add_map(st, "fused", {"i"}, {upto(kN)});
  b.add_memlet(st, y, "", m.entry, "IN_y", "y", "0:N");
  b.add_memlet(st, z, "", m.entry, "IN_z", "z", "0:N");
  NodeId mul = b.add_tasklet(st, "mul", {"a"}, {"o"}, {{"o", "a * 2"}});
  b.add_memlet(st, m.entry, "OUT_z", mul, "a", "z", "i");
  NodeId tmp = b.add_access(st, "tmp");
  b.add_memlet(st, mul, "o", tmp, "", "tmp", "i");
  NodeId h = b.add_tasklet(st, "h", {"p", "q"}, {"o"}, {{"o", "p * q + p"}});
  b.add_memlet(st, m.entry, "OUT_y", h, "p", "y", "i");
  b.add_memlet(st, tmp, "", h, "q", "tmp", "i");
  NodeId out = b.add_access(st, "out");
  b.add_memlet(st, h, "o", m.exit, "IN_o", "out", "i");
  b.add_memlet(st, m.exit, "OUT_o", out, "", "out", "0:N");
  if (live_tmp) {
    NodeId tmp_top = b.add_access(st, "tmp");
    b.add_memlet(st, tmp, "", m.exit, "IN_tmp", "tmp", "i");
    b.add_memlet(st, m.exit, "OUT_tmp", tmp_top, "", "tmp", "0:N");
    NodeId w = b.add_access(st, "w");
    b.add_mapped_tasklet(st, "k", {"i"}, {upto(kN)}, {{"a", tmp_top, "i"}}, {{"o", "a + 1"}}, {{"o", w, "i"}});
  }
  return b.build();
}

Program first_ten() {
  ProgramBuilder b("first_ten");
  b.add_symbol("N", 10);
  b.add_container("my_arr", DType::kF64, {kN}, false);
  StateId st = b.add_state("main");
  NodeId in = b.add_access(st, "my_arr");
  NodeId out = b.add_access(st, "my_arr");
  b.add_mapped_tasklet(st, "double", {"i"}, {upto(SymExpr(10))}, {{"a", in, "i"}}, {{"o", "a * 2"}},
                       {{"o", out, "i"}});
  return b.build();
}

Program negative_step_loop() {
  ProgramBuilder b("negative_step_loop");
  b.add_container("A", DType::kF64, {SymExpr(4)}, false);
  b.add_container("B", DType::kF64, {SymExpr(4)}, false);
  StateId init = b.add_state("init");
  LoopStates loop = b.add_loop(init, "i", SymExpr(4), SymExpr(0), -1, "down");
  NodeId src = b.add_access(loop.body, "B");
  NodeId dst = b.add_access(loop.body, "A");
  NodeId t = b.add_tasklet(loop.body, "body", {"b"}, {"a"}, {{"a", "b + i"}});
  b.add_memlet(loop.body, src, "", t, "b", "B", "i - 1");
  b.add_memlet(loop.body, t, "a", dst, "", "A", "i - 1");
  return b.build();
}

Program branchy(bool modified) {
  ProgramBuilder b(modified ? "branchy_modified" : "branchy");
  b.add_container("x", DType::kF64, {}, false);
  b.add_container("out", DType::kF64, {}, false);
  StateId st = b.add_state("main");
  NodeId x = b.add_access(st, "x");
  NodeId out = b.add_access(st, "out");
  std::string rare = modified ? "a - 2" : "a - 1";
  NodeId t = b.add_tasklet(st, "classify", {"a"}, {"o"},
                           {{"o", "select(a * 1000 > 900, select(a * 1000 > 990, " + rare + ", a + 1), a + 1)"}});
  b.add_memlet(st, x, "", t, "a", "x", "");
  b.add_memlet(st, t, "o", out, "", "out", "");
  return b.build();
}

std::vector<std::pair<std::string, Program>> all() {
  return {{"matrix_chain", matrix_chain()},      {"fgh", fgh(false)},
          {"fgh_live", fgh(true)},               {"first_ten", first_ten()},
          {"negative_step_loop", negative_step_loop()}, {"branchy", branchy(false)},
          {"branchy_modified", branchy(true)}};
}

}  // namespace cutflow::fixtures
