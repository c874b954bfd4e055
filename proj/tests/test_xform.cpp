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

#include <random>

#include "cutflow/builder.hpp"
#include "cutflow/error.hpp"
#include "cutflow/fixtures.hpp"
#include "cutflow/interp.hpp"
#include "cutflow/xform.hpp"
#include "doctest.h"
#include "support/random_program.hpp"

using namespace cutflow;
using testing::random_input;
using testing::random_program;

namespace {

std::vector<std::string> outputs(const Program& p) {
  std::vector<std::string> out;
  for (const auto& [name, d] : p.containers) {
    if (!d.transient) out.push_back(name);
  }
  return out;
}

ExecutionInput chain_input(std::int64_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1, 1);
  ExecutionInput in;
  in.symbols["N"] = n;
  for (const char* name : {"A", "B", "C", "D"}) {
    Buffer b = Buffer::zeros(DType::kF64, {n, n});
    for (auto& v : b.f) v = d(rng);
    in.data[name] = b;
  }
  return in;
}

TransformationInstance second_matmul(const Program& p, BugFlag bug = BugFlag::kNone, std::int64_t tile = 32) {
  auto sites = match(TransformKind::kMapTiling, p);
  REQUIRE(sites.size() == 3);
  TransformationInstance t = sites[1];
  CHECK(p.node(t.site[0])->label() == "mm2_ij");
  t.bug = bug;
  t.tile_size = tile;
  return t;
}

std::vector<TransformationInstance> all_instances(const Program& p) {
  std::vector<TransformationInstance> out;
  for (TransformKind k : builtin_transformations()) {
    for (auto t : match(k, p)) {
      out.push_back(t);
      for (BugFlag b : {BugFlag::kTilingOffByOne, BugFlag::kTilingNoBoundGuard, BugFlag::kUnrollIgnoresNegativeStep,
                        BugFlag::kFusionDropsLiveWrite}) {
        if (bug_owner(b) != k) continue;
        t.bug = b;
        out.push_back(t);
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("instance ids round trip") {
  for (const char* text : {"map-tiling@12", "map-tiling@12?tile=4&bug=off-by-one", "loop-unroll@3,4",
                           "tasklet-fusion@9?bug=drops-live-write", "identity"}) {
    CHECK(TransformationInstance::parse(text).id() == text);
  }
  CHECK_THROWS_AS(TransformationInstance::parse("map-tiling@x"), Error);
  CHECK_THROWS_AS(TransformationInstance::parse("loop-unroll@3?bug=off-by-one"), Error);
  CHECK_THROWS_AS(TransformationInstance::parse("vectorize@1"), Error);
  CHECK_THROWS_AS(TransformationInstance::parse("map-tiling@1?size=3"), Error);
}

TEST_CASE("match sites on fixtures") {
  CHECK(match(TransformKind::kMapTiling, fixtures::matrix_chain()).size() == 3);
  CHECK(match(TransformKind::kLoopUnroll, fixtures::negative_step_loop()).size() == 1);
  Program f = fixtures::fgh();
  auto fusion = match(TransformKind::kTaskletFusion, f);
  REQUIRE(fusion.size() == 1);
  const Node* site = f.node(fusion[0].site[0]);
  REQUIRE(site->is<AccessNode>());
  CHECK(site->as<AccessNode>().container == "tmp");
  CHECK(match(TransformKind::kTaskletFusion, fixtures::fgh(true)).size() == 1);
  CHECK(match(TransformKind::kMapTiling, fixtures::first_ten()).empty());
  CHECK(match(TransformKind::kIdentity, f).size() == 1);
}

TEST_CASE("map tiling preserves results") {
  Program p = fixtures::matrix_chain();
  for (std::int64_t tile : {32, 4, 3, 1}) {
    Applied a = apply(second_matmul(p, BugFlag::kNone, tile), p);
    CHECK(validate(a.program).empty());
    for (std::int64_t n : {1, 5, 8, 64}) {
      if (n == 64 && tile < 32) continue;
      auto in = chain_input(n, static_cast<std::uint64_t>(n * 31 + tile));
      auto x = run(p, in), y = run(a.program, in);
      REQUIRE(y.status == Status::kCompleted);
      CHECK(compare_states(x, y, outputs(p), 0).kind == Comparison::Kind::kEqual);
    }
  }
}

TEST_CASE("tiling bugs") {
  Program p = fixtures::matrix_chain();
  SUBCASE("off by one reads past the end") {
    Applied a = apply(second_matmul(p, BugFlag::kTilingOffByOne), p);
    auto out = run(a.program, chain_input(32, 1));
    REQUIRE(out.status == Status::kFault);
    CHECK(out.fault->kind == FaultKind::kOutOfBounds);
  }
  SUBCASE("missing bound guard only hurts non-multiples") {
    Applied a = apply(second_matmul(p, BugFlag::kTilingNoBoundGuard, 4), p);
    for (std::int64_t n : {4, 8, 12}) {
      auto in = chain_input(n, 2);
      CHECK(compare_states(run(p, in), run(a.program, in), outputs(p), 0).kind == Comparison::Kind::kEqual);
    }
    for (std::int64_t n : {1, 5, 7, 13}) {
      auto out = run(a.program, chain_input(n, 3));
      REQUIRE(out.status == Status::kFault);
      CHECK(out.fault->kind == FaultKind::kOutOfBounds);
    }
  }
}

TEST_CASE("loop unrolling") {
  Program p = fixtures::negative_step_loop();
  auto sites = match(TransformKind::kLoopUnroll, p);
  REQUIRE(sites.size() == 1);
  ExecutionInput in;
  Buffer b = Buffer::zeros(DType::kF64, {4});
  b.f = {1, 2, 3, 4};
  in.data["B"] = b;
  auto count_bodies = [](const Program& q) {
    int n = 0;
    for (const auto& s : q.states) {
      for (const auto& node : s.nodes) n += node.is<TaskletNode>();
    }
    return n;
  };

  Applied ok = apply(sites[0], p);
  CHECK(validate(ok.program).empty());
  CHECK(count_bodies(ok.program) == 4);
  CHECK(ok.program.states.size() == 6);
  CHECK(run(ok.program, in).containers == run(p, in).containers);

  auto buggy = sites[0];
  buggy.bug = BugFlag::kUnrollIgnoresNegativeStep;
  Applied bad = apply(buggy, p);
  CHECK(count_bodies(bad.program) == 2);
  auto out = run(bad.program, in);
  CHECK(out.containers.at("A").f == std::vector<double>{0, 0, 6, 8});
}

TEST_CASE("unrolling a forward loop with a partial last step") {
  ProgramBuilder b("fwd");
  b.add_container("A", DType::kI64, {SymExpr(10)}, false);
  StateId s0 = b.add_state("s0");
  LoopStates ls = b.add_loop(s0, "i", SymExpr(1), SymExpr(8), 3);
  NodeId t = b.add_tasklet(ls.body, "t", {}, {"o"}, {{"o", "i * 10"}});
  b.add_memlet(ls.body, t, "o", b.add_access(ls.body, "A"), "", "A", "i");
  // After the loop, i must hold the exit value 10.
  NodeId t2 = b.add_tasklet(ls.after, "t2", {}, {"o"}, {{"o", "i"}});
  b.add_memlet(ls.after, t2, "o", b.add_access(ls.after, "A"), "", "A", "0");
  Program p = b.build();
  auto sites = match(TransformKind::kLoopUnroll, p);
  REQUIRE(sites.size() == 1);
  auto buggy = sites[0];
  buggy.bug = BugFlag::kUnrollIgnoresNegativeStep;
  auto expect = run(p, {}).containers.at("A").i;
  CHECK(expect == std::vector<std::int64_t>{10, 10, 0, 0, 40, 0, 0, 70, 0, 0});
  CHECK(run(apply(sites[0], p).program, {}).containers.at("A").i == expect);
  CHECK(run(apply(buggy, p).program, {}).containers.at("A").i == expect);
}

TEST_CASE("tasklet fusion") {
  std::mt19937_64 rng(4);
  for (bool live : {false, true}) {
    Program p = fixtures::fgh(live);
    auto t = match(TransformKind::kTaskletFusion, p).at(0);
    Applied ok = apply(t, p);
    CHECK(validate(ok.program).empty());
    t.bug = BugFlag::kFusionDropsLiveWrite;
    Applied bad = apply(t, p);
    CHECK(validate(bad.program).empty());
    for (int k = 0; k < 20; ++k) {
      auto in = random_input(p, rng);
      auto x = run(p, in);
      CHECK(compare_states(x, run(ok.program, in), outputs(p), 0).kind == Comparison::Kind::kEqual);
      auto y = run(bad.program, in);
      auto c = compare_states(x, y, outputs(p), 0);
      if (live) {
        CHECK(c.kind == Comparison::Kind::kDiffers);
        CHECK(c.container == "w");
      } else {
        CHECK(c.kind == Comparison::Kind::kEqual);
      }
    }
  }
}

TEST_CASE("site staleness") {
  Program p = fixtures::matrix_chain();
  auto t = second_matmul(p);
  Applied a = apply(t, p);
  // The tiled nest is no longer top level, and the tile map has a non-unit
  // step, so only the other two nests remain.
  CHECK(match(TransformKind::kMapTiling, a.program).size() == 2);
  try {
    apply(t, a.program);
    FAIL("expected SiteStale");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSiteStale);
  }
  TransformationInstance wrong = t;
  wrong.site = {p.start};
  try {
    apply(wrong, p);
    FAIL("expected SiteStale");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSiteStale);
  }
  TransformationInstance unroll = match(TransformKind::kLoopUnroll, fixtures::negative_step_loop()).at(0);
  CHECK_THROWS_AS(apply(unroll, p), Error);
  t.tile_size = 0;
  CHECK_THROWS_AS(apply(t, p), Error);
}

TEST_CASE("diff") {
  Program p = fixtures::matrix_chain();
  CHECK(diff(p, p).empty());
  CHECK(diff(p, p).str() == "no changes\n");
  auto t = second_matmul(p);
  Applied a = apply(t, p);
  ChangeSet d = diff(p, a.program);
  const auto& me = p.node(t.site[0])->as<MapEntryNode>();
  CHECK(d.modified.count(t.site[0]));
  CHECK(d.modified.count(me.exit));
  CHECK(d.added.size() == 2);
  int entries = 0;
  for (NodeId id : d.added) entries += a.program.node(id)->label() == "mm2_ij_tiles";
  CHECK(entries == 1);
  CHECK(d.removed.empty());
}

TEST_CASE("reported changes cover the structural diff") {
  auto check = [](const Program& p, const std::string& name) {
    for (const auto& t : all_instances(p)) {
      Applied a = apply(t, p);
      INFO(name << " " << t.id());
      CHECK(validate(a.program).empty());
      ChangeSet d = diff(p, a.program);
      CHECK(a.changes.covers(d));
      CHECK_FALSE(a.changes.empty());
      for (NodeId id : a.changes.modified) CHECK(p.node(id) != nullptr);
      for (NodeId id : a.changes.removed) CHECK(p.node(id) != nullptr);
      for (NodeId id : a.changes.added) CHECK(a.program.node(id) != nullptr);
    }
  };
  for (const auto& [name, p] : fixtures::all()) check(p, name);
  for (std::uint64_t seed = 1; seed <= 200; ++seed) check(random_program(seed), "random " + std::to_string(seed));
}

TEST_CASE("correct variants preserve semantics") {
  std::mt19937_64 rng(8);
  auto check = [&](const Program& p, int inputs, const std::string& name) {
    for (const auto& t : match(TransformKind::kMapTiling, p)) {
      for (std::int64_t tile : {32, 2}) {
        auto tt = t;
        tt.tile_size = tile;
        Applied a = apply(tt, p);
        for (int k = 0; k < inputs; ++k) {
          auto in = random_input(p, rng);
          INFO(name << " " << tt.id());
          CHECK(compare_states(run(p, in), run(a.program, in), outputs(p), 0).kind == Comparison::Kind::kEqual);
        }
      }
    }
    for (TransformKind kind : {TransformKind::kLoopUnroll, TransformKind::kTaskletFusion}) {
      for (const auto& t : match(kind, p)) {
        Applied a = apply(t, p);
        for (int k = 0; k < inputs; ++k) {
          auto in = random_input(p, rng);
          INFO(name << " " << t.id());
          CHECK(compare_states(run(p, in), run(a.program, in), outputs(p), 0).kind == Comparison::Kind::kEqual);
        }
      }
    }
  };
  for (const auto& [name, p] : fixtures::all()) check(p, 100, name);
  for (std::uint64_t seed = 1; seed <= 150; ++seed) check(random_program(seed), 10, "random " + std::to_string(seed));
}
