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
#include <random>

#include "cutflow/cutout.hpp"
#include "cutflow/error.hpp"
#include "cutflow/fixtures.hpp"
#include "cutflow/interp.hpp"
#include "cutflow/xform.hpp"
#include "doctest.h"
#include "support/random_program.hpp"
#include "support/soundness.hpp"

using namespace cutflow;
using testing::random_input;
using testing::random_program;

namespace {

using Names = std::vector<std::string>;

std::vector<std::string> container_names(const Program& p) {
  std::vector<std::string> out;
  for (const auto& [name, d] : p.containers) out.push_back(name);
  return out;
}

NodeId labelled(const Program& p, const std::string& label) {
  for (const auto& s : p.states) {
    for (const auto& n : s.nodes) {
      if (n.label() == label) return n.id;
    }
  }
  FAIL("no node labelled " << label);
  return kNoNode;
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
        t.tile_size = 3;
        out.push_back(t);
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("tiling the second product cuts out one map nest") {
  Program p = fixtures::matrix_chain();
  auto sites = match(TransformKind::kMapTiling, p);
  REQUIRE(sites.size() == 3);
  Applied a = apply(sites[1], p);
  Cutout c = extract(p, a.changes);
  CHECK_FALSE(c.whole_states);
  CHECK(container_names(c.program) == Names{"C", "U", "V"});
  CHECK(c.input_symbols == Names{"N"});
  CHECK(c.system_state_containers() == Names{"V"});
  CHECK(c.input_containers() == Names{"C", "U", "V"});
  CHECK(c.program.states.size() == 1);
  for (const auto& [cut, orig] : c.origin) CHECK(p.node(orig) != nullptr);
  CHECK(validate(c.program).empty());

  // The transformation applies unchanged inside the cutout.
  Applied inside = apply(sites[1], c.program);
  CHECK(inside.changes.added.size() == a.changes.added.size());
}

TEST_CASE("first_ten cutout keeps exactly ten elements") {
  Program p = fixtures::first_ten();
  NodeId t = labelled(p, "double");
  Cutout c = extract_nodes(p, p.state_of(t)->id, {t});
  REQUIRE(c.offsets.count("my_arr"));
  REQUIRE(c.input_configuration.size() == 1);
  for (std::int64_t n : {10, 11, 64, 1000, 1024}) {
    Binding b{{"N", n}};
    CHECK(c.input_volume(b) == 10);
    CHECK(c.program.container("my_arr").total_size(b) == 10);
  }
  CHECK(c.input_configuration[0].range.str() == "0:10");
  CHECK(validate(c.program).empty());
}

TEST_CASE("fgh cutout around the fused map reads y and z") {
  Program p = fixtures::fgh();
  NodeId h = labelled(p, "h");
  Cutout c = extract_nodes(p, p.state_of(h)->id, {h});
  CHECK(c.input_containers() == Names{"y", "z"});
  CHECK(c.system_state_containers() == Names{"out"});
  CHECK(c.input_volume({{"N", 7}}) == 14);
  CHECK_FALSE(c.program.container("y").transient);
  CHECK(c.program.container("tmp").transient);

  Program live = fixtures::fgh(true);
  Cutout cl = extract_nodes(live, live.state_of(labelled(live, "h"))->id, {labelled(live, "h")});
  CHECK(cl.system_state_containers() == Names{"out", "tmp"});
}

TEST_CASE("errors") {
  Program p = fixtures::fgh();
  CHECK_THROWS_AS(extract(p, ChangeSet{}), Error);
  try {
    ChangeSet cs;
    cs.modified.insert(99999);
    extract(p, cs);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownElement);
  }
  try {
    extract(p, ChangeSet{});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyChangeSet);
  }
}

TEST_CASE("unrolling cuts out the loop region") {
  Program p = fixtures::negative_step_loop();
  auto sites = match(TransformKind::kLoopUnroll, p);
  REQUIRE(sites.size() == 1);
  Applied a = apply(sites[0], p);
  Cutout c = extract(p, a.changes);
  CHECK(c.whole_states);
  CHECK(c.system_state_containers() == Names{"A"});
  CHECK(std::find(c.input_symbols.begin(), c.input_symbols.end(), "i") == c.input_symbols.end());
  CHECK(validate(c.program).empty());
  Applied inside = apply(sites[0], c.program);
  CHECK(validate(inside.program).empty());
}

TEST_CASE("propagation covers map ranges") {
  Program p = fixtures::matrix_chain();
  NodeId mul = labelled(p, "mm2_mul");
  const State& s = *p.state_of(mul);
  for (const auto& a : collect_accesses(s)) {
    if (a.tasklet != mul) continue;
    CHECK(propagate_subset(p, s, mul, a.container, a.subset).str() == "0:N, 0:N");
  }
}

TEST_CASE("meta json names inputs and offsets") {
  Program p = fixtures::first_ten();
  NodeId t = labelled(p, "double");
  std::string meta = cutout_meta_json(extract_nodes(p, p.state_of(t)->id, {t}));
  CHECK(meta.find("\"my_arr\"") != std::string::npos);
  CHECK(meta.find("\"offsets\"") != std::string::npos);
}

TEST_CASE("captured inputs reproduce the original slice") {
  Program p = fixtures::first_ten();
  NodeId t = labelled(p, "double");
  Cutout c = extract_nodes(p, p.state_of(t)->id, {t});
  ExecutionInput in;
  in.symbols["N"] = 20;
  Buffer b = Buffer::zeros(DType::kF64, {20});
  for (int k = 0; k < 20; ++k) b.f[k] = k;
  in.data["my_arr"] = b;
  ExecutionOutcome whole;
  auto entries = capture_inputs(p, c, in, 16, &whole);
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].data.at("my_arr").shape == std::vector<std::int64_t>{10});
  ExecutionOutcome part = run(c.program, entries[0]);
  REQUIRE(part.status == Status::kCompleted);
  for (int k = 0; k < 10; ++k) CHECK(part.containers.at("my_arr").f[k] == whole.containers.at("my_arr").f[k]);
}

// Whenever a transformation changes the whole program's result, the cutout
// pair differs on some captured input.
TEST_CASE("cutouts are sound on random programs") {
  testing::SoundnessTally tally;
  auto check_program = [&](const Program& p, std::uint64_t seed, int inputs) {
    for (const auto& t : all_instances(p)) {
      Applied a = apply(t, p);
      if (a.changes.empty()) continue;
      Cutout c = extract(p, a.changes);
      REQUIRE(validate(c.program).empty());
      testing::check_soundness(p, t, a.program, c, inputs, seed, tally);
    }
  };
  for (const auto& [name, p] : fixtures::all()) check_program(p, 7, 20);
  for (std::uint64_t seed = 1; seed <= 120; ++seed) check_program(random_program(seed), seed, 10);
  MESSAGE("checked " << tally.checked << ", whole differs " << tally.whole_differs);
  CHECK_MESSAGE(tally.counterexamples == 0, tally.first);
  CHECK(tally.checked > 1000);
  CHECK(tally.whole_differs > 0);
}
