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

#include "cutflow/cutout.hpp"
#include "cutflow/error.hpp"
#include "cutflow/fixtures.hpp"
#include "cutflow/mincut.hpp"
#include "cutflow/xform.hpp"
#include "doctest.h"
#include "support/flow_oracle.hpp"
#include "support/random_program.hpp"
#include "support/soundness.hpp"

using namespace cutflow;

namespace {

using Names = std::vector<std::string>;
using testing::brute_force_cut;
using testing::crossing;
using testing::random_dag;

NodeId labelled(const Program& p, const std::string& label) {
  for (const auto& s : p.states) {
    for (const auto& n : s.nodes) {
      if (n.label() == label) return n.id;
    }
  }
  FAIL("no node labelled " << label);
  return kNoNode;
}

Cutout fused_map_cutout(const Program& p) {
  NodeId h = labelled(p, "h");
  return extract_nodes(p, p.state_of(h)->id, {h});
}

}  // namespace

TEST_CASE("small networks") {
  FlowNetwork single;
  single.add_arc(FlowNetwork::kSource, FlowNetwork::kSink, 5);
  CHECK(max_flow(single).value == 5);

  FlowNetwork diamond;
  std::size_t a = diamond.add_node(), b = diamond.add_node();
  diamond.add_arc(FlowNetwork::kSource, a, 3);
  diamond.add_arc(FlowNetwork::kSource, b, 2);
  diamond.add_arc(a, FlowNetwork::kSink, 2);
  diamond.add_arc(b, FlowNetwork::kSink, 3);
  diamond.add_arc(b, a, 1);
  FlowResult r = max_flow(diamond);
  CHECK(r.value == 4);
  CHECK(brute_force_cut(diamond) == 4);
  CHECK(crossing(diamond, r) == 4);

  // With the cross edge a -> b every cut costs at least 5.
  diamond.arcs.back() = {a, b, 1, {}};
  CHECK(max_flow(diamond).value == 5);
  CHECK(brute_force_cut(diamond) == 5);

  FlowNetwork disconnected;
  disconnected.add_node();
  disconnected.add_arc(FlowNetwork::kSource, 2, 7);
  CHECK(max_flow(disconnected).value == 0);
}

TEST_CASE("max flow equals the brute-force minimum cut") {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 1000; ++k) {
    FlowNetwork net = random_dag(rng);
    FlowResult r = max_flow(net);
    CAPTURE(net.dot());
    REQUIRE(r.value == brute_force_cut(net));
    // The residual partition is itself a minimum cut.
    CHECK(crossing(net, r) == r.value);
  }
}

TEST_CASE("fgh cut moves the inputs from y, z to x") {
  Program p = fixtures::fgh();
  Cutout c = fused_map_cutout(p);
  Binding b = concretize(p);
  CHECK(b.at("N") == 64);
  FlowNetwork net = prepare(p, c, b);
  for (const auto& a : net.arcs) {
    if (a.from >= 2 && p.node(net.nodes[a.from])->is<AccessNode>()) CHECK_FALSE(a.capacity.has_value());
  }
  CutResult r = minimize_inputs(p, c, b);
  CHECK(r.flow == 64);
  CHECK(r.extended);
  CHECK(r.old_volume == 128);
  CHECK(r.new_volume == 64);
  CHECK(r.cutout.input_containers() == Names{"x"});
  CHECK(r.cutout.system_state_containers() == Names{"out"});
  CHECK(r.cutout.nodes.count(labelled(p, "f")));
  CHECK(r.cutout.nodes.count(labelled(p, "g")));
  CHECK(validate(r.cutout.program).empty());

  // A second pass finds nothing left to gain.
  CutResult again = minimize_inputs(p, r.cutout, b);
  CHECK_FALSE(again.extended);
  CHECK(again.cutout.nodes == r.cutout.nodes);
}

TEST_CASE("tie keeps the original cutout") {
  Program p = fixtures::matrix_chain();
  auto sites = match(TransformKind::kMapTiling, p);
  Cutout c = extract(p, apply(sites[1], p).changes);
  Binding b = concretize(p, {{"N", 8}});
  CutResult r = minimize_inputs(p, c, b);
  CHECK_FALSE(r.extended);
  CHECK(r.new_volume == r.old_volume);
  CHECK(r.cutout.nodes == c.nodes);
}

TEST_CASE("cutout fed by program inputs is unchanged") {
  Program p = fixtures::first_ten();
  NodeId t = labelled(p, "double");
  Cutout c = extract_nodes(p, p.state_of(t)->id, {t});
  CutResult r = minimize_inputs(p, c, concretize(p));
  CHECK_FALSE(r.extended);
  CHECK(r.flow == r.old_volume);
}

TEST_CASE("convex cutouts leave no edge that loops back") {
  Program p = fixtures::fgh(true);
  // f sits between x (adjacent to g) and the fused map, so convexity pulls it in.
  Cutout c = extract_nodes(p, p.state_of(labelled(p, "g"))->id, {labelled(p, "g"), labelled(p, "h")});
  CHECK(c.nodes.count(labelled(p, "f")));
  FlowNetwork net = prepare(p, c, concretize(p));
  for (const auto& a : net.arcs) {
    CHECK_FALSE((a.from == FlowNetwork::kSource && a.to == FlowNetwork::kSink && a.capacity == 0));
  }
}

TEST_CASE("unbound capacity symbols and whole-state cutouts") {
  Program p = fixtures::fgh();
  Cutout c = fused_map_cutout(p);
  CHECK_THROWS_AS(prepare(p, c, Binding{}), Error);
  Program loop = fixtures::negative_step_loop();
  Cutout region = extract(loop, apply(match(TransformKind::kLoopUnroll, loop)[0], loop).changes);
  CHECK_THROWS_AS(prepare(loop, region, {}), Error);
  CutResult r = minimize_inputs(loop, region, {});
  CHECK_FALSE(r.extended);
}

TEST_CASE("extension never grows the input volume and stays sound") {
  std::size_t extended = 0;
  testing::SoundnessTally tally;
  auto check_program = [&](const Program& p, std::uint64_t seed) {
    Binding b = concretize(p, {}, 6);
    for (TransformKind k : builtin_transformations()) {
      for (auto t : match(k, p)) {
        if (k == TransformKind::kTaskletFusion) t.bug = BugFlag::kFusionDropsLiveWrite;
        Applied a = apply(t, p);
        Cutout c = extract(p, a.changes);
        CutResult r = minimize_inputs(p, c, b);
        CHECK(r.new_volume <= r.old_volume);
        CutResult again = minimize_inputs(p, r.cutout, b);
        CHECK(again.cutout.nodes == r.cutout.nodes);
        if (!r.extended) continue;
        ++extended;
        REQUIRE(validate(r.cutout.program).empty());
        Applied inside = apply(t, r.cutout.program);
        CHECK(validate(inside.program).empty());
        testing::check_soundness(p, t, a.program, r.cutout, 20, seed, tally);
      }
    }
  };
  for (const auto& [name, p] : fixtures::all()) check_program(p, 1);
  for (std::uint64_t seed = 1; seed <= 150; ++seed) check_program(testing::random_program(seed), seed);
  MESSAGE("extended cutouts: " << extended << ", whole differs " << tally.whole_differs);
  CHECK(extended > 0);
  CHECK_MESSAGE(tally.counterexamples == 0, tally.first);
}
