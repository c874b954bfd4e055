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

#include <filesystem>
#include <sstream>

#include "cutflow/cfdata.hpp"
#include "cutflow/cli.hpp"
#include "cutflow/fixtures.hpp"
#include "cutflow/interp.hpp"
#include "cutflow/ir_io.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cutflow;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("cutflow_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string fixture(const std::string& name) {
  return std::string(CUTFLOW_SOURCE_DIR) + "/fixtures/" + name + ".cfprog.json";
}

}  // namespace

TEST_CASE("checked-in fixtures match the builders") {
  for (const auto& [name, p] : fixtures::all()) {
    CAPTURE(name);
    REQUIRE(fs::exists(fixture(name)));
    CHECK(serialize(load_program(fixture(name))) == serialize(p));
  }
}

TEST_CASE("verify reports an invalid tiling and writes a replayable bundle") {
  fs::path dir = scratch("verify");
  std::string report = (dir / "report.json").string();
  Run r = cli({"verify", fixture("matrix_chain"), "--xform", "map-tiling", "--site", "18", "--bug", "off-by-one",
               "--tile", "4", "--out", (dir / "bundles").string(), "--report", report});
  CHECK(r.code == kExitInvalid);
  CHECK(r.out.find("Invalid") != std::string::npos);
  auto j = nlohmann::json::parse(read_file(report));
  REQUIRE(j["records"].size() == 1);
  CHECK(j["records"][0]["verdict"] == "Invalid");
  CHECK(j["records"][0]["taxonomy"] == "change-in-semantics");
  std::string bundle = j["records"][0]["bundle"];

  Run first = cli({"replay", bundle, "--json"});
  CHECK(first.code == kExitInvalid);
  for (int k = 0; k < 2; ++k) CHECK(cli({"replay", bundle, "--json"}).out == first.out);
}

TEST_CASE("verify passes correct tilings") {
  Run r = cli({"verify", fixture("matrix_chain"), "--xform", "map-tiling", "--tile", "4", "--trials", "20", "--json"});
  CHECK(r.code == kExitValid);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["totals"]["instances"] == 3);
  CHECK(j["totals"]["valid"] == 3);
}

TEST_CASE("verify with mincut shrinks the fusion inputs") {
  Run r = cli({"verify", fixture("fgh"), "--xform", "tasklet-fusion", "--mincut", "--trials", "20", "--json"});
  CHECK(r.code == kExitValid);
  auto j = nlohmann::json::parse(r.out);
  auto rec = j["records"][0];
  CHECK(rec["input_volume"]["before"] == 128);
  CHECK(rec["input_volume"]["after"] == 64);
  CHECK(rec["inputs"] == nlohmann::json::array({"x"}));
}

TEST_CASE("verify rejects a bug that belongs to another transformation") {
  Run r = cli({"verify", fixture("matrix_chain"), "--xform", "map-tiling", "--bug", "ignores-negative-step"});
  CHECK(r.code == kExitError);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("cutout writes the program and metadata") {
  fs::path dir = scratch("cutout");
  Run r = cli({"cutout", fixture("fgh"), "--xform", "tasklet-fusion", "--out", dir.string()});
  CHECK(r.code == kExitValid);
  Program c = load_program((dir / "cutout.cfprog.json").string());
  CHECK(c.containers.count("y"));
  auto meta = nlohmann::json::parse(read_file((dir / "cutout-meta.json").string()));
  CHECK(meta.contains("system_state"));
}

TEST_CASE("cutout of an identity transformation is an empty change set") {
  fs::path dir = scratch("identity");
  Run r = cli({"cutout", fixture("fgh"), "--xform", "identity", "--out", dir.string()});
  CHECK(r.code == kExitError);
  CHECK(r.err.find("empty change set") != std::string::npos);
}

TEST_CASE("replay of a corrupt bundle is an error") {
  fs::path dir = scratch("corrupt");
  write_file((dir / "report.json").string(), "{ not json");
  CHECK(cli({"replay", dir.string()}).code == kExitError);
}

TEST_CASE("run prints container values") {
  fs::path dir = scratch("run");
  ExecutionInput in;
  in.symbols["N"] = 3;
  Buffer x = Buffer::zeros(DType::kF64, {3});
  for (std::size_t k = 0; k < 3; ++k) x.f[k] = static_cast<double>(k + 1);
  in.data["x"] = x;
  std::string input = (dir / "in.cfdata").string();
  save_data(in, input);
  Run r = cli({"run", fixture("fgh"), "--input", input});
  CHECK(r.code == kExitValid);
  CHECK(r.out.find("status: Completed") != std::string::npos);
  CHECK(r.out.find("out [3]:") != std::string::npos);
}

TEST_CASE("diff, match and dot") {
  Run d = cli({"diff", fixture("branchy"), fixture("branchy_modified")});
  CHECK(d.code == kExitValid);
  CHECK(!d.out.empty());
  CHECK(cli({"diff", fixture("fgh"), fixture("fgh")}).out == "no changes\n");
  Run m = cli({"match", fixture("negative_step_loop"), "--xform", "loop-unroll"});
  CHECK(m.out.find("loop-unroll@") != std::string::npos);
  CHECK(cli({"dot", fixture("fgh")}).out.rfind("digraph", 0) == 0);
}

TEST_CASE("usage errors exit 2") {
  CHECK(cli({}).code == kExitError);
  CHECK(cli({"verify"}).code == kExitError);
  CHECK(cli({"frobnicate"}).code == kExitError);
  CHECK(cli({"--help"}).code == kExitValid);
}
