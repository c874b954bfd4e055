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

// Python bindings: programs travel as JSON text, results as dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cutflow/builder.hpp"
#include "cutflow/cli.hpp"
#include "cutflow/cutout.hpp"
#include "cutflow/error.hpp"
#include "cutflow/fixtures.hpp"
#include "cutflow/fuzz.hpp"
#include "cutflow/ir_io.hpp"
#include "cutflow/mincut.hpp"
#include "cutflow/xform.hpp"

namespace py = pybind11;
using namespace cutflow;

namespace {

Program parse_valid(const std::string& json) {
  Program p = deserialize(json);
  auto diags = validate(p);
  if (!diags.empty()) throw Error(ErrorCode::kMalformedDocument, format_diagnostics(diags));
  return p;
}

TransformationInstance pick(const Program& p, const std::string& kind, std::optional<std::uint64_t> site,
                            const std::string& bug, std::int64_t tile) {
  for (auto t : match(transform_kind_from_string(kind), p)) {
    if (site && std::find(t.site.begin(), t.site.end(), *site) == t.site.end()) continue;
    t.bug = bug_from_string(bug);
    t.tile_size = tile;
    return t;
  }
  throw Error(ErrorCode::kTransformationInapplicable, "no " + kind + " site");
}

py::list refs(const std::vector<DataRef>& v) {
  py::list out;
  for (const auto& r : v) out.append(py::make_tuple(r.container, r.range.str()));
  return out;
}

py::dict cutout_dict(const Cutout& c, const Binding& b) {
  py::dict d;
  d["program"] = serialize(c.program);
  d["input_symbols"] = std::vector<std::string>(c.input_symbols.begin(), c.input_symbols.end());
  d["input_configuration"] = refs(c.input_configuration);
  d["system_state"] = refs(c.system_state);
  d["input_volume"] = c.input_volume(b);
  d["warnings"] = c.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cutout extraction, input minimization and differential fuzzing";
  m.attr("__version__") = std::string(kToolVersion);

  static py::exception<Error> error(m, "CutflowError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("fixtures", [] {
    std::vector<std::string> names;
    for (const auto& [name, p] : fixtures::all()) names.push_back(name);
    return names;
  });
  m.def("fixture", [](const std::string& name) {
    for (const auto& [n, p] : fixtures::all()) {
      if (n == name) return serialize(p);
    }
    throw Error(ErrorCode::kInvalidArgument, "no fixture named " + name);
  }, py::arg("name"), "Program JSON of a built-in fixture.");

  m.def("match", [](const std::string& program, const std::string& kind) {
    std::vector<std::string> ids;
    for (const auto& t : match(transform_kind_from_string(kind), parse_valid(program))) ids.push_back(t.id());
    return ids;
  }, py::arg("program"), py::arg("kind"));

  m.def("cutout", [](const std::string& program, const std::string& kind, std::optional<std::uint64_t> site,
                     bool mincut, const Binding& bind) {
    Program p = parse_valid(program);
    Cutout c = extract(p, apply(pick(p, kind, site, "none", 32), p).changes);
    Binding b = concretize(p, bind);
    if (mincut) c = minimize_inputs(p, c, b).cutout;
    return cutout_dict(c, b);
  }, py::arg("program"), py::arg("kind"), py::arg("site") = std::nullopt, py::arg("mincut") = false,
     py::arg("bind") = Binding{});

  m.def("verify", [](const std::string& program, const std::string& kind, std::optional<std::uint64_t> site,
                     const std::string& bug, std::int64_t tile, std::int64_t trials, std::uint64_t seed, double tol,
                     std::int64_t size_max, const std::string& constraints) {
    Program p = parse_valid(program);
    TransformationInstance t = pick(p, kind, site, bug, tile);
    Cutout c = extract(p, apply(t, p).changes);
    UserConstraints user;
    if (!constraints.empty()) user = UserConstraints::parse_json(constraints);
    TrialConfig cfg;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.tol = tol;
    VerifyResult r;
    {
      py::gil_scoped_release release;
      r = verify(c, t, derive_constraints(p, c, user, size_max), cfg);
    }
    py::dict d;
    d["transformation"] = t.id();
    d["verdict"] = std::string(to_string(r.verdict.outcome));
    d["cause"] = std::string(to_string(r.verdict.cause));
    d["trial"] = r.verdict.trial;
    d["conclusive"] = r.verdict.conclusive;
    d["detail"] = r.verdict.detail;
    d["report"] = r.bundle ? py::object(py::str(r.bundle->report())) : py::object(py::none());
    return d;
  }, py::arg("program"), py::arg("kind"), py::arg("site") = std::nullopt, py::arg("bug") = "none",
     py::arg("tile") = 32, py::arg("trials") = 100, py::arg("seed") = 1, py::arg("tol") = 1e-5,
     py::arg("size_max") = 64, py::arg("constraints") = "");

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command line in-process and returns (exit code, stdout, stderr).");
}
