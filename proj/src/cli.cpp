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

#include "cutflow/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cutflow/builder.hpp"
#include "cutflow/cfdata.hpp"
#include "cutflow/cutout.hpp"
#include "cutflow/error.hpp"
#include "cutflow/fixtures.hpp"
#include "cutflow/fuzz.hpp"
#include "cutflow/interp.hpp"
#include "cutflow/ir_io.hpp"
#include "cutflow/mincut.hpp"
#include "cutflow/xform.hpp"
#include "json.hpp"

namespace cutflow {

namespace {

struct Selection {
  std::string kind;
  std::vector<std::uint64_t> sites;
  std::string bug = "none";
  std::int64_t tile = 32;
};

void add_selection(CLI::App* cmd, Selection& s) {
  cmd->add_option("--xform", s.kind, "map-tiling | loop-unroll | tasklet-fusion | identity")->required();
  cmd->add_option("--site", s.sites, "restrict to the instance at this node or state ID");
  cmd->add_option("--bug", s.bug, "inject a known bug into the transformation");
  cmd->add_option("--tile", s.tile, "tile size for map-tiling")->check(CLI::PositiveNumber);
}

Program load_valid(const std::string& path) {
  Program p = load_program(path);
  auto diags = validate(p);
  if (!diags.empty()) throw Error(ErrorCode::kMalformedDocument, path + ":\n" + format_diagnostics(diags));
  return p;
}

std::vector<TransformationInstance> instances(const Program& p, const Selection& s) {
  TransformKind kind = transform_kind_from_string(s.kind);
  BugFlag bug = bug_from_string(s.bug);
  if (bug != BugFlag::kNone && bug_owner(bug) != kind) {
    throw Error(ErrorCode::kInvalidArgument, "bug '" + s.bug + "' does not belong to " + s.kind);
  }
  std::vector<TransformationInstance> out;
  for (auto t : match(kind, p)) {
    if (!s.sites.empty()) {
      bool hit = std::any_of(t.site.begin(), t.site.end(), [&](std::uint64_t id) {
        return std::find(s.sites.begin(), s.sites.end(), id) != s.sites.end();
      });
      if (!hit) continue;
    }
    t.bug = bug;
    t.tile_size = s.tile;
    out.push_back(t);
  }
  if (out.empty()) {
    throw Error(ErrorCode::kTransformationInapplicable, "no " + s.kind + " site" + (s.sites.empty() ? "" : " at the given ID"));
  }
  return out;
}

Binding parse_binding(const std::vector<std::string>& items) {
  Binding b;
  for (const auto& item : items) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "expected NAME=VALUE, got '" + item + "'");
    try {
      b[item.substr(0, eq)] = std::stoll(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad value in '" + item + "'");
    }
  }
  return b;
}

std::string sanitize(const std::string& id) {
  std::string out;
  for (char ch : id) out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' ? ch : '_';
  return out;
}

int workers_from_env() {
  const char* v = std::getenv("CUTFLOW_WORKERS");
  if (!v) return 1;
  int n = std::atoi(v);
  return n >= 1 ? n : 1;
}

std::string refs_table(const std::vector<DataRef>& refs) {
  std::ostringstream os;
  if (refs.empty()) os << "  (none)\n";
  for (const auto& r : refs) os << "  " << r.container << "  [" << r.range.str() << "]\n";
  return os.str();
}

std::string format_value(const Buffer& b, std::size_t k) {
  char buf[40];
  if (is_float(b.dtype)) {
    std::snprintf(buf, sizeof buf, "%.17g", b.f[k]);
  } else {
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(b.i[k]));
  }
  return buf;
}

// ---- verify ---------------------------------------------------------------

struct VerifyArgs {
  std::string program;
  Selection sel;
  std::int64_t trials = 100;
  double tol = 1e-5;
  std::uint64_t seed = 1;
  std::int64_t size_max = 64;
  std::string constraints;
  bool mincut = false;
  std::vector<std::string> bind;
  std::string mode = "uniform";
  std::string out = "cutflow-bundles";
  std::string report;
  bool json = false;
};

std::string taxonomy(const Verdict& v, bool invalid_code) {
  if (invalid_code) return "invalid-code";
  if (v.outcome != Outcome::kInvalid) return "";
  return v.conclusive > 1 ? "input-dependent" : "change-in-semantics";
}

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  Program p = load_valid(a.program);
  UserConstraints user;
  if (!a.constraints.empty()) user = UserConstraints::parse_json(read_file(a.constraints));
  TrialConfig cfg;
  cfg.trials = a.trials;
  cfg.tol = a.tol;
  cfg.seed = a.seed;
  cfg.workers = workers_from_env();
  if (a.mode == "uniform") {
    cfg.mode = Mode::kUniform;
  } else if (a.mode == "coverage") {
    cfg.mode = Mode::kCoverage;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + a.mode + "'");
  }
  Binding binding = concretize(p, parse_binding(a.bind));

  nlohmann::json records = nlohmann::json::array();
  std::size_t invalid = 0, valid = 0, inconclusive = 0;
  std::ostringstream text;
  for (const auto& t : instances(p, a.sel)) {
    auto start = std::chrono::steady_clock::now();
    nlohmann::json rec;
    rec["transformation"] = t.id();
    rec["site"] = t.site;
    Applied applied = apply(t, p);
    Cutout c = extract(p, applied.changes);
    std::int64_t before = c.input_volume(binding);
    if (a.mincut) {
      CutResult cut = minimize_inputs(p, c, binding);
      c = std::move(cut.cutout);
      rec["mincut"] = {{"flow", cut.flow}, {"extended", cut.extended}};
    }
    rec["input_volume"] = {{"before", before}, {"after", c.input_volume(binding)}, {"binding", binding}};
    rec["inputs"] = c.input_containers();
    rec["system_state"] = c.system_state_containers();

    Program transformed = apply(t, c.program).program;
    auto diags = validate(transformed);
    Verdict v;
    std::string bundle_path;
    if (!diags.empty()) {
      v.outcome = Outcome::kInvalid;
      v.detail = "transformed cutout fails validation: " + format_diagnostics(diags);
    } else {
      ConstraintSet cs = derive_constraints(p, c, user, a.size_max);
      VerifyResult r = verify(c, t, cs, cfg);
      v = r.verdict;
      if (r.bundle) {
        bundle_path = (std::filesystem::path(a.out) / sanitize(t.id())).string();
        r.bundle->write(bundle_path);
      }
    }
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    rec["verdict"] = std::string(to_string(v.outcome));
    rec["cause"] = std::string(to_string(v.cause));
    rec["trial"] = v.trial;
    rec["trials_run"] = v.trials_run;
    rec["conclusive"] = v.conclusive;
    rec["uninteresting"] = v.uninteresting;
    rec["original_faulted"] = v.original_faulted;
    rec["detail"] = v.detail;
    rec["taxonomy"] = taxonomy(v, !diags.empty());
    rec["bundle"] = bundle_path.empty() ? nlohmann::json(nullptr) : nlohmann::json(bundle_path);
    rec["wall_time_ms"] = ms;
    records.push_back(rec);

    text << t.id() << ": " << to_string(v.outcome);
    if (v.outcome == Outcome::kInvalid) {
      ++invalid;
      text << " (" << rec["taxonomy"].get<std::string>() << ", trial " << v.trial << ") " << v.detail;
    } else if (v.outcome == Outcome::kValid) {
      ++valid;
      text << " (" << v.conclusive << " trials)";
    } else {
      ++inconclusive;
      text << " (all " << v.uninteresting << " trials faulted in both versions; refine constraints)";
    }
    text << "\n  inputs " << before;
    if (a.mincut) text << " -> " << c.input_volume(binding);
    text << " elements: ";
    auto names = c.input_containers();
    for (std::size_t k = 0; k < names.size(); ++k) text << (k ? ", " : "") << names[k];
    text << "\n";
    if (!bundle_path.empty()) text << "  bundle: " << bundle_path << "\n";
  }
  nlohmann::json report;
  report["report_version"] = kReportVersion;
  report["tool_version"] = std::string(kToolVersion);
  report["program"] = p.name;
  report["seed"] = a.seed;
  report["trials"] = a.trials;
  report["tolerance"] = a.tol;
  report["mode"] = a.mode;
  report["records"] = records;
  report["totals"] = {{"instances", records.size()}, {"invalid", invalid}, {"valid", valid}, {"inconclusive", inconclusive}};
  if (!a.report.empty()) write_file(a.report, report.dump(2) + "\n");
  if (a.json) {
    out << report.dump(2) << "\n";
  } else {
    out << text.str() << records.size() << " instance(s): " << valid << " valid, " << invalid << " invalid, "
        << inconclusive << " inconclusive\n";
  }
  if (invalid) return kExitInvalid;
  return inconclusive ? kExitError : kExitValid;
}

// ---- cutout ---------------------------------------------------------------

struct CutoutArgs {
  std::string program;
  Selection sel;
  std::string out;
  bool mincut = false;
  std::vector<std::string> bind;
  std::string flow_dot;
};

int cmd_cutout(const CutoutArgs& a, std::ostream& out) {
  Program p = load_valid(a.program);
  auto all = instances(p, a.sel);
  const TransformationInstance& t = all.front();
  if (all.size() > 1) out << "using " << t.id() << " (" << all.size() << " sites; pick one with --site)\n";
  Cutout c = extract(p, apply(t, p).changes);
  Binding binding = concretize(p, parse_binding(a.bind));
  if (a.mincut) {
    if (!a.flow_dot.empty() && !c.whole_states) write_file(a.flow_dot, prepare(p, c, binding).dot());
    CutResult cut = minimize_inputs(p, c, binding);
    out << "min cut: flow " << cut.flow << ", input volume " << cut.old_volume << " -> " << cut.new_volume
        << (cut.extended ? " (extended)" : " (original kept)") << "\n";
    c = std::move(cut.cutout);
  }
  std::filesystem::create_directories(a.out);
  save_program(c.program, a.out + "/cutout.cfprog.json");
  write_file(a.out + "/cutout-meta.json", cutout_meta_json(c));
  out << "input symbols:";
  for (const auto& s : c.input_symbols) out << " " << s;
  out << "\ninput configuration:\n" << refs_table(c.input_configuration);
  out << "system state:\n" << refs_table(c.system_state);
  for (const auto& w : c.warnings) out << "warning: " << w << "\n";
  out << "wrote " << a.out << "/cutout.cfprog.json\n";
  return kExitValid;
}

// ---- replay / run / diff / match -----------------------------------------

int cmd_replay(const std::string& dir, bool json, std::ostream& out) {
  ReproducerBundle b = ReproducerBundle::read(dir);
  VerifyResult r = replay(b);
  if (json) {
    out << r.bundle->report();
  } else {
    out << b.transformation << ": " << to_string(r.verdict.outcome);
    if (r.verdict.outcome == Outcome::kInvalid) {
      out << " (" << to_string(r.verdict.cause) << ")\n  " << r.verdict.detail << "\n";
    } else {
      out << "\nwarning: no divergence\n";
    }
  }
  return r.verdict.outcome == Outcome::kInvalid ? kExitInvalid : kExitValid;
}

int cmd_run(const std::string& path, const std::string& input, std::uint64_t budget, std::ostream& out) {
  Program p = load_valid(path);
  ExecutionInput in = load_data(input);
  ExecutionOutcome o = run(p, in, budget);
  out << "status: " << to_string(o.status) << " (" << o.steps << " steps)\n";
  if (o.fault) out << "fault: " << to_string(o.fault->kind) << " at node " << o.fault->node << ": " << o.fault->detail << "\n";
  for (const auto& w : o.warnings) out << "warning: " << w << "\n";
  for (const auto& [name, b] : o.containers) {
    out << name << " [";
    for (std::size_t d = 0; d < b.shape.size(); ++d) out << (d ? ", " : "") << b.shape[d];
    out << "]:";
    for (std::size_t k = 0; k < b.size(); ++k) out << " " << format_value(b, k);
    out << "\n";
  }
  return o.status == Status::kCompleted ? kExitValid : kExitInvalid;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Verify program transformations on extracted cutouts", "cutflow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "fuzz every matching transformation instance");
  verify_cmd->add_option("program", va.program)->required();
  add_selection(verify_cmd, va.sel);
  verify_cmd->add_option("--trials", va.trials)->check(CLI::PositiveNumber);
  verify_cmd->add_option("--tol", va.tol)->check(CLI::NonNegativeNumber);
  verify_cmd->add_option("--seed", va.seed);
  verify_cmd->add_option("--size-max", va.size_max)->check(CLI::PositiveNumber);
  verify_cmd->add_option("--constraints", va.constraints, "JSON file with user constraints");
  verify_cmd->add_flag("--mincut", va.mincut, "minimize cutout inputs first");
  verify_cmd->add_option("--bind", va.bind, "NAME=VALUE for the min-cut concretization (default 64)");
  verify_cmd->add_option("--mode", va.mode, "uniform | coverage");
  verify_cmd->add_option("--out", va.out, "directory for reproducer bundles");
  verify_cmd->add_option("--report", va.report, "write the JSON report here");
  verify_cmd->add_flag("--json", va.json, "print the JSON report instead of text");

  CutoutArgs ca;
  auto* cutout_cmd = app.add_subcommand("cutout", "extract the cutout of one transformation instance");
  cutout_cmd->add_option("program", ca.program)->required();
  add_selection(cutout_cmd, ca.sel);
  cutout_cmd->add_option("--out", ca.out)->required();
  cutout_cmd->add_flag("--mincut", ca.mincut);
  cutout_cmd->add_option("--bind", ca.bind);
  cutout_cmd->add_option("--flow-dot", ca.flow_dot, "write the flow network as DOT");

  std::string bundle_dir;
  bool replay_json = false;
  auto* replay_cmd = app.add_subcommand("replay", "re-execute a reproducer bundle");
  replay_cmd->add_option("bundle", bundle_dir)->required();
  replay_cmd->add_flag("--json", replay_json);

  std::string run_prog, run_input;
  std::uint64_t run_budget = kDefaultBudget;
  auto* run_cmd = app.add_subcommand("run", "execute a program on a .cfdata input");
  run_cmd->add_option("program", run_prog)->required();
  run_cmd->add_option("--input", run_input)->required();
  run_cmd->add_option("--budget", run_budget);

  std::string diff_a, diff_b;
  auto* diff_cmd = app.add_subcommand("diff", "structural difference of two programs");
  diff_cmd->add_option("a", diff_a)->required();
  diff_cmd->add_option("b", diff_b)->required();

  std::string match_prog, match_kind;
  auto* match_cmd = app.add_subcommand("match", "list transformation sites");
  match_cmd->add_option("program", match_prog)->required();
  match_cmd->add_option("--xform", match_kind);

  std::string dot_prog;
  auto* dot_cmd = app.add_subcommand("dot", "Graphviz rendering of a program");
  dot_cmd->add_option("program", dot_prog)->required();

  std::string fixtures_dir;
  auto* export_cmd = app.add_subcommand("export-fixtures", "write the built-in fixtures as .cfprog.json");
  export_cmd->add_option("dir", fixtures_dir)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitValid : kExitError;
  }

  try {
    if (verify_cmd->parsed()) return cmd_verify(va, out);
    if (cutout_cmd->parsed()) return cmd_cutout(ca, out);
    if (replay_cmd->parsed()) return cmd_replay(bundle_dir, replay_json, out);
    if (run_cmd->parsed()) return cmd_run(run_prog, run_input, run_budget, out);
    if (diff_cmd->parsed()) {
      out << diff(load_valid(diff_a), load_valid(diff_b)).str();
      return kExitValid;
    }
    if (match_cmd->parsed()) {
      Program p = load_valid(match_prog);
      std::vector<TransformKind> kinds = builtin_transformations();
      if (!match_kind.empty()) kinds = {transform_kind_from_string(match_kind)};
      for (TransformKind k : kinds) {
        for (const auto& t : match(k, p)) out << t.id() << "\n";
      }
      return kExitValid;
    }
    if (dot_cmd->parsed()) {
      out << to_dot(load_valid(dot_prog));
      return kExitValid;
    }
    if (export_cmd->parsed()) {
      std::filesystem::create_directories(fixtures_dir);
      for (const auto& [name, p] : fixtures::all()) {
        save_program(p, fixtures_dir + "/" + name + ".cfprog.json");
        out << fixtures_dir << "/" << name << ".cfprog.json\n";
      }
      return kExitValid;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace cutflow
