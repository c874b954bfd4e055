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

#include "cutflow/fuzz.hpp"

#include <algorithm>
#include <filesystem>
#include <thread>

#include "cutflow/cfdata.hpp"
#include "cutflow/error.hpp"
#include "cutflow/ir_io.hpp"
#include "json.hpp"

namespace cutflow {

std::string_view to_string(Mode m) { return m == Mode::kUniform ? "uniform" : "coverage"; }

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::kValid: return "Valid";
    case Outcome::kInvalid: return "Invalid";
    case Outcome::kInconclusive: return "Inconclusive";
  }
  return "?";
}

std::string_view to_string(Cause c) {
  switch (c) {
    case Cause::kNone: return "None";
    case Cause::kStateDiffers: return "StateDiffers";
    case Cause::kCrashOnlyTransformed: return "CrashOnlyTransformed";
    case Cause::kHangOnlyTransformed: return "HangOnlyTransformed";
  }
  return "?";
}

namespace {

constexpr std::uint64_t kMinTransformedBudget = 100'000;

enum class TrialKind { kPass, kUninteresting, kFail };

struct Trial {
  TrialKind kind = TrialKind::kPass;
  Cause cause = Cause::kNone;
  bool original_faulted = false;
  Comparison comparison;
  ExecutionInput input;
  ExecutionOutcome a, b;
  std::uint64_t budget_b = 0;
};

std::uint64_t transformed_budget(const ExecutionOutcome& a, std::uint64_t multiplier) {
  std::uint64_t steps = std::max<std::uint64_t>(a.steps, 1);
  std::uint64_t limit = kDefaultBudget * multiplier;
  std::uint64_t want = steps > limit / multiplier ? limit : steps * multiplier;
  return std::max(want, kMinTransformedBudget);
}

void classify(Trial& t, const std::vector<std::string>& state, double tol) {
  if (t.a.status != Status::kCompleted) {
    if (t.a.status == Status::kFault && t.b.status == Status::kCompleted) {
      // The transformation removed a fault: still a change in behaviour.
      t.kind = TrialKind::kFail;
      t.cause = Cause::kStateDiffers;
      t.original_faulted = true;
      t.comparison.kind = Comparison::Kind::kStatusMismatch;
    } else {
      t.kind = TrialKind::kUninteresting;
    }
    return;
  }
  if (t.b.status == Status::kFault) {
    t.kind = TrialKind::kFail;
    t.cause = Cause::kCrashOnlyTransformed;
    t.comparison.kind = Comparison::Kind::kStatusMismatch;
  } else if (t.b.status == Status::kTimeout) {
    t.kind = TrialKind::kFail;
    t.cause = Cause::kHangOnlyTransformed;
    t.comparison.kind = Comparison::Kind::kStatusMismatch;
  } else {
    t.comparison = compare_states(t.a, t.b, state, tol);
    if (t.comparison.kind != Comparison::Kind::kEqual) {
      t.kind = TrialKind::kFail;
      t.cause = Cause::kStateDiffers;
    }
  }
}

struct Runner {
  Interpreter a, b;
  const std::vector<std::string>& state;
  const TrialConfig& cfg;

  Trial run(ExecutionInput in) const {
    Trial t;
    t.a = a.run(in, kDefaultBudget);
    if (t.a.status == Status::kTimeout) {
      t.kind = TrialKind::kUninteresting;
      t.input = std::move(in);
      return t;
    }
    t.budget_b = transformed_budget(t.a, cfg.budget_multiplier);
    t.b = b.run(in, t.budget_b);
    t.input = std::move(in);
    classify(t, state, cfg.tol);
    return t;
  }
};

std::string describe(const Trial& t) {
  auto fault = [](const ExecutionOutcome& o) {
    if (o.status == Status::kTimeout) return std::string("timeout after ") + std::to_string(o.steps) + " steps";
    if (!o.fault) return std::string(to_string(o.status));
    return std::string(to_string(o.fault->kind)) + " at node " + std::to_string(o.fault->node) + ": " + o.fault->detail;
  };
  switch (t.cause) {
    case Cause::kCrashOnlyTransformed:
    case Cause::kHangOnlyTransformed: return "transformed: " + fault(t.b);
    case Cause::kStateDiffers:
      if (t.original_faulted) return "original: " + fault(t.a) + "; transformed completed";
      return t.comparison.str();
    case Cause::kNone: break;
  }
  return {};
}

std::set<std::uint64_t> features_of(const ExecutionOutcome& o) {
  auto f = o.coverage.features();
  return {f.begin(), f.end()};
}

}  // namespace

VerifyResult verify_pair(const Program& original, const Program& transformed,
                         const std::vector<std::string>& system_state, const ConstraintSet& cs,
                         const TrialConfig& cfg) {
  if (cfg.trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  if (cfg.tol < 0) throw Error(ErrorCode::kInvalidArgument, "tolerance must be >= 0");
  Runner runner{Interpreter(original), Interpreter(transformed), system_state, cfg};
  VerifyResult result;
  Verdict& v = result.verdict;
  std::set<std::uint64_t> seen;
  std::vector<ExecutionInput> corpus;

  auto account = [&](std::int64_t index, Trial& t) {
    ++v.trials_run;
    if (t.a.status == Status::kCompleted || t.a.status == Status::kFault) {
      for (auto f : features_of(t.a)) seen.insert(f);
    }
    if (t.kind == TrialKind::kUninteresting) {
      ++v.uninteresting;
      return false;
    }
    ++v.conclusive;
    if (t.kind == TrialKind::kPass) return false;
    v.outcome = Outcome::kInvalid;
    v.cause = t.cause;
    v.trial = index;
    v.original_faulted = t.original_faulted;
    v.comparison = t.comparison;
    v.detail = describe(t);
    ReproducerBundle b;
    b.original = original;
    b.transformed = transformed;
    b.input = std::move(t.input);
    b.original_outcome = std::move(t.a);
    b.transformed_outcome = std::move(t.b);
    b.system_state = system_state;
    b.tol = cfg.tol;
    b.seed = cfg.seed;
    b.original_budget = kDefaultBudget;
    b.transformed_budget = t.budget_b;
    result.bundle = std::move(b);
    return true;
  };

  bool done = false;
  if (cfg.mode == Mode::kUniform) {
    const std::int64_t workers = std::max(1, cfg.workers);
    for (std::int64_t base = 0; base < cfg.trials && !done; base += workers) {
      std::int64_t n = std::min(workers, cfg.trials - base);
      std::vector<Trial> batch(static_cast<std::size_t>(n));
      std::vector<ExecutionInput> inputs;
      for (std::int64_t k = 0; k < n; ++k) inputs.push_back(sample(cs, original, cfg.seed, static_cast<std::uint64_t>(base + k)));
      auto work = [&](std::int64_t k) {
        batch[static_cast<std::size_t>(k)] = runner.run(std::move(inputs[static_cast<std::size_t>(k)]));
      };
      if (n == 1) {
        work(0);
      } else {
        std::vector<std::thread> pool;
        for (std::int64_t k = 0; k < n; ++k) pool.emplace_back(work, k);
        for (auto& th : pool) th.join();
      }
      // Lowest failing index wins regardless of completion order.
      for (std::int64_t k = 0; k < n && !done; ++k) done = account(base + k, batch[static_cast<std::size_t>(k)]);
    }
  } else {
    for (std::int64_t k = 0; k < cfg.trials && !done; ++k) {
      std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                        static_cast<std::uint32_t>(k), 0x636f76u};
      std::mt19937_64 rng(seq);
      bool fresh = corpus.empty() || std::bernoulli_distribution(cfg.p_fresh)(rng);
      ExecutionInput in = fresh ? sample(cs, original, rng)
                                : mutate(cs, original, corpus[std::uniform_int_distribution<std::size_t>(0, corpus.size() - 1)(rng)], rng);
      Trial t = runner.run(in);
      bool novel = false;
      for (auto f : features_of(t.a)) novel |= !seen.count(f);
      if (novel || corpus.empty()) corpus.push_back(in);
      done = account(k, t);
    }
  }
  v.coverage = seen.size();
  v.corpus = corpus.size();
  if (!done) v.outcome = v.conclusive > 0 ? Outcome::kValid : Outcome::kInconclusive;
  if (result.bundle) result.bundle->verdict = v;
  return result;
}

VerifyResult verify(const Cutout& c, const TransformationInstance& t, const ConstraintSet& cs, const TrialConfig& cfg) {
  Program transformed;
  try {
    transformed = apply(t, c.program).program;
  } catch (const Error& e) {
    throw Error(ErrorCode::kTransformationInapplicable, t.id() + " on the cutout: " + e.what());
  }
  VerifyResult r = verify_pair(c.program, transformed, c.system_state_containers(), cs, cfg);
  if (r.bundle) r.bundle->transformation = t.id();
  return r;
}

// ---- bundles ----------------------------------------------------------------

namespace {

nlohmann::json outcome_json(const ExecutionOutcome& o) {
  nlohmann::json j;
  j["status"] = std::string(to_string(o.status));
  j["steps"] = o.steps;
  if (o.fault) {
    j["fault"] = {{"kind", std::string(to_string(o.fault->kind))}, {"node", o.fault->node}, {"detail", o.fault->detail}};
  } else {
    j["fault"] = nullptr;
  }
  return j;
}

Status status_from(const std::string& s);
template <typename E, std::size_t N>
E enum_from(const std::string& s, const E (&all)[N]);

ExecutionOutcome outcome_from(const nlohmann::json& j) {
  ExecutionOutcome o;
  o.status = status_from(j.at("status").get<std::string>());
  o.steps = j.at("steps").get<std::uint64_t>();
  if (!j.at("fault").is_null()) {
    static const FaultKind kinds[] = {FaultKind::kOutOfBounds,     FaultKind::kUnboundSymbol, FaultKind::kDivisionByZero,
                                      FaultKind::kWriteConflict,   FaultKind::kInvalidRange,  FaultKind::kNonScalarAccess,
                                      FaultKind::kTypeError};
    const auto& f = j.at("fault");
    o.fault = Fault{enum_from(f.at("kind").get<std::string>(), kinds), f.at("node").get<NodeId>(),
                    f.at("detail").get<std::string>()};
  }
  return o;
}

Status status_from(const std::string& s) {
  for (Status st : {Status::kCompleted, Status::kFault, Status::kTimeout}) {
    if (to_string(st) == s) return st;
  }
  throw Error(ErrorCode::kMalformedDocument, "unknown status '" + s + "'");
}

template <typename E, std::size_t N>
E enum_from(const std::string& s, const E (&all)[N]) {
  for (E e : all) {
    if (to_string(e) == s) return e;
  }
  throw Error(ErrorCode::kMalformedDocument, "unknown value '" + s + "'");
}

}  // namespace

std::string ReproducerBundle::report() const {
  nlohmann::json j;
  j["report_version"] = kReportVersion;
  j["tool_version"] = tool_version;
  j["transformation"] = transformation;
  j["seed"] = seed;
  j["tolerance"] = tol;
  j["system_state"] = system_state;
  j["budgets"] = {{"original", original_budget}, {"transformed", transformed_budget}};
  nlohmann::json vj;
  vj["outcome"] = std::string(to_string(verdict.outcome));
  vj["cause"] = std::string(to_string(verdict.cause));
  vj["trial"] = verdict.trial;
  vj["original_faulted"] = verdict.original_faulted;
  vj["trials_run"] = verdict.trials_run;
  vj["conclusive"] = verdict.conclusive;
  vj["uninteresting"] = verdict.uninteresting;
  vj["detail"] = verdict.detail;
  const Comparison& c = verdict.comparison;
  if (c.kind == Comparison::Kind::kDiffers) {
    vj["first_difference"] = {{"container", c.container}, {"index", c.index}, {"original", c.a_value},
                              {"transformed", c.b_value}};
  } else {
    vj["first_difference"] = nullptr;
  }
  j["verdict"] = vj;
  j["original"] = outcome_json(original_outcome);
  j["transformed"] = outcome_json(transformed_outcome);
  j["symbols"] = input.symbols;
  return j.dump(2) + "\n";
}

void ReproducerBundle::write(const std::string& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
  save_program(original, dir + "/original.cfprog.json");
  save_program(transformed, dir + "/transformed.cfprog.json");
  save_data(input, dir + "/input.cfdata");
  write_file(dir + "/report.json", report());
}

ReproducerBundle ReproducerBundle::read(const std::string& dir) {
  ReproducerBundle b;
  b.original = load_program(dir + "/original.cfprog.json");
  b.transformed = load_program(dir + "/transformed.cfprog.json");
  b.input = load_data(dir + "/input.cfdata");
  try {
    auto j = nlohmann::json::parse(read_file(dir + "/report.json"));
    if (j.at("report_version").get<int>() != kReportVersion) {
      throw Error(ErrorCode::kUnknownVersion, "report_version " + j.at("report_version").dump());
    }
    b.tool_version = j.at("tool_version").get<std::string>();
    b.transformation = j.at("transformation").get<std::string>();
    b.seed = j.at("seed").get<std::uint64_t>();
    b.tol = j.at("tolerance").get<double>();
    b.system_state = j.at("system_state").get<std::vector<std::string>>();
    b.original_budget = j.at("budgets").at("original").get<std::uint64_t>();
    b.transformed_budget = j.at("budgets").at("transformed").get<std::uint64_t>();
    const auto& vj = j.at("verdict");
    static const Outcome outcomes[] = {Outcome::kValid, Outcome::kInvalid, Outcome::kInconclusive};
    static const Cause causes[] = {Cause::kNone, Cause::kStateDiffers, Cause::kCrashOnlyTransformed,
                                   Cause::kHangOnlyTransformed};
    b.verdict.outcome = enum_from(vj.at("outcome").get<std::string>(), outcomes);
    b.verdict.cause = enum_from(vj.at("cause").get<std::string>(), causes);
    b.verdict.trial = vj.at("trial").get<std::int64_t>();
    b.verdict.original_faulted = vj.at("original_faulted").get<bool>();
    b.verdict.trials_run = vj.at("trials_run").get<std::int64_t>();
    b.verdict.conclusive = vj.at("conclusive").get<std::int64_t>();
    b.verdict.uninteresting = vj.at("uninteresting").get<std::int64_t>();
    b.verdict.detail = vj.at("detail").get<std::string>();
    b.original_outcome = outcome_from(j.at("original"));
    b.transformed_outcome = outcome_from(j.at("transformed"));
    if (!vj.at("first_difference").is_null()) {
      const auto& d = vj.at("first_difference");
      b.verdict.comparison = Comparison{Comparison::Kind::kDiffers, d.at("container").get<std::string>(),
                                        d.at("index").get<std::size_t>(), d.at("original").get<double>(),
                                        d.at("transformed").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, std::string("report.json: ") + e.what());
  }
  for (const auto& name : b.system_state) {
    if (!b.original.containers.count(name) || !b.transformed.containers.count(name)) {
      throw Error(ErrorCode::kMalformedDocument, "system state container '" + name + "' missing from a program");
    }
  }
  return b;
}

VerifyResult replay(const ReproducerBundle& bundle) {
  Trial t;
  t.a = Interpreter(bundle.original).run(bundle.input, bundle.original_budget);
  t.b = Interpreter(bundle.transformed).run(bundle.input, bundle.transformed_budget);
  if (t.a.status == Status::kTimeout) {
    t.kind = TrialKind::kUninteresting;
  } else {
    classify(t, bundle.system_state, bundle.tol);
  }
  VerifyResult r;
  Verdict& v = r.verdict;
  v.trials_run = 1;
  v.trial = bundle.verdict.trial;
  if (t.kind == TrialKind::kUninteresting) {
    v.outcome = Outcome::kInconclusive;
    v.uninteresting = 1;
  } else {
    v.conclusive = 1;
    v.outcome = t.kind == TrialKind::kFail ? Outcome::kInvalid : Outcome::kValid;
    v.cause = t.cause;
    v.original_faulted = t.original_faulted;
    v.comparison = t.comparison;
    v.detail = describe(t);
  }
  ReproducerBundle out = bundle;
  out.original_outcome = std::move(t.a);
  out.transformed_outcome = std::move(t.b);
  out.verdict = v;
  r.bundle = std::move(out);
  return r;
}

}  // namespace cutflow
