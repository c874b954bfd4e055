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

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cutflow/cutout.hpp"
#include "cutflow/interp.hpp"
#include "cutflow/xform.hpp"

namespace cutflow {

inline constexpr std::string_view kToolVersion = "cutflow 0.1.0";
inline constexpr int kReportVersion = 1;

enum class Provenance { kIndexUse, kLoopBound, kSizeSymbol, kUserProvided, kDefault };
std::string_view to_string(Provenance p);

/// Inclusive bounds; the effective interval is [max(lower), min(upper)]
/// restricted to multiples of `multiple_of`. Bounds may mention symbols
/// sampled earlier.
struct SymbolConstraint {
  std::string name;
  std::vector<SymExpr> lower;
  std::vector<SymExpr> upper;
  std::int64_t multiple_of = 1;
  bool size = false;
  std::set<Provenance> provenance;
};

struct ValueRange {
  double lo = -1;
  double hi = 1;
};

struct ConstraintSet {
  std::vector<SymbolConstraint> symbols;  // sampling order
  std::map<std::string, ValueRange> value_ranges;
  ValueRange float_range{-1, 1};
  ValueRange int_range{-100, 100};
  bool allow_nan_inf = false;
  std::int64_t size_max = 64;

  const SymbolConstraint* find(const std::string& name) const;
  ValueRange range_of(const std::string& container, DType dtype) const;
  /// Concrete interval under the already bound symbols; nullopt if empty.
  /// Throws kUnboundSymbol.
  std::optional<std::pair<std::int64_t, std::int64_t>> resolve(const SymbolConstraint& s, const Binding& b) const;
  /// Symbol values and buffer contents lie inside the constraints.
  bool satisfies(const Program& cutout, const ExecutionInput& in) const;
};

/// User constraints, e.g. from a JSON file:
/// {"symbols": {"N": {"min": 4, "max": 16, "multiple_of": 4}},
///  "float_range": [-1, 1], "int_range": [-100, 100], "size_max": 16,
///  "values": {"x": [-2, 2]}}
struct UserConstraints {
  struct Bound {
    std::optional<std::int64_t> min, max;
    std::int64_t multiple_of = 1;
  };
  std::map<std::string, Bound> symbols;
  std::optional<ValueRange> float_range, int_range;
  std::map<std::string, ValueRange> values;
  std::optional<std::int64_t> size_max;

  static UserConstraints parse_json(std::string_view text);  // throws kMalformedDocument
};

/// Throws kEmptyInterval when constant bounds contradict.
ConstraintSet derive_constraints(const Program& p, const Cutout& c, const UserConstraints& user = {},
                                 std::int64_t size_max = 64);
/// Constraints for a standalone program: every free symbol is either a size
/// or an index symbol of `prog` itself.
ConstraintSet derive_constraints(const Program& prog, const UserConstraints& user = {}, std::int64_t size_max = 64);

/// Deterministic in (seed, trial). Throws kEmptyInterval if no symbol
/// assignment fits after repeated draws.
ExecutionInput sample(const ConstraintSet& cs, const Program& cutout, std::uint64_t seed, std::uint64_t trial);
ExecutionInput sample(const ConstraintSet& cs, const Program& cutout, std::mt19937_64& rng);
/// One random edit of `in` that stays inside `cs`.
ExecutionInput mutate(const ConstraintSet& cs, const Program& cutout, const ExecutionInput& in, std::mt19937_64& rng);

enum class Mode { kUniform, kCoverage };
std::string_view to_string(Mode m);

struct TrialConfig {
  std::int64_t trials = 100;
  double tol = 1e-5;
  std::uint64_t seed = 1;
  std::uint64_t budget_multiplier = 64;  // transformed budget, relative to the original's steps
  Mode mode = Mode::kUniform;
  double p_fresh = 0.25;
  int workers = 1;
};

enum class Outcome { kValid, kInvalid, kInconclusive };
enum class Cause { kNone, kStateDiffers, kCrashOnlyTransformed, kHangOnlyTransformed };
std::string_view to_string(Outcome o);
std::string_view to_string(Cause c);

struct Verdict {
  Outcome outcome = Outcome::kInconclusive;
  Cause cause = Cause::kNone;
  std::int64_t trial = -1;  // failing trial index
  bool original_faulted = false;  // the original faulted while the transformed one completed
  std::int64_t trials_run = 0;
  std::int64_t conclusive = 0;  // including the failing trial
  std::int64_t uninteresting = 0;
  std::size_t coverage = 0;  // distinct coverage features of the original
  std::size_t corpus = 0;
  Comparison comparison;
  std::string detail;
};

struct ReproducerBundle {
  Program original;
  Program transformed;
  ExecutionInput input;
  ExecutionOutcome original_outcome;
  ExecutionOutcome transformed_outcome;
  Verdict verdict;
  std::vector<std::string> system_state;
  std::string transformation;
  double tol = 1e-5;
  std::uint64_t seed = 0;
  std::uint64_t original_budget = kDefaultBudget;
  std::uint64_t transformed_budget = kDefaultBudget;
  std::string tool_version = std::string(kToolVersion);

  /// Deterministic report.json text: no timestamps, no paths.
  std::string report() const;
  void write(const std::string& dir) const;
  /// Throws kMalformedDocument / kIo on incomplete or corrupt bundles.
  static ReproducerBundle read(const std::string& dir);
};

struct VerifyResult {
  Verdict verdict;
  std::optional<ReproducerBundle> bundle;
};

/// Differential trials of `original` vs `transformed` on inputs from `cs`,
/// comparing `system_state`.
VerifyResult verify_pair(const Program& original, const Program& transformed,
                         const std::vector<std::string>& system_state, const ConstraintSet& cs,
                         const TrialConfig& cfg);

/// Applies `t` inside the cutout and verifies the pair. Throws
/// kTransformationInapplicable when `t` does not apply to the cutout.
VerifyResult verify(const Cutout& c, const TransformationInstance& t, const ConstraintSet& cs, const TrialConfig& cfg);

/// Runs both stored programs on the stored input once.
VerifyResult replay(const ReproducerBundle& b);

}  // namespace cutflow
