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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cutflow/ir.hpp"

namespace cutflow {

/// Flat row-major storage for one container. Floating types live in `f`
/// (f32 values are kept rounded to float), all others in `i` (bool as 0/1).
struct Buffer {
  DType dtype = DType::kF64;
  std::vector<std::int64_t> shape;
  std::vector<double> f;
  std::vector<std::int64_t> i;

  static Buffer zeros(DType dtype, std::vector<std::int64_t> shape);
  std::size_t size() const { return is_float(dtype) ? f.size() : i.size(); }
  double as_double(std::size_t k) const { return is_float(dtype) ? f[k] : static_cast<double>(i[k]); }
  friend bool operator==(const Buffer&, const Buffer&) = default;
};

struct ExecutionInput {
  Binding symbols;
  std::map<std::string, Buffer> data;
};

enum class Status { kCompleted, kFault, kTimeout };
enum class FaultKind {
  kOutOfBounds,
  kUnboundSymbol,
  kDivisionByZero,
  kWriteConflict,
  kInvalidRange,
  kNonScalarAccess,
  kTypeError,
};
std::string_view to_string(Status s);
std::string_view to_string(FaultKind k);

struct Fault {
  FaultKind kind = FaultKind::kOutOfBounds;
  NodeId node = kNoNode;  // offending node, or the state for interstate faults
  std::string detail;
};

struct Coverage {
  std::set<std::size_t> interstate_edges;
  // (tasklet, select ordinal within the tasklet, branch taken)
  std::set<std::tuple<NodeId, std::uint32_t, bool>> branches;

  /// Stable 64-bit feature ids for corpus bookkeeping.
  std::vector<std::uint64_t> features() const;
};

struct ExecutionOutcome {
  Status status = Status::kCompleted;
  std::optional<Fault> fault;
  std::map<std::string, Buffer> containers;  // non-transient, final contents
  Coverage coverage;
  std::uint64_t steps = 0;
  std::vector<std::string> warnings;
};

/// Read-only view of memory passed to hooks.
class MemoryView {
 public:
  virtual ~MemoryView() = default;
  virtual const Buffer& buffer(const std::string& container) const = 0;
  /// Currently bound symbols.
  virtual Binding symbols() const = 0;
};

struct Hooks {
  std::function<void(StateId, const MemoryView&)> on_state;
  std::function<void(NodeId, const MemoryView&)> before_tasklet;
};

inline constexpr std::uint64_t kDefaultBudget = 10'000'000;

/// Compiled form of a program. Construction precomputes execution order and
/// expression bytecode; run() is const and may be called concurrently.
class Interpreter {
 public:
  explicit Interpreter(const Program& p);
  ~Interpreter();
  Interpreter(Interpreter&&) noexcept;
  Interpreter& operator=(Interpreter&&) noexcept;

  /// Throws Error(kInputShapeMismatch) before execution if an input buffer
  /// disagrees with its descriptor or a shape symbol is unbound.
  ExecutionOutcome run(const ExecutionInput& in, std::uint64_t budget = kDefaultBudget,
                       const Hooks* hooks = nullptr) const;

  /// Evaluated shapes of every container under a binding.
  std::map<std::string, std::vector<std::int64_t>> shapes(const Binding& symbols) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ExecutionOutcome run(const Program& p, const ExecutionInput& in, std::uint64_t budget = kDefaultBudget);

struct Comparison {
  enum class Kind { kEqual, kDiffers, kStatusMismatch } kind = Kind::kEqual;
  std::string container;
  std::size_t index = 0;
  double a_value = 0;
  double b_value = 0;
  std::string str() const;
};

/// Elementwise comparison of the listed containers. Floats differ when
/// |x - y| > tol * (1 + max(|x|, |y|)) or exactly one is NaN; tol == 0 means
/// bitwise. Integers and bools are always bitwise. Throws kUnknownContainer.
Comparison compare_states(const ExecutionOutcome& a, const ExecutionOutcome& b,
                          const std::vector<std::string>& containers, double tol);

}  // namespace cutflow
