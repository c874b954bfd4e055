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
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cutflow {

using Binding = std::map<std::string, std::int64_t>;

/// Immutable integer expression over constants and named symbols.
///
/// Operators are limited to +, -, *, floor division, modulo, min and max.
/// Floor division and modulo round toward negative infinity, so
/// `a == b * (a // b) + a % b` holds for every nonzero b.
class SymExpr {
 public:
  enum class Op { kConst, kSym, kAdd, kSub, kMul, kFloorDiv, kMod, kMin, kMax };

  SymExpr() : SymExpr(std::int64_t{0}) {}
  SymExpr(std::int64_t value);  // NOLINT(google-explicit-constructor)
  SymExpr(int value) : SymExpr(static_cast<std::int64_t>(value)) {}  // NOLINT

  static SymExpr sym(std::string name);
  static SymExpr make(Op op, SymExpr lhs, SymExpr rhs);
  static SymExpr parse(std::string_view text);

  Op op() const;
  bool is_const() const { return op() == Op::kConst; }
  bool is_sym() const { return op() == Op::kSym; }
  std::optional<std::int64_t> as_const() const;
  std::int64_t value() const;
  const std::string& name() const;
  const SymExpr& lhs() const;
  const SymExpr& rhs() const;

  /// Throws Error(kUnboundSymbol) or Error(kDivisionByZero).
  std::int64_t eval(const Binding& binding) const;

  /// Canonical form: affine parts are collected into a sorted linear
  /// combination, constant subterms are folded, and min/max whose operands
  /// differ by a constant are resolved. eval(simplify(e)) == eval(e).
  SymExpr simplify() const;
  SymExpr substitute(const std::map<std::string, SymExpr>& repl) const;

  void collect_symbols(std::set<std::string>& out) const;
  std::set<std::string> symbols() const;
  bool depends_on(const std::string& symbol) const;

  std::string str() const;

  friend bool operator==(const SymExpr& a, const SymExpr& b);
  friend bool operator!=(const SymExpr& a, const SymExpr& b) { return !(a == b); }
  // Structural ordering, used only to keep canonical forms deterministic.
  friend bool operator<(const SymExpr& a, const SymExpr& b) { return a.str() < b.str(); }

 private:
  struct Node;
  explicit SymExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

SymExpr operator+(const SymExpr& a, const SymExpr& b);
SymExpr operator-(const SymExpr& a, const SymExpr& b);
SymExpr operator*(const SymExpr& a, const SymExpr& b);
SymExpr floordiv(const SymExpr& a, const SymExpr& b);
SymExpr mod(const SymExpr& a, const SymExpr& b);
SymExpr min(const SymExpr& a, const SymExpr& b);
SymExpr max(const SymExpr& a, const SymExpr& b);

std::int64_t floordiv(std::int64_t a, std::int64_t b);
std::int64_t floormod(std::int64_t a, std::int64_t b);

/// Linear view of an expression: sum(coefficient * atom) + constant.
/// Atoms are symbols or non-affine subterms keyed by their printed form.
struct Affine {
  std::map<std::string, std::pair<SymExpr, std::int64_t>> terms;
  std::int64_t constant = 0;

  static Affine of(const SymExpr& e);
  SymExpr to_expr() const;
  std::int64_t coefficient(const std::string& atom) const;
  bool is_constant() const { return terms.empty(); }
};

/// Closed integer interval; nullopt bounds are unbounded.
struct Interval {
  std::optional<std::int64_t> lo;
  std::optional<std::int64_t> hi;
};

/// Symbol assumptions for conservative reasoning. Symbols without an entry
/// get [default_lower, +inf), which models "every size is at least one".
struct Assumptions {
  std::map<std::string, Interval> bounds;
  std::optional<std::int64_t> default_lower = 1;

  Interval of(const std::string& symbol) const;
};

Interval bounds(const SymExpr& e, const Assumptions& assumptions);
/// True only if a <= b under every binding admitted by the assumptions.
bool provably_le(const SymExpr& a, const SymExpr& b, const Assumptions& assumptions);
bool provably_equal(const SymExpr& a, const SymExpr& b);

/// One dimension of an access: begin (inclusive), end (exclusive), step.
struct Range {
  SymExpr begin;
  SymExpr end;
  SymExpr step = SymExpr(1);

  static Range index(const SymExpr& i) { return {i, (i + SymExpr(1)).simplify(), SymExpr(1)}; }
  std::string str() const;
  friend bool operator==(const Range&, const Range&) = default;
};

class SubsetRange {
 public:
  SubsetRange() = default;
  explicit SubsetRange(std::vector<Range> dims) : dims_(std::move(dims)) {}

  /// Whole container `[0:s0, 0:s1, ...]`.
  static SubsetRange full(const std::vector<SymExpr>& shape);
  /// Single element `[i0, i1, ...]`.
  static SubsetRange element(const std::vector<SymExpr>& indices);
  /// Text form: comma separated `begin:end[:step]` or a bare index.
  static SubsetRange parse(std::string_view text);

  std::size_t rank() const { return dims_.size(); }
  const std::vector<Range>& dims() const { return dims_; }
  std::vector<Range>& dims() { return dims_; }

  /// Number of addressed elements. Throws kNegativeExtent, kInvalidStep,
  /// kUnboundSymbol.
  std::int64_t volume(const Binding& binding) const;
  std::set<std::string> symbols() const;
  SubsetRange substitute(const std::map<std::string, SymExpr>& repl) const;
  SubsetRange simplify() const;
  /// Subtracts a per-dimension origin from begin and end.
  SubsetRange offset_by(const std::vector<SymExpr>& origin) const;

  std::string str() const;
  friend bool operator==(const SubsetRange&, const SubsetRange&) = default;

 private:
  std::vector<Range> dims_;
};

enum class Overlap { kDisjoint, kMayOverlap };

/// Sound disjointness test: kDisjoint only if no admissible binding makes the
/// two ranges share an index. Throws kRankMismatch.
Overlap disjoint(const SubsetRange& a, const SubsetRange& b, const Assumptions& assumptions = {});

}  // namespace cutflow
