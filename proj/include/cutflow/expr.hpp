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
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cutflow {

/// Scalar expression tree used for tasklet code and interstate guards.
///
/// The same textual grammar is shared with SymExpr (which accepts only the
/// integer subset). Grammar, lowest to highest precedence:
///
///   or      := and ('||' and)*
///   and     := eq ('&&' eq)*
///   eq      := rel (('==' | '!=') rel)*
///   rel     := add (('<' | '<=' | '>' | '>=') add)*
///   add     := mul (('+' | '-') mul)*
///   mul     := unary (('*' | '/' | '//' | '%') unary)*
///   unary   := ('-' | '!') unary | primary
///   primary := INT | FLOAT | NAME | NAME '(' args ')' | '(' or ')'
///
/// Negated literals are folded, so `-3` is a single integer literal.
class ScalarExpr {
 public:
  enum class Kind { kInt, kFloat, kName, kUnary, kBinary, kCall };
  enum class Op {
    kNone,
    kNeg,
    kNot,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kFloorDiv,
    kMod,
    kLt,
    kLe,
    kGt,
    kGe,
    kEq,
    kNe,
    kAnd,
    kOr,
  };

  ScalarExpr() = default;

  static ScalarExpr integer(std::int64_t value);
  static ScalarExpr real(double value);
  static ScalarExpr name(std::string name);
  static ScalarExpr unary(Op op, ScalarExpr operand);
  static ScalarExpr binary(Op op, ScalarExpr lhs, ScalarExpr rhs);
  static ScalarExpr call(std::string function, std::vector<ScalarExpr> args);

  static ScalarExpr parse(std::string_view text);

  bool is_null() const { return node_ == nullptr; }
  Kind kind() const;
  Op op() const;
  std::int64_t int_value() const;
  double float_value() const;
  // Identifier for kName, function name for kCall.
  const std::string& identifier() const;
  const std::vector<ScalarExpr>& children() const;

  std::string str() const;

  ScalarExpr substitute(const std::map<std::string, ScalarExpr>& repl) const;
  ScalarExpr rename(const std::map<std::string, std::string>& names) const;
  void collect_names(std::set<std::string>& out) const;
  std::set<std::string> names() const;

  friend bool operator==(const ScalarExpr& a, const ScalarExpr& b);
  friend bool operator!=(const ScalarExpr& a, const ScalarExpr& b) { return !(a == b); }

 private:
  struct Node;
  explicit ScalarExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

int precedence(ScalarExpr::Op op);
std::string_view op_token(ScalarExpr::Op op);

}  // namespace cutflow
