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

#include "cutflow/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "cutflow/error.hpp"

namespace cutflow {

struct ScalarExpr::Node {
  Kind kind;
  Op op = Op::kNone;
  std::int64_t ival = 0;
  double fval = 0.0;
  std::string ident;
  std::vector<ScalarExpr> kids;
};

ScalarExpr ScalarExpr::integer(std::int64_t value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kInt;
  n->ival = value;
  return ScalarExpr(std::move(n));
}

ScalarExpr ScalarExpr::real(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kFloat;
  n->fval = value;
  return ScalarExpr(std::move(n));
}

ScalarExpr ScalarExpr::name(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kName;
  n->ident = std::move(name);
  return ScalarExpr(std::move(n));
}

ScalarExpr ScalarExpr::unary(Op op, ScalarExpr operand) {
  if (op == Op::kNeg && operand.kind() == Kind::kInt) {
    return integer(static_cast<std::int64_t>(0ULL - static_cast<std::uint64_t>(operand.int_value())));
  }
  if (op == Op::kNeg && operand.kind() == Kind::kFloat) return real(-operand.float_value());
  auto n = std::make_shared<Node>();
  n->kind = Kind::kUnary;
  n->op = op;
  n->kids.push_back(std::move(operand));
  return ScalarExpr(std::move(n));
}

ScalarExpr ScalarExpr::binary(Op op, ScalarExpr lhs, ScalarExpr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kBinary;
  n->op = op;
  n->kids.push_back(std::move(lhs));
  n->kids.push_back(std::move(rhs));
  return ScalarExpr(std::move(n));
}

ScalarExpr ScalarExpr::call(std::string function, std::vector<ScalarExpr> args) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kCall;
  n->ident = std::move(function);
  n->kids = std::move(args);
  return ScalarExpr(std::move(n));
}

ScalarExpr::Kind ScalarExpr::kind() const { return node_->kind; }
ScalarExpr::Op ScalarExpr::op() const { return node_->op; }
std::int64_t ScalarExpr::int_value() const { return node_->ival; }
double ScalarExpr::float_value() const { return node_->fval; }
const std::string& ScalarExpr::identifier() const { return node_->ident; }
const std::vector<ScalarExpr>& ScalarExpr::children() const { return node_->kids; }

int precedence(ScalarExpr::Op op) {
  using Op = ScalarExpr::Op;
  switch (op) {
    case Op::kOr: return 1;
    case Op::kAnd: return 2;
    case Op::kEq:
    case Op::kNe: return 3;
    case Op::kLt:
    case Op::kLe:
    case Op::kGt:
    case Op::kGe: return 4;
    case Op::kAdd:
    case Op::kSub: return 5;
    case Op::kMul:
    case Op::kDiv:
    case Op::kFloorDiv:
    case Op::kMod: return 6;
    case Op::kNeg:
    case Op::kNot: return 7;
    case Op::kNone: break;
  }
  return 8;
}

std::string_view op_token(ScalarExpr::Op op) {
  using Op = ScalarExpr::Op;
  switch (op) {
    case Op::kNeg: return "-";
    case Op::kNot: return "!";
    case Op::kAdd: return "+";
    case Op::kSub: return "-";
    case Op::kMul: return "*";
    case Op::kDiv: return "/";
    case Op::kFloorDiv: return "//";
    case Op::kMod: return "%";
    case Op::kLt: return "<";
    case Op::kLe: return "<=";
    case Op::kGt: return ">";
    case Op::kGe: return ">=";
    case Op::kEq: return "==";
    case Op::kNe: return "!=";
    case Op::kAnd: return "&&";
    case Op::kOr: return "||";
    case Op::kNone: break;
  }
  return "?";
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

int expr_prec(const ScalarExpr& e) {
  if (e.kind() == ScalarExpr::Kind::kBinary || e.kind() == ScalarExpr::Kind::kUnary) {
    return precedence(e.op());
  }
  return 9;
}

void print(const ScalarExpr& e, std::string& out) {
  using Kind = ScalarExpr::Kind;
  switch (e.kind()) {
    case Kind::kInt: out += std::to_string(e.int_value()); return;
    case Kind::kFloat: out += format_double(e.float_value()); return;
    case Kind::kName: out += e.identifier(); return;
    case Kind::kUnary: {
      out += op_token(e.op());
      const auto& x = e.children()[0];
      bool paren = expr_prec(x) < 7 || x.kind() == Kind::kInt || x.kind() == Kind::kFloat;
      if (paren) out += '(';
      print(x, out);
      if (paren) out += ')';
      return;
    }
    case Kind::kBinary: {
      int p = precedence(e.op());
      const auto& l = e.children()[0];
      const auto& r = e.children()[1];
      bool lp = expr_prec(l) < p;
      bool rp = expr_prec(r) <= p;
      if (lp) out += '(';
      print(l, out);
      if (lp) out += ')';
      out += ' ';
      out += op_token(e.op());
      out += ' ';
      if (rp) out += '(';
      print(r, out);
      if (rp) out += ')';
      return;
    }
    case Kind::kCall: {
      out += e.identifier();
      out += '(';
      for (std::size_t i = 0; i < e.children().size(); ++i) {
        if (i) out += ", ";
        print(e.children()[i], out);
      }
      out += ')';
      return;
    }
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ScalarExpr parse_all() {
    ScalarExpr e = parse_or();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::kParse, why + " at offset " + std::to_string(pos_) + " in '" +
                                       std::string(text_) + "'");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  // Accepts `tok` only if it is not the prefix of a longer operator.
  bool accept_op(std::string_view tok, std::string_view not_followed_by = "") {
    skip_ws();
    if (text_.substr(pos_, tok.size()) != tok) return false;
    std::size_t next = pos_ + tok.size();
    if (!not_followed_by.empty() && next < text_.size() &&
        not_followed_by.find(text_[next]) != std::string_view::npos) {
      return false;
    }
    pos_ = next;
    return true;
  }

  ScalarExpr parse_or() {
    ScalarExpr e = parse_and();
    while (accept("||")) e = ScalarExpr::binary(ScalarExpr::Op::kOr, e, parse_and());
    return e;
  }

  ScalarExpr parse_and() {
    ScalarExpr e = parse_eq();
    while (accept("&&")) e = ScalarExpr::binary(ScalarExpr::Op::kAnd, e, parse_eq());
    return e;
  }

  ScalarExpr parse_eq() {
    ScalarExpr e = parse_rel();
    for (;;) {
      if (accept("==")) {
        e = ScalarExpr::binary(ScalarExpr::Op::kEq, e, parse_rel());
      } else if (accept("!=")) {
        e = ScalarExpr::binary(ScalarExpr::Op::kNe, e, parse_rel());
      } else {
        return e;
      }
    }
  }

  ScalarExpr parse_rel() {
    ScalarExpr e = parse_add();
    for (;;) {
      if (accept("<=")) {
        e = ScalarExpr::binary(ScalarExpr::Op::kLe, e, parse_add());
      } else if (accept(">=")) {
        e = ScalarExpr::binary(ScalarExpr::Op::kGe, e, parse_add());
      } else if (accept("<")) {
        e = ScalarExpr::binary(ScalarExpr::Op::kLt, e, parse_add());
      } else if (accept(">")) {
        e = ScalarExpr::binary(ScalarExpr::Op::kGt, e, parse_add());
      } else {
        return e;
      }
    }
  }

  ScalarExpr parse_add() {
    ScalarExpr e = parse_mul();
    for (;;) {
      if (accept("+")) {
        e = ScalarExpr::binary(ScalarExpr::Op::kAdd, e, parse_mul());
      } else if (accept("-")) {
        e = ScalarExpr::binary(ScalarExpr::Op::kSub, e, parse_mul());
      } else {
        return e;
      }
    }
  }

  ScalarExpr parse_mul() {
    ScalarExpr e = parse_unary();
    for (;;) {
      if (accept("*")) {
        e = ScalarExpr::binary(ScalarExpr::Op::kMul, e, parse_unary());
      } else if (accept("//")) {
        e = ScalarExpr::binary(ScalarExpr::Op::kFloorDiv, e, parse_unary());
      } else if (accept("/")) {
        e = ScalarExpr::binary(ScalarExpr::Op::kDiv, e, parse_unary());
      } else if (accept("%")) {
        e = ScalarExpr::binary(ScalarExpr::Op::kMod, e, parse_unary());
      } else {
        return e;
      }
    }
  }

  ScalarExpr parse_unary() {
    if (accept("-")) return ScalarExpr::unary(ScalarExpr::Op::kNeg, parse_unary());
    if (accept_op("!", "=")) return ScalarExpr::unary(ScalarExpr::Op::kNot, parse_unary());
    return parse_primary();
  }

  ScalarExpr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ScalarExpr e = parse_or();
      if (!accept(")")) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      std::string ident(text_.substr(start, pos_ - start));
      if (ident == "inf") return ScalarExpr::real(HUGE_VAL);
      if (ident == "nan") return ScalarExpr::real(std::nan(""));
      if (accept("(")) {
        std::vector<ScalarExpr> args;
        if (!accept(")")) {
          do {
            args.push_back(parse_or());
          } while (accept(","));
          if (!accept(")")) fail("expected ')' after arguments");
        }
        return ScalarExpr::call(std::move(ident), std::move(args));
      }
      return ScalarExpr::name(std::move(ident));
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  ScalarExpr parse_number() {
    std::size_t start = pos_;
    bool is_float = false;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '.') {
        is_float = true;
        ++pos_;
      } else if ((c == 'e' || c == 'E') && pos_ + 1 < text_.size()) {
        is_float = true;
        ++pos_;
        if (text_[pos_] == '+' || text_[pos_] == '-') ++pos_;
      } else {
        break;
      }
    }
    std::string tok(text_.substr(start, pos_ - start));
    if (is_float) {
      char* end = nullptr;
      double v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size()) fail("malformed number '" + tok + "'");
      return ScalarExpr::real(v);
    }
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) fail("malformed integer '" + tok + "'");
    return ScalarExpr::integer(v);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ScalarExpr ScalarExpr::parse(std::string_view text) { return Parser(text).parse_all(); }

std::string ScalarExpr::str() const {
  if (is_null()) return "";
  std::string out;
  print(*this, out);
  return out;
}

ScalarExpr ScalarExpr::substitute(const std::map<std::string, ScalarExpr>& repl) const {
  if (is_null()) return *this;
  switch (kind()) {
    case Kind::kInt:
    case Kind::kFloat: return *this;
    case Kind::kName: {
      auto it = repl.find(identifier());
      return it == repl.end() ? *this : it->second;
    }
    case Kind::kUnary: return unary(op(), children()[0].substitute(repl));
    case Kind::kBinary:
      return binary(op(), children()[0].substitute(repl), children()[1].substitute(repl));
    case Kind::kCall: {
      std::vector<ScalarExpr> args;
      for (const auto& a : children()) args.push_back(a.substitute(repl));
      return call(identifier(), std::move(args));
    }
  }
  return *this;
}

ScalarExpr ScalarExpr::rename(const std::map<std::string, std::string>& names) const {
  std::map<std::string, ScalarExpr> repl;
  for (const auto& [from, to] : names) repl.emplace(from, name(to));
  return substitute(repl);
}

void ScalarExpr::collect_names(std::set<std::string>& out) const {
  if (is_null()) return;
  if (kind() == Kind::kName) out.insert(identifier());
  for (const auto& c : children()) c.collect_names(out);
}

std::set<std::string> ScalarExpr::names() const {
  std::set<std::string> out;
  collect_names(out);
  return out;
}

bool operator==(const ScalarExpr& a, const ScalarExpr& b) {
  if (a.node_ == b.node_) return true;
  if (a.is_null() || b.is_null()) return false;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind || x.op != y.op || x.ival != y.ival || x.ident != y.ident) return false;
  if (x.kind == ScalarExpr::Kind::kFloat) {
    // Bitwise so that NaN literals compare equal to themselves.
    if (std::memcmp(&x.fval, &y.fval, sizeof(double)) != 0) return false;
  }
  return x.kids == y.kids;
}

}  // namespace cutflow
