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

#include "cutflow/symexpr.hpp"

#include <algorithm>
#include <cstring>

#include "cutflow/error.hpp"
#include "cutflow/expr.hpp"

namespace cutflow {

struct SymExpr::Node {
  Op op = Op::kConst;
  std::int64_t value = 0;
  std::string name;
  SymExpr l;
  SymExpr r;
  Node() : l(nullptr), r(nullptr) {}
};

namespace {

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

}  // namespace

std::int64_t floordiv(std::int64_t a, std::int64_t b) {
  if (b == 0) throw Error(ErrorCode::kDivisionByZero, "floor division by zero");
  if (b == -1) return wrap_sub(0, a);
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floormod(std::int64_t a, std::int64_t b) {
  if (b == 0) throw Error(ErrorCode::kDivisionByZero, "modulo by zero");
  if (b == -1) return 0;
  std::int64_t m = a % b;
  if (m != 0 && ((m < 0) != (b < 0))) m += b;
  return m;
}

SymExpr::SymExpr(std::int64_t value) {
  auto n = std::make_shared<Node>();
  n->op = Op::kConst;
  n->value = value;
  node_ = std::move(n);
}

SymExpr SymExpr::sym(std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::kSym;
  n->name = std::move(name);
  return SymExpr(std::shared_ptr<const Node>(std::move(n)));
}

SymExpr SymExpr::make(Op op, SymExpr lhs, SymExpr rhs) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->l = std::move(lhs);
  n->r = std::move(rhs);
  return SymExpr(std::shared_ptr<const Node>(std::move(n)));
}

SymExpr::Op SymExpr::op() const { return node_->op; }
std::int64_t SymExpr::value() const { return node_->value; }
const std::string& SymExpr::name() const { return node_->name; }
const SymExpr& SymExpr::lhs() const { return node_->l; }
const SymExpr& SymExpr::rhs() const { return node_->r; }

std::optional<std::int64_t> SymExpr::as_const() const {
  if (is_const()) return value();
  return std::nullopt;
}

SymExpr operator+(const SymExpr& a, const SymExpr& b) { return SymExpr::make(SymExpr::Op::kAdd, a, b); }
SymExpr operator-(const SymExpr& a, const SymExpr& b) { return SymExpr::make(SymExpr::Op::kSub, a, b); }
SymExpr operator*(const SymExpr& a, const SymExpr& b) { return SymExpr::make(SymExpr::Op::kMul, a, b); }
SymExpr floordiv(const SymExpr& a, const SymExpr& b) { return SymExpr::make(SymExpr::Op::kFloorDiv, a, b); }
SymExpr mod(const SymExpr& a, const SymExpr& b) { return SymExpr::make(SymExpr::Op::kMod, a, b); }
SymExpr min(const SymExpr& a, const SymExpr& b) { return SymExpr::make(SymExpr::Op::kMin, a, b); }
SymExpr max(const SymExpr& a, const SymExpr& b) { return SymExpr::make(SymExpr::Op::kMax, a, b); }

std::int64_t SymExpr::eval(const Binding& binding) const {
  switch (op()) {
    case Op::kConst: return value();
    case Op::kSym: {
      auto it = binding.find(name());
      if (it == binding.end()) throw Error(ErrorCode::kUnboundSymbol, "symbol '" + name() + "' is not bound");
      return it->second;
    }
    default: break;
  }
  std::int64_t a = lhs().eval(binding);
  std::int64_t b = rhs().eval(binding);
  switch (op()) {
    case Op::kAdd: return wrap_add(a, b);
    case Op::kSub: return wrap_sub(a, b);
    case Op::kMul: return wrap_mul(a, b);
    case Op::kFloorDiv: return floordiv(a, b);
    case Op::kMod: return floormod(a, b);
    case Op::kMin: return std::min(a, b);
    case Op::kMax: return std::max(a, b);
    default: break;
  }
  return 0;
}

namespace {

SymExpr from_scalar(const ScalarExpr& e) {
  using K = ScalarExpr::Kind;
  using O = ScalarExpr::Op;
  switch (e.kind()) {
    case K::kInt: return SymExpr(e.int_value());
    case K::kName: return SymExpr::sym(e.identifier());
    case K::kUnary:
      if (e.op() == O::kNeg) return SymExpr(-1) * from_scalar(e.children()[0]);
      break;
    case K::kBinary: {
      SymExpr a = from_scalar(e.children()[0]);
      SymExpr b = from_scalar(e.children()[1]);
      switch (e.op()) {
        case O::kAdd: return a + b;
        case O::kSub: return a - b;
        case O::kMul: return a * b;
        case O::kDiv:
        case O::kFloorDiv: return floordiv(a, b);
        case O::kMod: return mod(a, b);
        default: break;
      }
      break;
    }
    case K::kCall: {
      const auto& fn = e.identifier();
      if ((fn == "min" || fn == "max") && e.children().size() >= 2) {
        SymExpr acc = from_scalar(e.children()[0]);
        for (std::size_t i = 1; i < e.children().size(); ++i) {
          SymExpr x = from_scalar(e.children()[i]);
          acc = fn == "min" ? min(acc, x) : max(acc, x);
        }
        return acc;
      }
      break;
    }
    case K::kFloat: break;
  }
  throw Error(ErrorCode::kParse, "'" + e.str() + "' is not an integer symbolic expression");
}

int sym_prec(const SymExpr& e) {
  switch (e.op()) {
    case SymExpr::Op::kAdd:
    case SymExpr::Op::kSub: return 5;
    case SymExpr::Op::kMul:
    case SymExpr::Op::kFloorDiv:
    case SymExpr::Op::kMod: return 6;
    default: return 9;
  }
}

void print_sym(const SymExpr& e, std::string& out) {
  using Op = SymExpr::Op;
  switch (e.op()) {
    case Op::kConst: out += std::to_string(e.value()); return;
    case Op::kSym: out += e.name(); return;
    case Op::kMin:
    case Op::kMax:
      out += e.op() == Op::kMin ? "min(" : "max(";
      print_sym(e.lhs(), out);
      out += ", ";
      print_sym(e.rhs(), out);
      out += ')';
      return;
    default: break;
  }
  int p = sym_prec(e);
  bool lp = sym_prec(e.lhs()) < p;
  bool rp = sym_prec(e.rhs()) <= p;
  if (lp) out += '(';
  print_sym(e.lhs(), out);
  if (lp) out += ')';
  switch (e.op()) {
    case Op::kAdd: out += " + "; break;
    case Op::kSub: out += " - "; break;
    case Op::kMul: out += "*"; break;
    case Op::kFloorDiv: out += "//"; break;
    case Op::kMod: out += "%"; break;
    default: break;
  }
  if (rp) out += '(';
  print_sym(e.rhs(), out);
  if (rp) out += ')';
}

Affine scaled(Affine a, std::int64_t k) {
  a.constant = wrap_mul(a.constant, k);
  for (auto it = a.terms.begin(); it != a.terms.end();) {
    it->second.second = wrap_mul(it->second.second, k);
    if (it->second.second == 0) {
      it = a.terms.erase(it);
    } else {
      ++it;
    }
  }
  return a;
}

void accumulate(Affine& into, const Affine& from, std::int64_t sign) {
  into.constant = wrap_add(into.constant, wrap_mul(sign, from.constant));
  for (const auto& [key, term] : from.terms) {
    auto [it, inserted] = into.terms.try_emplace(key, term.first, 0);
    it->second.second = wrap_add(it->second.second, wrap_mul(sign, term.second));
    if (it->second.second == 0) into.terms.erase(it);
  }
}

Affine atom(const SymExpr& e) {
  Affine a;
  if (auto c = e.as_const()) {
    a.constant = *c;
    return a;
  }
  std::string key = e.is_sym() ? e.name() : e.str();
  a.terms.emplace(std::move(key), std::make_pair(e, std::int64_t{1}));
  return a;
}

}  // namespace

SymExpr SymExpr::parse(std::string_view text) { return from_scalar(ScalarExpr::parse(text)); }

std::string SymExpr::str() const {
  std::string out;
  print_sym(*this, out);
  return out;
}

Affine Affine::of(const SymExpr& e) {
  using Op = SymExpr::Op;
  switch (e.op()) {
    case Op::kConst:
    case Op::kSym: return atom(e);
    case Op::kAdd:
    case Op::kSub: {
      Affine a = of(e.lhs());
      accumulate(a, of(e.rhs()), e.op() == Op::kAdd ? 1 : -1);
      return a;
    }
    case Op::kMul: {
      Affine a = of(e.lhs());
      Affine b = of(e.rhs());
      if (a.is_constant()) return scaled(std::move(b), a.constant);
      if (b.is_constant()) return scaled(std::move(a), b.constant);
      SymExpr l = a.to_expr();
      SymExpr r = b.to_expr();
      if (r < l) std::swap(l, r);
      return atom(l * r);
    }
    case Op::kFloorDiv:
    case Op::kMod: {
      Affine a = of(e.lhs());
      Affine b = of(e.rhs());
      if (b.is_constant() && b.constant != 0) {
        if (a.is_constant()) {
          Affine c;
          c.constant = e.op() == Op::kFloorDiv ? floordiv(a.constant, b.constant)
                                                : floormod(a.constant, b.constant);
          return c;
        }
        if (b.constant == 1) return e.op() == Op::kFloorDiv ? a : Affine{};
      }
      return atom(SymExpr::make(e.op(), a.to_expr(), b.to_expr()));
    }
    case Op::kMin:
    case Op::kMax: {
      Affine a = of(e.lhs());
      Affine b = of(e.rhs());
      Affine d = a;
      accumulate(d, b, -1);
      if (d.is_constant()) {
        bool a_smaller = d.constant <= 0;
        return (e.op() == Op::kMin) == a_smaller ? a : b;
      }
      SymExpr l = a.to_expr();
      SymExpr r = b.to_expr();
      if (r < l) std::swap(l, r);
      return atom(SymExpr::make(e.op(), l, r));
    }
  }
  return {};
}

SymExpr Affine::to_expr() const {
  std::vector<std::pair<SymExpr, std::int64_t>> pos, neg;
  for (const auto& [key, term] : terms) {
    (term.second > 0 ? pos : neg).push_back(term);
  }
  std::optional<SymExpr> acc;
  auto magnitude_term = [](const SymExpr& x, std::int64_t c) {
    std::int64_t m = c < 0 ? wrap_sub(0, c) : c;
    return m == 1 ? x : SymExpr(m) * x;
  };
  for (const auto& [x, c] : pos) {
    SymExpr t = magnitude_term(x, c);
    acc = acc ? *acc + t : t;
  }
  for (const auto& [x, c] : neg) {
    if (!acc) {
      acc = SymExpr(c) * x;
    } else {
      acc = *acc - magnitude_term(x, c);
    }
  }
  if (!acc) return SymExpr(constant);
  if (constant > 0) return *acc + SymExpr(constant);
  if (constant < 0) return *acc - SymExpr(wrap_sub(0, constant));
  return *acc;
}

std::int64_t Affine::coefficient(const std::string& atom_key) const {
  auto it = terms.find(atom_key);
  return it == terms.end() ? 0 : it->second.second;
}

SymExpr SymExpr::simplify() const { return Affine::of(*this).to_expr(); }

SymExpr SymExpr::substitute(const std::map<std::string, SymExpr>& repl) const {
  switch (op()) {
    case Op::kConst: return *this;
    case Op::kSym: {
      auto it = repl.find(name());
      return it == repl.end() ? *this : it->second;
    }
    default: return make(op(), lhs().substitute(repl), rhs().substitute(repl));
  }
}

void SymExpr::collect_symbols(std::set<std::string>& out) const {
  switch (op()) {
    case Op::kConst: return;
    case Op::kSym: out.insert(name()); return;
    default:
      lhs().collect_symbols(out);
      rhs().collect_symbols(out);
  }
}

std::set<std::string> SymExpr::symbols() const {
  std::set<std::string> out;
  collect_symbols(out);
  return out;
}

bool SymExpr::depends_on(const std::string& symbol) const {
  switch (op()) {
    case Op::kConst: return false;
    case Op::kSym: return name() == symbol;
    default: return lhs().depends_on(symbol) || rhs().depends_on(symbol);
  }
}

bool operator==(const SymExpr& a, const SymExpr& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.op != y.op) return false;
  switch (x.op) {
    case SymExpr::Op::kConst: return x.value == y.value;
    case SymExpr::Op::kSym: return x.name == y.name;
    default: return x.l == y.l && x.r == y.r;
  }
}

// ---------------------------------------------------------------------------
// Interval reasoning

Interval Assumptions::of(const std::string& symbol) const {
  auto it = bounds.find(symbol);
  if (it != bounds.end()) return it->second;
  return Interval{default_lower, std::nullopt};
}

namespace {

using Bound = std::optional<std::int64_t>;

Bound checked_mul(Bound a, std::int64_t k) {
  if (!a) return std::nullopt;
  std::int64_t out;
  if (__builtin_mul_overflow(*a, k, &out)) return std::nullopt;
  return out;
}

Bound checked_add(Bound a, Bound b) {
  if (!a || !b) return std::nullopt;
  std::int64_t out;
  if (__builtin_add_overflow(*a, *b, &out)) return std::nullopt;
  return out;
}

Interval scale(Interval x, std::int64_t k) {
  if (k >= 0) return {checked_mul(x.lo, k), checked_mul(x.hi, k)};
  return {checked_mul(x.hi, k), checked_mul(x.lo, k)};
}

Interval atom_bounds(const SymExpr& e, const Assumptions& as);

Interval affine_bounds(const Affine& a, const Assumptions& as) {
  Interval acc{a.constant, a.constant};
  for (const auto& [key, term] : a.terms) {
    Interval t = scale(atom_bounds(term.first, as), term.second);
    acc = {checked_add(acc.lo, t.lo), checked_add(acc.hi, t.hi)};
  }
  return acc;
}

Interval atom_bounds(const SymExpr& e, const Assumptions& as) {
  using Op = SymExpr::Op;
  switch (e.op()) {
    case Op::kConst: return {e.value(), e.value()};
    case Op::kSym: return as.of(e.name());
    case Op::kAdd:
    case Op::kSub: return affine_bounds(Affine::of(e), as);
    case Op::kMul: {
      Interval a = affine_bounds(Affine::of(e.lhs()), as);
      Interval b = affine_bounds(Affine::of(e.rhs()), as);
      if (a.lo && b.lo && *a.lo >= 0 && *b.lo >= 0) {
        Interval out;
        std::int64_t lo;
        if (!__builtin_mul_overflow(*a.lo, *b.lo, &lo)) out.lo = lo;
        if (a.hi && b.hi) {
          std::int64_t hi;
          if (!__builtin_mul_overflow(*a.hi, *b.hi, &hi)) out.hi = hi;
        }
        return out;
      }
      if (a.lo && a.hi && b.lo && b.hi) {
        std::int64_t c[4];
        bool ok = !__builtin_mul_overflow(*a.lo, *b.lo, &c[0]) &&
                  !__builtin_mul_overflow(*a.lo, *b.hi, &c[1]) &&
                  !__builtin_mul_overflow(*a.hi, *b.lo, &c[2]) &&
                  !__builtin_mul_overflow(*a.hi, *b.hi, &c[3]);
        if (ok) return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
      }
      return {};
    }
    case Op::kFloorDiv: {
      Interval a = affine_bounds(Affine::of(e.lhs()), as);
      auto d = e.rhs().simplify().as_const();
      if (!d || *d == 0) return {};
      Interval out;
      if (*d > 0) {
        if (a.lo) out.lo = floordiv(*a.lo, *d);
        if (a.hi) out.hi = floordiv(*a.hi, *d);
      } else {
        if (a.hi) out.lo = floordiv(*a.hi, *d);
        if (a.lo) out.hi = floordiv(*a.lo, *d);
      }
      return out;
    }
    case Op::kMod: {
      auto d = e.rhs().simplify().as_const();
      if (!d || *d == 0) return {};
      Interval a = affine_bounds(Affine::of(e.lhs()), as);
      if (*d > 0) {
        if (a.lo && a.hi && *a.lo >= 0 && *a.hi < *d) return a;
        return {0, *d - 1};
      }
      return {*d + 1, 0};
    }
    case Op::kMin:
    case Op::kMax: {
      Interval a = affine_bounds(Affine::of(e.lhs()), as);
      Interval b = affine_bounds(Affine::of(e.rhs()), as);
      auto pick = [](Bound x, Bound y, bool take_min, bool unbounded_wins) -> Bound {
        if (!x || !y) {
          if (unbounded_wins) return std::nullopt;
          return x ? x : y;
        }
        return take_min ? std::min(*x, *y) : std::max(*x, *y);
      };
      if (e.op() == Op::kMin) return {pick(a.lo, b.lo, true, true), pick(a.hi, b.hi, true, false)};
      return {pick(a.lo, b.lo, false, false), pick(a.hi, b.hi, false, true)};
    }
  }
  return {};
}

}  // namespace

Interval bounds(const SymExpr& e, const Assumptions& assumptions) {
  return affine_bounds(Affine::of(e), assumptions);
}

bool provably_le(const SymExpr& a, const SymExpr& b, const Assumptions& assumptions) {
  Interval d = bounds(b - a, assumptions);
  return d.lo && *d.lo >= 0;
}

bool provably_equal(const SymExpr& a, const SymExpr& b) {
  auto d = (a - b).simplify().as_const();
  return d && *d == 0;
}

// ---------------------------------------------------------------------------
// Ranges

std::string Range::str() const {
  if (provably_equal(step, SymExpr(1)) && provably_equal(end, begin + SymExpr(1))) return begin.str();
  std::string out = begin.str() + ":" + end.str();
  if (!provably_equal(step, SymExpr(1))) out += ":" + step.str();
  return out;
}

SubsetRange SubsetRange::full(const std::vector<SymExpr>& shape) {
  std::vector<Range> dims;
  for (const auto& s : shape) dims.push_back({SymExpr(0), s, SymExpr(1)});
  return SubsetRange(std::move(dims));
}

SubsetRange SubsetRange::element(const std::vector<SymExpr>& indices) {
  std::vector<Range> dims;
  for (const auto& i : indices) dims.push_back(Range::index(i));
  return SubsetRange(std::move(dims));
}

namespace {

std::vector<std::string_view> split_top_level(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(text.substr(start));
  return parts;
}

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

}  // namespace

SubsetRange SubsetRange::parse(std::string_view text) {
  std::vector<Range> dims;
  if (blank(text)) return SubsetRange();
  for (auto part : split_top_level(text, ',')) {
    auto pieces = split_top_level(part, ':');
    if (pieces.size() == 1) {
      dims.push_back(Range::index(SymExpr::parse(pieces[0])));
    } else if (pieces.size() == 2 || pieces.size() == 3) {
      Range r{SymExpr::parse(pieces[0]), SymExpr::parse(pieces[1]), SymExpr(1)};
      if (pieces.size() == 3) r.step = SymExpr::parse(pieces[2]);
      dims.push_back(std::move(r));
    } else {
      throw Error(ErrorCode::kParse, "malformed range '" + std::string(part) + "'");
    }
  }
  return SubsetRange(std::move(dims));
}

std::int64_t SubsetRange::volume(const Binding& binding) const {
  std::int64_t total = 1;
  for (const auto& d : dims_) {
    std::int64_t b = d.begin.eval(binding);
    std::int64_t e = d.end.eval(binding);
    std::int64_t s = d.step.eval(binding);
    if (s < 1) throw Error(ErrorCode::kInvalidStep, "step " + std::to_string(s) + " in " + d.str());
    if (e < b) throw Error(ErrorCode::kNegativeExtent, "end < begin in " + d.str());
    std::int64_t n = (e - b + s - 1) / s;
    total *= n;
  }
  return total;
}

std::set<std::string> SubsetRange::symbols() const {
  std::set<std::string> out;
  for (const auto& d : dims_) {
    d.begin.collect_symbols(out);
    d.end.collect_symbols(out);
    d.step.collect_symbols(out);
  }
  return out;
}

SubsetRange SubsetRange::substitute(const std::map<std::string, SymExpr>& repl) const {
  std::vector<Range> dims;
  for (const auto& d : dims_) {
    dims.push_back({d.begin.substitute(repl), d.end.substitute(repl), d.step.substitute(repl)});
  }
  return SubsetRange(std::move(dims));
}

SubsetRange SubsetRange::simplify() const {
  std::vector<Range> dims;
  for (const auto& d : dims_) dims.push_back({d.begin.simplify(), d.end.simplify(), d.step.simplify()});
  return SubsetRange(std::move(dims));
}

SubsetRange SubsetRange::offset_by(const std::vector<SymExpr>& origin) const {
  std::vector<Range> dims;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    dims.push_back({(d.begin - origin[i]).simplify(), (d.end - origin[i]).simplify(), d.step});
  }
  return SubsetRange(std::move(dims));
}

std::string SubsetRange::str() const {
  std::string out;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) out += ", ";
    out += dims_[i].str();
  }
  return out;
}

Overlap disjoint(const SubsetRange& a, const SubsetRange& b, const Assumptions& assumptions) {
  if (a.rank() != b.rank()) {
    throw Error(ErrorCode::kRankMismatch,
                "rank " + std::to_string(a.rank()) + " vs " + std::to_string(b.rank()));
  }
  for (std::size_t i = 0; i < a.rank(); ++i) {
    const Range& x = a.dims()[i];
    const Range& y = b.dims()[i];
    if (provably_le(x.end, y.begin, assumptions) || provably_le(y.end, x.begin, assumptions)) {
      return Overlap::kDisjoint;
    }
  }
  return Overlap::kMayOverlap;
}

}  // namespace cutflow
