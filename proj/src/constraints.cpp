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

#include <algorithm>
#include <cmath>
#include <limits>

#include "cutflow/error.hpp"
#include "cutflow/fuzz.hpp"
#include "json.hpp"

namespace cutflow {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kIndexUse: return "IndexUse";
    case Provenance::kLoopBound: return "LoopBound";
    case Provenance::kSizeSymbol: return "SizeSymbol";
    case Provenance::kUserProvided: return "UserProvided";
    case Provenance::kDefault: return "Default";
  }
  return "?";
}

const SymbolConstraint* ConstraintSet::find(const std::string& name) const {
  for (const auto& s : symbols) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

ValueRange ConstraintSet::range_of(const std::string& container, DType dtype) const {
  auto it = value_ranges.find(container);
  if (it != value_ranges.end()) return it->second;
  return is_float(dtype) ? float_range : int_range;
}

std::optional<std::pair<std::int64_t, std::int64_t>> ConstraintSet::resolve(const SymbolConstraint& s,
                                                                           const Binding& b) const {
  std::int64_t lo = std::numeric_limits<std::int64_t>::min(), hi = std::numeric_limits<std::int64_t>::max();
  for (const auto& e : s.lower) lo = std::max(lo, e.eval(b));
  for (const auto& e : s.upper) hi = std::min(hi, e.eval(b));
  std::int64_t m = s.multiple_of;
  if (m > 1) {
    lo = floordiv(lo + m - 1, m) * m;
    hi = floordiv(hi, m) * m;
  }
  if (lo > hi) return std::nullopt;
  return std::make_pair(lo, hi);
}

namespace {

bool value_ok(double v, const ValueRange& r, bool allow_nan_inf) {
  if (std::isnan(v) || std::isinf(v)) return allow_nan_inf;
  return v >= r.lo && v <= r.hi;
}

}  // namespace

bool ConstraintSet::satisfies(const Program& cutout, const ExecutionInput& in) const {
  for (const auto& s : symbols) {
    auto it = in.symbols.find(s.name);
    if (it == in.symbols.end()) return false;
    auto iv = resolve(s, in.symbols);
    if (!iv || it->second < iv->first || it->second > iv->second) return false;
    if (floormod(it->second, s.multiple_of) != 0) return false;
  }
  for (const auto& [name, desc] : cutout.containers) {
    if (desc.transient) continue;
    auto it = in.data.find(name);
    if (it == in.data.end()) return false;
    const Buffer& b = it->second;
    std::vector<std::int64_t> shape;
    for (const auto& e : desc.shape) shape.push_back(e.eval(in.symbols));
    if (b.shape != shape || b.dtype != desc.dtype) return false;
    ValueRange r = range_of(name, desc.dtype);
    if (desc.dtype == DType::kBool) r = {0, 1};
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (!value_ok(b.as_double(k), r, allow_nan_inf)) return false;
    }
  }
  return true;
}

UserConstraints UserConstraints::parse_json(std::string_view text) {
  UserConstraints u;
  try {
    auto j = nlohmann::json::parse(text);
    auto range = [](const nlohmann::json& v) {
      if (!v.is_array() || v.size() != 2) throw Error(ErrorCode::kMalformedDocument, "range must be [lo, hi]");
      ValueRange r{v[0].get<double>(), v[1].get<double>()};
      if (r.lo > r.hi) throw Error(ErrorCode::kEmptyInterval, "value range [" + v.dump() + "] is empty");
      return r;
    };
    if (j.contains("symbols")) {
      for (const auto& [name, v] : j.at("symbols").items()) {
        Bound b;
        if (v.contains("min")) b.min = v.at("min").get<std::int64_t>();
        if (v.contains("max")) b.max = v.at("max").get<std::int64_t>();
        if (v.contains("multiple_of")) b.multiple_of = v.at("multiple_of").get<std::int64_t>();
        if (b.multiple_of < 1) throw Error(ErrorCode::kMalformedDocument, "multiple_of must be >= 1");
        u.symbols[name] = b;
      }
    }
    if (j.contains("float_range")) u.float_range = range(j.at("float_range"));
    if (j.contains("int_range")) u.int_range = range(j.at("int_range"));
    if (j.contains("size_max")) u.size_max = j.at("size_max").get<std::int64_t>();
    if (j.contains("values")) {
      for (const auto& [name, v] : j.at("values").items()) u.values[name] = range(v);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, std::string("constraints: ") + e.what());
  }
  return u;
}

namespace {

struct Bounds {
  std::vector<SymExpr> lower, upper;
};

bool only_uses(const SymExpr& e, const std::set<std::string>& allowed) {
  for (const auto& s : e.symbols()) {
    if (!allowed.count(s)) return false;
  }
  return true;
}

// 0 <= begin and end <= extent, solved for `s` when it occurs with a unit
// coefficient and the remainder only mentions size symbols.
void index_bounds(const std::string& s, const Range& r, const SymExpr& extent, const std::set<std::string>& sizes,
                  Bounds& out) {
  auto solve = [&](const SymExpr& e, bool is_begin) {
    if (!e.depends_on(s)) return;
    Affine a = Affine::of(e);
    std::int64_t coef = a.coefficient(s);
    if (coef != 1 && coef != -1) return;
    SymExpr rest = (e - SymExpr(coef) * SymExpr::sym(s)).simplify();
    if (rest.depends_on(s) || !only_uses(rest, sizes) || !only_uses(extent, sizes)) return;
    if (is_begin) {
      // s + rest >= 0  |  -s + rest >= 0
      if (coef == 1) out.lower.push_back((SymExpr(0) - rest).simplify());
      else out.upper.push_back(rest);
    } else {
      // s + rest <= extent  |  -s + rest <= extent
      if (coef == 1) out.upper.push_back((extent - rest).simplify());
      else out.lower.push_back((rest - extent).simplify());
    }
  };
  solve(r.begin, true);
  solve(r.end, false);
}

// Values a loop variable takes inside its loop: constant initial values and
// the integer bounds of `var < K` / `var > K` guards.
void loop_bounds(const Program& p, const std::string& var, Bounds& out) {
  std::vector<std::int64_t> lows, highs;
  for (const auto& e : p.interstate) {
    for (const auto& [name, v] : e.assignments) {
      if (name != var) continue;
      if (auto c = v.simplify().as_const()) {
        lows.push_back(*c);
        highs.push_back(*c);
      }
    }
    const ScalarExpr& g = e.guard;
    if (g.is_null() || g.kind() != ScalarExpr::Kind::kBinary) continue;
    const auto& l = g.children()[0];
    const auto& r = g.children()[1];
    if (l.kind() != ScalarExpr::Kind::kName || l.identifier() != var || r.kind() != ScalarExpr::Kind::kInt) continue;
    switch (g.op()) {
      case ScalarExpr::Op::kLt: highs.push_back(r.int_value() - 1); break;
      case ScalarExpr::Op::kLe: highs.push_back(r.int_value()); break;
      case ScalarExpr::Op::kGt: lows.push_back(r.int_value() + 1); break;
      case ScalarExpr::Op::kGe: lows.push_back(r.int_value()); break;
      default: break;
    }
  }
  if (lows.empty() || highs.empty()) return;
  out.lower.push_back(*std::min_element(lows.begin(), lows.end()));
  out.upper.push_back(*std::max_element(highs.begin(), highs.end()));
}

void check_constant(const SymbolConstraint& s) {
  std::optional<std::int64_t> lo, hi;
  for (const auto& e : s.lower) {
    if (auto c = e.as_const()) lo = lo ? std::max(*lo, *c) : *c;
  }
  for (const auto& e : s.upper) {
    if (auto c = e.as_const()) hi = hi ? std::min(*hi, *c) : *c;
  }
  if (!lo || !hi) return;
  std::int64_t m = s.multiple_of;
  std::int64_t a = floordiv(*lo + m - 1, m) * m, b = floordiv(*hi, m) * m;
  if (a > b) {
    throw Error(ErrorCode::kEmptyInterval, "symbol '" + s.name + "' has no admissible value in [" +
                                               std::to_string(*lo) + ", " + std::to_string(*hi) + "]" +
                                               (m > 1 ? " with multiple_of " + std::to_string(m) : ""));
  }
}

ConstraintSet build(const Program& p, const Program& prog, const std::vector<std::string>& inputs,
                    const std::vector<std::pair<std::string, SubsetRange>>& accesses, const UserConstraints& user,
                    std::int64_t size_max) {
  ConstraintSet cs;
  cs.size_max = user.size_max.value_or(size_max);
  if (user.float_range) cs.float_range = *user.float_range;
  if (user.int_range) cs.int_range = *user.int_range;
  cs.value_ranges = user.values;

  std::set<std::string> input_set(inputs.begin(), inputs.end());
  std::set<std::string> sizes;
  for (const auto& [name, desc] : prog.containers) {
    const auto& shape = p.containers.count(name) ? p.container(name).shape : desc.shape;
    for (const auto& e : shape) {
      for (const auto& s : e.symbols()) {
        if (input_set.count(s)) sizes.insert(s);
      }
    }
  }
  auto assigned = p.assigned_symbols();

  std::vector<SymbolConstraint> first, second;
  for (const auto& name : inputs) {
    SymbolConstraint s;
    s.name = name;
    const SymbolDecl* decl = p.symbol(name);
    if (sizes.count(name)) {
      s.size = true;
      std::int64_t lo = std::max<std::int64_t>(1, decl && decl->min ? *decl->min : 1);
      // Size_max is only a sampling cap: a declared minimum above it or an
      // explicit user maximum takes precedence.
      auto u = user.symbols.find(name);
      bool user_max = u != user.symbols.end() && u->second.max;
      std::int64_t hi = user_max ? std::numeric_limits<std::int64_t>::max() : cs.size_max;
      if (decl && decl->max) hi = std::min(hi, *decl->max);
      hi = std::max(hi, lo);
      s.lower.push_back(lo);
      s.upper.push_back(hi);
      s.provenance.insert(Provenance::kSizeSymbol);
    } else {
      Bounds b;
      for (const auto& [container, range] : accesses) {
        const auto& shape = p.container(container).shape;
        for (std::size_t d = 0; d < range.rank(); ++d) index_bounds(name, range.dims()[d], shape[d], sizes, b);
      }
      if (!b.lower.empty() || !b.upper.empty()) s.provenance.insert(Provenance::kIndexUse);
      if (assigned.count(name)) {
        Bounds l;
        loop_bounds(p, name, l);
        if (!l.lower.empty()) s.provenance.insert(Provenance::kLoopBound);
        b.lower.insert(b.lower.end(), l.lower.begin(), l.lower.end());
        b.upper.insert(b.upper.end(), l.upper.begin(), l.upper.end());
      }
      if (decl && decl->min) b.lower.push_back(*decl->min);
      if (decl && decl->max) b.upper.push_back(*decl->max);
      if (b.lower.empty() || b.upper.empty()) s.provenance.insert(Provenance::kDefault);
      if (b.lower.empty()) b.lower.push_back(0);
      if (b.upper.empty()) b.upper.push_back(cs.size_max - 1);
      s.lower = b.lower;
      s.upper = b.upper;
    }
    auto u = user.symbols.find(name);
    if (u != user.symbols.end()) {
      if (u->second.min) s.lower.push_back(*u->second.min);
      if (u->second.max) s.upper.push_back(*u->second.max);
      s.multiple_of = u->second.multiple_of;
      s.provenance.insert(Provenance::kUserProvided);
    }
    check_constant(s);
    (s.size ? first : second).push_back(std::move(s));
  }
  cs.symbols = std::move(first);
  cs.symbols.insert(cs.symbols.end(), second.begin(), second.end());
  return cs;
}

}  // namespace

ConstraintSet derive_constraints(const Program& p, const Cutout& c, const UserConstraints& user,
                                 std::int64_t size_max) {
  // Index analysis runs on the original memlets: rebased cutout subsets no
  // longer reveal the original extents.
  std::vector<std::pair<std::string, SubsetRange>> accesses;
  for (StateId sid : c.region) {
    const State& s = *p.state(sid);
    for (const auto& a : collect_accesses(s)) {
      if (!c.nodes.count(a.tasklet)) continue;
      accesses.emplace_back(a.container, propagate_subset(p, s, a.tasklet, a.container, a.subset));
    }
  }
  return build(p, c.program, c.input_symbols, accesses, user, size_max);
}

ConstraintSet derive_constraints(const Program& prog, const UserConstraints& user, std::int64_t size_max) {
  std::vector<std::pair<std::string, SubsetRange>> accesses;
  for (const auto& s : prog.states) {
    for (const auto& a : collect_accesses(s)) {
      accesses.emplace_back(a.container, propagate_subset(prog, s, a.tasklet, a.container, a.subset));
    }
  }
  auto assigned = prog.assigned_symbols();
  std::vector<std::string> inputs;
  for (const auto& d : prog.symbols) {
    if (!assigned.count(d.name)) inputs.push_back(d.name);
  }
  return build(prog, prog, inputs, accesses, user, size_max);
}

}  // namespace cutflow
