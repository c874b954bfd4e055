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

#include <random>

#include "cutflow/error.hpp"
#include "cutflow/symexpr.hpp"
#include "doctest.h"

using namespace cutflow;

namespace {

SymExpr random_expr(std::mt19937_64& rng, int depth) {
  static const char* kSyms[] = {"N", "M", "i", "j"};
  std::uniform_int_distribution<int> pick(0, 9);
  int k = pick(rng);
  if (depth == 0 || k < 3) {
    if (k % 2 == 0) return SymExpr(std::uniform_int_distribution<int>(-5, 40)(rng));
    return SymExpr::sym(kSyms[std::uniform_int_distribution<int>(0, 3)(rng)]);
  }
  SymExpr a = random_expr(rng, depth - 1);
  SymExpr b = random_expr(rng, depth - 1);
  switch (k) {
    case 3: return a + b;
    case 4: return a - b;
    case 5: return a * b;
    case 6: return floordiv(a, SymExpr(std::uniform_int_distribution<int>(1, 7)(rng)));
    case 7: return mod(a, SymExpr(std::uniform_int_distribution<int>(1, 7)(rng)));
    case 8: return min(a, b);
    default: return max(a, b);
  }
}

Binding random_binding(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> v(-50, 200);
  return {{"N", v(rng)}, {"M", v(rng)}, {"i", v(rng)}, {"j", v(rng)}};
}

}  // namespace

TEST_CASE("eval basics") {
  CHECK(SymExpr::parse("N*N").eval({{"N", 32}}) == 1024);
  CHECK(SymExpr::parse("min(i + 32, N)").eval({{"i", 96}, {"N", 100}}) == 100);
  CHECK(SymExpr::parse("-7 // 2").eval({}) == -4);
  CHECK(SymExpr::parse("-7 % 2").eval({}) == 1);
  CHECK(SymExpr::parse("7 % -2").eval({}) == -1);
  CHECK_THROWS_AS(SymExpr::parse("N + 1").eval({}), Error);
  try {
    SymExpr::parse("4 // (N - N)").eval({{"N", 3}});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDivisionByZero);
  }
}

TEST_CASE("floor division identity") {
  for (std::int64_t a = -30; a <= 30; ++a) {
    for (std::int64_t b = -7; b <= 7; ++b) {
      if (b == 0) continue;
      CHECK(a == b * floordiv(a, b) + floormod(a, b));
    }
  }
}

TEST_CASE("parse rejects non-integer expressions") {
  CHECK_THROWS_AS(SymExpr::parse("1.5 + N"), Error);
  CHECK_THROWS_AS(SymExpr::parse("N < 3"), Error);
  CHECK_THROWS_AS(SymExpr::parse("N +"), Error);
}

TEST_CASE("simplify canonical forms") {
  CHECK(SymExpr::parse("i + 1 - 1").simplify().str() == "i");
  CHECK(SymExpr::parse("2*N - N").simplify().str() == "N");
  CHECK(SymExpr::parse("N - i + 0").simplify().str() == "N - i");
  CHECK(SymExpr::parse("min(i + 3, i + 1)").simplify().str() == "i + 1");
  CHECK(SymExpr::parse("max(N, N - 4)").simplify().str() == "N");
  CHECK(SymExpr::parse("(N + 8) // 1").simplify().str() == "N + 8");
  CHECK(SymExpr::parse("17 // 5 + N % 1").simplify().str() == "3");
  CHECK(SymExpr::parse("min(N, i)").simplify() == SymExpr::parse("min(i, N)").simplify());
  CHECK(SymExpr::parse("N*2").simplify().str() == "2*N");
}

TEST_CASE("printing round-trips") {
  for (const char* text : {"i + 1", "N - (i - 1)", "(N + 1)*M", "min(i + 32, N)", "N//(2*M)", "N % 4 - 1"}) {
    SymExpr e = SymExpr::parse(text);
    CHECK(SymExpr::parse(e.str()) == e);
  }
}

TEST_CASE("property: simplify preserves value") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    SymExpr e = random_expr(rng, 4);
    SymExpr s = e.simplify();
    CHECK(s.simplify() == s);
    for (int k = 0; k < 5; ++k) {
      Binding b = random_binding(rng);
      INFO(e.str(), " -> ", s.str());
      CHECK(e.eval(b) == s.eval(b));
    }
  }
}

TEST_CASE("property: bounds enclose every admissible value") {
  std::mt19937_64 rng(11);
  Assumptions as;
  as.bounds["i"] = {0, 63};
  as.bounds["j"] = {-4, 4};
  as.bounds["N"] = {1, 100};
  as.bounds["M"] = {1, 100};
  for (int trial = 0; trial < 1000; ++trial) {
    SymExpr e = random_expr(rng, 3);
    Interval iv = bounds(e, as);
    for (int k = 0; k < 10; ++k) {
      Binding b{{"i", std::uniform_int_distribution<int>(0, 63)(rng)},
                {"j", std::uniform_int_distribution<int>(-4, 4)(rng)},
                {"N", std::uniform_int_distribution<int>(1, 100)(rng)},
                {"M", std::uniform_int_distribution<int>(1, 100)(rng)}};
      std::int64_t v = e.eval(b);
      INFO(e.str());
      if (iv.lo) CHECK(*iv.lo <= v);
      if (iv.hi) CHECK(v <= *iv.hi);
    }
  }
}

TEST_CASE("subset volume") {
  CHECK(SubsetRange::parse("0:9:2").volume({}) == 5);
  CHECK(SubsetRange::parse("0:N, 0:M").volume({{"N", 4}, {"M", 3}}) == 12);
  CHECK(SubsetRange::parse("i").volume({{"i", 9}}) == 1);
  CHECK(SubsetRange::parse("").volume({}) == 1);
  CHECK(SubsetRange::parse("3:3").volume({}) == 0);
  auto code_of = [](const char* text, const Binding& b) {
    try {
      SubsetRange::parse(text).volume(b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  CHECK(code_of("5:2", {}) == ErrorCode::kNegativeExtent);
  CHECK(code_of("0:4:0", {}) == ErrorCode::kInvalidStep);
  CHECK(code_of("0:N", {}) == ErrorCode::kUnboundSymbol);
}

TEST_CASE("subset printing") {
  CHECK(SubsetRange::parse("i, 0:N").str() == "i, 0:N");
  CHECK(SubsetRange::parse("0:9:2").str() == "0:9:2");
  CHECK(SubsetRange::parse("i:i + 1").str() == "i");
  CHECK(SubsetRange::parse("min(i, 4):N").str() == "min(i, 4):N");
  CHECK(SubsetRange::parse("2:N").offset_by({SymExpr(2)}).str() == "0:N - 2");
}

TEST_CASE("disjointness") {
  CHECK(disjoint(SubsetRange::parse("0:10"), SubsetRange::parse("10:20")) == Overlap::kDisjoint);
  CHECK(disjoint(SubsetRange::parse("0:10"), SubsetRange::parse("9:20")) == Overlap::kMayOverlap);
  CHECK(disjoint(SubsetRange::parse("0:N"), SubsetRange::parse("N:2*N")) == Overlap::kDisjoint);
  CHECK(disjoint(SubsetRange::parse("i"), SubsetRange::parse("i + 1")) == Overlap::kDisjoint);
  CHECK(disjoint(SubsetRange::parse("i"), SubsetRange::parse("j")) == Overlap::kMayOverlap);
  CHECK(disjoint(SubsetRange::parse("0:4, 0:N"), SubsetRange::parse("0:4, N:N + 1")) == Overlap::kDisjoint);
  CHECK_THROWS_AS(disjoint(SubsetRange::parse("0:4"), SubsetRange::parse("0:4, 0:1")), Error);
}

TEST_CASE("property: disjoint verdicts are sound") {
  // Brute force: enumerate the index sets of both ranges under random
  // admissible bindings and look for a shared point.
  std::mt19937_64 rng(3);
  auto rand_bound = [&](bool allow_sym) {
    std::uniform_int_distribution<int> c(0, 12);
    if (!allow_sym || c(rng) < 6) return SymExpr(c(rng));
    SymExpr base = SymExpr::sym(c(rng) % 2 ? "N" : "i");
    return (base + SymExpr(c(rng) - 6)).simplify();
  };
  Assumptions as;
  as.bounds["N"] = {1, 16};
  as.bounds["i"] = {0, 16};
  int disjoint_count = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Range> ra, rb;
    for (int d = 0; d < 2; ++d) {
      SymExpr b1 = rand_bound(true), b2 = rand_bound(true);
      ra.push_back({b1, (b1 + rand_bound(false)).simplify(), SymExpr(1 + static_cast<int>(rng() % 2))});
      rb.push_back({b2, (b2 + rand_bound(false)).simplify(), SymExpr(1)});
    }
    SubsetRange a(ra), b(rb);
    if (disjoint(a, b, as) != Overlap::kDisjoint) continue;
    ++disjoint_count;
    for (std::int64_t n = 1; n <= 16; n += 3) {
      for (std::int64_t i = 0; i <= 16; i += 2) {
        Binding bind{{"N", n}, {"i", i}};
        bool shared = true;
        for (int d = 0; d < 2 && shared; ++d) {
          bool dim_shared = false;
          auto s = ra[d].step.eval(bind);
          for (auto x = ra[d].begin.eval(bind); x < ra[d].end.eval(bind); x += s) {
            if (x >= rb[d].begin.eval(bind) && x < rb[d].end.eval(bind)) dim_shared = true;
          }
          shared = dim_shared;
        }
        INFO(a.str(), " | ", b.str());
        CHECK_FALSE(shared);
      }
    }
  }
  CHECK(disjoint_count > 50);
}
