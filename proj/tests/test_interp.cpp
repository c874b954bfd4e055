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

#include <cmath>
#include <random>

#include "cutflow/builder.hpp"
#include "cutflow/cfdata.hpp"
#include "cutflow/error.hpp"
#include "cutflow/fixtures.hpp"
#include "cutflow/interp.hpp"
#include "doctest.h"

using namespace cutflow;

namespace {

Buffer matrix(std::int64_t n, const std::vector<double>& values) {
  Buffer b = Buffer::zeros(DType::kF64, {n, n});
  b.f = values;
  return b;
}

std::vector<double> identity(std::int64_t n) {
  std::vector<double> v(static_cast<std::size_t>(n * n), 0.0);
  for (std::int64_t i = 0; i < n; ++i) v[static_cast<std::size_t>(i * n + i)] = 1.0;
  return v;
}

std::vector<double> dense_matmul(const std::vector<double>& a, const std::vector<double>& b, std::int64_t n) {
  std::vector<double> c(static_cast<std::size_t>(n * n), 0.0);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::int64_t k = 0; k < n; ++k) s += a[static_cast<std::size_t>(i * n + k)] * b[static_cast<std::size_t>(k * n + j)];
      c[static_cast<std::size_t>(i * n + j)] = s;
    }
  return c;
}

FaultKind fault_of(const Program& p, const ExecutionInput& in) {
  auto out = run(p, in);
  REQUIRE(out.status == Status::kFault);
  return out.fault->kind;
}

// One state, one mapped tasklet over i in [0, N) writing `out_subset` of an
// i64 vector `o` from code `expr`.
Program one_map(const std::string& expr, const std::string& out_subset, Wcr wcr = Wcr::kNone,
                const std::string& step = "1") {
  ProgramBuilder b("one_map");
  b.add_symbol("N");
  b.add_symbol("S");
  b.add_container("x", DType::kI64, {SymExpr::sym("N")}, false);
  b.add_container("o", DType::kI64, {SymExpr::sym("N")}, false);
  StateId st = b.add_state("s");
  NodeId x = b.add_access(st, "x"), o = b.add_access(st, "o");
  b.add_mapped_tasklet(st, "t", {"i"}, {Range{0, SymExpr::sym("N"), SymExpr::parse(step)}}, {{"a", x, "i"}},
                       {{"r", expr}}, {{"r", o, out_subset, wcr}});
  return b.build();
}

}  // namespace

TEST_CASE("matrix chain of identities") {
  Program p = fixtures::matrix_chain();
  ExecutionInput in;
  in.symbols["N"] = 2;
  for (const char* name : {"A", "B", "C", "D"}) in.data[name] = matrix(2, identity(2));
  auto out = run(p, in);
  CHECK(out.status == Status::kCompleted);
  CHECK(out.containers.at("R").f == identity(2));
}

TEST_CASE("matrix chain matches a dense product oracle") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> d(-4, 4);
  const std::int64_t n = 3;
  std::map<std::string, std::vector<double>> m;
  ExecutionInput in;
  in.symbols["N"] = n;
  for (const char* name : {"A", "B", "C", "D"}) {
    std::vector<double> v(9);
    for (auto& x : v) x = d(rng);
    m[name] = v;
    in.data[name] = matrix(n, v);
  }
  auto out = run(fixtures::matrix_chain(), in);
  REQUIRE(out.status == Status::kCompleted);
  auto expect = dense_matmul(dense_matmul(dense_matmul(m["A"], m["B"], n), m["C"], n), m["D"], n);
  CHECK(out.containers.at("R").f == expect);
  CHECK(out.containers.at("U").f == dense_matmul(m["A"], m["B"], n));
  CHECK(out.containers.count("tmp1") == 0);
}

TEST_CASE("determinism over repeated runs") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-1, 1);
  ExecutionInput in;
  in.symbols["N"] = 7;
  for (const char* name : {"A", "B", "C", "D"}) {
    std::vector<double> v(49);
    for (auto& x : v) x = d(rng);
    in.data[name] = matrix(7, v);
  }
  Interpreter interp(fixtures::matrix_chain());
  auto first = interp.run(in);
  for (int k = 0; k < 100; ++k) {
    auto again = interp.run(in);
    CHECK(compare_states(first, again, {"R", "U", "V"}, 0).kind == Comparison::Kind::kEqual);
    CHECK(again.steps == first.steps);
  }
}

TEST_CASE("negative step loop") {
  Program p = fixtures::negative_step_loop();
  ExecutionInput in;
  Buffer bb = Buffer::zeros(DType::kF64, {4});
  bb.f = {10, 20, 30, 40};
  in.data["B"] = bb;
  auto out = run(p, in);
  REQUIRE(out.status == Status::kCompleted);
  // A[i-1] = B[i-1] + i for i = 4, 3, 2, 1.
  CHECK(out.containers.at("A").f == std::vector<double>{11, 22, 33, 44});
  CHECK(out.coverage.interstate_edges.size() == 4);
}

TEST_CASE("wcr sum over integers is order independent") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::int64_t> d(-1000000, 1000000);
  Program fwd = one_map("a", "0", Wcr::kSum);
  Program rev = one_map("a", "0", Wcr::kSum);
  // Reverse the visiting order by reading x[N - 1 - i].
  for (auto& e : rev.states[0].edges) {
    if (e.memlet.container == "x" && e.dst_conn == "a") e.memlet.subset = SubsetRange::parse("N - 1 - i");
  }
  for (int trial = 0; trial < 20; ++trial) {
    ExecutionInput in;
    in.symbols["N"] = 1 + trial;
    Buffer x = Buffer::zeros(DType::kI64, {1 + trial});
    for (auto& v : x.i) v = d(rng);
    in.data["x"] = x;
    auto a = run(fwd, in), b = run(rev, in);
    REQUIRE(a.status == Status::kCompleted);
    CHECK(compare_states(a, b, {"o"}, 0).kind == Comparison::Kind::kEqual);
  }
}

TEST_CASE("faults carry kind and node") {
  SUBCASE("out of bounds") {
    Program p = fixtures::first_ten();
    ExecutionInput in;
    in.symbols["N"] = 5;
    auto out = run(p, in);
    REQUIRE(out.status == Status::kFault);
    CHECK(out.fault->kind == FaultKind::kOutOfBounds);
    const Node* n = p.node(out.fault->node);
    REQUIRE(n);
    CHECK(n->is<TaskletNode>());
  }
  SUBCASE("division by zero") {
    ExecutionInput in{{{"N", 3}}, {}};
    CHECK(fault_of(one_map("7 / a", "i"), in) == FaultKind::kDivisionByZero);
    CHECK(fault_of(one_map("7 % a", "i"), in) == FaultKind::kDivisionByZero);
  }
  SUBCASE("write conflict without combiner") {
    ExecutionInput in{{{"N", 3}}, {}};
    CHECK(fault_of(one_map("a", "0"), in) == FaultKind::kWriteConflict);
    CHECK(run(one_map("a", "0", Wcr::kMax), in).status == Status::kCompleted);
  }
  SUBCASE("invalid range") {
    ExecutionInput in{{{"N", 3}, {"S", 0}}, {}};
    CHECK(fault_of(one_map("a", "i", Wcr::kNone, "S"), in) == FaultKind::kInvalidRange);
  }
  SUBCASE("unbound symbol") {
    ExecutionInput in{{{"N", 3}}, {}};
    CHECK(fault_of(one_map("a + S", "i"), in) == FaultKind::kUnboundSymbol);
  }
  SUBCASE("non-scalar access") {
    ExecutionInput in{{{"N", 3}}, {}};
    CHECK(fault_of(one_map("a", "0:2"), in) == FaultKind::kNonScalarAccess);
  }
  SUBCASE("float to integer conversion of NaN") {
    ExecutionInput in{{{"N", 3}}, {}};
    CHECK(fault_of(one_map("0.0 / 0.0", "i"), in) == FaultKind::kTypeError);
  }
}

TEST_CASE("timeout") {
  ExecutionInput in;
  in.symbols["N"] = 4;
  auto out = run(fixtures::matrix_chain(), in, 50);
  CHECK(out.status == Status::kTimeout);
  CHECK(out.steps == 51);
}

TEST_CASE("input shape mismatch is an error") {
  Program p = fixtures::first_ten();
  auto code_of = [&](const ExecutionInput& in) {
    try {
      run(p, in);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  CHECK(code_of(ExecutionInput{}) == ErrorCode::kInputShapeMismatch);
  ExecutionInput wrong_len{{{"N", 12}}, {{"my_arr", Buffer::zeros(DType::kF64, {11})}}};
  CHECK(code_of(wrong_len) == ErrorCode::kInputShapeMismatch);
  ExecutionInput wrong_type{{{"N", 12}}, {{"my_arr", Buffer::zeros(DType::kI64, {12})}}};
  CHECK(code_of(wrong_type) == ErrorCode::kInputShapeMismatch);
}

TEST_CASE("store casts to the container type") {
  ProgramBuilder b("casts");
  for (auto [name, t] : {std::pair{"f", DType::kF32}, {"i", DType::kI32}, {"b", DType::kBool}, {"l", DType::kI64}}) {
    b.add_container(name, t, {}, false);
  }
  StateId st = b.add_state("s");
  NodeId t = b.add_tasklet(st, "t", {}, {"a", "c", "d", "e"},
                           {{"a", "0.1"}, {"c", "2147483648 + 5"}, {"d", "0.5"}, {"e", "-2.7"}});
  b.add_memlet(st, t, "a", b.add_access(st, "f"), "", "f", "");
  b.add_memlet(st, t, "c", b.add_access(st, "i"), "", "i", "");
  b.add_memlet(st, t, "d", b.add_access(st, "b"), "", "b", "");
  b.add_memlet(st, t, "e", b.add_access(st, "l"), "", "l", "");
  auto out = run(b.build(), {});
  REQUIRE(out.status == Status::kCompleted);
  CHECK(out.containers.at("f").f[0] == static_cast<double>(0.1f));
  CHECK(out.containers.at("i").i[0] == -2147483643);
  CHECK(out.containers.at("b").i[0] == 1);
  CHECK(out.containers.at("l").i[0] == -2);
}

TEST_CASE("select coverage") {
  Program p = fixtures::branchy();
  auto with_x = [&](double x) {
    ExecutionInput in;
    Buffer b = Buffer::zeros(DType::kF64, {});
    b.f[0] = x;
    in.data["x"] = b;
    return run(p, in);
  };
  auto low = with_x(0.1), mid = with_x(0.95), high = with_x(0.995);
  CHECK(low.containers.at("out").f[0] == doctest::Approx(1.1));
  CHECK(mid.containers.at("out").f[0] == doctest::Approx(1.95));
  CHECK(high.containers.at("out").f[0] == doctest::Approx(-0.005));
  CHECK(low.coverage.branches.size() == 1);
  CHECK(mid.coverage.branches.size() == 2);
  CHECK(high.coverage.branches.size() == 2);
  CHECK(mid.coverage.branches != high.coverage.branches);
}

TEST_CASE("nondeterministic guards warn and take the first edge") {
  ProgramBuilder b("nd");
  b.add_symbol("N");
  b.add_container("o", DType::kI64, {}, false);
  StateId s0 = b.add_state("s0");
  StateId s1 = b.add_state("s1");
  StateId s2 = b.add_state("s2");
  for (auto [st, value] : {std::pair{s1, "1"}, {s2, "2"}}) {
    NodeId t = b.add_tasklet(st, "t", {}, {"r"}, {{"r", value}});
    b.add_memlet(st, t, "r", b.add_access(st, "o"), "", "o", "");
  }
  b.add_interstate(s0, s1, "N > 0");
  b.add_interstate(s0, s2, "N > 1");
  auto out = run(b.build(), ExecutionInput{{{"N", 5}}, {}});
  CHECK(out.containers.at("o").i[0] == 1);
  REQUIRE(out.warnings.size() == 1);
  CHECK(out.warnings[0].find("NondeterminismWarning") == 0);
}

TEST_CASE("compare_states") {
  auto scalar = [](double v) {
    ExecutionOutcome o;
    Buffer b = Buffer::zeros(DType::kF64, {});
    b.f[0] = v;
    o.containers["s"] = b;
    return o;
  };
  using K = Comparison::Kind;
  CHECK(compare_states(scalar(1.0), scalar(1.0), {"s"}, 1e-5).kind == K::kEqual);
  CHECK(compare_states(scalar(1.0), scalar(1.0 + 1e-7), {"s"}, 1e-5).kind == K::kEqual);
  CHECK(compare_states(scalar(1.0), scalar(1.0 + 1e-3), {"s"}, 1e-5).kind == K::kDiffers);
  CHECK(compare_states(scalar(1.0), scalar(1.0 + 1e-7), {"s"}, 0).kind == K::kDiffers);
  CHECK(compare_states(scalar(NAN), scalar(1.0), {"s"}, 1e-5).kind == K::kDiffers);
  CHECK(compare_states(scalar(NAN), scalar(NAN), {"s"}, 1e-5).kind == K::kEqual);
  CHECK(compare_states(scalar(INFINITY), scalar(INFINITY), {"s"}, 1e-5).kind == K::kEqual);
  ExecutionOutcome faulted = scalar(1.0);
  faulted.status = Status::kFault;
  faulted.fault = Fault{FaultKind::kOutOfBounds, 3, ""};
  CHECK(compare_states(scalar(1.0), faulted, {"s"}, 1e-5).kind == K::kStatusMismatch);
  CHECK_THROWS_AS(compare_states(scalar(1.0), scalar(1.0), {"missing"}, 0), Error);
}

TEST_CASE("cfdata round trip") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    ExecutionInput in;
    in.symbols["N"] = static_cast<std::int64_t>(rng() % 100) - 50;
    in.symbols["M"] = static_cast<std::int64_t>(rng());
    for (DType t : {DType::kF64, DType::kF32, DType::kI64, DType::kI32, DType::kBool}) {
      std::vector<std::int64_t> shape;
      for (std::uint64_t d = rng() % 3; d > 0; --d) shape.push_back(static_cast<std::int64_t>(rng() % 4));
      Buffer b = Buffer::zeros(t, shape);
      for (auto& v : b.f) v = t == DType::kF32 ? static_cast<float>(std::ldexp(double(rng() % 1000), -7)) : double(rng()) / 3;
      for (auto& v : b.i) {
        v = static_cast<std::int64_t>(rng());
        if (t == DType::kI32) v = static_cast<std::int32_t>(v);
        if (t == DType::kBool) v &= 1;
      }
      in.data[std::string("c_") + std::string(to_string(t))] = b;
    }
    std::string bytes = encode_data(in);
    ExecutionInput back = decode_data(bytes);
    CHECK(back.symbols == in.symbols);
    CHECK(back.data == in.data);
    CHECK(encode_data(back) == bytes);
  }
}

TEST_CASE("cfdata rejects corrupt bytes") {
  ExecutionInput in{{{"N", 3}}, {{"x", Buffer::zeros(DType::kF64, {3})}}};
  std::string bytes = encode_data(in);
  CHECK_THROWS_AS(decode_data(bytes.substr(0, bytes.size() - 1)), Error);
  CHECK_THROWS_AS(decode_data(bytes + "x"), Error);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_data(bad), Error);
  CHECK_THROWS_AS(decode_data(""), Error);
}
