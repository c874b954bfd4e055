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

// Bytecode shared by the interpreter's compiler and executor.

#include <cstdint>
#include <string>
#include <vector>

#include "cutflow/interp.hpp"

namespace cutflow::detail {

struct Value {
  bool fl = false;
  std::int64_t i = 0;
  double f = 0;
};

// Integer expressions over environment slots.
enum class IOp : std::uint8_t { kConst, kLoad, kAdd, kSub, kMul, kFloorDiv, kMod, kMin, kMax };

struct IInstr {
  IOp op;
  std::int64_t arg;
};

struct IntCode {
  std::vector<IInstr> ops;
  bool is_const = false;
  std::int64_t value = 0;
};

enum class SOp : std::uint8_t {
  kInt,
  kFloat,
  kInlet,
  kSlot,
  kNeg,
  kNot,
  kBinary,
  kCall,
  kJumpIfFalse,  // pops condition; records coverage for select site `a`
  kJump,
};

enum class Fn : std::uint8_t { kMin, kMax, kAbs, kSqrt, kExp, kLog, kSin, kCos, kTanh, kFloor, kCeil, kPow, kFloat, kInt };

struct SInstr {
  SOp op;
  ScalarExpr::Op bop = ScalarExpr::Op::kNone;
  Fn fn = Fn::kMin;
  std::int32_t a = 0;  // inlet, slot, jump target, select site
  std::int64_t i = 0;
  double f = 0;
};

struct ScalarCode {
  std::vector<SInstr> ops;
};

struct DimCode {
  IntCode begin, end, step;
  bool unit = false;  // single index: only `begin` is evaluated
};

struct MemletCode {
  int container = -1;
  int conn = -1;  // inlet or outlet index
  Wcr wcr = Wcr::kNone;
  std::vector<DimCode> dims;
};

struct TaskletCode {
  NodeId id = kNoNode;
  int n_inlets = 0;
  std::vector<MemletCode> reads;
  std::vector<MemletCode> writes;
  std::vector<ScalarCode> outs;  // indexed by outlet
};

struct Item {
  enum Kind { kTasklet, kMap, kOpaque } kind;
  int index;
};

struct MapCode {
  NodeId id = kNoNode;
  std::vector<int> slots;
  std::vector<DimCode> ranges;
  std::vector<Item> body;
};

struct StateCode {
  StateId id = 0;
  std::vector<Item> items;
};

struct EdgeCode {
  StateId src = 0, dst = 0;
  bool has_guard = false;
  ScalarCode guard;
  std::vector<std::pair<int, IntCode>> assignments;
};

struct SelectSite {
  NodeId tasklet;
  std::uint32_t ordinal;
};

struct ContainerInfo {
  std::string name;
  DataDescriptor desc;
};

struct Compiled {
  std::vector<ContainerInfo> containers;
  std::map<std::string, int> container_index;
  std::vector<std::string> slot_names;
  std::map<std::string, int> symbol_slot;
  std::vector<TaskletCode> tasklets;
  std::vector<MapCode> maps;
  std::vector<StateCode> states;
  std::map<StateId, int> state_index;
  std::vector<EdgeCode> edges;
  std::vector<std::vector<int>> out_edges;  // per state index
  std::vector<SelectSite> selects;
  StateId start = 0;
  bool has_opaque = false;
};

Compiled compile(const Program& p);

}  // namespace cutflow::detail
