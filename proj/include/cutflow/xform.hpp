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
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cutflow/ir.hpp"

namespace cutflow {

enum class TransformKind { kMapTiling, kLoopUnroll, kTaskletFusion, kIdentity };
// "map-tiling", "loop-unroll", "tasklet-fusion", "identity"
std::string_view to_string(TransformKind k);
TransformKind transform_kind_from_string(std::string_view s);
const std::vector<TransformKind>& builtin_transformations();

enum class BugFlag { kNone, kTilingOffByOne, kTilingNoBoundGuard, kUnrollIgnoresNegativeStep, kFusionDropsLiveWrite };
// "none", "off-by-one", "no-bound-guard", "ignores-negative-step", "drops-live-write"
std::string_view to_string(BugFlag b);
BugFlag bug_from_string(std::string_view s);
/// The transformation a bug flag belongs to.
TransformKind bug_owner(BugFlag b);

/// A transformation bound to a site. Sites are node IDs (map entry for
/// tiling, intermediate access node for fusion) or state IDs (loop guard for
/// unrolling); identity has no site.
struct TransformationInstance {
  TransformKind kind = TransformKind::kIdentity;
  std::vector<std::uint64_t> site;
  std::int64_t tile_size = 32;
  BugFlag bug = BugFlag::kNone;

  /// `kind@site?tile=32&bug=off-by-one`; parameters at their defaults are
  /// omitted. Multiple site IDs are joined with ','.
  std::string id() const;
  /// Throws Error(kInvalidArgument).
  static TransformationInstance parse(std::string_view text);
  friend bool operator==(const TransformationInstance&, const TransformationInstance&) = default;
};

/// Elements a transformation touched. Endpoints of added or removed edges
/// count as modified. Interstate edits touch both endpoint states.
struct ChangeSet {
  std::set<NodeId> modified;
  std::set<NodeId> added;
  std::set<NodeId> removed;
  std::set<StateId> states;        // touched states present in the original
  std::set<StateId> added_states;  // states that exist only after the change

  bool empty() const;
  /// True when every element of `other` is also in this set.
  bool covers(const ChangeSet& other) const;
  std::string str() const;
  friend bool operator==(const ChangeSet&, const ChangeSet&) = default;
};

/// All sites where the pattern applies, ordered by site IDs.
std::vector<TransformationInstance> match(TransformKind kind, const Program& p);

struct Applied {
  Program program;
  ChangeSet changes;
};

/// Applies `t` to a copy of `p`. Throws Error(kSiteStale) when the site no
/// longer matches, Error(kInvalidArgument) for bad parameters.
Applied apply(const TransformationInstance& t, const Program& p);

/// Structural difference based on stable IDs.
ChangeSet diff(const Program& a, const Program& b);

}  // namespace cutflow
