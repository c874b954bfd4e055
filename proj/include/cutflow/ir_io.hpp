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

#include <string>
#include <string_view>

#include "cutflow/ir.hpp"

namespace cutflow {

inline constexpr int kProgramFormatVersion = 1;

/// Canonical `.cfprog.json` text: sorted keys, two-space indent, trailing
/// newline. Equal programs give identical bytes.
std::string serialize(const Program& p);
/// Throws Error(kMalformedDocument) or Error(kUnknownVersion).
Program deserialize(std::string_view text);

Program load_program(const std::string& path);
void save_program(const Program& p, const std::string& path);

/// Graphviz rendering, one cluster per state plus the state machine.
std::string to_dot(const Program& p);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace cutflow
