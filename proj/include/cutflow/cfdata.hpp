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

#include "cutflow/interp.hpp"

namespace cutflow {

/// Binary `.cfdata` layout, all integers little-endian:
///
///   "CFDATA1\0"
///   u32 symbol count, then per symbol: u32 name length, name bytes, i64 value
///   u32 buffer count, then per buffer: u32 name length, name bytes,
///       u8 dtype, u32 rank, i64 dims[rank], payload
///
/// Payload elements use the dtype's natural width (bool is one byte).
/// Entries are written in name order, so equal inputs give equal bytes.
std::string encode_data(const ExecutionInput& in);
/// Throws Error(kMalformedDocument) on truncated or inconsistent data.
ExecutionInput decode_data(std::string_view bytes);

ExecutionInput load_data(const std::string& path);
void save_data(const ExecutionInput& in, const std::string& path);

}  // namespace cutflow
