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

#include "cutflow/error.hpp"

namespace cutflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kUnboundSymbol: return "UnboundSymbol";
    case ErrorCode::kDivisionByZero: return "DivisionByZero";
    case ErrorCode::kNegativeExtent: return "NegativeExtent";
    case ErrorCode::kInvalidStep: return "InvalidStep";
    case ErrorCode::kRankMismatch: return "RankMismatch";
    case ErrorCode::kDuplicateName: return "DuplicateName";
    case ErrorCode::kUnknownContainer: return "UnknownContainer";
    case ErrorCode::kUnknownElement: return "UnknownElement";
    case ErrorCode::kMalformedDocument: return "MalformedDocument";
    case ErrorCode::kUnknownVersion: return "UnknownVersion";
    case ErrorCode::kInputShapeMismatch: return "InputShapeMismatch";
    case ErrorCode::kSiteStale: return "SiteStale";
    case ErrorCode::kTransformationInapplicable: return "TransformationInapplicable";
    case ErrorCode::kEmptyInterval: return "EmptyInterval";
    case ErrorCode::kEmptyChangeSet: return "EmptyChangeSet";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace cutflow
