/*
 * Copyright 2026 The FheFL Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fhefl/error.hpp"

namespace fhefl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDomainMismatch: return "domain mismatch";
    case ErrorCode::kLevelMismatch: return "level mismatch";
    case ErrorCode::kLevelExhausted: return "level exhausted";
    case ErrorCode::kScaleMismatch: return "scale mismatch";
    case ErrorCode::kOverflow: return "overflow";
    case ErrorCode::kIncompleteRoster: return "incomplete roster";
    case ErrorCode::kDuplicateMessage: return "duplicate message";
    case ErrorCode::kMismatchedCommonPoly: return "mismatched common polynomial";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kInfeasible: return "infeasible parameters";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kNumerical: return "numerical failure";
    case ErrorCode::kSerialization: return "serialization error";
    case ErrorCode::kUnknownPreset: return "unknown preset";
  }
  return "unknown error";
}

}  // namespace fhefl
