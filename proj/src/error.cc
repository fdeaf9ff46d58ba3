// Copyright 2026 The fksynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fksynth/error.h"

namespace fksynth {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kInvalidSchema: return "InvalidSchema";
    case ErrorCode::kCyclicForeignKeys: return "CyclicForeignKeys";
    case ErrorCode::kPublicRefersToPrivate: return "PublicRefersToPrivate";
    case ErrorCode::kMultiplePrimaryPrivate: return "MultiplePrimaryPrivate";
    case ErrorCode::kInconsistentPrivacyClass:
      return "InconsistentPrivacyClass";
    case ErrorCode::kDanglingFKTarget: return "DanglingFKTarget";
    case ErrorCode::kUnknownValue: return "UnknownValue";
    case ErrorCode::kDuplicatePrimaryKey: return "DuplicatePrimaryKey";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kAttrNotInRelation: return "AttrNotInRelation";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSpecMismatch: return "SpecMismatch";
    case ErrorCode::kCliqueTooLarge: return "CliqueTooLarge";
    case ErrorCode::kNonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::kEmptyRestriction: return "EmptyRestriction";
  }
  return "Unknown";
}

}  // namespace fksynth
