// Copyright 2026 The faultloc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace faultloc {

/// Classifies every error the library raises. Callers that need to branch
/// on the failure (the CLI exit code, tests) inspect `code()`.
enum class ErrorCode {
  kDuplicateId,
  kDanglingReference,
  kEmptyDependencySet,
  kKofNBounds,
  kInvalidTopology,
  kUnknownComponent,
  kUnknownRequestType,
  kInvalidCounts,
  kMissingPattern,
  kMissingTheta,
  kThetaOutOfRange,
  kDuplicateTermMember,
  kTooManyComponents,
  kDimensionTooHigh,
  kDegenerateLikelihood,
  kMismatchedComponents,
  kInvalidConfig,
  kInvalidScenario,
  kParse,
  kInvalidArgument,
  kInvariant,
};

const char* to_string(ErrorCode code);

/// Base error. `entity()` names the offending id when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string entity, const std::string& message)
      : std::runtime_error(message), code_(code), entity_(std::move(entity)) {}

  ErrorCode code() const { return code_; }
  const std::string& entity() const { return entity_; }

 private:
  ErrorCode code_;
  std::string entity_;
};

/// Raised when an internal consistency check fails (a bug, not bad input).
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& message)
      : Error(ErrorCode::kInvariant, "", message) {}
};

}  // namespace faultloc
