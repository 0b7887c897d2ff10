/*
 * Copyright (c) The RAQO Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace raqo {

enum class ErrorKind {
  kInvalidArgument,
  kParseError,
  kNoJoinEdge,
  kUnknownImplementation,
  kInfeasibleOperator,
  kNoFeasibleConfig,
  kNoFeasiblePlan,
  kBudgetInfeasible,
  kMalformedTree,
};

std::string_view toString(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to a distinct exit status.
class RaqoError : public std::runtime_error {
 public:
  RaqoError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(toString(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const {
    return kind_;
  }

 private:
  ErrorKind kind_;
};

} // namespace raqo
