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

#include "raqo/error.h"

namespace raqo {

std::string_view toString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return "InvalidArgument";
    case ErrorKind::kParseError:
      return "ParseError";
    case ErrorKind::kNoJoinEdge:
      return "NoJoinEdge";
    case ErrorKind::kUnknownImplementation:
      return "UnknownImplementation";
    case ErrorKind::kInfeasibleOperator:
      return "InfeasibleOperator";
    case ErrorKind::kNoFeasibleConfig:
      return "NoFeasibleConfig";
    case ErrorKind::kNoFeasiblePlan:
      return "NoFeasiblePlan";
    case ErrorKind::kBudgetInfeasible:
      return "BudgetInfeasible";
    case ErrorKind::kMalformedTree:
      return "MalformedTree";
  }
  return "Unknown";
}

} // namespace raqo
