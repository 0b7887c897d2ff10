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

#include <functional>
#include <memory>
#include <string>

#include "json.hpp"
#include "raqo/catalog.h"
#include "raqo/cost_model.h"
#include "raqo/resource_config.h"

namespace raqo {

class PlanNode;
using PlanPtr = std::shared_ptr<const PlanNode>;

/// Per-join choices: implementation, resources, the smaller input size that
/// priced it, and the join's own cost (children excluded).
struct JoinChoice {
  OperatorImpl impl{OperatorImpl::kSortMergeJoin};
  ResourceConfig resources;
  double ssGB{0};
  CostReport cost;
};

/// Immutable join tree node. Subtrees are shared between candidate plans, so
/// mutating a plan only rebuilds the path above the change.
class PlanNode {
 public:
  static PlanPtr
  makeScan(const Catalog& catalog, const CostModel& model, TableId table);

  /// Throws NoJoinEdge if no edge crosses 'left' and 'right'.
  static PlanPtr makeJoin(
      const Catalog& catalog,
      PlanPtr left,
      PlanPtr right,
      const JoinChoice& choice);

  /// As above with the output estimate already known. The caller vouches
  /// for the crossing edge and the estimate.
  static PlanPtr makeJoin(
      PlanPtr left,
      PlanPtr right,
      const JoinChoice& choice,
      const SizeEstimate& estimate);

  bool isScan() const {
    return left_ == nullptr;
  }

  TableId table() const {
    return table_;
  }

  const PlanPtr& left() const {
    return left_;
  }

  const PlanPtr& right() const {
    return right_;
  }

  const JoinChoice& join() const {
    return choice_;
  }

  const RelationSet& relations() const {
    return relations_;
  }

  const SizeEstimate& estimate() const {
    return estimate_;
  }

  /// Cost of the whole subtree rooted here.
  const CostReport& cost() const {
    return cost_;
  }

  size_t joinCount() const {
    return relations_.size() - 1;
  }

  /// e.g. "((orders SMJ lineitem) BHJ customer)".
  std::string toString(const Catalog& catalog) const;

 private:
  PlanNode() = default;

  TableId table_{-1};
  PlanPtr left_;
  PlanPtr right_;
  JoinChoice choice_;
  RelationSet relations_;
  SizeEstimate estimate_;
  CostReport cost_;
};

/// Smaller of the two input sizes in GB; the ss feature of the cost model.
double smallerInputGB(const PlanNode& left, const PlanNode& right);

/// Recomputes the cost of 'plan' from the model: scans cost scanCostPerGB per
/// input GB, joins their predicted time; money accrues on joins only. Uses the
/// resources annotated on each join. Throws InfeasibleOperator.
CostReport planCost(const CostModel& model, const PlanNode& plan);

/// As above with resources supplied per join instead of read from the plan.
CostReport planCost(
    const CostModel& model,
    const PlanNode& plan,
    const std::function<ResourceConfig(const PlanNode&)>& resourcesOf);

/// Checks structure (disjoint children, crossing edge), that joins use join
/// implementations within 'cluster' (when given), and that stored costs equal
/// a recomputation. Throws InvalidArgument describing the first violation.
void validatePlan(
    const PlanNode& plan,
    const Catalog& catalog,
    const CostModel& model,
    const ClusterConditions* cluster);

nlohmann::json toJson(const PlanNode& plan, const Catalog& catalog);

/// Rebuilds a plan emitted by toJson, keeping the tree shape, implementations
/// and resources and recomputing costs under 'model'. Throws ParseError.
PlanPtr planFromJson(
    const nlohmann::json& json,
    const Catalog& catalog,
    const CostModel& model);

} // namespace raqo
