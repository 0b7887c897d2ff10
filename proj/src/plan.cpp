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

#include "raqo/plan.h"

#include <algorithm>
#include <cmath>

#include "raqo/error.h"

namespace raqo {

PlanPtr PlanNode::makeScan(
    const Catalog& catalog,
    const CostModel& model,
    TableId table) {
  auto node = std::shared_ptr<PlanNode>(new PlanNode());
  node->table_ = table;
  node->relations_ = catalog.singleton(table);
  node->estimate_ = estimateRelations(catalog, node->relations_);
  node->cost_ = {model.scanCost(node->estimate_.gigabytes()), 0};
  return node;
}

PlanPtr PlanNode::makeJoin(
    const Catalog& catalog,
    PlanPtr left,
    PlanPtr right,
    const JoinChoice& choice) {
  const auto estimate =
      estimateJoinOutput(catalog, left->relations(), right->relations());
  return makeJoin(std::move(left), std::move(right), choice, estimate);
}

PlanPtr PlanNode::makeJoin(
    PlanPtr left,
    PlanPtr right,
    const JoinChoice& choice,
    const SizeEstimate& estimate) {
  auto node = std::shared_ptr<PlanNode>(new PlanNode());
  node->estimate_ = estimate;
  node->relations_ = left->relations() | right->relations();
  node->choice_ = choice;
  node->cost_ = left->cost() + right->cost() + choice.cost;
  node->left_ = std::move(left);
  node->right_ = std::move(right);
  return node;
}

std::string PlanNode::toString(const Catalog& catalog) const {
  if (isScan()) {
    return catalog.table(table_).name;
  }
  return "(" + left_->toString(catalog) + " " +
      std::string(raqo::toString(choice_.impl)) + " " +
      right_->toString(catalog) + ")";
}

double smallerInputGB(const PlanNode& left, const PlanNode& right) {
  return std::min(left.estimate().gigabytes(), right.estimate().gigabytes());
}

CostReport planCost(
    const CostModel& model,
    const PlanNode& plan,
    const std::function<ResourceConfig(const PlanNode&)>& resourcesOf) {
  if (plan.isScan()) {
    return {model.scanCost(plan.estimate().gigabytes()), 0};
  }
  const auto left = planCost(model, *plan.left(), resourcesOf);
  const auto right = planCost(model, *plan.right(), resourcesOf);
  const auto resources = resourcesOf(plan);
  const double time = model.joinCost(
      plan.join().impl, smallerInputGB(*plan.left(), *plan.right()), resources);
  return left + right + CostReport{time, moneyOf(time, resources)};
}

CostReport planCost(const CostModel& model, const PlanNode& plan) {
  return planCost(
      model, plan, [](const PlanNode& node) { return node.join().resources; });
}

namespace {

bool nearlyEqual(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

void fail(const std::string& message) {
  throw RaqoError(ErrorKind::kInvalidArgument, "invalid plan: " + message);
}

void validateNode(
    const PlanNode& node,
    const Catalog& catalog,
    const CostModel& model,
    const ClusterConditions* cluster) {
  if (node.isScan()) {
    if (node.relations() != catalog.singleton(node.table())) {
      fail("scan relation set mismatch");
    }
    return;
  }
  const auto& left = *node.left();
  const auto& right = *node.right();
  validateNode(left, catalog, model, cluster);
  validateNode(right, catalog, model, cluster);
  const auto label = node.toString(catalog);
  if (left.relations().intersects(right.relations())) {
    fail("overlapping children in " + label);
  }
  if (!hasCrossingEdge(catalog, left.relations(), right.relations())) {
    fail("cross product in " + label);
  }
  if (node.relations() != (left.relations() | right.relations())) {
    fail("relation set mismatch in " + label);
  }
  const auto& choice = node.join();
  if (!isJoin(choice.impl)) {
    fail("scan implementation on a join in " + label);
  }
  if (cluster != nullptr && !cluster->contains(choice.resources)) {
    fail(
        "resources " + toString(choice.resources) + " outside cluster in " +
        label);
  }
  if (!nearlyEqual(choice.ssGB, smallerInputGB(left, right))) {
    fail("stale ssGB in " + label);
  }
  const double time = model.joinCost(choice.impl, choice.ssGB, choice.resources);
  if (!nearlyEqual(time, choice.cost.timeSeconds) ||
      !nearlyEqual(
          moneyOf(time, choice.resources), choice.cost.moneyGBSeconds)) {
    fail("join cost is not self-consistent in " + label);
  }
}

} // namespace

void validatePlan(
    const PlanNode& plan,
    const Catalog& catalog,
    const CostModel& model,
    const ClusterConditions* cluster) {
  validateNode(plan, catalog, model, cluster);
  const auto recomputed = planCost(model, plan);
  if (!nearlyEqual(recomputed.timeSeconds, plan.cost().timeSeconds) ||
      !nearlyEqual(recomputed.moneyGBSeconds, plan.cost().moneyGBSeconds)) {
    fail("subtree cost is not self-consistent");
  }
}

nlohmann::json toJson(const PlanNode& plan, const Catalog& catalog) {
  if (plan.isScan()) {
    return {
        {"scan", catalog.table(plan.table()).name},
        {"rowCount", plan.estimate().rowCount},
        {"timeSeconds", plan.cost().timeSeconds}};
  }
  const auto& choice = plan.join();
  return {
      {"impl", std::string(toString(choice.impl))},
      {"containerCount", choice.resources.containerCount},
      {"containerGB", choice.resources.containerGB},
      {"ssGB", choice.ssGB},
      {"timeSeconds", choice.cost.timeSeconds},
      {"moneyGBSeconds", choice.cost.moneyGBSeconds},
      {"rowCount", plan.estimate().rowCount},
      {"left", toJson(*plan.left(), catalog)},
      {"right", toJson(*plan.right(), catalog)}};
}

namespace {

PlanPtr rebuild(
    const nlohmann::json& json,
    const Catalog& catalog,
    const CostModel& model) {
  if (json.contains("scan")) {
    return PlanNode::makeScan(
        catalog, model, catalog.tableId(json.at("scan").get<std::string>()));
  }
  auto left = rebuild(json.at("left"), catalog, model);
  auto right = rebuild(json.at("right"), catalog, model);
  JoinChoice choice;
  choice.impl = operatorImplFromString(json.at("impl").get<std::string>());
  choice.resources = {
      json.at("containerCount").get<int64_t>(),
      json.at("containerGB").get<int64_t>()};
  choice.ssGB = smallerInputGB(*left, *right);
  const double time = model.joinCost(choice.impl, choice.ssGB, choice.resources);
  choice.cost = {time, moneyOf(time, choice.resources)};
  return PlanNode::makeJoin(catalog, std::move(left), std::move(right), choice);
}

} // namespace

PlanPtr planFromJson(
    const nlohmann::json& json,
    const Catalog& catalog,
    const CostModel& model) {
  try {
    const auto& root = json.contains("plan") ? json.at("plan") : json;
    return rebuild(root, catalog, model);
  } catch (const nlohmann::json::exception& e) {
    throw RaqoError(ErrorKind::kParseError, e.what());
  } catch (const RaqoError& e) {
    if (e.kind() == ErrorKind::kParseError) {
      throw;
    }
    throw RaqoError(ErrorKind::kParseError, e.what());
  }
}

} // namespace raqo
