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

#include <cstdint>
#include <random>
#include <string_view>
#include <unordered_map>
#include <variant>

#include "json.hpp"
#include "raqo/catalog.h"
#include "raqo/cost_model.h"
#include "raqo/plan.h"
#include "raqo/resource.h"

namespace raqo {

/// QO plans every join on one fixed configuration; RAQO runs the resource
/// planner inside plan costing.
enum class PlannerMode { kQO, kRAQO };

enum class PlannerKind { kSelinger, kFastRandomized };

/// What the planner minimizes per join and per plan. Money is only used as a
/// fallback for money budgets and always searches the grid exhaustively.
enum class Objective { kTime, kMoney };

std::string_view toString(PlannerMode mode);
std::string_view toString(PlannerKind kind);

/// Both throw ParseError.
PlannerMode plannerModeFromString(std::string_view name);
PlannerKind plannerKindFromString(std::string_view name);

struct PlannerOptions {
  PlannerMode mode{PlannerMode::kRAQO};
  ResourceStrategy strategy{ResourceStrategy::kHillClimb};
  Objective objective{Objective::kTime};
  /// Configuration every join gets in QO mode.
  ResourceConfig qoConfig{10, 3};
  CacheLookupMode cacheMode{CacheLookupMode::kWeightedAverage};
  double cacheThresholdGB{0.1};
  /// Random restarts of the randomized planner.
  int iterations{10};
  /// Upper bound on improvement sweeps per restart.
  int maxSweeps{1000};
  uint64_t seed{0};
};

struct PlannerResult {
  PlanPtr plan;
  uint64_t totalConfigsExplored{0};
  double wallClockMillis{0};
  PlannerKind planner{PlannerKind::kSelinger};
  PlannerMode mode{PlannerMode::kRAQO};
};

/// Joint join-order and resource planner. An instance owns its resource plan
/// cache and is not reentrant; run one instance per thread. The catalog and
/// model must outlive it.
///
/// The cache persists across calls so that several queries can share it;
/// call clearCache() between queries for per-query caching.
class Planner {
 public:
  Planner(
      const Catalog& catalog,
      const CostModel& model,
      ClusterConditions cluster,
      PlannerOptions options = {});

  /// Left-deep dynamic programming over relation subsets, one best plan per
  /// subset. Supports up to kMaxSelingerRelations relations.
  PlannerResult selinger(const Query& query);

  /// Random bushy starts improved by associativity and exchange mutations
  /// until a fixed point; best over options.iterations restarts.
  PlannerResult fastRandomized(const Query& query);

  PlannerResult plan(PlannerKind kind, const Query& query);

  /// Keeps the shape and join implementations of 'fixed' and only plans
  /// resources for each join.
  PlannerResult replanResources(PlannerKind kind, const PlanPtr& fixed);

  PlanPtr scan(TableId table) const;

  /// Prices a join of two already costed subplans: runs resource planning
  /// for every join implementation (or uses the QO config), keeps the
  /// cheapest, and returns the annotated join. Throws NoFeasiblePlan.
  PlanPtr getPlanCost(const PlanPtr& left, const PlanPtr& right);

  /// Whether 'a' beats 'b' under the objective (null 'b' always loses).
  bool better(const PlanNode& a, const PlanNode* b) const;

  ResourcePlanCache& cache() {
    return cache_;
  }

  void clearCache() {
    cache_.clear();
  }

  uint64_t configsExplored() const {
    return configsExplored_;
  }

  const ClusterConditions& cluster() const {
    return cluster_;
  }

  const PlannerOptions& options() const {
    return options_;
  }

  static constexpr size_t kMaxSelingerRelations = 20;

 private:
  struct Candidate {
    OperatorImpl impl;
    ResourceConfig config;
    double time;
    double money;
  };

  std::optional<Candidate> priceImpl(OperatorImpl impl, double ssGB);

  PlanPtr joinWith(
      const PlanPtr& left,
      const PlanPtr& right,
      const std::optional<OperatorImpl>& onlyImpl);

  PlanPtr randomTree(const std::vector<TableId>& relations, std::mt19937_64& rng);
  PlanPtr improve(PlanPtr tree);
  PlanPtr sweep(const PlanPtr& node, bool& improved);
  PlanPtr tryMutations(PlanPtr node, bool& improved);
  PlanPtr tryJoin(const PlanPtr& left, const PlanPtr& right);
  PlanPtr replan(const PlanPtr& node);
  const SizeEstimate& estimateOf(const RelationSet& relations);

  const Catalog& catalog_;
  const CostModel& model_;
  ClusterConditions cluster_;
  PlannerOptions options_;
  ResourcePlanCache cache_;
  std::unordered_map<RelationSet, SizeEstimate, RelationSet::Hash> estimates_;
  uint64_t configsExplored_{0};
};

/// Pick the best plan within a resource cap (r => p).
struct ResourceBudget {
  ResourceConfig maxConfig;
};

/// Keep at or below this much container occupancy (c => (p, r)).
struct MoneyBudget {
  double maxGBSeconds{0};
};

/// Keep the given plan and only choose resources (p => r).
struct FixedPlan {
  PlanPtr plan;
};

using PlanConstraint = std::variant<ResourceBudget, MoneyBudget, FixedPlan>;

/// Runs the chosen planner under a constraint. A money budget first plans for
/// time; if that plan is over budget it replans for minimum money with an
/// exhaustive grid search and throws BudgetInfeasible if even that exceeds
/// the budget. A resource budget below the cluster minimum is also
/// BudgetInfeasible.
PlannerResult constrainedPlan(
    const Catalog& catalog,
    const CostModel& model,
    const ClusterConditions& cluster,
    const PlannerOptions& options,
    PlannerKind kind,
    const Query& query,
    const PlanConstraint& constraint);

nlohmann::json toJson(const PlannerResult& result, const Catalog& catalog);

} // namespace raqo
