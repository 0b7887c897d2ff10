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

#include "raqo/planner.h"

#include <algorithm>
#include <bit>
#include <chrono>
#include <numeric>

#include "raqo/error.h"

namespace raqo {

std::string_view toString(PlannerMode mode) {
  return mode == PlannerMode::kQO ? "qo" : "raqo";
}

std::string_view toString(PlannerKind kind) {
  return kind == PlannerKind::kSelinger ? "Selinger" : "FastRandomized";
}

PlannerMode plannerModeFromString(std::string_view name) {
  if (name == "qo") {
    return PlannerMode::kQO;
  }
  if (name == "raqo") {
    return PlannerMode::kRAQO;
  }
  throw RaqoError(
      ErrorKind::kParseError, "unknown mode " + std::string(name));
}

PlannerKind plannerKindFromString(std::string_view name) {
  if (name == "selinger" || name == "Selinger") {
    return PlannerKind::kSelinger;
  }
  if (name == "randomized" || name == "FastRandomized") {
    return PlannerKind::kFastRandomized;
  }
  throw RaqoError(
      ErrorKind::kParseError, "unknown planner " + std::string(name));
}

namespace {

class Stopwatch {
 public:
  double elapsedMillis() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_{
      std::chrono::steady_clock::now()};
};

} // namespace

Planner::Planner(
    const Catalog& catalog,
    const CostModel& model,
    ClusterConditions cluster,
    PlannerOptions options)
    : catalog_(catalog),
      model_(model),
      cluster_(cluster),
      options_(options),
      cache_(cluster, options.cacheMode, options.cacheThresholdGB) {
  cluster_.validate();
  if (options_.iterations < 1 || options_.maxSweeps < 1) {
    throw RaqoError(
        ErrorKind::kInvalidArgument, "iterations and maxSweeps must be >= 1");
  }
}

PlanPtr Planner::scan(TableId table) const {
  return PlanNode::makeScan(catalog_, model_, table);
}

std::optional<Planner::Candidate> Planner::priceImpl(
    OperatorImpl impl,
    double ssGB) {
  if (options_.mode == PlannerMode::kQO) {
    const auto cost = model_.tryJoinCost(impl, ssGB, options_.qoConfig);
    if (!cost) {
      return std::nullopt;
    }
    return Candidate{
        impl, options_.qoConfig, *cost, moneyOf(*cost, options_.qoConfig)};
  }

  if (options_.objective == Objective::kMoney) {
    std::optional<Candidate> best;
    for (auto count = cluster_.minConfig.containerCount;
         count <= cluster_.maxConfig.containerCount;
         count += cluster_.stepSize[0]) {
      for (auto gb = cluster_.minConfig.containerGB;
           gb <= cluster_.maxConfig.containerGB;
           gb += cluster_.stepSize[1]) {
        const ResourceConfig config{count, gb};
        ++configsExplored_;
        const auto cost = model_.tryJoinCost(impl, ssGB, config);
        if (!cost) {
          continue;
        }
        const double money = moneyOf(*cost, config);
        if (!best || money < best->money ||
            (money == best->money && *cost < best->time)) {
          best = Candidate{impl, config, *cost, money};
        }
      }
    }
    return best;
  }

  auto search = searchResources(
      model_, impl, ssGB, cluster_, &cache_, options_.strategy);
  configsExplored_ += search.configsExplored;
  if (!search.decision) {
    return std::nullopt;
  }
  const auto& decision = *search.decision;
  return Candidate{
      impl,
      decision.config,
      decision.costSeconds,
      moneyOf(decision.costSeconds, decision.config)};
}

PlanPtr Planner::joinWith(
    const PlanPtr& left,
    const PlanPtr& right,
    const std::optional<OperatorImpl>& onlyImpl) {
  if (!hasCrossingEdge(catalog_, left->relations(), right->relations())) {
    throw RaqoError(ErrorKind::kNoJoinEdge, "join would be a cross product");
  }
  const double ssGB = smallerInputGB(*left, *right);
  const bool byMoney = options_.objective == Objective::kMoney;
  std::optional<Candidate> best;
  for (auto impl : kJoinImpls) {
    if (!model_.hasCoefficients(impl) || (onlyImpl && impl != *onlyImpl)) {
      continue;
    }
    const auto candidate = priceImpl(impl, ssGB);
    if (!candidate) {
      continue;
    }
    const auto key = [&](const Candidate& c) {
      return byMoney ? std::make_pair(c.money, c.time)
                     : std::make_pair(c.time, c.money);
    };
    if (!best || key(*candidate) < key(*best)) {
      best = candidate;
    }
  }
  if (!best) {
    throw RaqoError(
        ErrorKind::kNoFeasiblePlan,
        "no join implementation is feasible for " + left->toString(catalog_) +
            " and " + right->toString(catalog_));
  }
  JoinChoice choice{
      best->impl, best->config, ssGB, CostReport{best->time, best->money}};
  return PlanNode::makeJoin(
      left, right, choice, estimateOf(left->relations() | right->relations()));
}

const SizeEstimate& Planner::estimateOf(const RelationSet& relations) {
  auto it = estimates_.find(relations);
  if (it == estimates_.end()) {
    it = estimates_.emplace(relations, estimateRelations(catalog_, relations)).first;
  }
  return it->second;
}

PlanPtr Planner::getPlanCost(const PlanPtr& left, const PlanPtr& right) {
  return joinWith(left, right, std::nullopt);
}

bool Planner::better(const PlanNode& a, const PlanNode* b) const {
  if (b == nullptr) {
    return true;
  }
  const auto& ca = a.cost();
  const auto& cb = b->cost();
  if (options_.objective == Objective::kMoney) {
    return ca.moneyGBSeconds < cb.moneyGBSeconds ||
        (ca.moneyGBSeconds == cb.moneyGBSeconds &&
         ca.timeSeconds < cb.timeSeconds);
  }
  return ca.timeSeconds < cb.timeSeconds ||
      (ca.timeSeconds == cb.timeSeconds &&
       ca.moneyGBSeconds < cb.moneyGBSeconds);
}

PlannerResult Planner::selinger(const Query& query) {
  const Stopwatch stopwatch;
  const auto startExplored = configsExplored_;
  resolveQuery(catalog_, query);
  std::vector<TableId> ids;
  for (const auto& name : query.relations) {
    ids.push_back(catalog_.tableId(name));
  }
  const size_t n = ids.size();
  if (n > kMaxSelingerRelations) {
    throw RaqoError(
        ErrorKind::kInvalidArgument,
        "Selinger supports at most " + std::to_string(kMaxSelingerRelations) +
            " relations");
  }

  std::vector<uint32_t> adjacent(n, 0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i != j && catalog_.edgeBetween(ids[i], ids[j])) {
        adjacent[i] |= uint32_t{1} << j;
      }
    }
  }

  std::vector<PlanPtr> best(size_t{1} << n);
  for (size_t i = 0; i < n; ++i) {
    best[size_t{1} << i] = scan(ids[i]);
  }
  // Every proper subset of a mask is numerically smaller, so ascending order
  // sees each subset before its supersets.
  for (uint32_t mask = 1; mask < (uint32_t{1} << n); ++mask) {
    if (std::popcount(mask) < 2) {
      continue;
    }
    for (size_t i = 0; i < n; ++i) {
      const uint32_t bit = uint32_t{1} << i;
      if (!(mask & bit)) {
        continue;
      }
      const uint32_t rest = mask & ~bit;
      if (!best[rest] || !(adjacent[i] & rest)) {
        continue;
      }
      auto candidate = getPlanCost(best[rest], best[bit]);
      if (better(*candidate, best[mask].get())) {
        best[mask] = std::move(candidate);
      }
    }
  }

  PlannerResult result;
  result.plan = best[(size_t{1} << n) - 1];
  result.totalConfigsExplored = configsExplored_ - startExplored;
  result.wallClockMillis = stopwatch.elapsedMillis();
  result.planner = PlannerKind::kSelinger;
  result.mode = options_.mode;
  return result;
}

PlanPtr Planner::randomTree(
    const std::vector<TableId>& relations,
    std::mt19937_64& rng) {
  const size_t n = relations.size();
  std::vector<int> local(catalog_.tableCount(), -1);
  for (size_t i = 0; i < n; ++i) {
    local[relations[i]] = static_cast<int>(i);
  }
  std::vector<std::pair<int, int>> edges;
  for (size_t e = 0; e < catalog_.edges().size(); ++e) {
    const auto [a, b] = catalog_.endpoints(e);
    if (local[a] >= 0 && local[b] >= 0) {
      edges.emplace_back(local[a], local[b]);
    }
  }
  std::shuffle(edges.begin(), edges.end(), rng);

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<PlanPtr> plans(n);
  for (size_t i = 0; i < n; ++i) {
    plans[i] = scan(relations[i]);
  }
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  int root = 0;
  for (const auto& [a, b] : edges) {
    const int ra = find(a);
    const int rb = find(b);
    if (ra == rb) {
      continue;
    }
    const bool swap = (rng() & 1) != 0;
    plans[ra] = swap ? getPlanCost(plans[rb], plans[ra])
                     : getPlanCost(plans[ra], plans[rb]);
    plans[rb].reset();
    parent[rb] = ra;
    root = ra;
  }
  return plans[find(root)];
}

PlanPtr Planner::tryJoin(const PlanPtr& left, const PlanPtr& right) {
  try {
    return getPlanCost(left, right);
  } catch (const RaqoError& e) {
    if (e.kind() == ErrorKind::kNoFeasiblePlan) {
      return nullptr;
    }
    throw;
  }
}

PlanPtr Planner::tryMutations(PlanPtr node, bool& improved) {
  const bool byMoney = options_.objective == Objective::kMoney;
  auto objective = [&](const PlanNode& plan) {
    return byMoney ? plan.cost().moneyGBSeconds : plan.cost().timeSeconds;
  };
  auto accept = [&](PlanPtr candidate) {
    if (candidate && objective(*candidate) < objective(*node)) {
      node = std::move(candidate);
      improved = true;
    }
  };
  auto crosses = [&](const PlanPtr& a, const PlanPtr& b) {
    return hasCrossingEdge(catalog_, a->relations(), b->relations());
  };

  // Exchange: swap the two inputs.
  accept(tryJoin(node->right(), node->left()));

  // Associativity: (A B) C -> A (B C).
  if (!node->left()->isScan()) {
    const auto a = node->left()->left();
    const auto b = node->left()->right();
    const auto c = node->right();
    if (crosses(b, c)) {
      if (auto inner = tryJoin(b, c)) {
        accept(tryJoin(a, inner));
      }
    }
  }
  // Associativity: A (B C) -> (A B) C.
  if (!node->right()->isScan()) {
    const auto a = node->left();
    const auto b = node->right()->left();
    const auto c = node->right()->right();
    if (crosses(a, b)) {
      if (auto inner = tryJoin(a, b)) {
        accept(tryJoin(inner, c));
      }
    }
  }
  // Left join exchange: (A B) C -> (A C) B.
  if (!node->left()->isScan()) {
    const auto a = node->left()->left();
    const auto b = node->left()->right();
    const auto c = node->right();
    if (crosses(a, c)) {
      if (auto inner = tryJoin(a, c)) {
        accept(tryJoin(inner, b));
      }
    }
  }
  // Right join exchange: A (B C) -> B (A C).
  if (!node->right()->isScan()) {
    const auto a = node->left();
    const auto b = node->right()->left();
    const auto c = node->right()->right();
    if (crosses(a, c)) {
      if (auto inner = tryJoin(a, c)) {
        accept(tryJoin(b, inner));
      }
    }
  }
  return node;
}

PlanPtr Planner::sweep(const PlanPtr& node, bool& improved) {
  if (node->isScan()) {
    return node;
  }
  auto left = sweep(node->left(), improved);
  auto right = sweep(node->right(), improved);
  PlanPtr current = node;
  if (left != node->left() || right != node->right()) {
    // Same input relation sets, so the join's own choice still applies.
    current = PlanNode::makeJoin(
        catalog_, std::move(left), std::move(right), node->join());
  }
  return tryMutations(std::move(current), improved);
}

PlanPtr Planner::improve(PlanPtr tree) {
  for (int i = 0; i < options_.maxSweeps; ++i) {
    bool improved = false;
    tree = sweep(tree, improved);
    if (!improved) {
      break;
    }
  }
  return tree;
}

PlannerResult Planner::fastRandomized(const Query& query) {
  const Stopwatch stopwatch;
  const auto startExplored = configsExplored_;
  resolveQuery(catalog_, query);
  std::vector<TableId> ids;
  for (const auto& name : query.relations) {
    ids.push_back(catalog_.tableId(name));
  }

  std::mt19937_64 rng(options_.seed);
  PlanPtr best;
  if (ids.size() == 1) {
    best = scan(ids.front());
  } else {
    for (int i = 0; i < options_.iterations; ++i) {
      auto tree = improve(randomTree(ids, rng));
      if (better(*tree, best.get())) {
        best = std::move(tree);
      }
    }
  }

  PlannerResult result;
  result.plan = best;
  result.totalConfigsExplored = configsExplored_ - startExplored;
  result.wallClockMillis = stopwatch.elapsedMillis();
  result.planner = PlannerKind::kFastRandomized;
  result.mode = options_.mode;
  return result;
}

PlannerResult Planner::plan(PlannerKind kind, const Query& query) {
  return kind == PlannerKind::kSelinger ? selinger(query)
                                        : fastRandomized(query);
}

PlanPtr Planner::replan(const PlanPtr& node) {
  if (node->isScan()) {
    return scan(node->table());
  }
  return joinWith(
      replan(node->left()), replan(node->right()), node->join().impl);
}

PlannerResult Planner::replanResources(
    PlannerKind kind,
    const PlanPtr& fixed) {
  const Stopwatch stopwatch;
  const auto startExplored = configsExplored_;
  PlannerResult result;
  result.plan = replan(fixed);
  result.totalConfigsExplored = configsExplored_ - startExplored;
  result.wallClockMillis = stopwatch.elapsedMillis();
  result.planner = kind;
  result.mode = options_.mode;
  return result;
}

PlannerResult constrainedPlan(
    const Catalog& catalog,
    const CostModel& model,
    const ClusterConditions& cluster,
    const PlannerOptions& options,
    PlannerKind kind,
    const Query& query,
    const PlanConstraint& constraint) {
  if (const auto* budget = std::get_if<ResourceBudget>(&constraint)) {
    auto capped = cluster;
    for (size_t dim = 0; dim < ResourceConfig::kDims; ++dim) {
      capped.maxConfig[dim] =
          std::min(capped.maxConfig[dim], budget->maxConfig[dim]);
      if (capped.maxConfig[dim] < capped.minConfig[dim]) {
        throw RaqoError(
            ErrorKind::kBudgetInfeasible,
            "resource budget " + toString(budget->maxConfig) +
                " is below the cluster minimum");
      }
    }
    Planner planner(catalog, model, capped, options);
    return planner.plan(kind, query);
  }

  if (const auto* fixed = std::get_if<FixedPlan>(&constraint)) {
    if (!fixed->plan) {
      throw RaqoError(ErrorKind::kInvalidArgument, "fixed plan is empty");
    }
    Planner planner(catalog, model, cluster, options);
    return planner.replanResources(kind, fixed->plan);
  }

  const auto& budget = std::get<MoneyBudget>(constraint);
  Planner planner(catalog, model, cluster, options);
  auto result = planner.plan(kind, query);
  if (result.plan->cost().moneyGBSeconds <= budget.maxGBSeconds) {
    return result;
  }
  auto moneyOptions = options;
  moneyOptions.objective = Objective::kMoney;
  Planner moneyPlanner(catalog, model, cluster, moneyOptions);
  auto cheapest = moneyPlanner.plan(kind, query);
  cheapest.totalConfigsExplored += result.totalConfigsExplored;
  cheapest.wallClockMillis += result.wallClockMillis;
  if (cheapest.plan->cost().moneyGBSeconds > budget.maxGBSeconds) {
    throw RaqoError(
        ErrorKind::kBudgetInfeasible,
        "cheapest plan needs " +
            std::to_string(cheapest.plan->cost().moneyGBSeconds) +
            " GB-seconds, budget is " + std::to_string(budget.maxGBSeconds));
  }
  return cheapest;
}

nlohmann::json toJson(const PlannerResult& result, const Catalog& catalog) {
  return {
      {"planner", std::string(toString(result.planner))},
      {"mode", std::string(toString(result.mode))},
      {"plan", toJson(*result.plan, catalog)},
      {"totals",
       {{"timeSeconds", result.plan->cost().timeSeconds},
        {"moneyGBSeconds", result.plan->cost().moneyGBSeconds}}},
      {"stats",
       {{"configsExplored", result.totalConfigsExplored},
        {"wallClockMillis", result.wallClockMillis}}}};
}

} // namespace raqo
