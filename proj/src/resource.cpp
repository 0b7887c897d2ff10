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

#include "raqo/resource.h"

#include <limits>
#include <map>
#include <utility>

#include "raqo/error.h"

namespace raqo {

void ClusterConditions::validate() const {
  for (size_t dim = 0; dim < ResourceConfig::kDims; ++dim) {
    if (minConfig[dim] < 1) {
      throw RaqoError(
          ErrorKind::kInvalidArgument, "cluster minimum must be >= 1");
    }
    if (minConfig[dim] > maxConfig[dim]) {
      throw RaqoError(
          ErrorKind::kInvalidArgument, "cluster minimum exceeds maximum");
    }
    if (stepSize[dim] < 1) {
      throw RaqoError(ErrorKind::kInvalidArgument, "step size must be >= 1");
    }
  }
}

namespace {

int64_t defaultStep(int64_t min, int64_t max) {
  return std::max<int64_t>(1, (max - min) / 100);
}

} // namespace

ClusterConditions ClusterConditions::scaled(
    int64_t maxContainers,
    int64_t maxGB) {
  ClusterConditions cluster;
  cluster.minConfig = {1, 1};
  cluster.maxConfig = {maxContainers, maxGB};
  cluster.stepSize = {
      defaultStep(1, maxContainers), defaultStep(1, maxGB)};
  cluster.validate();
  return cluster;
}

std::string toString(const ResourceConfig& config) {
  return "(" + std::to_string(config.containerCount) + " x " +
      std::to_string(config.containerGB) + " GB)";
}

nlohmann::json toJson(const ResourceConfig& config) {
  return {
      {"containerCount", config.containerCount},
      {"containerGB", config.containerGB}};
}

nlohmann::json toJson(const ClusterConditions& cluster) {
  return {
      {"minConfig", toJson(cluster.minConfig)},
      {"maxConfig", toJson(cluster.maxConfig)},
      {"stepSize", cluster.stepSize}};
}

ResourceConfig resourceConfigFromJson(const nlohmann::json& json) {
  try {
    return {
        json.at("containerCount").get<int64_t>(),
        json.at("containerGB").get<int64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw RaqoError(ErrorKind::kParseError, e.what());
  }
}

ClusterConditions clusterFromJson(const nlohmann::json& json) {
  try {
    ClusterConditions cluster;
    cluster.minConfig = json.contains("minConfig")
        ? resourceConfigFromJson(json.at("minConfig"))
        : ResourceConfig{1, 1};
    cluster.maxConfig = resourceConfigFromJson(json.at("maxConfig"));
    if (json.contains("stepSize")) {
      const auto steps = json.at("stepSize").get<std::vector<int64_t>>();
      if (steps.size() != ResourceConfig::kDims) {
        throw RaqoError(ErrorKind::kParseError, "stepSize needs 2 entries");
      }
      cluster.stepSize = {steps[0], steps[1]};
    } else {
      for (size_t dim = 0; dim < ResourceConfig::kDims; ++dim) {
        cluster.stepSize[dim] =
            defaultStep(cluster.minConfig[dim], cluster.maxConfig[dim]);
      }
    }
    cluster.validate();
    return cluster;
  } catch (const nlohmann::json::exception& e) {
    throw RaqoError(ErrorKind::kParseError, e.what());
  } catch (const RaqoError& e) {
    if (e.kind() == ErrorKind::kParseError) {
      throw;
    }
    throw RaqoError(ErrorKind::kParseError, e.what());
  }
}

namespace {

ResourceSearch bruteForceSearch(
    const CostModel& model,
    OperatorImpl impl,
    double ssGB,
    const ClusterConditions& cluster) {
  cluster.validate();
  ResourceSearch search;
  double bestMoney = 0;
  for (auto count = cluster.minConfig.containerCount;
       count <= cluster.maxConfig.containerCount;
       count += cluster.stepSize[0]) {
    for (auto gb = cluster.minConfig.containerGB;
         gb <= cluster.maxConfig.containerGB;
         gb += cluster.stepSize[1]) {
      const ResourceConfig config{count, gb};
      ++search.configsExplored;
      const auto cost = model.tryJoinCost(impl, ssGB, config);
      if (!cost) {
        continue;
      }
      const double money = moneyOf(*cost, config);
      auto& best = search.decision;
      // Ascending iteration order settles the count and size tie-breaks.
      if (!best || *cost < best->costSeconds ||
          (*cost == best->costSeconds && money < bestMoney)) {
        best = ResourceDecision{config, *cost, 0};
        bestMoney = money;
      }
    }
  }
  if (search.decision) {
    search.decision->configsExplored = search.configsExplored;
  }
  return search;
}

ResourceSearch hillClimbSearch(
    const CostModel& model,
    OperatorImpl impl,
    double ssGB,
    const ResourceConfig& start,
    const ClusterConditions& cluster) {
  cluster.validate();
  if (!cluster.contains(start)) {
    throw RaqoError(
        ErrorKind::kInvalidArgument,
        "hill climb start " + toString(start) + " is outside the cluster");
  }
  constexpr double kInfeasible = std::numeric_limits<double>::infinity();
  constexpr std::array<int64_t, 2> kCandidates = {-1, 1};

  ResourceSearch search;
  // Each round re-prices the current point and probes the neighbour it came
  // from; remembering prices makes configsExplored count distinct points.
  std::map<std::pair<int64_t, int64_t>, double> priced;
  auto costAt = [&](const ResourceConfig& config) {
    const auto [it, fresh] =
        priced.try_emplace({config.containerCount, config.containerGB}, 0.0);
    if (fresh) {
      ++search.configsExplored;
      it->second = model.tryJoinCost(impl, ssGB, config).value_or(kInfeasible);
    }
    return it->second;
  };

  ResourceConfig current = start;
  while (true) {
    const double currentCost = costAt(current);
    double bestCost = currentCost;
    for (size_t dim = 0; dim < ResourceConfig::kDims; ++dim) {
      int best = -1;
      for (size_t j = 0; j < kCandidates.size(); ++j) {
        const int64_t delta = cluster.stepSize[dim] * kCandidates[j];
        const int64_t probe = current[dim] + delta;
        if (probe <= cluster.maxConfig[dim] &&
            probe >= cluster.minConfig[dim]) {
          current[dim] += delta;
          const double cost = costAt(current);
          current[dim] -= delta;
          if (cost < bestCost) {
            bestCost = cost;
            best = static_cast<int>(j);
          }
        }
      }
      if (best != -1) {
        current[dim] += cluster.stepSize[dim] * kCandidates[best];
      }
    }
    if (bestCost >= currentCost) {
      // No neighbor improves on the current point.
      if (currentCost != kInfeasible) {
        search.decision =
            ResourceDecision{current, currentCost, search.configsExplored};
      }
      return search;
    }
  }
}

ResourceDecision orThrow(ResourceSearch search, OperatorImpl impl) {
  if (!search.decision) {
    throw RaqoError(
        ErrorKind::kNoFeasibleConfig,
        std::string(toString(impl)) + " has no feasible resource config");
  }
  return *search.decision;
}

} // namespace

ResourceDecision bruteForcePlan(
    const CostModel& model,
    OperatorImpl impl,
    double ssGB,
    const ClusterConditions& cluster) {
  return orThrow(bruteForceSearch(model, impl, ssGB, cluster), impl);
}

ResourceDecision hillClimbPlan(
    const CostModel& model,
    OperatorImpl impl,
    double ssGB,
    const ResourceConfig& start,
    const ClusterConditions& cluster) {
  return orThrow(hillClimbSearch(model, impl, ssGB, start, cluster), impl);
}

std::string_view toString(ResourceStrategy strategy) {
  switch (strategy) {
    case ResourceStrategy::kBruteForce:
      return "bf";
    case ResourceStrategy::kHillClimb:
      return "hc";
    case ResourceStrategy::kHillClimbCached:
      return "hc-cache";
  }
  return "unknown";
}

ResourceStrategy resourceStrategyFromString(std::string_view name) {
  if (name == "bf") {
    return ResourceStrategy::kBruteForce;
  }
  if (name == "hc") {
    return ResourceStrategy::kHillClimb;
  }
  if (name == "hc-cache") {
    return ResourceStrategy::kHillClimbCached;
  }
  throw RaqoError(
      ErrorKind::kParseError, "unknown strategy " + std::string(name));
}

ResourceSearch searchResources(
    const CostModel& model,
    OperatorImpl impl,
    double ssGB,
    const ClusterConditions& cluster,
    ResourcePlanCache* cache,
    ResourceStrategy strategy) {
  switch (strategy) {
    case ResourceStrategy::kBruteForce:
      return bruteForceSearch(model, impl, ssGB, cluster);
    case ResourceStrategy::kHillClimb:
      return hillClimbSearch(model, impl, ssGB, cluster.minConfig, cluster);
    case ResourceStrategy::kHillClimbCached:
      break;
  }
  if (cache == nullptr) {
    throw RaqoError(
        ErrorKind::kInvalidArgument, "hc-cache strategy needs a cache");
  }
  cache->rebind(cluster);
  uint64_t probes = 0;
  if (auto hit = cache->lookup(impl, SubplanKind::kJoin, ssGB)) {
    ++probes;
    if (auto cost = model.tryJoinCost(impl, ssGB, *hit)) {
      return {ResourceDecision{*hit, *cost, probes}, probes};
    }
  }
  auto search = hillClimbSearch(model, impl, ssGB, cluster.minConfig, cluster);
  search.configsExplored += probes;
  if (search.decision) {
    search.decision->configsExplored = search.configsExplored;
    cache->insert(impl, SubplanKind::kJoin, ssGB, search.decision->config);
  }
  return search;
}

ResourceDecision planResources(
    const CostModel& model,
    OperatorImpl impl,
    double ssGB,
    const ClusterConditions& cluster,
    ResourcePlanCache* cache,
    ResourceStrategy strategy) {
  return orThrow(
      searchResources(model, impl, ssGB, cluster, cache, strategy), impl);
}

} // namespace raqo
