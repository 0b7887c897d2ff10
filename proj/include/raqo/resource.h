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

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "raqo/cost_model.h"
#include "raqo/resource_config.h"

namespace raqo {

struct ResourceDecision {
  ResourceConfig config;
  double costSeconds{0};
  /// Number of cost-model evaluations spent finding 'config'.
  uint64_t configsExplored{0};
};

/// Exhaustive scan of every grid point. Ties go to lower money, then fewer
/// containers, then smaller containers. Throws NoFeasibleConfig.
ResourceDecision bruteForcePlan(
    const CostModel& model,
    OperatorImpl impl,
    double ssGB,
    const ClusterConditions& cluster);

/// Greedy coordinate hill climb over the grid starting at 'start'. Each round
/// re-prices the current point, then for each dimension in turn tries one step
/// down and one step up and keeps the better of them if it beats the best cost
/// seen so far in the round. Stops when a round brings no improvement.
/// configsExplored counts distinct grid points priced, so it never exceeds the
/// grid size. Throws NoFeasibleConfig if it ends on an infeasible point.
ResourceDecision hillClimbPlan(
    const CostModel& model,
    OperatorImpl impl,
    double ssGB,
    const ResourceConfig& start,
    const ClusterConditions& cluster);

inline ResourceDecision hillClimbPlan(
    const CostModel& model,
    OperatorImpl impl,
    double ssGB,
    const ClusterConditions& cluster) {
  return hillClimbPlan(model, impl, ssGB, cluster.minConfig, cluster);
}

enum class CacheLookupMode { kExact, kNearestNeighbor, kWeightedAverage };

enum class SubplanKind { kJoin };

std::string_view toString(CacheLookupMode mode);

/// Accepts exact, nn and wa. Throws ParseError.
CacheLookupMode cacheLookupModeFromString(std::string_view name);

std::string_view toString(SubplanKind kind);

struct CacheStats {
  uint64_t hits{0};
  uint64_t misses{0};
  uint64_t inserts{0};
};

/// Memo from smaller-input size to the best known resource configuration,
/// kept per (implementation, subplan kind) as a sorted array searched by
/// binary search. The cache is bound to the cluster it was filled under;
/// weighted-average results are snapped back onto that cluster's grid.
class ResourcePlanCache {
 public:
  struct Entry {
    double ssGB;
    ResourceConfig config;
  };

  ResourcePlanCache(
      ClusterConditions cluster,
      CacheLookupMode mode = CacheLookupMode::kExact,
      double thresholdGB = 0);

  std::optional<ResourceConfig>
  lookup(OperatorImpl impl, SubplanKind kind, double ssGB);

  /// Keeps keys sorted; an existing key is overwritten in place.
  void insert(
      OperatorImpl impl,
      SubplanKind kind,
      double ssGB,
      const ResourceConfig& config);

  /// Drops all entries and statistics.
  void clear();

  /// Drops everything and rebinds to 'cluster' when it differs.
  void rebind(const ClusterConditions& cluster);

  const ClusterConditions& cluster() const {
    return cluster_;
  }

  CacheLookupMode mode() const {
    return mode_;
  }

  double thresholdGB() const {
    return thresholdGB_;
  }

  const CacheStats& stats() const {
    return stats_;
  }

  size_t size(OperatorImpl impl, SubplanKind kind) const;
  size_t capacity(OperatorImpl impl, SubplanKind kind) const;
  const std::vector<Entry>& entries(OperatorImpl impl, SubplanKind kind) const;

  nlohmann::json toJson() const;

  /// Throws ParseError.
  static ResourcePlanCache fromJson(const nlohmann::json& json);

 private:
  class SortedArray {
   public:
    const std::vector<Entry>& entries() const {
      return entries_;
    }

    size_t capacity() const {
      return capacity_;
    }

    /// Index of the first key >= ssGB.
    size_t lowerBound(double ssGB) const;

    void upsert(double ssGB, const ResourceConfig& config);

    void clear() {
      entries_.clear();
      entries_.shrink_to_fit();
      capacity_ = 0;
    }

   private:
    std::vector<Entry> entries_;
    size_t capacity_{0};
  };

  static constexpr size_t kSlots = 3;

  static size_t slot(OperatorImpl impl, SubplanKind kind);

  ResourceConfig snapToGrid(double count, double gb) const;

  ClusterConditions cluster_;
  CacheLookupMode mode_;
  double thresholdGB_;
  std::array<SortedArray, kSlots> arrays_;
  CacheStats stats_;
};

enum class ResourceStrategy { kBruteForce, kHillClimb, kHillClimbCached };

/// bf, hc or hc-cache.
std::string_view toString(ResourceStrategy strategy);

/// Throws ParseError.
ResourceStrategy resourceStrategyFromString(std::string_view name);

/// Outcome of a search that keeps the evaluation count even when nothing
/// feasible was found.
struct ResourceSearch {
  std::optional<ResourceDecision> decision;
  uint64_t configsExplored{0};
};

/// Non-throwing form of planResources.
ResourceSearch searchResources(
    const CostModel& model,
    OperatorImpl impl,
    double ssGB,
    const ClusterConditions& cluster,
    ResourcePlanCache* cache,
    ResourceStrategy strategy);

/// Entry point used by the planners. Under kHillClimbCached the cache is
/// consulted first; a hit costs one evaluation to price the cached config.
/// A miss (or a hit that is infeasible for this input) runs the hill climb and
/// inserts its result. 'cache' may be null for the other strategies.
ResourceDecision planResources(
    const CostModel& model,
    OperatorImpl impl,
    double ssGB,
    const ClusterConditions& cluster,
    ResourcePlanCache* cache,
    ResourceStrategy strategy);

} // namespace raqo
