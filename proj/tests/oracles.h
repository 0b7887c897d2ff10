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

// Reference implementations used as test oracles. They share nothing with
// the library beyond the catalog's size estimates and the cost model's
// per-point prediction.

#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <tuple>
#include <vector>

#include "raqo/catalog.h"
#include "raqo/cost_model.h"
#include "raqo/resource_config.h"

namespace raqo::oracle {

struct GridBest {
  OperatorImpl impl{OperatorImpl::kSortMergeJoin};
  ResourceConfig config;
  double time{std::numeric_limits<double>::infinity()};
  double money{std::numeric_limits<double>::infinity()};
};

enum class Goal { kTime, kMoney };

/// Every implementation at every grid point. Time goal ties go to money, then
/// count, then size; money goal ties go to time.
inline std::optional<GridBest> bestOnGrid(
    const CostModel& model,
    double ss,
    const ClusterConditions& cluster,
    Goal goal = Goal::kTime) {
  std::optional<GridBest> best;
  for (auto impl : {OperatorImpl::kSortMergeJoin, OperatorImpl::kBroadcastHashJoin}) {
    for (int64_t nc = cluster.minConfig.containerCount;
         nc <= cluster.maxConfig.containerCount;
         nc += cluster.stepSize[0]) {
      for (int64_t cs = cluster.minConfig.containerGB;
           cs <= cluster.maxConfig.containerGB;
           cs += cluster.stepSize[1]) {
        const auto t = model.tryJoinCost(impl, ss, {nc, cs});
        if (!t) {
          continue;
        }
        const double money = *t * static_cast<double>(nc) * static_cast<double>(cs);
        const auto key = goal == Goal::kTime ? std::make_tuple(*t, money, nc, cs)
                                             : std::make_tuple(money, *t, nc, cs);
        if (!best ||
            key <
                (goal == Goal::kTime
                     ? std::make_tuple(
                           best->time, best->money, best->config.containerCount,
                           best->config.containerGB)
                     : std::make_tuple(
                           best->money, best->time, best->config.containerCount,
                           best->config.containerGB))) {
          best = GridBest{impl, {nc, cs}, *t, money};
        }
      }
    }
  }
  return best;
}

/// Cheapest total time over every left-deep order of the query's relations
/// that never needs a cross product, pricing each join at its best
/// (implementation, configuration) pair on the grid.
inline double bestLeftDeepTime(
    const Catalog& catalog,
    const std::vector<TableId>& relations,
    const CostModel& model,
    const ClusterConditions& cluster) {
  std::vector<TableId> order = relations;
  std::sort(order.begin(), order.end());
  double best = std::numeric_limits<double>::infinity();
  do {
    auto prefix = catalog.singleton(order[0]);
    double total = 0;
    bool valid = true;
    for (size_t i = 1; i < order.size() && valid; ++i) {
      const auto next = catalog.singleton(order[i]);
      bool crossing = false;
      for (auto member : prefix.members()) {
        crossing = crossing || catalog.edgeBetween(member, order[i]).has_value();
      }
      if (!crossing) {
        valid = false;
        break;
      }
      const double ss = std::min(
          estimateRelations(catalog, prefix).gigabytes(),
          estimateRelations(catalog, next).gigabytes());
      const auto join = bestOnGrid(model, ss, cluster);
      if (!join) {
        valid = false;
        break;
      }
      total += join->time;
      prefix = prefix | next;
    }
    if (valid) {
      best = std::min(best, total);
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

} // namespace raqo::oracle
