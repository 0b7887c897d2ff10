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

#include <algorithm>
#include <limits>
#include <optional>
#include <random>

#include "doctest.h"
#include "raqo/error.h"
#include "raqo/resource.h"

using namespace raqo;

namespace {

struct OracleResult {
  ResourceConfig config;
  double cost;
};

// Plain nested scan with the documented tie order: time, money, count, GB.
std::optional<OracleResult> exhaustiveOracle(
    const CostModel& model,
    OperatorImpl impl,
    double ss,
    const ClusterConditions& cluster) {
  std::optional<OracleResult> best;
  for (int64_t nc = cluster.minConfig.containerCount;
       nc <= cluster.maxConfig.containerCount;
       nc += cluster.stepSize[0]) {
    for (int64_t cs = cluster.minConfig.containerGB;
         cs <= cluster.maxConfig.containerGB;
         cs += cluster.stepSize[1]) {
      const ResourceConfig r{nc, cs};
      const auto t = model.tryJoinCost(impl, ss, r);
      if (!t) {
        continue;
      }
      if (!best) {
        best = OracleResult{r, *t};
        continue;
      }
      const double money = *t * nc * cs;
      const double bestMoney = best->cost * best->config.containerCount *
          best->config.containerGB;
      const auto key = std::make_tuple(*t, money, nc, cs);
      const auto bestKey = std::make_tuple(
          best->cost, bestMoney, best->config.containerCount,
          best->config.containerGB);
      if (key < bestKey) {
        best = OracleResult{r, *t};
      }
    }
  }
  return best;
}

double costOr(const CostModel& model, OperatorImpl impl, double ss, const ResourceConfig& r) {
  return model.tryJoinCost(impl, ss, r).value_or(std::numeric_limits<double>::infinity());
}

ClusterConditions grid(int64_t count, int64_t gb) {
  ClusterConditions cluster;
  cluster.maxConfig = {count, gb};
  return cluster;
}

// cost = k + a (cs - c0)^2 + b (nc - n0)^2 written in the model's features
// with ss = 1 carrying the constant.
CostModel convexModel(double a, double c0, double b, double n0) {
  CostModel model;
  const double k = 5 + a * c0 * c0 + b * n0 * n0;
  model.setCoefficients(
      OperatorImpl::kSortMergeJoin,
      {k, 0, -2 * a * c0, a, -2 * b * n0, b, 0});
  return model;
}

} // namespace

TEST_CASE("brute force covers the whole grid") {
  const auto model = CostModel::hiveProfile();
  const auto d = bruteForcePlan(
      model, OperatorImpl::kSortMergeJoin, 5.1, ClusterConditions::defaults());
  CHECK((d.configsExplored == 1000));
  const auto one = bruteForcePlan(model, OperatorImpl::kSortMergeJoin, 5.1, grid(1, 1));
  CHECK((one.config == ResourceConfig{1, 1}));
  CHECK((one.configsExplored == 1));
}

TEST_CASE("brute force matches the exhaustive oracle up to 50x50") {
  const auto model = CostModel::hiveProfile();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ssDist(0, 20);
  for (int trial = 0; trial < 60; ++trial) {
    const int64_t count = 1 + static_cast<int64_t>(rng() % 50);
    const int64_t gb = 1 + static_cast<int64_t>(rng() % 50);
    const double ss = trial % 5 == 0 ? 5.1 : ssDist(rng);
    const auto cluster = grid(count, gb);
    for (auto impl : kJoinImpls) {
      CAPTURE(trial);
      CAPTURE(ss);
      const auto expected = exhaustiveOracle(model, impl, ss, cluster);
      if (!expected) {
        CHECK_THROWS_AS(bruteForcePlan(model, impl, ss, cluster), RaqoError);
        continue;
      }
      const auto got = bruteForcePlan(model, impl, ss, cluster);
      CHECK((got.config == expected->config));
      CHECK(got.costSeconds == expected->cost);
      CHECK((got.configsExplored == static_cast<uint64_t>(count * gb)));
    }
  }
}

TEST_CASE("broadcast join with nothing fitting has no feasible config") {
  const auto model = CostModel::hiveProfile();
  try {
    bruteForcePlan(model, OperatorImpl::kBroadcastHashJoin, 50, grid(10, 10));
    FAIL("expected NoFeasibleConfig");
  } catch (const RaqoError& e) {
    CHECK((e.kind() == ErrorKind::kNoFeasibleConfig));
  }
  CHECK_THROWS_AS(
      hillClimbPlan(model, OperatorImpl::kBroadcastHashJoin, 50, grid(10, 10)),
      RaqoError);
}

TEST_CASE("hill climb result is a local optimum and never costs more evaluations") {
  const auto model = CostModel::hiveProfile();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ssDist(0, 12);
  for (int trial = 0; trial < 300; ++trial) {
    const auto cluster = grid(1 + rng() % 100, 1 + rng() % 20);
    const double ss = ssDist(rng);
    const auto impl = kJoinImpls[trial % 2];
    CAPTURE(trial);
    ResourceDecision d;
    try {
      d = hillClimbPlan(model, impl, ss, cluster);
    } catch (const RaqoError& e) {
      CHECK((e.kind() == ErrorKind::kNoFeasibleConfig));
      continue;
    }
    CHECK(cluster.onGrid(d.config));
    for (size_t dim = 0; dim < 2; ++dim) {
      for (int64_t delta : {-1, 1}) {
        auto n = d.config;
        n[dim] += delta * cluster.stepSize[dim];
        if (cluster.contains(n)) {
          CHECK(costOr(model, impl, ss, n) >= d.costSeconds);
        }
      }
    }
    CHECK(d.configsExplored <= static_cast<uint64_t>(cluster.gridPoints()));
  }
}

TEST_CASE("monotone surface climbs to the count boundary") {
  CostModel model;
  model.setCoefficients(OperatorImpl::kSortMergeJoin, {1000, 0, 1, 0, -1, 0, 0});
  const auto d = hillClimbPlan(model, OperatorImpl::kSortMergeJoin, 1, grid(100, 10));
  CHECK((d.config == ResourceConfig{100, 1}));
}

TEST_CASE("separable convex surfaces reach the brute-force optimum") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> center(1, 10);
  std::uniform_real_distribution<double> weight(0.1, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto model =
        convexModel(weight(rng), center(rng) + 0.01, weight(rng), center(rng) + 0.03);
    const auto cluster = grid(10, 10);
    const auto bf = bruteForcePlan(model, OperatorImpl::kSortMergeJoin, 1, cluster);
    const auto hc = hillClimbPlan(model, OperatorImpl::kSortMergeJoin, 1, cluster);
    CAPTURE(trial);
    CHECK((hc.config == bf.config));
    CHECK(hc.costSeconds == bf.costSeconds);
  }
}

TEST_CASE("hill climb honours the start point and step size") {
  const auto model = convexModel(1, 5.2, 1, 7.4);
  ClusterConditions cluster;
  cluster.maxConfig = {21, 9};
  cluster.stepSize = {2, 2};
  const auto d = hillClimbPlan(model, OperatorImpl::kSortMergeJoin, 1, {21, 9}, cluster);
  CHECK((d.config == ResourceConfig{7, 5}));
  CHECK(cluster.onGrid(d.config));
}

TEST_CASE("exact lookup") {
  ResourcePlanCache cache(ClusterConditions::defaults(), CacheLookupMode::kExact);
  cache.insert(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 3.4, {20, 3});
  CHECK((
      cache.lookup(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 3.4) ==
      ResourceConfig{20, 3}));
  CHECK(!cache.lookup(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 3.5));
  CHECK(!cache.lookup(OperatorImpl::kBroadcastHashJoin, SubplanKind::kJoin, 3.4));
  CHECK(cache.stats().hits == 1);
  CHECK(cache.stats().misses == 2);
}

TEST_CASE("nearest-neighbour lookup respects the threshold") {
  ResourcePlanCache cache(
      ClusterConditions::defaults(), CacheLookupMode::kNearestNeighbor, 0.2);
  cache.insert(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 3.4, {20, 3});
  CHECK((
      cache.lookup(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 3.5) ==
      ResourceConfig{20, 3}));
  CHECK(!cache.lookup(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 3.7));
}

TEST_CASE("weighted-average lookup blends both neighbours") {
  ResourcePlanCache cache(
      ClusterConditions::defaults(), CacheLookupMode::kWeightedAverage, 1.0);
  cache.insert(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 3.0, {10, 4});
  cache.insert(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 4.0, {30, 8});
  CHECK((
      cache.lookup(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 3.5) ==
      ResourceConfig{20, 6}));
  // Weights 1/0.25 and 1/0.75: (3*10 + 30) / 4 = 15, (3*4 + 8) / 4 = 5.
  CHECK((
      cache.lookup(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 3.25) ==
      ResourceConfig{15, 5}));
  CHECK((
      cache.lookup(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 4.0) ==
      ResourceConfig{30, 8}));
  CHECK((
      cache.lookup(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 4.5) ==
      ResourceConfig{30, 8}));
  CHECK(!cache.lookup(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 5.5));
}

TEST_CASE("weighted-average misses when one neighbour is too far") {
  ResourcePlanCache cache(
      ClusterConditions::defaults(), CacheLookupMode::kWeightedAverage, 0.1);
  cache.insert(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 1.0, {10, 4});
  cache.insert(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 2.0, {30, 8});
  CHECK(!cache.lookup(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 1.05));
}

TEST_CASE("weighted-average results are snapped onto the grid") {
  ClusterConditions cluster;
  cluster.maxConfig = {91, 10};
  cluster.stepSize = {10, 3};
  ResourcePlanCache cache(cluster, CacheLookupMode::kWeightedAverage, 1.0);
  cache.insert(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 1.0, {1, 1});
  cache.insert(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 2.0, {21, 7});
  const auto hit = cache.lookup(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 1.5);
  REQUIRE(hit);
  CHECK(cluster.onGrid(*hit));
  CHECK((*hit == ResourceConfig{11, 4}));
}

TEST_CASE("insert keeps keys sorted and overwrites duplicates") {
  ResourcePlanCache cache(ClusterConditions::defaults());
  const auto impl = OperatorImpl::kSortMergeJoin;
  const auto kind = SubplanKind::kJoin;
  cache.insert(impl, kind, 2.0, {5, 5});
  CHECK(cache.size(impl, kind) == 1);
  cache.insert(impl, kind, 2.0, {6, 6});
  CHECK(cache.size(impl, kind) == 1);
  CHECK((cache.entries(impl, kind)[0].config == ResourceConfig{6, 6}));

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> key(0, 100);
  std::vector<double> keys{2.0};
  for (int i = 0; i < 500; ++i) {
    const double k = i % 7 == 0 ? keys[rng() % keys.size()] : key(rng);
    cache.insert(impl, kind, k, {1 + static_cast<int64_t>(rng() % 100), 1});
    keys.push_back(k);
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  const auto& entries = cache.entries(impl, kind);
  REQUIRE(entries.size() == keys.size());
  for (size_t i = 0; i < keys.size(); ++i) {
    CHECK(entries[i].ssGB == keys[i]);
  }
  const auto cap = cache.capacity(impl, kind);
  CHECK(cap >= entries.size());
  CHECK((cap & (cap - 1)) == 0);
}

TEST_CASE("cache rebinding clears it only when the cluster changes") {
  ResourcePlanCache cache(ClusterConditions::defaults());
  cache.insert(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 1, {5, 5});
  cache.rebind(ClusterConditions::defaults());
  CHECK((cache.size(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin) == 1));
  cache.rebind(ClusterConditions::scaled(1000, 10));
  CHECK((cache.size(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin) == 0));
}

TEST_CASE("cache json round trip") {
  ResourcePlanCache cache(
      ClusterConditions::defaults(), CacheLookupMode::kNearestNeighbor, 0.05);
  cache.insert(OperatorImpl::kSortMergeJoin, SubplanKind::kJoin, 0.3, {12, 2});
  cache.insert(OperatorImpl::kBroadcastHashJoin, SubplanKind::kJoin, 0.1, {1, 1});
  const auto back = ResourcePlanCache::fromJson(cache.toJson());
  CHECK(back.toJson() == cache.toJson());
  CHECK((back.mode() == CacheLookupMode::kNearestNeighbor));
  CHECK(back.thresholdGB() == 0.05);
}

TEST_CASE("cached planning hits cost one evaluation") {
  const auto model = CostModel::hiveProfile();
  const auto cluster = ClusterConditions::defaults();
  ResourcePlanCache cache(cluster, CacheLookupMode::kExact);
  const auto first = planResources(
      model, OperatorImpl::kSortMergeJoin, 5.1, cluster, &cache,
      ResourceStrategy::kHillClimbCached);
  const auto second = planResources(
      model, OperatorImpl::kSortMergeJoin, 5.1, cluster, &cache,
      ResourceStrategy::kHillClimbCached);
  CHECK(first.configsExplored > 1);
  CHECK((second.configsExplored == 1));
  CHECK((second.config == first.config));
  CHECK(second.costSeconds == first.costSeconds);
}

TEST_CASE("exact caching never changes a planning outcome") {
  const auto model = CostModel::hiveProfile();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ssDist(0, 8);
  for (int run = 0; run < 20; ++run) {
    const auto cluster = grid(10 + rng() % 90, 1 + rng() % 10);
    ResourcePlanCache cache(cluster, CacheLookupMode::kExact);
    std::vector<double> pool;
    for (int i = 0; i < 40; ++i) {
      const double ss = !pool.empty() && i % 3 == 0 ? pool[rng() % pool.size()] : ssDist(rng);
      pool.push_back(ss);
      const auto impl = kJoinImpls[rng() % 2];
      const auto plain = searchResources(
          model, impl, ss, cluster, nullptr, ResourceStrategy::kHillClimb);
      const auto cached = searchResources(
          model, impl, ss, cluster, &cache, ResourceStrategy::kHillClimbCached);
      REQUIRE(plain.decision.has_value() == cached.decision.has_value());
      if (plain.decision) {
        CHECK((plain.decision->config == cached.decision->config));
        CHECK(plain.decision->costSeconds == cached.decision->costSeconds);
        CHECK(cached.configsExplored <= plain.configsExplored);
      }
    }
  }
}

TEST_CASE("scaled clusters use coarse steps") {
  const auto cluster = ClusterConditions::scaled(100'000, 100);
  CHECK(cluster.stepSize[0] == 999);
  CHECK(cluster.stepSize[1] == 1);
  CHECK(cluster.gridSize(0) == 101);
  CHECK(ClusterConditions::scaled(100, 10) == ClusterConditions::defaults());
  ClusterConditions bad;
  bad.minConfig = {5, 1};
  bad.maxConfig = {4, 1};
  CHECK_THROWS_AS(bad.validate(), RaqoError);
}

TEST_CASE("strategy and mode names") {
  CHECK((resourceStrategyFromString("hc-cache") == ResourceStrategy::kHillClimbCached));
  CHECK((cacheLookupModeFromString("wa") == CacheLookupMode::kWeightedAverage));
  CHECK_THROWS_AS(cacheLookupModeFromString("lru"), RaqoError);
}
