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

#include <functional>

#include "doctest.h"
#include "oracles.h"
#include "raqo/bench.h"
#include "raqo/error.h"
#include "raqo/planner.h"

using namespace raqo;

namespace {

ErrorKind kindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const RaqoError& e) {
    return e.kind();
  }
  FAIL("expected RaqoError");
  return ErrorKind::kInvalidArgument;
}

PlannerOptions withStrategy(ResourceStrategy strategy) {
  PlannerOptions options;
  options.strategy = strategy;
  return options;
}

void forEachJoin(const PlanNode& node, const std::function<void(const PlanNode&)>& fn) {
  if (node.isScan()) {
    return;
  }
  fn(node);
  forEachJoin(*node.left(), fn);
  forEachJoin(*node.right(), fn);
}

bool isLeftDeep(const PlanNode& node) {
  return node.isScan() || (node.right()->isScan() && isLeftDeep(*node.left()));
}

ClusterConditions grid(int64_t count, int64_t gb) {
  ClusterConditions cluster;
  cluster.maxConfig = {count, gb};
  return cluster;
}

} // namespace

TEST_CASE("single relation plans to a scan") {
  const auto catalog = tpchCatalog(1);
  const auto model = CostModel::hiveProfile();
  Planner planner(catalog, model, ClusterConditions::defaults());
  for (auto kind : {PlannerKind::kSelinger, PlannerKind::kFastRandomized}) {
    const auto result = planner.plan(kind, Query{{"orders"}});
    CHECK(result.plan->isScan());
    CHECK(result.totalConfigsExplored == 0);
  }
}

TEST_CASE("two relations give the same join from both planners") {
  const auto catalog = tpchCatalog(100);
  const auto model = CostModel::hiveProfile();
  Planner a(catalog, model, ClusterConditions::defaults());
  Planner b(catalog, model, ClusterConditions::defaults());
  const auto s = a.selinger(tpchQuery("Q12"));
  const auto r = b.fastRandomized(tpchQuery("Q12"));
  CHECK(s.plan->cost().timeSeconds == r.plan->cost().timeSeconds);
  CHECK((s.plan->join().resources == r.plan->join().resources));
  CHECK((s.plan->join().impl == r.plan->join().impl));
}

TEST_CASE("single join picks the exhaustive (impl, config) optimum") {
  const auto catalog = tpchCatalog(100);
  const auto model = CostModel::hiveProfile();
  const auto cluster = ClusterConditions::defaults();
  Planner planner(catalog, model, cluster, withStrategy(ResourceStrategy::kBruteForce));
  const auto result = planner.selinger(tpchQuery("Q12"));
  const auto& join = result.plan->join();
  const auto expected = oracle::bestOnGrid(model, join.ssGB, cluster);
  REQUIRE(expected);
  CHECK((join.impl == expected->impl));
  CHECK((join.resources == expected->config));
  CHECK(join.cost.timeSeconds == expected->time);
  // The dynamic program prices the pair once from each side.
  CHECK(result.totalConfigsExplored == 4000);

  Planner single(catalog, model, cluster, withStrategy(ResourceStrategy::kBruteForce));
  single.getPlanCost(
      single.scan(catalog.tableId("orders")), single.scan(catalog.tableId("lineitem")));
  CHECK(single.configsExplored() == 2000);
}

TEST_CASE("broadcast join infeasible everywhere falls back to sort-merge") {
  const auto catalog = tpchCatalog(100);
  const auto model = CostModel::hiveProfile();
  Planner planner(catalog, model, ClusterConditions::defaults());
  const auto result = planner.selinger(tpchQuery("Q12"));
  CHECK(result.plan->join().ssGB > 0.8 * 10);
  CHECK((result.plan->join().impl == OperatorImpl::kSortMergeJoin));
}

TEST_CASE("no feasible implementation is reported") {
  const auto catalog = tpchCatalog(1);
  CostModel model;
  model.setCoefficients(
      OperatorImpl::kBroadcastHashJoin, CostModel::hiveProfile().coefficients(
                                            OperatorImpl::kBroadcastHashJoin));
  model.setMemoryFraction(0.0001);
  Planner planner(catalog, model, ClusterConditions::defaults());
  CHECK((
      kindOf([&] { planner.selinger(tpchQuery("Q12")); }) ==
      ErrorKind::kNoFeasiblePlan));
}

TEST_CASE("selinger equals the exhaustive left-deep oracle") {
  const auto model = CostModel::hiveProfile();
  const auto cluster = grid(5, 5);
  for (uint64_t seed = 100; seed < 110; ++seed) {
    const int n = 2 + static_cast<int>(seed % 5);
    const auto catalog = randomCatalog(n, seed);
    const auto query = connectedQuery(catalog, n);
    Planner planner(catalog, model, cluster, withStrategy(ResourceStrategy::kBruteForce));
    const auto result = planner.selinger(query);
    CAPTURE(seed);
    CHECK(isLeftDeep(*result.plan));
    CHECK(
        result.plan->cost().timeSeconds ==
        oracle::bestLeftDeepTime(
            catalog, resolveQuery(catalog, query).members(), model, cluster));
  }
}

TEST_CASE("emitted plans are structurally valid") {
  const auto model = CostModel::hiveProfile();
  const auto catalog = tpchCatalog(10);
  const auto cluster = ClusterConditions::defaults();
  for (const auto& name : tpchQueryNames()) {
    for (auto kind : {PlannerKind::kSelinger, PlannerKind::kFastRandomized}) {
      for (auto strategy :
           {ResourceStrategy::kBruteForce, ResourceStrategy::kHillClimb,
            ResourceStrategy::kHillClimbCached}) {
        Planner planner(catalog, model, cluster, withStrategy(strategy));
        const auto result = planner.plan(kind, tpchQuery(name));
        CAPTURE(name);
        CHECK_NOTHROW(validatePlan(*result.plan, catalog, model, &cluster));
        CHECK(result.plan->relations() == resolveQuery(catalog, tpchQuery(name)));
      }
    }
  }
}

TEST_CASE("qo mode uses the fixed configuration and explores nothing") {
  const auto model = CostModel::hiveProfile();
  const auto catalog = tpchCatalog(1);
  PlannerOptions options;
  options.mode = PlannerMode::kQO;
  Planner planner(catalog, model, ClusterConditions::defaults(), options);
  const auto result = planner.selinger(tpchQuery("All"));
  CHECK(result.totalConfigsExplored == 0);
  int joins = 0;
  forEachJoin(*result.plan, [&](const PlanNode& join) {
    CHECK((join.join().resources == ResourceConfig{10, 3}));
    ++joins;
  });
  CHECK(joins == 7);
}

TEST_CASE("raqo never loses to qo") {
  const auto model = CostModel::hiveProfile();
  for (double sf : {1.0, 100.0}) {
    const auto catalog = tpchCatalog(sf);
    for (const auto& name : tpchQueryNames()) {
      for (auto kind : {PlannerKind::kSelinger, PlannerKind::kFastRandomized}) {
        PlannerOptions qo;
        qo.mode = PlannerMode::kQO;
        Planner q(catalog, model, ClusterConditions::defaults(), qo);
        Planner r(catalog, model, ClusterConditions::defaults());
        CAPTURE(name);
        CHECK(
            r.plan(kind, tpchQuery(name)).plan->cost().timeSeconds <=
            q.plan(kind, tpchQuery(name)).plan->cost().timeSeconds);
      }
    }
  }
}

TEST_CASE("hill climbing explores fewer configurations than brute force") {
  const auto model = CostModel::hiveProfile();
  const auto catalog = tpchCatalog(1);
  for (auto kind : {PlannerKind::kSelinger, PlannerKind::kFastRandomized}) {
    Planner bf(catalog, model, ClusterConditions::defaults(), withStrategy(ResourceStrategy::kBruteForce));
    Planner hc(catalog, model, ClusterConditions::defaults(), withStrategy(ResourceStrategy::kHillClimb));
    const auto b = bf.plan(kind, tpchQuery("All"));
    const auto h = hc.plan(kind, tpchQuery("All"));
    CHECK(h.totalConfigsExplored <= b.totalConfigsExplored);
    if (kind == PlannerKind::kSelinger) {
      // Roughly a million brute-force configurations for the full join graph.
      CHECK(b.totalConfigsExplored >= 500'000);
      CHECK(b.totalConfigsExplored <= 2'000'000);
    }
  }
}

TEST_CASE("randomized planner is reproducible per seed") {
  const auto model = CostModel::hiveProfile();
  const auto catalog = randomCatalog(30, 8);
  const auto query = connectedQuery(catalog, 30);
  PlannerOptions options;
  options.seed = 1234;
  Planner a(catalog, model, ClusterConditions::defaults(), options);
  Planner b(catalog, model, ClusterConditions::defaults(), options);
  const auto ra = a.fastRandomized(query);
  const auto rb = b.fastRandomized(query);
  CHECK(toJson(*ra.plan, catalog) == toJson(*rb.plan, catalog));
  CHECK(ra.totalConfigsExplored == rb.totalConfigsExplored);
}

TEST_CASE("randomized planner handles a 100-table query") {
  const auto model = CostModel::hiveProfile();
  const auto catalog = randomCatalog(100, 42);
  const auto query = connectedQuery(catalog, 100);
  const auto cluster = ClusterConditions::defaults();
  PlannerOptions options;
  options.strategy = ResourceStrategy::kHillClimbCached;
  Planner planner(catalog, model, cluster, options);
  const auto result = planner.fastRandomized(query);
  CHECK(result.plan->joinCount() == 99);
  CHECK(isConnected(catalog, result.plan->relations()));
  CHECK_NOTHROW(validatePlan(*result.plan, catalog, model, &cluster));
}

TEST_CASE("selinger rejects oversized queries") {
  const auto model = CostModel::hiveProfile();
  const auto catalog = randomCatalog(25, 1);
  Planner planner(catalog, model, ClusterConditions::defaults());
  CHECK((
      kindOf([&] { planner.selinger(connectedQuery(catalog, 21)); }) ==
      ErrorKind::kInvalidArgument));
}

TEST_CASE("disconnected queries are rejected") {
  const auto model = CostModel::hiveProfile();
  const auto catalog = tpchCatalog(1);
  Planner planner(catalog, model, ClusterConditions::defaults());
  for (auto kind : {PlannerKind::kSelinger, PlannerKind::kFastRandomized}) {
    CHECK((
        kindOf([&] { planner.plan(kind, Query{{"part", "customer"}}); }) ==
        ErrorKind::kNoJoinEdge));
  }
}

TEST_CASE("resource budget equal to the cluster changes nothing") {
  const auto model = CostModel::hiveProfile();
  const auto catalog = tpchCatalog(1);
  const auto cluster = ClusterConditions::defaults();
  Planner planner(catalog, model, cluster);
  const auto free = planner.selinger(tpchQuery("Q3"));
  const auto capped = constrainedPlan(
      catalog, model, cluster, {}, PlannerKind::kSelinger, tpchQuery("Q3"),
      ResourceBudget{cluster.maxConfig});
  CHECK(planSignature(*free.plan, catalog) == planSignature(*capped.plan, catalog));
}

TEST_CASE("resource budget caps every join") {
  const auto model = CostModel::hiveProfile();
  const auto catalog = tpchCatalog(1);
  const auto capped = constrainedPlan(
      catalog, model, ClusterConditions::defaults(), {}, PlannerKind::kSelinger,
      tpchQuery("All"), ResourceBudget{{5, 2}});
  forEachJoin(*capped.plan, [](const PlanNode& join) {
    CHECK(join.join().resources.containerCount <= 5);
    CHECK(join.join().resources.containerGB <= 2);
  });
  CHECK((
      kindOf([&] {
        ClusterConditions cluster;
        cluster.minConfig = {2, 2};
        constrainedPlan(
            catalog, model, cluster, {}, PlannerKind::kSelinger,
            tpchQuery("All"), ResourceBudget{{1, 1}});
      }) == ErrorKind::kBudgetInfeasible));
}

TEST_CASE("fixed plan replanning is idempotent") {
  const auto model = CostModel::hiveProfile();
  const auto catalog = tpchCatalog(1);
  const auto cluster = ClusterConditions::defaults();
  for (auto kind : {PlannerKind::kSelinger, PlannerKind::kFastRandomized}) {
    Planner planner(catalog, model, cluster);
    const auto best = planner.plan(kind, tpchQuery("All"));
    const auto again = constrainedPlan(
        catalog, model, cluster, {}, kind, tpchQuery("All"), FixedPlan{best.plan});
    CHECK(again.plan->cost().timeSeconds == best.plan->cost().timeSeconds);
    CHECK(planSignature(*again.plan, catalog) == planSignature(*best.plan, catalog));
  }
}

TEST_CASE("money budget on a 3x3 grid") {
  const auto model = CostModel::hiveProfile();
  const auto catalog = tpchCatalog(1);
  const auto cluster = grid(3, 3);
  Planner probe(catalog, model, cluster);
  const double ss = probe.selinger(tpchQuery("Q12")).plan->join().ssGB;
  const auto cheapest = oracle::bestOnGrid(model, ss, cluster, oracle::Goal::kMoney);
  REQUIRE(cheapest);

  CHECK((
      kindOf([&] {
        constrainedPlan(
            catalog, model, cluster, {}, PlannerKind::kSelinger, tpchQuery("Q12"),
            MoneyBudget{cheapest->money * 0.999});
      }) == ErrorKind::kBudgetInfeasible));

  const auto ok = constrainedPlan(
      catalog, model, cluster, {}, PlannerKind::kSelinger, tpchQuery("Q12"),
      MoneyBudget{cheapest->money});
  CHECK(ok.plan->cost().moneyGBSeconds <= cheapest->money);
}

TEST_CASE("plan json round trip") {
  const auto model = CostModel::hiveProfile();
  const auto catalog = tpchCatalog(1);
  Planner planner(catalog, model, ClusterConditions::defaults());
  const auto result = planner.fastRandomized(tpchQuery("All"));
  const auto json = toJson(*result.plan, catalog);
  const auto back = planFromJson(json, catalog, model);
  CHECK(toJson(*back, catalog) == json);
  CHECK(back->cost().timeSeconds == result.plan->cost().timeSeconds);
  CHECK_THROWS_AS(
      planFromJson(nlohmann::json::parse(R"({"impl": "SMJ"})"), catalog, model),
      RaqoError);
}
