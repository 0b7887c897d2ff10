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

// raqo: command-line front end for planning, costing, rule trees and the
// planner benchmarks.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "raqo/bench.h"
#include "raqo/catalog.h"
#include "raqo/cost_model.h"
#include "raqo/error.h"
#include "raqo/plan.h"
#include "raqo/planner.h"
#include "raqo/resource.h"
#include "raqo/rules.h"

namespace raqo {
namespace {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitParseError = 2,
  kExitNoFeasiblePlan = 3,
  kExitBudgetInfeasible = 4,
};

int exitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParseError:
    case ErrorKind::kMalformedTree:
      return kExitParseError;
    case ErrorKind::kNoFeasiblePlan:
    case ErrorKind::kNoFeasibleConfig:
    case ErrorKind::kInfeasibleOperator:
      return kExitNoFeasiblePlan;
    case ErrorKind::kBudgetInfeasible:
      return kExitBudgetInfeasible;
    default:
      return kExitFailure;
  }
}

nlohmann::json readJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw RaqoError(ErrorKind::kParseError, "cannot open " + path);
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw RaqoError(ErrorKind::kParseError, path + ": " + e.what());
  }
}

// Output is fully rendered before the file is opened so a failed command
// never leaves a partial artifact behind.
void emit(const std::string& text, const std::string& outPath) {
  if (outPath.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(outPath, std::ios::trunc);
  if (!out) {
    throw RaqoError(ErrorKind::kInvalidArgument, "cannot write " + outPath);
  }
  out << text;
}

std::string dumpJson(const nlohmann::json& json) {
  return json.dump(2) + "\n";
}

struct GenSchemaArgs {
  int tables{100};
  uint64_t seed{42};
  int querySize{0};
  std::string out;
};

int runGenSchema(const GenSchemaArgs& args) {
  const auto catalog = randomCatalog(args.tables, args.seed);
  const auto query = connectedQuery(
      catalog, args.querySize > 0 ? args.querySize : args.tables);
  emit(dumpJson(toJson(catalog, &query)), args.out);
  return kExitOk;
}

struct PlanArgs {
  std::string catalogFile;
  std::string queryFile;
  std::string clusterFile;
  std::string modelFile;
  std::string tpchQuery{"All"};
  double scaleFactor{1};
  std::string mode{"raqo"};
  std::string planner{"selinger"};
  std::string strategy{"hc"};
  std::string cacheMode{"wa"};
  double thresholdGB{0.1};
  uint64_t seed{0};
  int iterations{10};
  std::optional<int64_t> budgetCount;
  std::optional<int64_t> budgetGB;
  std::optional<double> moneyBudget;
  std::string fixedPlanFile;
  std::string out;
};

int runPlan(const PlanArgs& args) {
  std::optional<Catalog> catalog;
  std::optional<Query> query;
  if (!args.catalogFile.empty()) {
    const auto json = readJsonFile(args.catalogFile);
    catalog.emplace(catalogFromJson(json));
    if (json.contains("query")) {
      query = queryFromJson(json);
    }
  } else {
    catalog.emplace(tpchCatalog(args.scaleFactor));
    query = tpchQuery(args.tpchQuery);
  }
  if (!args.queryFile.empty()) {
    query = queryFromJson(readJsonFile(args.queryFile));
  }
  if (!query) {
    throw RaqoError(
        ErrorKind::kInvalidArgument, "no query given; pass --query or embed one");
  }

  const auto cluster = args.clusterFile.empty()
      ? ClusterConditions::defaults()
      : clusterFromJson(readJsonFile(args.clusterFile));
  const auto model = args.modelFile.empty()
      ? CostModel::hiveProfile()
      : costModelFromJson(readJsonFile(args.modelFile));

  PlannerOptions options;
  options.mode = plannerModeFromString(args.mode);
  options.strategy = resourceStrategyFromString(args.strategy);
  options.cacheMode = cacheLookupModeFromString(args.cacheMode);
  options.cacheThresholdGB = args.thresholdGB;
  options.seed = args.seed;
  options.iterations = args.iterations;
  const auto kind = plannerKindFromString(args.planner);

  PlannerResult result;
  if (!args.fixedPlanFile.empty()) {
    auto fixed = planFromJson(readJsonFile(args.fixedPlanFile), *catalog, model);
    result = constrainedPlan(
        *catalog, model, cluster, options, kind, *query, FixedPlan{fixed});
  } else if (args.moneyBudget) {
    result = constrainedPlan(
        *catalog, model, cluster, options, kind, *query,
        MoneyBudget{*args.moneyBudget});
  } else if (args.budgetCount || args.budgetGB) {
    ResourceConfig cap = cluster.maxConfig;
    if (args.budgetCount) {
      cap.containerCount = *args.budgetCount;
    }
    if (args.budgetGB) {
      cap.containerGB = *args.budgetGB;
    }
    result = constrainedPlan(
        *catalog, model, cluster, options, kind, *query, ResourceBudget{cap});
  } else {
    Planner planner(*catalog, model, cluster, options);
    result = planner.plan(kind, *query);
  }
  emit(dumpJson(toJson(result, *catalog)), args.out);
  return kExitOk;
}

struct BenchArgs {
  std::string suite{"tpch"};
  std::string out;
  bool raw{false};
  BenchOptions options;
  std::string cacheMode{"wa"};
};

int runBenchCommand(BenchArgs args) {
  args.options.cacheMode = cacheLookupModeFromString(args.cacheMode);
  auto records = runBench(benchSuiteFromString(args.suite), args.options);
  if (!args.raw) {
    records = averageRecords(records);
  }
  std::ostringstream csv;
  writeBenchCsv(csv, records);
  emit(csv.str(), args.out);
  return kExitOk;
}

struct CostArgs {
  std::string impl{"SMJ"};
  double ssGB{0};
  int64_t containerGB{1};
  int64_t containerCount{1};
  std::string modelFile;
};

int runCost(const CostArgs& args) {
  const auto model = args.modelFile.empty()
      ? CostModel::hiveProfile()
      : costModelFromJson(readJsonFile(args.modelFile));
  const auto impl = operatorImplFromString(args.impl);
  const ResourceConfig config{args.containerCount, args.containerGB};
  const auto features = expandFeatures(
      args.ssGB,
      static_cast<double>(config.containerGB),
      static_cast<double>(config.containerCount));

  std::cout << std::setprecision(12);
  std::cout << "features";
  for (double f : features) {
    std::cout << ' ' << f;
  }
  std::cout << '\n';
  const auto time = model.tryJoinCost(impl, args.ssGB, config);
  if (!time) {
    std::cout << "infeasible: " << toString(impl) << " needs ss <= "
              << model.memoryFraction() << " x containerGB\n";
    return kExitNoFeasiblePlan;
  }
  std::cout << "timeSeconds " << *time << '\n';
  std::cout << "moneyGBSeconds " << moneyOf(*time, config) << '\n';
  return kExitOk;
}

struct RulesEvalArgs {
  std::string treeFile;
  std::string engine;
  double ssGB{0};
  double containerGB{1};
  double containerCount{1};
};

int runRulesEval(const RulesEvalArgs& args) {
  DecisionTree tree = DecisionTree::leaf(OperatorImpl::kSortMergeJoin);
  if (!args.treeFile.empty()) {
    tree = DecisionTree::fromJson(readJsonFile(args.treeFile));
  } else if (args.engine == "spark") {
    tree = defaultTree(EngineDefaults::kSpark);
  } else {
    tree = defaultTree(EngineDefaults::kHive);
  }
  std::cout << toString(evaluateTree(
                   tree, args.ssGB, args.containerGB, args.containerCount))
            << '\n';
  return kExitOk;
}

struct RulesTrainArgs {
  int maxDepth{DecisionTree::kDefaultMaxDepth};
  int minLeafSize{1};
  std::string modelFile;
  std::string out;
};

int runRulesTrain(const RulesTrainArgs& args) {
  const auto model = args.modelFile.empty()
      ? CostModel::hiveProfile()
      : costModelFromJson(readJsonFile(args.modelFile));
  const auto lattice = defaultTrainingLattice();
  const auto grid = labelGridFromModel(
      model, lattice.ssValues, lattice.csValues, lattice.ncValues);
  const auto tree = trainTree(grid, args.maxDepth, args.minLeafSize);
  emit(dumpJson(tree.toJson()), args.out);
  std::cerr << "accuracy " << treeAccuracy(tree, grid) << " depth "
            << tree.depth() << " leaves " << tree.leafCount() << '\n';
  return kExitOk;
}

} // namespace
} // namespace raqo

int main(int argc, char** argv) {
  using namespace raqo;

  CLI::App app{"Resource-aware query planner"};
  app.require_subcommand(1);
  int status = kExitOk;
  std::function<int()> action;

  GenSchemaArgs genArgs;
  auto* gen = app.add_subcommand("gen-schema", "Write a random schema and query");
  gen->add_option("--tables", genArgs.tables, "Number of tables")
      ->check(CLI::PositiveNumber);
  gen->add_option("--seed", genArgs.seed, "Generator seed");
  gen->add_option("--query-size", genArgs.querySize, "Relations in the query (default: all)");
  gen->add_option("--out", genArgs.out, "Output file (default: stdout)");
  gen->callback([&] { action = [&] { return runGenSchema(genArgs); }; });

  PlanArgs planArgs;
  auto* plan = app.add_subcommand("plan", "Plan one query");
  plan->add_option("--catalog", planArgs.catalogFile, "Catalog file, optionally with a query");
  plan->add_option("--query", planArgs.queryFile, "Query file");
  plan->add_option("--cluster", planArgs.clusterFile, "Cluster conditions file");
  plan->add_option("--model", planArgs.modelFile, "Cost model file");
  plan->add_option("--tpch", planArgs.tpchQuery, "TPC-H query when no catalog is given")
      ->check(CLI::IsMember(tpchQueryNames()));
  plan->add_option("--sf", planArgs.scaleFactor, "TPC-H scale factor");
  plan->add_option("--mode", planArgs.mode)->check(CLI::IsMember({"qo", "raqo"}));
  plan->add_option("--planner", planArgs.planner)
      ->check(CLI::IsMember({"selinger", "randomized"}));
  plan->add_option("--strategy", planArgs.strategy)
      ->check(CLI::IsMember({"bf", "hc", "hc-cache"}));
  plan->add_option("--cache", planArgs.cacheMode)->check(CLI::IsMember({"exact", "nn", "wa"}));
  plan->add_option("--threshold", planArgs.thresholdGB, "Cache threshold in GB");
  plan->add_option("--seed", planArgs.seed);
  plan->add_option("--iterations", planArgs.iterations, "Randomized planner restarts");
  plan->add_option("--budget-count", planArgs.budgetCount, "Resource budget: max containers");
  plan->add_option("--budget-gb", planArgs.budgetGB, "Resource budget: max GB per container");
  plan->add_option("--money-budget", planArgs.moneyBudget, "Money budget in GB-seconds");
  plan->add_option("--fixed-plan", planArgs.fixedPlanFile, "Keep this plan, choose resources only");
  plan->add_option("--out", planArgs.out, "Output file (default: stdout)");
  plan->callback([&] { action = [&] { return runPlan(planArgs); }; });

  BenchArgs benchArgs;
  auto* bench = app.add_subcommand("bench", "Run a planner benchmark suite to CSV");
  bench->add_option("--suite", benchArgs.suite)
      ->check(CLI::IsMember({"tpch", "scale-schema", "scale-resources", "cache-sweep"}));
  bench->add_option("--out", benchArgs.out, "CSV file (default: stdout)");
  bench->add_flag("--raw", benchArgs.raw, "One row per repetition instead of means");
  bench->add_option("--repetitions", benchArgs.options.repetitions)->check(CLI::PositiveNumber);
  bench->add_option("--seed", benchArgs.options.seed);
  bench->add_option("--sf", benchArgs.options.scaleFactor, "TPC-H scale factor");
  bench->add_option("--iterations", benchArgs.options.iterations);
  bench->add_option("--cache", benchArgs.cacheMode)->check(CLI::IsMember({"exact", "nn", "wa"}));
  bench->add_option("--threshold", benchArgs.options.cacheThresholdGB);
  bench->add_option("--jobs", benchArgs.options.jobs)->check(CLI::PositiveNumber);
  bench->callback([&] { action = [&] { return runBenchCommand(benchArgs); }; });

  CostArgs costArgs;
  auto* cost = app.add_subcommand("cost", "Predict the time of one join");
  cost->add_option("--impl", costArgs.impl)->check(CLI::IsMember({"SMJ", "BHJ"}));
  cost->add_option("--ss", costArgs.ssGB, "Smaller input in GB")->required();
  cost->add_option("--cs", costArgs.containerGB, "Container size in GB")->required();
  cost->add_option("--nc", costArgs.containerCount, "Number of containers")->required();
  cost->add_option("--model", costArgs.modelFile, "Cost model file");
  cost->callback([&] { action = [&] { return runCost(costArgs); }; });

  auto* rules = app.add_subcommand("rules", "Join-implementation decision trees");
  rules->require_subcommand(1);

  RulesEvalArgs evalArgs;
  auto* eval = rules->add_subcommand("eval", "Evaluate a tree at one point");
  eval->add_option("--tree", evalArgs.treeFile, "Tree file");
  eval->add_option("--engine", evalArgs.engine, "Shipped default tree")
      ->check(CLI::IsMember({"hive", "spark"}));
  eval->add_option("--ss", evalArgs.ssGB)->required();
  eval->add_option("--cs", evalArgs.containerGB)->required();
  eval->add_option("--nc", evalArgs.containerCount)->required();
  eval->callback([&] { action = [&] { return runRulesEval(evalArgs); }; });

  RulesTrainArgs trainArgs;
  auto* train = rules->add_subcommand("train", "Train a tree on the model-labeled lattice");
  train->add_option("--max-depth", trainArgs.maxDepth);
  train->add_option("--min-leaf", trainArgs.minLeafSize)->check(CLI::PositiveNumber);
  train->add_option("--model", trainArgs.modelFile, "Cost model file");
  train->add_option("--out", trainArgs.out, "Tree file (default: stdout)");
  train->callback([&] { action = [&] { return runRulesTrain(trainArgs); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    status = action();
  } catch (const RaqoError& e) {
    std::cerr << "raqo: " << e.what() << '\n';
    status = exitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "raqo: " << e.what() << '\n';
    status = kExitFailure;
  }
  return status;
}
