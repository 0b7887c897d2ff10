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

#include "raqo/bench.h"

#include <atomic>
#include <charconv>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <thread>

#include "raqo/error.h"

namespace raqo {

bool BenchRecord::sameRun(const BenchRecord& other) const {
  return query == other.query && planner == other.planner &&
      strategy == other.strategy && cacheMode == other.cacheMode &&
      cacheScope == other.cacheScope && thresholdGB == other.thresholdGB &&
      configsExplored == other.configsExplored &&
      planTimeSeconds == other.planTimeSeconds &&
      planMoneyGBSeconds == other.planMoneyGBSeconds &&
      clusterMaxCount == other.clusterMaxCount &&
      clusterMaxGB == other.clusterMaxGB && seed == other.seed &&
      status == other.status && plan == other.plan;
}

std::string_view toString(BenchSuite suite) {
  switch (suite) {
    case BenchSuite::kTpch:
      return "tpch";
    case BenchSuite::kScaleSchema:
      return "scale-schema";
    case BenchSuite::kScaleResources:
      return "scale-resources";
    case BenchSuite::kCacheSweep:
      return "cache-sweep";
  }
  return "unknown";
}

BenchSuite benchSuiteFromString(std::string_view name) {
  for (auto suite :
       {BenchSuite::kTpch,
        BenchSuite::kScaleSchema,
        BenchSuite::kScaleResources,
        BenchSuite::kCacheSweep}) {
    if (toString(suite) == name) {
      return suite;
    }
  }
  throw RaqoError(
      ErrorKind::kParseError, "unknown bench suite " + std::string(name));
}

std::string planSignature(const PlanNode& plan, const Catalog& catalog) {
  if (plan.isScan()) {
    return catalog.table(plan.table()).name;
  }
  const auto& choice = plan.join();
  return "(" + planSignature(*plan.left(), catalog) + " " +
      std::string(toString(choice.impl)) + "[" +
      std::to_string(choice.resources.containerCount) + "x" +
      std::to_string(choice.resources.containerGB) + "] " +
      planSignature(*plan.right(), catalog) + ")";
}

namespace {

struct BenchRun {
  std::string queryName;
  std::shared_ptr<const Catalog> catalog;
  Query query;
  /// Planned first on the same planner when the cache scope is "workload".
  std::vector<Query> warmup;
  PlannerKind planner{PlannerKind::kSelinger};
  std::string strategy;
  CacheLookupMode cacheMode{CacheLookupMode::kExact};
  std::string cacheScope{"none"};
  double thresholdGB{0};
  ClusterConditions cluster;
};

BenchRecord runOne(
    const BenchRun& run,
    const CostModel& model,
    const BenchOptions& options) {
  BenchRecord record;
  record.query = run.queryName;
  record.planner = std::string(toString(run.planner));
  record.strategy = run.strategy;
  const bool cached = run.strategy == "hc-cache";
  record.cacheMode = cached ? std::string(toString(run.cacheMode)) : "none";
  record.cacheScope = cached ? run.cacheScope : "none";
  record.thresholdGB = cached ? run.thresholdGB : 0;
  record.clusterMaxCount = run.cluster.maxConfig.containerCount;
  record.clusterMaxGB = run.cluster.maxConfig.containerGB;
  record.seed = options.seed;

  PlannerOptions plannerOptions;
  plannerOptions.mode =
      run.strategy == "qo" ? PlannerMode::kQO : PlannerMode::kRAQO;
  if (plannerOptions.mode == PlannerMode::kRAQO) {
    plannerOptions.strategy = resourceStrategyFromString(run.strategy);
  }
  plannerOptions.cacheMode = run.cacheMode;
  plannerOptions.cacheThresholdGB = run.thresholdGB;
  plannerOptions.iterations = options.iterations;
  plannerOptions.seed = options.seed;
  try {
    Planner planner(*run.catalog, model, run.cluster, plannerOptions);
    for (const auto& query : run.warmup) {
      planner.plan(run.planner, query);
    }
    const auto result = planner.plan(run.planner, run.query);
    record.configsExplored = result.totalConfigsExplored;
    record.wallClockMillis = result.wallClockMillis;
    record.planTimeSeconds = result.plan->cost().timeSeconds;
    record.planMoneyGBSeconds = result.plan->cost().moneyGBSeconds;
    record.plan = planSignature(*result.plan, *run.catalog);
  } catch (const RaqoError& e) {
    record.status = std::string(toString(e.kind()));
  }
  return record;
}

constexpr std::array<PlannerKind, 2> kPlanners = {
    PlannerKind::kSelinger,
    PlannerKind::kFastRandomized};

std::vector<BenchRun> tpchRuns(const BenchOptions& options) {
  auto catalog = std::make_shared<const Catalog>(tpchCatalog(options.scaleFactor));
  std::vector<BenchRun> runs;
  for (const auto& name : tpchQueryNames()) {
    for (auto planner : kPlanners) {
      for (const char* strategy : {"qo", "bf", "hc", "hc-cache"}) {
        BenchRun run;
        run.queryName = name;
        run.catalog = catalog;
        run.query = tpchQuery(name);
        run.planner = planner;
        run.strategy = strategy;
        run.cacheMode = options.cacheMode;
        run.cacheScope = "query";
        run.thresholdGB = options.cacheThresholdGB;
        run.cluster = ClusterConditions::defaults();
        runs.push_back(std::move(run));
      }
    }
  }
  return runs;
}

std::vector<BenchRun> cacheSweepRuns(const BenchOptions& options) {
  auto catalog = std::make_shared<const Catalog>(tpchCatalog(options.scaleFactor));
  std::vector<BenchRun> runs;
  for (auto planner : kPlanners) {
    BenchRun base;
    base.queryName = "All";
    base.catalog = catalog;
    base.query = tpchQuery("All");
    base.planner = planner;
    base.strategy = "hc";
    base.cluster = ClusterConditions::defaults();
    runs.push_back(base);
    for (auto mode :
         {CacheLookupMode::kExact,
          CacheLookupMode::kNearestNeighbor,
          CacheLookupMode::kWeightedAverage}) {
      for (auto threshold : options.sweepThresholdsGB) {
        BenchRun run = base;
        run.strategy = "hc-cache";
        run.cacheMode = mode;
        run.cacheScope = "query";
        run.thresholdGB = threshold;
        runs.push_back(std::move(run));
      }
    }
  }
  return runs;
}

std::vector<BenchRun> scaleSchemaRuns(const BenchOptions& options) {
  auto catalog = std::make_shared<const Catalog>(
      randomCatalog(options.schemaTables, options.seed));
  std::vector<BenchRun> runs;
  for (auto size : options.schemaQuerySizes) {
    for (const char* strategy : {"qo", "hc", "hc-cache"}) {
      BenchRun run;
      run.queryName = "R" + std::to_string(size);
      run.catalog = catalog;
      run.query = connectedQuery(*catalog, size);
      run.planner = PlannerKind::kFastRandomized;
      run.strategy = strategy;
      run.cacheMode = options.cacheMode;
      run.cacheScope = "query";
      run.thresholdGB = options.cacheThresholdGB;
      run.cluster = ClusterConditions::defaults();
      runs.push_back(std::move(run));
    }
  }
  return runs;
}

std::vector<BenchRun> scaleResourceRuns(const BenchOptions& options) {
  auto catalog = std::make_shared<const Catalog>(
      randomCatalog(options.schemaTables, options.seed));
  std::vector<Query> sequence;
  for (auto size : options.schemaQuerySizes) {
    sequence.push_back(connectedQuery(*catalog, size));
  }
  const auto measured = sequence.back();
  sequence.pop_back();
  const auto name = "R" + std::to_string(options.schemaQuerySizes.back());

  std::vector<BenchRun> runs;
  for (auto count : options.clusterCounts) {
    for (auto gb : options.clusterGBs) {
      for (const char* scope : {"query", "workload"}) {
        BenchRun run;
        run.queryName = name;
        run.catalog = catalog;
        run.query = measured;
        if (std::string_view(scope) == "workload") {
          run.warmup = sequence;
        }
        run.planner = PlannerKind::kFastRandomized;
        run.strategy = "hc-cache";
        run.cacheMode = options.cacheMode;
        run.cacheScope = scope;
        run.thresholdGB = options.cacheThresholdGB;
        run.cluster = ClusterConditions::scaled(count, gb);
        runs.push_back(std::move(run));
      }
    }
  }
  return runs;
}

} // namespace

std::vector<BenchRecord> runBench(
    BenchSuite suite,
    const BenchOptions& options) {
  if (options.repetitions < 1 || options.jobs < 1) {
    throw RaqoError(
        ErrorKind::kInvalidArgument, "repetitions and jobs must be >= 1");
  }
  std::vector<BenchRun> runs;
  switch (suite) {
    case BenchSuite::kTpch:
      runs = tpchRuns(options);
      break;
    case BenchSuite::kScaleSchema:
      runs = scaleSchemaRuns(options);
      break;
    case BenchSuite::kScaleResources:
      runs = scaleResourceRuns(options);
      break;
    case BenchSuite::kCacheSweep:
      runs = cacheSweepRuns(options);
      break;
  }

  const auto model = CostModel::hiveProfile();
  const size_t reps = static_cast<size_t>(options.repetitions);
  std::vector<BenchRecord> records(runs.size() * reps);
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < records.size(); i = next++) {
      records[i] = runOne(runs[i / reps], model, options);
    }
  };
  if (options.jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (int i = 0; i < options.jobs; ++i) {
      threads.emplace_back(worker);
    }
  }
  return records;
}

std::vector<BenchRecord> averageRecords(
    const std::vector<BenchRecord>& records) {
  std::vector<BenchRecord> result;
  for (const auto& record : records) {
    if (!result.empty() && result.back().sameRun(record)) {
      auto& mean = result.back();
      const double n = mean.repetitions;
      mean.wallClockMillis =
          (mean.wallClockMillis * n + record.wallClockMillis) / (n + 1);
      ++mean.repetitions;
    } else {
      result.push_back(record);
    }
  }
  return result;
}

const std::vector<std::string>& benchCsvColumns() {
  static const std::vector<std::string> kColumns = {
      "query",
      "planner",
      "strategy",
      "cache_mode",
      "cache_scope",
      "threshold_gb",
      "configs_explored",
      "wall_clock_ms",
      "plan_time_s",
      "plan_money_gbs",
      "cluster_max_count",
      "cluster_max_gb",
      "seed",
      "repetitions",
      "status",
      "plan"};
  return kColumns;
}

namespace {

std::string formatDouble(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

template <typename T>
T parseNumber(const std::string& field, const std::string& column) {
  T value{};
  auto [end, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size()) {
    throw RaqoError(
        ErrorKind::kParseError, "bad value '" + field + "' in " + column);
  }
  return value;
}

std::vector<std::string> splitLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

} // namespace

void writeBenchCsv(std::ostream& out, const std::vector<BenchRecord>& records) {
  const auto& columns = benchCsvColumns();
  for (size_t i = 0; i < columns.size(); ++i) {
    out << (i ? "," : "") << columns[i];
  }
  out << "\n";
  for (const auto& r : records) {
    out << r.query << "," << r.planner << "," << r.strategy << ","
        << r.cacheMode << "," << r.cacheScope << ","
        << formatDouble(r.thresholdGB) << "," << r.configsExplored << ","
        << formatDouble(r.wallClockMillis) << ","
        << formatDouble(r.planTimeSeconds) << ","
        << formatDouble(r.planMoneyGBSeconds) << "," << r.clusterMaxCount
        << "," << r.clusterMaxGB << "," << r.seed << "," << r.repetitions
        << "," << r.status << "," << r.plan << "\n";
  }
}

std::vector<BenchRecord> readBenchCsv(std::istream& in) {
  const auto& columns = benchCsvColumns();
  std::string line;
  if (!std::getline(in, line) || splitLine(line) != columns) {
    throw RaqoError(ErrorKind::kParseError, "unexpected bench CSV header");
  }
  std::vector<BenchRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto f = splitLine(line);
    if (f.size() != columns.size()) {
      throw RaqoError(
          ErrorKind::kParseError, "bench CSV row has wrong field count");
    }
    BenchRecord r;
    r.query = f[0];
    r.planner = f[1];
    r.strategy = f[2];
    r.cacheMode = f[3];
    r.cacheScope = f[4];
    r.thresholdGB = parseNumber<double>(f[5], columns[5]);
    r.configsExplored = parseNumber<uint64_t>(f[6], columns[6]);
    r.wallClockMillis = parseNumber<double>(f[7], columns[7]);
    r.planTimeSeconds = parseNumber<double>(f[8], columns[8]);
    r.planMoneyGBSeconds = parseNumber<double>(f[9], columns[9]);
    r.clusterMaxCount = parseNumber<int64_t>(f[10], columns[10]);
    r.clusterMaxGB = parseNumber<int64_t>(f[11], columns[11]);
    r.seed = parseNumber<uint64_t>(f[12], columns[12]);
    r.repetitions = parseNumber<int>(f[13], columns[13]);
    r.status = f[14];
    r.plan = f[15];
    records.push_back(std::move(r));
  }
  return records;
}

} // namespace raqo
