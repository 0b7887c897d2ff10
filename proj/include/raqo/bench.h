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
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "raqo/catalog.h"
#include "raqo/plan.h"
#include "raqo/planner.h"

namespace raqo {

/// One planner run, or the mean of several repetitions of the same run.
struct BenchRecord {
  std::string query;
  std::string planner;
  /// qo, bf, hc or hc-cache.
  std::string strategy;
  /// none, exact, nn or wa.
  std::string cacheMode{"none"};
  /// none, query (cleared before each query) or workload (kept across the
  /// queries of one cluster condition).
  std::string cacheScope{"none"};
  double thresholdGB{0};
  uint64_t configsExplored{0};
  double wallClockMillis{0};
  double planTimeSeconds{0};
  double planMoneyGBSeconds{0};
  int64_t clusterMaxCount{0};
  int64_t clusterMaxGB{0};
  uint64_t seed{0};
  int repetitions{1};
  /// ok, or the error kind that stopped the run.
  std::string status{"ok"};
  /// Join tree with per-join implementation and resources.
  std::string plan;

  /// Everything except timing and the repetition count.
  bool sameRun(const BenchRecord& other) const;
};

enum class BenchSuite { kTpch, kScaleSchema, kScaleResources, kCacheSweep };

std::string_view toString(BenchSuite suite);

/// tpch, scale-schema, scale-resources or cache-sweep. Throws ParseError.
BenchSuite benchSuiteFromString(std::string_view name);

struct BenchOptions {
  double scaleFactor{1};
  int repetitions{3};
  uint64_t seed{42};
  int iterations{10};
  /// Lookup mode and threshold of the hc-cache rows in the tpch and scale
  /// suites.
  CacheLookupMode cacheMode{CacheLookupMode::kWeightedAverage};
  double cacheThresholdGB{0.1};
  std::vector<double> sweepThresholdsGB{0, 0.025, 0.05, 0.1};
  int schemaTables{100};
  /// Relation counts of the scale-schema queries; the last one is the query
  /// measured by scale-resources.
  std::vector<int> schemaQuerySizes{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::vector<int64_t> clusterCounts{100, 1'000, 10'000, 100'000};
  std::vector<int64_t> clusterGBs{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  /// Worker threads; each run owns its planner and cache.
  int jobs{1};
};

/// Runs a suite and returns one record per run and repetition, in a fixed
/// order.
std::vector<BenchRecord> runBench(BenchSuite suite, const BenchOptions& options);

/// Folds consecutive repetitions of the same run into one record with the
/// mean wall clock.
std::vector<BenchRecord> averageRecords(const std::vector<BenchRecord>& records);

/// "((orders SMJ[34x1] lineitem) ...)" with containers x GB per join.
std::string planSignature(const PlanNode& plan, const Catalog& catalog);

const std::vector<std::string>& benchCsvColumns();

void writeBenchCsv(std::ostream& out, const std::vector<BenchRecord>& records);

/// Throws ParseError on a header or field mismatch.
std::vector<BenchRecord> readBenchCsv(std::istream& in);

} // namespace raqo
