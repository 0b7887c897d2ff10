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
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "raqo/resource_config.h"

namespace raqo {

enum class OperatorImpl {
  kSortMergeJoin,
  kBroadcastHashJoin,
  kFullScan,
};

/// SMJ, BHJ or FULLSCAN.
std::string_view toString(OperatorImpl impl);

/// Throws ParseError for unknown names.
OperatorImpl operatorImplFromString(std::string_view name);

constexpr std::array<OperatorImpl, 2> kJoinImpls = {
    OperatorImpl::kSortMergeJoin,
    OperatorImpl::kBroadcastHashJoin};

inline bool isJoin(OperatorImpl impl) {
  return impl != OperatorImpl::kFullScan;
}

constexpr size_t kFeatureCount = 7;
using Coefficients = std::array<double, kFeatureCount>;

/// [ss, ss^2, cs, cs^2, nc, nc^2, cs*nc] for smaller-input size ss (GB),
/// container size cs (GB) and container count nc.
Coefficients expandFeatures(double ssGB, double containerGB, double containerCount);

struct CostReport {
  double timeSeconds{0};
  double moneyGBSeconds{0};

  CostReport& operator+=(const CostReport& other) {
    timeSeconds += other.timeSeconds;
    moneyGBSeconds += other.moneyGBSeconds;
    return *this;
  }

  friend CostReport operator+(CostReport a, const CostReport& b) {
    return a += b;
  }
};

/// Sign of a coefficient: -1, 0 or +1.
struct CoefficientSigns {
  int cs{0};
  int csSquared{0};
  int nc{0};
  int ncSquared{0};

  bool operator==(const CoefficientSigns&) const = default;
};

/// Learned linear time model per join implementation. A prediction is the dot
/// product of the coefficients with the expanded features, clamped below at
/// floorCost. There is no intercept term.
class CostModel {
 public:
  static constexpr double kDefaultFloorCost = 0.001;
  static constexpr double kDefaultMemoryFraction = 0.8;

  CostModel() = default;

  /// The regression coefficients fitted on Hive SMJ/BHJ profile runs.
  static CostModel hiveProfile();

  void setCoefficients(OperatorImpl impl, const Coefficients& coefficients);

  bool hasCoefficients(OperatorImpl impl) const {
    return coefficients_.count(impl) > 0;
  }

  /// Throws UnknownImplementation.
  const Coefficients& coefficients(OperatorImpl impl) const;

  double scanCostPerGB() const {
    return scanCostPerGB_;
  }

  void setScanCostPerGB(double value);

  double memoryFraction() const {
    return memoryFraction_;
  }

  void setMemoryFraction(double value);

  double floorCost() const {
    return floorCost_;
  }

  /// BHJ must fit the smaller input into memoryFraction of one container.
  bool isFeasible(OperatorImpl impl, double ssGB, const ResourceConfig& config)
      const;

  /// Predicted seconds. Throws UnknownImplementation or InfeasibleOperator.
  double joinCost(OperatorImpl impl, double ssGB, const ResourceConfig& config)
      const;

  /// As joinCost, but nullopt for an infeasible configuration.
  std::optional<double>
  tryJoinCost(OperatorImpl impl, double ssGB, const ResourceConfig& config)
      const;

  double scanCost(double inputGB) const {
    return scanCostPerGB_ * inputGB;
  }

  CoefficientSigns signature(OperatorImpl impl) const;

 private:
  double predict(const Coefficients& coefficients, double ssGB, const ResourceConfig& config)
      const;

  std::map<OperatorImpl, Coefficients> coefficients_;
  double scanCostPerGB_{0};
  double memoryFraction_{kDefaultMemoryFraction};
  double floorCost_{kDefaultFloorCost};
};

/// Container occupancy of one operator: seconds x containers x GB.
inline double moneyOf(double timeSeconds, const ResourceConfig& config) {
  return timeSeconds * static_cast<double>(config.containerCount) *
      static_cast<double>(config.containerGB);
}

/// Sign pattern of the cs, cs^2, nc and nc^2 coefficients per join impl.
std::map<OperatorImpl, CoefficientSigns> coefficientSignature(const CostModel& model);

/// {"SMJ": [7 reals], "BHJ": [...], "scanCostPerGB": x, "memoryFraction": y}.
nlohmann::json toJson(const CostModel& model);

/// Throws ParseError.
CostModel costModelFromJson(const nlohmann::json& json);

} // namespace raqo
