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

#include "raqo/cost_model.h"

#include <algorithm>
#include <cmath>

#include "raqo/error.h"

namespace raqo {

std::string_view toString(OperatorImpl impl) {
  switch (impl) {
    case OperatorImpl::kSortMergeJoin:
      return "SMJ";
    case OperatorImpl::kBroadcastHashJoin:
      return "BHJ";
    case OperatorImpl::kFullScan:
      return "FULLSCAN";
  }
  return "UNKNOWN";
}

OperatorImpl operatorImplFromString(std::string_view name) {
  if (name == "SMJ") {
    return OperatorImpl::kSortMergeJoin;
  }
  if (name == "BHJ") {
    return OperatorImpl::kBroadcastHashJoin;
  }
  if (name == "FULLSCAN") {
    return OperatorImpl::kFullScan;
  }
  throw RaqoError(
      ErrorKind::kParseError,
      "unknown operator implementation " + std::string(name));
}

Coefficients
expandFeatures(double ssGB, double containerGB, double containerCount) {
  return {
      ssGB,
      ssGB * ssGB,
      containerGB,
      containerGB * containerGB,
      containerCount,
      containerCount * containerCount,
      containerGB * containerCount};
}

CostModel CostModel::hiveProfile() {
  CostModel model;
  model.setCoefficients(
      OperatorImpl::kSortMergeJoin,
      {1.62643613e+01,
       9.68774888e-01,
       1.33866542e-02,
       1.60639851e-01,
       -7.82618920e-03,
       -3.91309460e-01,
       1.10387975e-01});
  model.setCoefficients(
      OperatorImpl::kBroadcastHashJoin,
      {1.00739509e+04,
       -6.72184592e+02,
       -1.37392901e+01,
       -1.64871481e+02,
       2.44721676e-02,
       1.22360838e+00,
       -1.37319484e+02});
  return model;
}

void CostModel::setCoefficients(
    OperatorImpl impl,
    const Coefficients& coefficients) {
  if (!isJoin(impl)) {
    throw RaqoError(
        ErrorKind::kInvalidArgument, "coefficients apply to joins only");
  }
  coefficients_[impl] = coefficients;
}

const Coefficients& CostModel::coefficients(OperatorImpl impl) const {
  auto it = coefficients_.find(impl);
  if (it == coefficients_.end()) {
    throw RaqoError(
        ErrorKind::kUnknownImplementation,
        "no coefficients for " + std::string(toString(impl)));
  }
  return it->second;
}

void CostModel::setScanCostPerGB(double value) {
  if (!(value >= 0)) {
    throw RaqoError(
        ErrorKind::kInvalidArgument, "scanCostPerGB must be nonnegative");
  }
  scanCostPerGB_ = value;
}

void CostModel::setMemoryFraction(double value) {
  if (!(value > 0)) {
    throw RaqoError(
        ErrorKind::kInvalidArgument, "memoryFraction must be positive");
  }
  memoryFraction_ = value;
}

bool CostModel::isFeasible(
    OperatorImpl impl,
    double ssGB,
    const ResourceConfig& config) const {
  if (impl == OperatorImpl::kBroadcastHashJoin) {
    return ssGB <= memoryFraction_ * static_cast<double>(config.containerGB);
  }
  return true;
}

double CostModel::predict(
    const Coefficients& coefficients,
    double ssGB,
    const ResourceConfig& config) const {
  const auto features = expandFeatures(
      ssGB,
      static_cast<double>(config.containerGB),
      static_cast<double>(config.containerCount));
  double dot = 0;
  for (size_t i = 0; i < kFeatureCount; ++i) {
    dot += coefficients[i] * features[i];
  }
  return std::max(dot, floorCost_);
}

double CostModel::joinCost(
    OperatorImpl impl,
    double ssGB,
    const ResourceConfig& config) const {
  const auto& c = coefficients(impl);
  if (!isFeasible(impl, ssGB, config)) {
    throw RaqoError(
        ErrorKind::kInfeasibleOperator,
        std::string(toString(impl)) + " with " + std::to_string(ssGB) +
            " GB input does not fit " + toString(config));
  }
  return predict(c, ssGB, config);
}

std::optional<double> CostModel::tryJoinCost(
    OperatorImpl impl,
    double ssGB,
    const ResourceConfig& config) const {
  const auto& c = coefficients(impl);
  if (!isFeasible(impl, ssGB, config)) {
    return std::nullopt;
  }
  return predict(c, ssGB, config);
}

namespace {

int signOf(double value) {
  return (value > 0) - (value < 0);
}

} // namespace

CoefficientSigns CostModel::signature(OperatorImpl impl) const {
  const auto& c = coefficients(impl);
  return {signOf(c[2]), signOf(c[3]), signOf(c[4]), signOf(c[5])};
}

std::map<OperatorImpl, CoefficientSigns> coefficientSignature(
    const CostModel& model) {
  std::map<OperatorImpl, CoefficientSigns> result;
  for (auto impl : kJoinImpls) {
    if (model.hasCoefficients(impl)) {
      result[impl] = model.signature(impl);
    }
  }
  return result;
}

nlohmann::json toJson(const CostModel& model) {
  nlohmann::json result = nlohmann::json::object();
  for (auto impl : kJoinImpls) {
    if (model.hasCoefficients(impl)) {
      const auto& c = model.coefficients(impl);
      result[std::string(toString(impl))] = std::vector<double>(c.begin(), c.end());
    }
  }
  result["scanCostPerGB"] = model.scanCostPerGB();
  result["memoryFraction"] = model.memoryFraction();
  return result;
}

CostModel costModelFromJson(const nlohmann::json& json) {
  try {
    if (!json.is_object()) {
      throw RaqoError(ErrorKind::kParseError, "cost model must be an object");
    }
    CostModel model;
    for (const auto& [key, value] : json.items()) {
      if (key == "scanCostPerGB") {
        model.setScanCostPerGB(value.get<double>());
      } else if (key == "memoryFraction") {
        model.setMemoryFraction(value.get<double>());
      } else {
        const auto impl = operatorImplFromString(key);
        const auto values = value.get<std::vector<double>>();
        if (values.size() != kFeatureCount) {
          throw RaqoError(
              ErrorKind::kParseError,
              key + " needs exactly 7 coefficients");
        }
        Coefficients coefficients{};
        std::copy(values.begin(), values.end(), coefficients.begin());
        model.setCoefficients(impl, coefficients);
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw RaqoError(ErrorKind::kParseError, e.what());
  } catch (const RaqoError& e) {
    if (e.kind() == ErrorKind::kParseError) {
      throw;
    }
    throw RaqoError(ErrorKind::kParseError, e.what());
  }
}

} // namespace raqo
