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
#include <string>

#include "json.hpp"

namespace raqo {

/// A point on the resource grid: how many containers and how large each one
/// is. Dimension 0 is the count, dimension 1 the size.
struct ResourceConfig {
  int64_t containerCount{1};
  int64_t containerGB{1};

  static constexpr size_t kDims = 2;

  int64_t operator[](size_t dim) const {
    return dim == 0 ? containerCount : containerGB;
  }

  int64_t& operator[](size_t dim) {
    return dim == 0 ? containerCount : containerGB;
  }

  bool operator==(const ResourceConfig&) const = default;
};

/// Bounds and step granularity of the resource grid currently on offer.
struct ClusterConditions {
  ResourceConfig minConfig{1, 1};
  ResourceConfig maxConfig{100, 10};
  std::array<int64_t, ResourceConfig::kDims> stepSize{1, 1};

  bool operator==(const ClusterConditions&) const = default;

  /// Number of grid values along 'dim' (r_p for the count, r_c for the size).
  int64_t gridSize(size_t dim) const {
    return (maxConfig[dim] - minConfig[dim]) / stepSize[dim] + 1;
  }

  int64_t gridPoints() const {
    return gridSize(0) * gridSize(1);
  }

  /// Largest grid value along 'dim'; equals maxConfig unless the step does
  /// not divide the range.
  int64_t lastGridValue(size_t dim) const {
    return minConfig[dim] + (gridSize(dim) - 1) * stepSize[dim];
  }

  bool contains(const ResourceConfig& config) const {
    for (size_t dim = 0; dim < ResourceConfig::kDims; ++dim) {
      if (config[dim] < minConfig[dim] || config[dim] > maxConfig[dim]) {
        return false;
      }
    }
    return true;
  }

  bool onGrid(const ResourceConfig& config) const {
    if (!contains(config)) {
      return false;
    }
    for (size_t dim = 0; dim < ResourceConfig::kDims; ++dim) {
      if ((config[dim] - minConfig[dim]) % stepSize[dim] != 0) {
        return false;
      }
    }
    return true;
  }

  /// Throws InvalidArgument unless min <= max, min >= 1 and steps >= 1.
  void validate() const;

  /// 100 containers of at most 10 GB, starting at 1 x 1 GB, step 1.
  static ClusterConditions defaults() {
    return {};
  }

  /// Cluster from (1, 1) up to the given maxima. The step defaults to
  /// max(1, (max - min) / 100) per dimension.
  static ClusterConditions scaled(int64_t maxContainers, int64_t maxGB);
};

std::string toString(const ResourceConfig& config);

nlohmann::json toJson(const ResourceConfig& config);
nlohmann::json toJson(const ClusterConditions& cluster);
ResourceConfig resourceConfigFromJson(const nlohmann::json& json);

/// Accepts a missing stepSize (derived as in scaled()). Throws ParseError.
ClusterConditions clusterFromJson(const nlohmann::json& json);

} // namespace raqo
