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
#include <cmath>

#include "raqo/error.h"
#include "raqo/resource.h"

namespace raqo {

std::string_view toString(CacheLookupMode mode) {
  switch (mode) {
    case CacheLookupMode::kExact:
      return "exact";
    case CacheLookupMode::kNearestNeighbor:
      return "nn";
    case CacheLookupMode::kWeightedAverage:
      return "wa";
  }
  return "unknown";
}

CacheLookupMode cacheLookupModeFromString(std::string_view name) {
  if (name == "exact") {
    return CacheLookupMode::kExact;
  }
  if (name == "nn") {
    return CacheLookupMode::kNearestNeighbor;
  }
  if (name == "wa") {
    return CacheLookupMode::kWeightedAverage;
  }
  throw RaqoError(
      ErrorKind::kParseError, "unknown cache mode " + std::string(name));
}

std::string_view toString(SubplanKind kind) {
  switch (kind) {
    case SubplanKind::kJoin:
      return "Join";
  }
  return "unknown";
}

size_t ResourcePlanCache::SortedArray::lowerBound(double ssGB) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), ssGB, [](const Entry& e, double key) {
        return e.ssGB < key;
      });
  return static_cast<size_t>(it - entries_.begin());
}

void ResourcePlanCache::SortedArray::upsert(
    double ssGB,
    const ResourceConfig& config) {
  const auto pos = lowerBound(ssGB);
  if (pos < entries_.size() && entries_[pos].ssGB == ssGB) {
    entries_[pos].config = config;
    return;
  }
  if (entries_.size() == capacity_) {
    capacity_ = std::max<size_t>(1, capacity_ * 2);
    entries_.reserve(capacity_);
  }
  entries_.insert(
      entries_.begin() + static_cast<std::ptrdiff_t>(pos), {ssGB, config});
}

ResourcePlanCache::ResourcePlanCache(
    ClusterConditions cluster,
    CacheLookupMode mode,
    double thresholdGB)
    : cluster_(cluster), mode_(mode), thresholdGB_(thresholdGB) {
  cluster_.validate();
  if (!(thresholdGB_ >= 0)) {
    throw RaqoError(
        ErrorKind::kInvalidArgument, "cache threshold must be nonnegative");
  }
}

size_t ResourcePlanCache::slot(OperatorImpl impl, SubplanKind kind) {
  (void)kind;
  return static_cast<size_t>(impl);
}

void ResourcePlanCache::clear() {
  for (auto& array : arrays_) {
    array.clear();
  }
  stats_ = {};
}

void ResourcePlanCache::rebind(const ClusterConditions& cluster) {
  if (cluster == cluster_) {
    return;
  }
  cluster.validate();
  cluster_ = cluster;
  clear();
}

size_t ResourcePlanCache::size(OperatorImpl impl, SubplanKind kind) const {
  return arrays_[slot(impl, kind)].entries().size();
}

size_t ResourcePlanCache::capacity(OperatorImpl impl, SubplanKind kind) const {
  return arrays_[slot(impl, kind)].capacity();
}

const std::vector<ResourcePlanCache::Entry>& ResourcePlanCache::entries(
    OperatorImpl impl,
    SubplanKind kind) const {
  return arrays_[slot(impl, kind)].entries();
}

ResourceConfig ResourcePlanCache::snapToGrid(double count, double gb) const {
  const std::array<double, ResourceConfig::kDims> values = {count, gb};
  ResourceConfig result;
  for (size_t dim = 0; dim < ResourceConfig::kDims; ++dim) {
    const double steps = std::round(
        (values[dim] - static_cast<double>(cluster_.minConfig[dim])) /
        static_cast<double>(cluster_.stepSize[dim]));
    const auto index = std::clamp<int64_t>(
        static_cast<int64_t>(steps), 0, cluster_.gridSize(dim) - 1);
    result[dim] = cluster_.minConfig[dim] + index * cluster_.stepSize[dim];
  }
  return result;
}

std::optional<ResourceConfig>
ResourcePlanCache::lookup(OperatorImpl impl, SubplanKind kind, double ssGB) {
  const auto& array = arrays_[slot(impl, kind)];
  const auto& entries = array.entries();
  const auto pos = array.lowerBound(ssGB);
  auto hit = [&](const ResourceConfig& config) {
    ++stats_.hits;
    return std::optional<ResourceConfig>(config);
  };
  auto miss = [&]() {
    ++stats_.misses;
    return std::optional<ResourceConfig>();
  };

  if (pos < entries.size() && entries[pos].ssGB == ssGB) {
    return hit(entries[pos].config);
  }

  const Entry* below = pos > 0 ? &entries[pos - 1] : nullptr;
  const Entry* above = pos < entries.size() ? &entries[pos] : nullptr;
  auto within = [&](const Entry* e) {
    return e != nullptr && std::abs(e->ssGB - ssGB) <= thresholdGB_;
  };

  switch (mode_) {
    case CacheLookupMode::kExact:
      return miss();

    case CacheLookupMode::kNearestNeighbor: {
      const Entry* nearest = below;
      if (above != nullptr &&
          (nearest == nullptr ||
           above->ssGB - ssGB < ssGB - nearest->ssGB)) {
        nearest = above;
      }
      return within(nearest) ? hit(nearest->config) : miss();
    }

    case CacheLookupMode::kWeightedAverage: {
      if (below == nullptr || above == nullptr) {
        const Entry* only = below != nullptr ? below : above;
        return within(only) ? hit(only->config) : miss();
      }
      if (!within(below) || !within(above)) {
        return miss();
      }
      const double wBelow = 1.0 / (ssGB - below->ssGB);
      const double wAbove = 1.0 / (above->ssGB - ssGB);
      auto blend = [&](size_t dim) {
        return (wBelow * static_cast<double>(below->config[dim]) +
                wAbove * static_cast<double>(above->config[dim])) /
            (wBelow + wAbove);
      };
      return hit(snapToGrid(blend(0), blend(1)));
    }
  }
  return miss();
}

void ResourcePlanCache::insert(
    OperatorImpl impl,
    SubplanKind kind,
    double ssGB,
    const ResourceConfig& config) {
  if (!cluster_.contains(config)) {
    throw RaqoError(
        ErrorKind::kInvalidArgument,
        "cached config " + toString(config) + " is outside the cluster");
  }
  arrays_[slot(impl, kind)].upsert(ssGB, config);
  ++stats_.inserts;
}

nlohmann::json ResourcePlanCache::toJson() const {
  nlohmann::json entries = nlohmann::json::object();
  for (auto impl : kJoinImpls) {
    const auto kind = SubplanKind::kJoin;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& entry : this->entries(impl, kind)) {
      rows.push_back(
          {entry.ssGB, entry.config.containerCount, entry.config.containerGB});
    }
    entries[std::string(toString(impl))][std::string(toString(kind))] = rows;
  }
  return {
      {"cluster", raqo::toJson(cluster_)},
      {"lookupMode", std::string(toString(mode_))},
      {"thresholdGB", thresholdGB_},
      {"entries", entries}};
}

ResourcePlanCache ResourcePlanCache::fromJson(const nlohmann::json& json) {
  try {
    ResourcePlanCache cache(
        clusterFromJson(json.at("cluster")),
        cacheLookupModeFromString(json.at("lookupMode").get<std::string>()),
        json.at("thresholdGB").get<double>());
    for (const auto& [implName, kinds] : json.at("entries").items()) {
      const auto impl = operatorImplFromString(implName);
      for (const auto& [kindName, rows] : kinds.items()) {
        if (kindName != toString(SubplanKind::kJoin)) {
          throw RaqoError(
              ErrorKind::kParseError, "unknown subplan kind " + kindName);
        }
        for (const auto& row : rows) {
          cache.insert(
              impl,
              SubplanKind::kJoin,
              row.at(0).get<double>(),
              {row.at(1).get<int64_t>(), row.at(2).get<int64_t>()});
        }
      }
    }
    cache.stats_ = {};
    return cache;
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
