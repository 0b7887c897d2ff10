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

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "json.hpp"

namespace raqo {

using TableId = int32_t;

/// Set of catalog tables, stored as a bitset sized to the catalog.
class RelationSet {
 public:
  RelationSet() = default;

  explicit RelationSet(size_t universe) : words_((universe + 63) / 64, 0) {}

  static RelationSet of(size_t universe, std::initializer_list<TableId> ids) {
    RelationSet set(universe);
    for (auto id : ids) {
      set.add(id);
    }
    return set;
  }

  void add(TableId id) {
    words_[id / 64] |= uint64_t{1} << (id % 64);
  }

  bool contains(TableId id) const {
    const auto word = static_cast<size_t>(id / 64);
    return word < words_.size() && (words_[word] >> (id % 64)) & 1;
  }

  size_t size() const;

  bool empty() const {
    return size() == 0;
  }

  bool intersects(const RelationSet& other) const;

  RelationSet operator|(const RelationSet& other) const;

  bool operator==(const RelationSet& other) const = default;

  std::vector<TableId> members() const;

  /// Calls fn(id) for every member in ascending order.
  template <typename Fn>
  void forEachMember(Fn&& fn) const {
    for (size_t i = 0; i < words_.size(); ++i) {
      auto word = words_[i];
      while (word) {
        fn(static_cast<TableId>(i * 64 + std::countr_zero(word)));
        word &= word - 1;
      }
    }
  }

  size_t hash() const;

  struct Hash {
    size_t operator()(const RelationSet& set) const {
      return set.hash();
    }
  };

 private:
  // Two inline words cover catalogs of up to 128 tables without allocating.
  boost::container::small_vector<uint64_t, 2> words_;
};

struct Table {
  std::string name;
  int64_t rowCount{1};
  int64_t rowBytes{1};

  int64_t sizeBytes() const {
    return rowCount * rowBytes;
  }
};

struct JoinEdge {
  std::string left;
  std::string right;
  double selectivity{1};
};

/// Immutable schema plus join graph. Construction validates every table and
/// edge; the object is safe to share across planner instances.
class Catalog {
 public:
  struct Neighbor {
    TableId table;
    size_t edge;
  };

  Catalog(std::vector<Table> tables, std::vector<JoinEdge> edges);

  const std::vector<Table>& tables() const {
    return tables_;
  }

  const std::vector<JoinEdge>& edges() const {
    return edges_;
  }

  size_t tableCount() const {
    return tables_.size();
  }

  const Table& table(TableId id) const {
    return tables_.at(id);
  }

  std::optional<TableId> findTable(const std::string& name) const;

  /// Throws InvalidArgument for unknown names.
  TableId tableId(const std::string& name) const;

  std::pair<TableId, TableId> endpoints(size_t edge) const {
    return endpoints_[edge];
  }

  std::span<const Neighbor> neighbors(TableId id) const {
    return adjacency_[id];
  }

  std::optional<size_t> edgeBetween(TableId a, TableId b) const;

  RelationSet emptySet() const {
    return RelationSet(tables_.size());
  }

  RelationSet singleton(TableId id) const {
    auto set = emptySet();
    set.add(id);
    return set;
  }

 private:
  std::vector<Table> tables_;
  std::vector<JoinEdge> edges_;
  std::vector<std::pair<TableId, TableId>> endpoints_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::unordered_map<std::string, TableId> byName_;
};

struct Query {
  std::vector<std::string> relations;
};

struct SizeEstimate {
  double rowCount{0};
  double bytes{0};

  double gigabytes() const {
    return bytes / kBytesPerGB;
  }

  static constexpr double kBytesPerGB = 1024.0 * 1024.0 * 1024.0;
};

/// Rows and bytes of the join of all relations in 'relations', applying every
/// join-graph edge internal to the set. 'relations' must be connected.
SizeEstimate estimateRelations(const Catalog& catalog, const RelationSet& relations);

/// Output size of joining two disjoint relation sets. Throws NoJoinEdge when
/// no edge crosses the sides; cross products are never costed.
SizeEstimate estimateJoinOutput(
    const Catalog& catalog,
    const RelationSet& left,
    const RelationSet& right);

bool hasCrossingEdge(
    const Catalog& catalog,
    const RelationSet& left,
    const RelationSet& right);

bool isConnected(const Catalog& catalog, const RelationSet& relations);

/// Resolves names to a relation set. Throws InvalidArgument for unknown or
/// duplicate names and NoJoinEdge if the relations are not connected.
RelationSet resolveQuery(const Catalog& catalog, const Query& query);

/// The eight TPC-H tables with PK-FK edges. Row counts scale linearly with
/// 'scaleFactor' except NATION and REGION.
Catalog tpchCatalog(double scaleFactor);

/// Named TPC-H queries: Q12, Q3, Q2, All.
Query tpchQuery(const std::string& name);

const std::vector<std::string>& tpchQueryNames();

/// Random schema: row widths in [100, 200] bytes, row counts in [100K, 2M],
/// a uniformly random spanning tree plus tableCount / 4 extra edges.
Catalog randomCatalog(int tableCount, uint64_t seed);

/// A connected query over the first 'relationCount' tables reached by a
/// breadth-first walk from table 0.
Query connectedQuery(const Catalog& catalog, int relationCount);

nlohmann::json toJson(const Catalog& catalog, const Query* query = nullptr);
nlohmann::json toJson(const Query& query);

/// Both throw ParseError on malformed input.
Catalog catalogFromJson(const nlohmann::json& json);
Query queryFromJson(const nlohmann::json& json);

} // namespace raqo
