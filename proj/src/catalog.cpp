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

#include "raqo/catalog.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <set>

#include "raqo/error.h"

namespace raqo {

size_t RelationSet::size() const {
  size_t count = 0;
  for (auto word : words_) {
    count += std::popcount(word);
  }
  return count;
}

bool RelationSet::intersects(const RelationSet& other) const {
  const auto n = std::min(words_.size(), other.words_.size());
  for (size_t i = 0; i < n; ++i) {
    if (words_[i] & other.words_[i]) {
      return true;
    }
  }
  return false;
}

RelationSet RelationSet::operator|(const RelationSet& other) const {
  RelationSet result = words_.size() >= other.words_.size() ? *this : other;
  const auto& smaller = words_.size() >= other.words_.size() ? other : *this;
  for (size_t i = 0; i < smaller.words_.size(); ++i) {
    result.words_[i] |= smaller.words_[i];
  }
  return result;
}

std::vector<TableId> RelationSet::members() const {
  std::vector<TableId> result;
  for (size_t i = 0; i < words_.size(); ++i) {
    auto word = words_[i];
    while (word) {
      const auto bit = std::countr_zero(word);
      result.push_back(static_cast<TableId>(i * 64 + bit));
      word &= word - 1;
    }
  }
  return result;
}

size_t RelationSet::hash() const {
  size_t h = 0xcbf29ce484222325ULL;
  for (auto word : words_) {
    h ^= std::hash<uint64_t>{}(word) + 0x9e3779b97f4a7c15ULL + (h << 6) +
        (h >> 2);
  }
  return h;
}

Catalog::Catalog(std::vector<Table> tables, std::vector<JoinEdge> edges)
    : tables_(std::move(tables)),
      edges_(std::move(edges)),
      adjacency_(tables_.size()) {
  for (size_t i = 0; i < tables_.size(); ++i) {
    const auto& table = tables_[i];
    if (table.name.empty()) {
      throw RaqoError(ErrorKind::kInvalidArgument, "table name is empty");
    }
    if (table.rowCount < 1 || table.rowBytes < 1) {
      throw RaqoError(
          ErrorKind::kInvalidArgument,
          "table " + table.name + " needs rowCount >= 1 and rowBytes >= 1");
    }
    if (!byName_.emplace(table.name, static_cast<TableId>(i)).second) {
      throw RaqoError(
          ErrorKind::kInvalidArgument, "duplicate table " + table.name);
    }
  }
  std::set<std::pair<TableId, TableId>> seen;
  for (size_t i = 0; i < edges_.size(); ++i) {
    const auto& edge = edges_[i];
    const auto left = tableId(edge.left);
    const auto right = tableId(edge.right);
    if (left == right) {
      throw RaqoError(
          ErrorKind::kInvalidArgument, "self edge on " + edge.left);
    }
    if (!(edge.selectivity > 0) || edge.selectivity > 1) {
      throw RaqoError(
          ErrorKind::kInvalidArgument,
          "selectivity of " + edge.left + "-" + edge.right +
              " must be in (0, 1]");
    }
    if (!seen.emplace(std::min(left, right), std::max(left, right)).second) {
      throw RaqoError(
          ErrorKind::kInvalidArgument,
          "duplicate edge " + edge.left + "-" + edge.right);
    }
    endpoints_.emplace_back(left, right);
    adjacency_[left].push_back({right, i});
    adjacency_[right].push_back({left, i});
  }
}

std::optional<TableId> Catalog::findTable(const std::string& name) const {
  auto it = byName_.find(name);
  if (it == byName_.end()) {
    return std::nullopt;
  }
  return it->second;
}

TableId Catalog::tableId(const std::string& name) const {
  auto id = findTable(name);
  if (!id) {
    throw RaqoError(ErrorKind::kInvalidArgument, "unknown table " + name);
  }
  return *id;
}

std::optional<size_t> Catalog::edgeBetween(TableId a, TableId b) const {
  for (const auto& neighbor : adjacency_[a]) {
    if (neighbor.table == b) {
      return neighbor.edge;
    }
  }
  return std::nullopt;
}

namespace {

// Product kept as mantissa * 2^exponent so joins over many large tables do not
// overflow. Rescaling by powers of two is exact, so results match plain double
// arithmetic whenever that would not overflow.
class ScaledProduct {
 public:
  void multiply(double factor) {
    mantissa_ *= factor;
    normalize();
  }

  void divide(double divisor) {
    mantissa_ /= divisor;
    normalize();
  }

  double value() const {
    return std::ldexp(mantissa_, exponent_);
  }

 private:
  void normalize() {
    int shift = 0;
    mantissa_ = std::frexp(mantissa_, &shift);
    exponent_ += shift;
  }

  double mantissa_{1};
  long exponent_{0};
};

// PK-FK selectivities are 1/k for an integer k; dividing by k instead of
// multiplying by the rounded reciprocal keeps |A join B| = min(|A|, |B|) exact.
void applySelectivity(ScaledProduct& product, double selectivity) {
  const double inverse = std::round(1.0 / selectivity);
  if (inverse >= 1 && inverse < 9.0e15 && 1.0 / inverse == selectivity) {
    product.divide(inverse);
  } else {
    product.multiply(selectivity);
  }
}

} // namespace

SizeEstimate estimateRelations(
    const Catalog& catalog,
    const RelationSet& relations) {
  ScaledProduct rows;
  double rowBytes = 0;
  relations.forEachMember([&](TableId id) {
    const auto& table = catalog.table(id);
    rows.multiply(static_cast<double>(table.rowCount));
    rowBytes += static_cast<double>(table.rowBytes);
  });
  for (size_t i = 0; i < catalog.edges().size(); ++i) {
    const auto [left, right] = catalog.endpoints(i);
    if (relations.contains(left) && relations.contains(right)) {
      applySelectivity(rows, catalog.edges()[i].selectivity);
    }
  }
  const double rowCount = rows.value();
  return {rowCount, rowCount * rowBytes};
}

bool hasCrossingEdge(
    const Catalog& catalog,
    const RelationSet& left,
    const RelationSet& right) {
  for (size_t i = 0; i < catalog.edges().size(); ++i) {
    const auto [a, b] = catalog.endpoints(i);
    if ((left.contains(a) && right.contains(b)) ||
        (left.contains(b) && right.contains(a))) {
      return true;
    }
  }
  return false;
}

SizeEstimate estimateJoinOutput(
    const Catalog& catalog,
    const RelationSet& left,
    const RelationSet& right) {
  if (left.empty() || right.empty()) {
    throw RaqoError(ErrorKind::kInvalidArgument, "join side is empty");
  }
  if (left.intersects(right)) {
    throw RaqoError(ErrorKind::kInvalidArgument, "join sides overlap");
  }
  if (!hasCrossingEdge(catalog, left, right)) {
    throw RaqoError(ErrorKind::kNoJoinEdge, "no edge crosses the join sides");
  }
  return estimateRelations(catalog, left | right);
}

bool isConnected(const Catalog& catalog, const RelationSet& relations) {
  const auto members = relations.members();
  if (members.empty()) {
    return false;
  }
  auto visited = catalog.emptySet();
  std::deque<TableId> frontier{members.front()};
  visited.add(members.front());
  size_t reached = 1;
  while (!frontier.empty()) {
    const auto current = frontier.front();
    frontier.pop_front();
    for (const auto& neighbor : catalog.neighbors(current)) {
      if (relations.contains(neighbor.table) &&
          !visited.contains(neighbor.table)) {
        visited.add(neighbor.table);
        frontier.push_back(neighbor.table);
        ++reached;
      }
    }
  }
  return reached == members.size();
}

RelationSet resolveQuery(const Catalog& catalog, const Query& query) {
  if (query.relations.empty()) {
    throw RaqoError(ErrorKind::kInvalidArgument, "query has no relations");
  }
  auto set = catalog.emptySet();
  for (const auto& name : query.relations) {
    const auto id = catalog.tableId(name);
    if (set.contains(id)) {
      throw RaqoError(
          ErrorKind::kInvalidArgument, "relation listed twice: " + name);
    }
    set.add(id);
  }
  if (!isConnected(catalog, set)) {
    throw RaqoError(
        ErrorKind::kNoJoinEdge,
        "query relations are not connected in the join graph");
  }
  return set;
}

namespace {

double pkFkSelectivity(const Table& a, const Table& b) {
  return 1.0 / static_cast<double>(std::max(a.rowCount, b.rowCount));
}

std::vector<JoinEdge> pkFkEdges(
    const std::vector<Table>& tables,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::unordered_map<std::string, const Table*> byName;
  for (const auto& table : tables) {
    byName[table.name] = &table;
  }
  std::vector<JoinEdge> edges;
  for (const auto& [left, right] : pairs) {
    edges.push_back(
        {left, right, pkFkSelectivity(*byName.at(left), *byName.at(right))});
  }
  return edges;
}

} // namespace

Catalog tpchCatalog(double scaleFactor) {
  if (!(scaleFactor > 0)) {
    throw RaqoError(
        ErrorKind::kInvalidArgument, "scale factor must be positive");
  }
  auto scaled = [&](int64_t base) {
    return std::max<int64_t>(
        1, std::llround(static_cast<double>(base) * scaleFactor));
  };
  // Typical row widths from the TPC-H size estimates.
  std::vector<Table> tables = {
      {"part", scaled(200'000), 155},
      {"supplier", scaled(10'000), 159},
      {"partsupp", scaled(800'000), 144},
      {"customer", scaled(150'000), 179},
      {"orders", scaled(1'500'000), 104},
      {"lineitem", scaled(6'001'215), 112},
      {"nation", 25, 128},
      {"region", 5, 124},
  };
  auto edges = pkFkEdges(
      tables,
      {
          {"part", "partsupp"},
          {"supplier", "partsupp"},
          {"supplier", "nation"},
          {"customer", "nation"},
          {"nation", "region"},
          {"customer", "orders"},
          {"orders", "lineitem"},
          {"partsupp", "lineitem"},
          {"part", "lineitem"},
          {"supplier", "lineitem"},
      });
  return Catalog(std::move(tables), std::move(edges));
}

const std::vector<std::string>& tpchQueryNames() {
  static const std::vector<std::string> kNames = {"Q12", "Q3", "Q2", "All"};
  return kNames;
}

Query tpchQuery(const std::string& name) {
  if (name == "Q12") {
    return {{"orders", "lineitem"}};
  }
  if (name == "Q3") {
    return {{"customer", "orders", "lineitem"}};
  }
  if (name == "Q2") {
    return {{"part", "supplier", "partsupp", "nation"}};
  }
  if (name == "All") {
    return {
        {"part",
         "supplier",
         "partsupp",
         "customer",
         "orders",
         "lineitem",
         "nation",
         "region"}};
  }
  throw RaqoError(ErrorKind::kInvalidArgument, "unknown TPC-H query " + name);
}

Catalog randomCatalog(int tableCount, uint64_t seed) {
  if (tableCount < 1) {
    throw RaqoError(ErrorKind::kInvalidArgument, "tableCount must be >= 1");
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&](int64_t lo, int64_t hi) {
    return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
  };

  std::vector<Table> tables;
  tables.reserve(tableCount);
  for (int i = 0; i < tableCount; ++i) {
    const auto rowBytes = uniform(100, 200);
    const auto rowCount = uniform(100'000, 2'000'000);
    tables.push_back({"t" + std::to_string(i), rowCount, rowBytes});
  }

  std::set<std::pair<int, int>> pairs;
  auto addPair = [&](int a, int b) {
    return pairs.emplace(std::min(a, b), std::max(a, b)).second;
  };

  // Pruefer decoding gives a uniformly random labeled spanning tree.
  if (tableCount >= 2) {
    std::vector<int> code(tableCount - 2);
    for (auto& c : code) {
      c = static_cast<int>(uniform(0, tableCount - 1));
    }
    std::vector<int> degree(tableCount, 1);
    for (auto c : code) {
      ++degree[c];
    }
    std::set<int> leaves;
    for (int i = 0; i < tableCount; ++i) {
      if (degree[i] == 1) {
        leaves.insert(i);
      }
    }
    for (auto c : code) {
      const int leaf = *leaves.begin();
      leaves.erase(leaves.begin());
      addPair(leaf, c);
      if (--degree[c] == 1) {
        leaves.insert(c);
      }
    }
    addPair(*leaves.begin(), *std::next(leaves.begin()));
  }

  const int64_t maxPairs =
      static_cast<int64_t>(tableCount) * (tableCount - 1) / 2;
  const int64_t extra = std::min<int64_t>(
      tableCount / 4, maxPairs - static_cast<int64_t>(pairs.size()));
  for (int64_t added = 0; added < extra;) {
    const auto a = static_cast<int>(uniform(0, tableCount - 1));
    const auto b = static_cast<int>(uniform(0, tableCount - 1));
    if (a != b && addPair(a, b)) {
      ++added;
    }
  }

  std::vector<JoinEdge> edges;
  edges.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    edges.push_back(
        {tables[a].name,
         tables[b].name,
         pkFkSelectivity(tables[a], tables[b])});
  }
  return Catalog(std::move(tables), std::move(edges));
}

Query connectedQuery(const Catalog& catalog, int relationCount) {
  if (relationCount < 1 ||
      static_cast<size_t>(relationCount) > catalog.tableCount()) {
    throw RaqoError(
        ErrorKind::kInvalidArgument, "relation count out of range");
  }
  Query query;
  auto visited = catalog.emptySet();
  std::deque<TableId> frontier{0};
  visited.add(0);
  while (!frontier.empty() &&
         query.relations.size() < static_cast<size_t>(relationCount)) {
    const auto current = frontier.front();
    frontier.pop_front();
    query.relations.push_back(catalog.table(current).name);
    for (const auto& neighbor : catalog.neighbors(current)) {
      if (!visited.contains(neighbor.table)) {
        visited.add(neighbor.table);
        frontier.push_back(neighbor.table);
      }
    }
  }
  if (query.relations.size() < static_cast<size_t>(relationCount)) {
    throw RaqoError(
        ErrorKind::kNoJoinEdge, "join graph component is too small");
  }
  return query;
}

nlohmann::json toJson(const Query& query) {
  return {{"relations", query.relations}};
}

nlohmann::json toJson(const Catalog& catalog, const Query* query) {
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& table : catalog.tables()) {
    tables.push_back(
        {{"name", table.name},
         {"rowCount", table.rowCount},
         {"rowBytes", table.rowBytes}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& edge : catalog.edges()) {
    edges.push_back(
        {{"left", edge.left},
         {"right", edge.right},
         {"selectivity", edge.selectivity}});
  }
  nlohmann::json result = {{"tables", tables}, {"edges", edges}};
  if (query) {
    result["query"] = toJson(*query);
  }
  return result;
}

Catalog catalogFromJson(const nlohmann::json& json) {
  try {
    std::vector<Table> tables;
    for (const auto& entry : json.at("tables")) {
      tables.push_back(
          {entry.at("name").get<std::string>(),
           entry.at("rowCount").get<int64_t>(),
           entry.at("rowBytes").get<int64_t>()});
    }
    std::vector<JoinEdge> edges;
    if (json.contains("edges")) {
      for (const auto& entry : json.at("edges")) {
        edges.push_back(
            {entry.at("left").get<std::string>(),
             entry.at("right").get<std::string>(),
             entry.at("selectivity").get<double>()});
      }
    }
    return Catalog(std::move(tables), std::move(edges));
  } catch (const nlohmann::json::exception& e) {
    throw RaqoError(ErrorKind::kParseError, e.what());
  } catch (const RaqoError& e) {
    throw RaqoError(ErrorKind::kParseError, e.what());
  }
}

Query queryFromJson(const nlohmann::json& json) {
  try {
    const auto& body = json.contains("query") ? json.at("query") : json;
    return {body.at("relations").get<std::vector<std::string>>()};
  } catch (const nlohmann::json::exception& e) {
    throw RaqoError(ErrorKind::kParseError, e.what());
  }
}

} // namespace raqo
