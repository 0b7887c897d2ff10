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

#include "raqo/rules.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "raqo/error.h"

namespace raqo {

std::string_view toString(TreeFeature feature) {
  switch (feature) {
    case TreeFeature::kSmallTableGB:
      return "smallTableGB";
    case TreeFeature::kContainerGB:
      return "containerGB";
    case TreeFeature::kContainerCount:
      return "containerCount";
  }
  return "unknown";
}

namespace {

constexpr std::array<TreeFeature, 3> kFeatures = {
    TreeFeature::kSmallTableGB,
    TreeFeature::kContainerGB,
    TreeFeature::kContainerCount};

TreeFeature featureFromString(std::string_view name) {
  for (auto feature : kFeatures) {
    if (toString(feature) == name) {
      return feature;
    }
  }
  throw RaqoError(
      ErrorKind::kMalformedTree, "unknown feature " + std::string(name));
}

} // namespace

DecisionTree DecisionTree::leaf(OperatorImpl impl) {
  DecisionTree tree;
  tree.nodes_.push_back({true, impl, TreeFeature::kSmallTableGB, 0, -1, -1});
  return tree;
}

int DecisionTree::append(const DecisionTree& subtree) {
  const int offset = static_cast<int>(nodes_.size());
  for (auto node : subtree.nodes_) {
    if (!node.leaf) {
      node.left += offset;
      node.right += offset;
    }
    nodes_.push_back(node);
  }
  return offset;
}

DecisionTree DecisionTree::split(
    TreeFeature feature,
    double threshold,
    DecisionTree left,
    DecisionTree right) {
  DecisionTree tree;
  tree.nodes_.push_back({false, OperatorImpl::kSortMergeJoin, feature, threshold, -1, -1});
  const int l = tree.append(left);
  const int r = tree.append(right);
  tree.nodes_[0].left = l;
  tree.nodes_[0].right = r;
  return tree;
}

OperatorImpl DecisionTree::evaluate(const JoinSituation& situation) const {
  int index = 0;
  while (!nodes_[index].leaf) {
    const auto& node = nodes_[index];
    index = situation[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes_[index].impl;
}

int DecisionTree::depthFrom(int index) const {
  const auto& node = nodes_[index];
  if (node.leaf) {
    return 0;
  }
  return 1 + std::max(depthFrom(node.left), depthFrom(node.right));
}

int DecisionTree::depth() const {
  return depthFrom(0);
}

size_t DecisionTree::leafCount() const {
  return static_cast<size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf; }));
}

namespace {

nlohmann::json nodeToJson(const std::vector<DecisionTree::Node>& nodes, int index) {
  const auto& node = nodes[index];
  if (node.leaf) {
    return {{"leaf", std::string(toString(node.impl))}};
  }
  return {
      {"feature", std::string(toString(node.feature))},
      {"threshold", node.threshold},
      {"left", nodeToJson(nodes, node.left)},
      {"right", nodeToJson(nodes, node.right)}};
}

DecisionTree nodeFromJson(const nlohmann::json& json) {
  if (!json.is_object()) {
    throw RaqoError(ErrorKind::kMalformedTree, "tree node must be an object");
  }
  if (json.contains("leaf")) {
    if (json.size() != 1) {
      throw RaqoError(ErrorKind::kMalformedTree, "leaf has extra fields");
    }
    const auto name = json.at("leaf").get<std::string>();
    OperatorImpl impl;
    try {
      impl = operatorImplFromString(name);
    } catch (const RaqoError&) {
      throw RaqoError(ErrorKind::kMalformedTree, "unknown leaf " + name);
    }
    if (!isJoin(impl)) {
      throw RaqoError(ErrorKind::kMalformedTree, "leaf must be a join");
    }
    return DecisionTree::leaf(impl);
  }
  for (const char* field : {"feature", "threshold", "left", "right"}) {
    if (!json.contains(field)) {
      throw RaqoError(
          ErrorKind::kMalformedTree, std::string("missing field ") + field);
    }
  }
  const double threshold = json.at("threshold").get<double>();
  if (!std::isfinite(threshold)) {
    throw RaqoError(ErrorKind::kMalformedTree, "threshold must be finite");
  }
  return DecisionTree::split(
      featureFromString(json.at("feature").get<std::string>()),
      threshold,
      nodeFromJson(json.at("left")),
      nodeFromJson(json.at("right")));
}

} // namespace

nlohmann::json DecisionTree::toJson() const {
  return nodeToJson(nodes_, 0);
}

DecisionTree DecisionTree::fromJson(const nlohmann::json& json, int maxDepth) {
  DecisionTree tree;
  try {
    tree = nodeFromJson(json);
  } catch (const nlohmann::json::exception& e) {
    throw RaqoError(ErrorKind::kMalformedTree, e.what());
  }
  if (maxDepth >= 0 && tree.depth() > maxDepth) {
    throw RaqoError(
        ErrorKind::kMalformedTree,
        "tree depth " + std::to_string(tree.depth()) + " exceeds " +
            std::to_string(maxDepth));
  }
  return tree;
}

DecisionTree defaultTree(EngineDefaults engine, double thresholdGB) {
  (void)engine;
  return DecisionTree::split(
      TreeFeature::kSmallTableGB,
      thresholdGB,
      DecisionTree::leaf(OperatorImpl::kBroadcastHashJoin),
      DecisionTree::leaf(OperatorImpl::kSortMergeJoin));
}

namespace {

constexpr size_t kLabels = 3;
using LabelCounts = std::array<size_t, kLabels>;

double gini(const LabelCounts& counts, size_t total) {
  if (total == 0) {
    return 0;
  }
  double sumSquares = 0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sumSquares += p * p;
  }
  return 1 - sumSquares;
}

class TreeTrainer {
 public:
  TreeTrainer(const LabeledGrid& grid, int maxDepth, int minLeafSize)
      : grid_(grid),
        maxDepth_(maxDepth),
        minLeafSize_(static_cast<size_t>(std::max(1, minLeafSize))) {}

  DecisionTree build(std::vector<size_t> rows, int depth) const {
    LabelCounts counts{};
    for (auto row : rows) {
      ++counts[static_cast<size_t>(grid_[row].label)];
    }
    const auto majority = static_cast<OperatorImpl>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    const bool pure = std::count_if(counts.begin(), counts.end(), [](size_t c) {
                        return c > 0;
                      }) <= 1;
    if (pure || (maxDepth_ >= 0 && depth >= maxDepth_) ||
        rows.size() < 2 * minLeafSize_) {
      return DecisionTree::leaf(majority);
    }

    std::optional<Split> best;
    for (auto feature : kFeatures) {
      auto candidate = bestSplit(rows, feature);
      if (candidate && (!best || candidate->impurity < best->impurity)) {
        best = candidate;
      }
    }
    if (!best) {
      return DecisionTree::leaf(majority);
    }
    std::vector<size_t> left;
    std::vector<size_t> right;
    for (auto row : rows) {
      (grid_[row].situation[best->feature] <= best->threshold ? left : right)
          .push_back(row);
    }
    rows.clear();
    rows.shrink_to_fit();
    return DecisionTree::split(
        best->feature,
        best->threshold,
        build(std::move(left), depth + 1),
        build(std::move(right), depth + 1));
  }

 private:
  struct Split {
    TreeFeature feature;
    double threshold;
    double impurity;
  };

  std::optional<Split> bestSplit(std::vector<size_t> rows, TreeFeature feature)
      const {
    std::stable_sort(rows.begin(), rows.end(), [&](size_t a, size_t b) {
      return grid_[a].situation[feature] < grid_[b].situation[feature];
    });
    LabelCounts total{};
    for (auto row : rows) {
      ++total[static_cast<size_t>(grid_[row].label)];
    }
    LabelCounts left{};
    std::optional<Split> best;
    const size_t n = rows.size();
    for (size_t i = 0; i + 1 < n; ++i) {
      ++left[static_cast<size_t>(grid_[rows[i]].label)];
      const double value = grid_[rows[i]].situation[feature];
      const double next = grid_[rows[i + 1]].situation[feature];
      if (value == next) {
        continue;
      }
      const size_t nLeft = i + 1;
      const size_t nRight = n - nLeft;
      if (nLeft < minLeafSize_ || nRight < minLeafSize_) {
        continue;
      }
      LabelCounts right{};
      for (size_t k = 0; k < kLabels; ++k) {
        right[k] = total[k] - left[k];
      }
      const double impurity =
          (static_cast<double>(nLeft) * gini(left, nLeft) +
           static_cast<double>(nRight) * gini(right, nRight)) /
          static_cast<double>(n);
      if (!best || impurity < best->impurity) {
        best = Split{feature, value + (next - value) / 2, impurity};
      }
    }
    return best;
  }

  const LabeledGrid& grid_;
  int maxDepth_;
  size_t minLeafSize_;
};

} // namespace

DecisionTree trainTree(const LabeledGrid& grid, int maxDepth, int minLeafSize) {
  if (grid.empty()) {
    throw RaqoError(ErrorKind::kInvalidArgument, "training grid is empty");
  }
  std::vector<size_t> rows(grid.size());
  std::iota(rows.begin(), rows.end(), 0);
  return TreeTrainer(grid, maxDepth, minLeafSize).build(std::move(rows), 0);
}

LabeledGrid labelGridFromModel(
    const CostModel& model,
    const std::vector<double>& ssValues,
    const std::vector<double>& csValues,
    const std::vector<double>& ncValues) {
  LabeledGrid grid;
  for (auto ss : ssValues) {
    for (auto cs : csValues) {
      for (auto nc : ncValues) {
        const ResourceConfig config{std::llround(nc), std::llround(cs)};
        std::optional<std::pair<double, OperatorImpl>> best;
        for (auto impl : kJoinImpls) {
          if (!model.hasCoefficients(impl)) {
            continue;
          }
          const auto cost = model.tryJoinCost(impl, ss, config);
          if (cost && (!best || *cost < best->first)) {
            best = std::make_pair(*cost, impl);
          }
        }
        if (best) {
          grid.push_back({{ss, cs, nc}, best->second});
        }
      }
    }
  }
  return grid;
}

double treeAccuracy(const DecisionTree& tree, const LabeledGrid& grid) {
  if (grid.empty()) {
    return 1;
  }
  size_t correct = 0;
  for (const auto& point : grid) {
    correct += tree.evaluate(point.situation) == point.label;
  }
  return static_cast<double>(correct) / static_cast<double>(grid.size());
}

TrainingLattice defaultTrainingLattice() {
  TrainingLattice lattice;
  for (int i = 1; i <= 10; ++i) {
    lattice.ssValues.push_back(0.1 * i);
    lattice.csValues.push_back(i);
    lattice.ncValues.push_back(i);
  }
  return lattice;
}

} // namespace raqo
