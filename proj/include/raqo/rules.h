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
#include <string_view>
#include <vector>

#include "json.hpp"
#include "raqo/cost_model.h"

namespace raqo {

enum class TreeFeature { kSmallTableGB, kContainerGB, kContainerCount };

std::string_view toString(TreeFeature feature);

/// One row of rule-training data, or one query against a tree.
struct JoinSituation {
  double smallTableGB{0};
  double containerGB{0};
  double containerCount{0};

  double operator[](TreeFeature feature) const {
    switch (feature) {
      case TreeFeature::kSmallTableGB:
        return smallTableGB;
      case TreeFeature::kContainerGB:
        return containerGB;
      case TreeFeature::kContainerCount:
        return containerCount;
    }
    return 0;
  }
};

struct LabeledPoint {
  JoinSituation situation;
  OperatorImpl label;
};

using LabeledGrid = std::vector<LabeledPoint>;

/// Binary decision tree choosing a join implementation. Internal nodes send
/// values <= threshold to the left.
class DecisionTree {
 public:
  static constexpr int kDefaultMaxDepth = 7;

  struct Node {
    bool leaf{true};
    OperatorImpl impl{OperatorImpl::kSortMergeJoin};
    TreeFeature feature{TreeFeature::kSmallTableGB};
    double threshold{0};
    int left{-1};
    int right{-1};
  };

  static DecisionTree leaf(OperatorImpl impl);

  static DecisionTree split(
      TreeFeature feature,
      double threshold,
      DecisionTree left,
      DecisionTree right);

  OperatorImpl evaluate(const JoinSituation& situation) const;

  /// Longest root-to-leaf path in edges; a single leaf has depth 0.
  int depth() const;

  size_t leafCount() const;

  const std::vector<Node>& nodes() const {
    return nodes_;
  }

  nlohmann::json toJson() const;

  /// Throws MalformedTree on missing fields, unknown names or a depth above
  /// 'maxDepth'.
  static DecisionTree fromJson(
      const nlohmann::json& json,
      int maxDepth = kDefaultMaxDepth);

 private:
  int append(const DecisionTree& subtree);
  int depthFrom(int index) const;

  // Node 0 is the root.
  std::vector<Node> nodes_;
};

enum class EngineDefaults { kHive, kSpark };

/// Shipped engine rule: BHJ when the small table is at most 'thresholdGB'
/// (10 MB), SMJ otherwise. Hive and Spark share the rule.
DecisionTree defaultTree(EngineDefaults engine, double thresholdGB = 0.01);

inline OperatorImpl evaluateTree(
    const DecisionTree& tree,
    double smallTableGB,
    double containerGB,
    double containerCount) {
  return tree.evaluate({smallTableGB, containerGB, containerCount});
}

/// Pass as maxDepth to grow until leaves are pure.
constexpr int kUnlimitedDepth = -1;

/// CART with Gini impurity over axis-aligned splits at midpoints between
/// consecutive distinct values. Stops at purity, maxDepth or when no split
/// leaves minLeafSize points on both sides. Ties prefer the earlier feature
/// (smallTableGB, containerGB, containerCount) and the lower threshold; leaf
/// label ties prefer SMJ.
DecisionTree trainTree(const LabeledGrid& grid, int maxDepth, int minLeafSize);

/// Labels every lattice point with the cheaper feasible join implementation
/// (SMJ on ties). Points where neither is feasible are left out.
LabeledGrid labelGridFromModel(
    const CostModel& model,
    const std::vector<double>& ssValues,
    const std::vector<double>& csValues,
    const std::vector<double>& ncValues);

struct TrainingLattice {
  std::vector<double> ssValues;
  std::vector<double> csValues;
  std::vector<double> ncValues;
};

/// 10 x 10 x 10 points: ss 0.1..1.0 GB, 1..10 GB containers, 1..10
/// containers. Both join implementations win somewhere on it.
TrainingLattice defaultTrainingLattice();

/// Fraction of grid points the tree labels correctly.
double treeAccuracy(const DecisionTree& tree, const LabeledGrid& grid);

} // namespace raqo
