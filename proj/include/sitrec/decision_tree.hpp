#pragma once

// C4.5-style learner: binary splits chosen by gain ratio (among features
// whose gain is at least the average positive gain), midpoint thresholds
// on continuous sensors, optional error-based pruning. Leaves carry the
// label, purity and cardinality the enhancer consumes.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sitrec/core.hpp"

namespace sitrec {

struct TrainingSet {
  /// Feature order used by the learner; deterministic.
  std::vector<SensorType> features;
  std::vector<LabeledImage> items;

  static TrainingSet for_environment(const EnvironmentSpec& env, std::vector<LabeledImage> items = {});
  bool empty() const { return items.empty(); }
  std::size_t size() const { return items.size(); }
};

struct LearnerParams {
  std::size_t min_leaf = 2;
  bool pruning = false;
  double confidence_factor = 0.25;
  bool parallel = true;
};

struct TreeNode {
  bool is_leaf = true;

  // Split: `test` holds on the pass branch, its negation on the fail branch.
  std::size_t feature = 0;
  Condition test;
  int pass = -1;
  int fail = -1;

  // Leaf annotation (class_counts kept on every node for pruning).
  std::string label;
  double purity = 0.0;
  std::size_t cardinality = 0;
  std::size_t majority_count = 0;
  std::map<std::string, std::size_t> class_counts;

  bool operator==(const TreeNode&) const = default;
};

struct Prediction {
  std::string label;
  double purity = 0.0;
  std::size_t cardinality = 0;
};

/// Nodes are stored flat; nodes[0] is the root.
struct DecisionTree {
  std::vector<SensorType> features;
  std::vector<TreeNode> nodes;

  const TreeNode& root() const { return nodes.front(); }
  bool is_single_leaf() const { return nodes.size() == 1 && nodes.front().is_leaf; }
  std::size_t leaf_count() const;
  std::size_t depth() const;

  Prediction classify(const SensorImage& image) const;
  bool operator==(const DecisionTree&) const = default;
};

DecisionTree train(const TrainingSet& data, const LearnerParams& params = {},
                   std::vector<std::string>* warnings = nullptr);

std::size_t label_cardinality(const TrainingSet& data, std::string_view label);

/// Minimum path purity; empty when the tree has no path for the label.
std::optional<double> label_confidence(const DnfTree& tree_dnf);

/// Estimated extra errors for a leaf of `n` items with `e` misclassified
/// at confidence factor `cf` (upper confidence limit of the binomial).
double pessimistic_extra_errors(double n, double e, double cf);

}  // namespace sitrec
