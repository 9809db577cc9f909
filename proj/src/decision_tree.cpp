#include "sitrec/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "sitrec/kernels.hpp"

namespace sitrec {

TrainingSet TrainingSet::for_environment(const EnvironmentSpec& env, std::vector<LabeledImage> items) {
  return TrainingSet{env.sensors, std::move(items)};
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(),
                                                [](const TreeNode& n) { return n.is_leaf; }));
}

std::size_t DecisionTree::depth() const {
  std::function<std::size_t(int)> walk = [&](int i) -> std::size_t {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    if (n.is_leaf) return 0;
    return 1 + std::max(walk(n.pass), walk(n.fail));
  };
  return nodes.empty() ? 0 : walk(0);
}

Prediction DecisionTree::classify(const SensorImage& image) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf) {
    const auto& n = nodes[i];
    auto v = image.value(n.test.sensor);
    if (!v) throw Error(ErrorCode::missing_feature, "image lacks sensor '" + n.test.sensor + "'");
    i = static_cast<std::size_t>(n.test.holds(*v) ? n.pass : n.fail);
  }
  const auto& leaf = nodes[i];
  return {leaf.label, leaf.purity, leaf.cardinality};
}

std::size_t label_cardinality(const TrainingSet& data, std::string_view label) {
  return static_cast<std::size_t>(std::count_if(data.items.begin(), data.items.end(),
                                                [&](const LabeledImage& li) { return li.label == label; }));
}

std::optional<double> label_confidence(const DnfTree& tree_dnf) {
  if (tree_dnf.paths.empty()) return std::nullopt;
  double conf = 1.0;
  for (const auto& p : tree_dnf.paths) {
    if (!p.purity) {
      throw Error(ErrorCode::missing_annotation,
                  tree_dnf.situation + ": path " + to_string(p) + " has no purity");
    }
    conf = std::min(conf, *p.purity);
  }
  return conf;
}

double pessimistic_extra_errors(double n, double e, double cf) {
  static constexpr double kVal[] = {0, 0.001, 0.005, 0.01, 0.05, 0.10, 0.20, 0.40, 1.00};
  static constexpr double kDev[] = {4.0, 3.09, 2.58, 2.33, 1.65, 1.28, 0.84, 0.25, 0.00};
  std::size_t i = 1;
  while (i + 1 < std::size(kVal) && cf > kVal[i]) ++i;
  double coeff = kDev[i - 1] + (kDev[i] - kDev[i - 1]) * (cf - kVal[i - 1]) / (kVal[i] - kVal[i - 1]);
  coeff *= coeff;

  if (e < 1e-6) return n * (1.0 - std::exp(std::log(cf) / n));
  if (e < 0.9999) {
    const double v0 = n * (1.0 - std::exp(std::log(cf) / n));
    return v0 + e * (pessimistic_extra_errors(n, 1.0, cf) - v0);
  }
  if (e + 0.5 >= n) return 0.67 * (n - e);
  const double pr = (e + 0.5 + coeff / 2.0 +
                     std::sqrt(coeff * ((e + 0.5) * (1.0 - (e + 0.5) / n) + coeff / 4.0))) /
                    (n + coeff);
  return n * pr - e;
}

namespace {

class Builder {
 public:
  Builder(const TrainingSet& data, const LearnerParams& params, std::vector<std::string>* warnings)
      : data_(data), params_(params), warnings_(warnings) {
    for (const auto& item : data.items) labels_.push_back(item.label);
    std::sort(labels_.begin(), labels_.end());
    labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());

    matrix_ = kernels::FeatureMatrix(data.items.size(), data.features.size());
    for (const auto& f : data.features) kinds_.push_back(f.kind);
    class_of_.reserve(data.items.size());
    for (std::size_t r = 0; r < data.items.size(); ++r) {
      const auto& item = data.items[r];
      for (std::size_t c = 0; c < data.features.size(); ++c) {
        auto v = item.image.value(data.features[c].id);
        if (!v) {
          throw Error(ErrorCode::missing_feature, "training item " + std::to_string(r) +
                                                      " lacks sensor '" + data.features[c].id + "'");
        }
        matrix_.at(r, c) = *v;
      }
      class_of_.push_back(static_cast<std::uint32_t>(
          std::lower_bound(labels_.begin(), labels_.end(), item.label) - labels_.begin()));
    }
  }

  DecisionTree build() {
    DecisionTree tree;
    tree.features = data_.features;
    std::vector<std::size_t> rows(data_.items.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    grow(tree, rows);
    return tree;
  }

 private:
  void annotate(TreeNode& node, std::span<const std::size_t> rows) const {
    std::vector<std::size_t> counts(labels_.size(), 0);
    for (auto r : rows) counts[class_of_[r]]++;
    std::size_t best = 0;
    for (std::size_t k = 1; k < counts.size(); ++k) {
      if (counts[k] > counts[best]) best = k;
    }
    node.class_counts.clear();
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (counts[k]) node.class_counts[labels_[k]] = counts[k];
    }
    node.label = labels_[best];
    node.cardinality = rows.size();
    node.majority_count = counts[best];
    node.purity = rows.empty() ? 0.0 : static_cast<double>(counts[best]) / static_cast<double>(rows.size());
  }

  std::optional<kernels::SplitCandidate> choose(std::span<const std::size_t> rows) const {
    kernels::SplitProblem problem{&matrix_, kinds_, class_of_, labels_.size()};
    auto candidates = params_.parallel ? kernels::split_candidates_parallel(problem, rows)
                                       : kernels::split_candidates_serial(problem, rows);
    const kernels::SplitCandidate* first_valid = nullptr;
    double gain_sum = 0.0;
    std::size_t positive = 0;
    for (const auto& c : candidates) {
      if (!c.valid) continue;
      if (!first_valid) first_valid = &c;
      if (c.score.gain > 1e-12) {
        gain_sum += c.score.gain;
        ++positive;
      }
    }
    if (!first_valid) return std::nullopt;
    // No test separates anything on its own (XOR-like node): split on the
    // first usable feature so deeper tests can.
    if (positive == 0) return *first_valid;

    const double average = gain_sum / static_cast<double>(positive);
    const kernels::SplitCandidate* best = nullptr;
    for (const auto& c : candidates) {
      if (!c.valid || c.score.gain <= 1e-12 || c.score.gain < average - 1e-12) continue;
      if (!best || c.score.gain_ratio > best->score.gain_ratio + 1e-12) best = &c;
    }
    return *best;
  }

  int grow(DecisionTree& tree, std::vector<std::size_t> rows) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode node;
    annotate(node, rows);

    const bool pure = node.majority_count == node.cardinality;
    if (pure || rows.size() < params_.min_leaf) {
      tree.nodes[static_cast<std::size_t>(index)] = std::move(node);
      return index;
    }
    auto split = choose(rows);
    if (!split) {
      if (warnings_) {
        warnings_->push_back("DegenerateData: " + std::to_string(rows.size()) +
                             " identical feature vectors with mixed labels; leaf labeled '" +
                             node.label + "'");
      }
      tree.nodes[static_cast<std::size_t>(index)] = std::move(node);
      return index;
    }

    const auto& feature = data_.features[split->feature];
    node.is_leaf = false;
    node.feature = split->feature;
    node.test = feature.kind == ValueKind::boolean
                    ? Condition::exact(feature.id, Comparator::EQ, 1.0)
                    : Condition::threshold(feature.id, Comparator::LE, split->threshold);
    std::vector<std::size_t> pass_rows, fail_rows;
    for (auto r : rows) {
      (node.test.holds(matrix_.at(r, split->feature)) ? pass_rows : fail_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    node.pass = grow(tree, std::move(pass_rows));
    node.fail = grow(tree, std::move(fail_rows));
    tree.nodes[static_cast<std::size_t>(index)] = std::move(node);
    return index;
  }

  const TrainingSet& data_;
  const LearnerParams& params_;
  std::vector<std::string>* warnings_;
  std::vector<std::string> labels_;
  std::vector<ValueKind> kinds_;
  std::vector<std::uint32_t> class_of_;
  kernels::FeatureMatrix matrix_;
};

double leaf_estimate(const TreeNode& n, double cf) {
  const double total = static_cast<double>(n.cardinality);
  const double errors = total - static_cast<double>(n.majority_count);
  return errors + pessimistic_extra_errors(total, errors, cf);
}

double prune(DecisionTree& tree, std::size_t i, double cf) {
  auto& n = tree.nodes[i];
  if (n.is_leaf) return leaf_estimate(n, cf);
  const double subtree = prune(tree, static_cast<std::size_t>(tree.nodes[i].pass), cf) +
                         prune(tree, static_cast<std::size_t>(tree.nodes[i].fail), cf);
  auto& node = tree.nodes[i];
  const double as_leaf = leaf_estimate(node, cf);
  if (as_leaf <= subtree + 0.1) {
    node.is_leaf = true;
    node.pass = node.fail = -1;
    node.feature = 0;
    node.test = Condition{};
    return as_leaf;
  }
  return subtree;
}

void compact(DecisionTree& tree) {
  std::vector<TreeNode> out;
  std::function<int(std::size_t)> copy = [&](std::size_t i) -> int {
    const int index = static_cast<int>(out.size());
    out.push_back(tree.nodes[i]);
    if (!tree.nodes[i].is_leaf) {
      const int pass = copy(static_cast<std::size_t>(tree.nodes[i].pass));
      const int fail = copy(static_cast<std::size_t>(tree.nodes[i].fail));
      out[static_cast<std::size_t>(index)].pass = pass;
      out[static_cast<std::size_t>(index)].fail = fail;
    }
    return index;
  };
  copy(0);
  tree.nodes = std::move(out);
}

}  // namespace

DecisionTree train(const TrainingSet& data, const LearnerParams& params,
                   std::vector<std::string>* warnings) {
  if (data.empty()) throw Error(ErrorCode::empty_training_set, "no training items");
  if (params.min_leaf == 0) throw Error(ErrorCode::invalid_argument, "min_leaf must be >= 1");
  if (params.confidence_factor <= 0.0 || params.confidence_factor >= 1.0) {
    throw Error(ErrorCode::invalid_argument, "confidence factor must be in (0,1)");
  }
  auto tree = Builder(data, params, warnings).build();
  if (params.pruning) {
    prune(tree, 0, params.confidence_factor);
    compact(tree);
  }
  return tree;
}

}  // namespace sitrec
