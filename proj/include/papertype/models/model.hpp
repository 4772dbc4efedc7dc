#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "papertype/core.hpp"
#include "papertype/stats.hpp"

namespace papertype {

enum class ModelKind {
  BaselineRandom,
  BaselineThreshold,
  GaussianNB,
  Knn,
  DecisionTree,
  RandomForest,
  AdaBoost,
  LinearSvm,
};

inline constexpr std::array<ModelKind, 8> kModelKinds{
    ModelKind::BaselineRandom, ModelKind::BaselineThreshold, ModelKind::GaussianNB,
    ModelKind::Knn,            ModelKind::DecisionTree,      ModelKind::RandomForest,
    ModelKind::AdaBoost,       ModelKind::LinearSvm};

constexpr std::string_view to_string(ModelKind k) noexcept {
  switch (k) {
    case ModelKind::BaselineRandom: return "baseline-random";
    case ModelKind::BaselineThreshold: return "baseline-threshold";
    case ModelKind::GaussianNB: return "gnb";
    case ModelKind::Knn: return "knn";
    case ModelKind::DecisionTree: return "decision-tree";
    case ModelKind::RandomForest: return "random-forest";
    case ModelKind::AdaBoost: return "adaboost";
    case ModelKind::LinearSvm: return "linear-svm";
  }
  return "?";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
  for (auto k : kModelKinds)
    if (s == to_string(k)) return k;
  if (s == "rf") return ModelKind::RandomForest;
  if (s == "svm") return ModelKind::LinearSvm;
  return std::nullopt;
}

// Named numeric hyperparameters. Names a kind does not recognize are
// rejected at training time.
class Hyperparams {
 public:
  Hyperparams() = default;
  Hyperparams(std::initializer_list<std::pair<const std::string, double>> init) : values_(init) {}
  explicit Hyperparams(std::map<std::string, double> values) : values_(std::move(values)) {}

  double get(std::string_view name, double fallback) const {
    auto it = values_.find(std::string(name));
    return it == values_.end() ? fallback : it->second;
  }

  std::size_t get_count(std::string_view name, std::size_t fallback) const {
    const double v = get(name, static_cast<double>(fallback));
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e9)
      throw ArgumentError("hyperparameter '" + std::string(name) + "' must be a nonnegative integer");
    return static_cast<std::size_t>(v);
  }

  void set(std::string name, double value) { values_[std::move(name)] = value; }
  const std::map<std::string, double>& values() const noexcept { return values_; }
  bool empty() const noexcept { return values_.empty(); }

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;

 private:
  std::map<std::string, double> values_;
};

inline std::set<std::string> known_hyperparams(ModelKind kind) {
  switch (kind) {
    case ModelKind::BaselineRandom: return {};
    case ModelKind::BaselineThreshold: return {"quantile_lo", "quantile_hi"};
    case ModelKind::GaussianNB: return {"var_floor"};
    case ModelKind::Knn: return {"k"};
    case ModelKind::DecisionTree: return {"max_depth", "min_leaf", "max_leaves", "max_features"};
    case ModelKind::RandomForest:
      return {"trees", "max_depth", "min_leaf", "max_leaves", "max_features", "bootstrap"};
    case ModelKind::AdaBoost: return {"rounds", "max_depth", "learning_rate"};
    case ModelKind::LinearSvm: return {"epochs", "step", "lambda"};
  }
  return {};
}

// The small forest used for serving: at most 10 trees of at most 5 leaves.
inline Hyperparams deployed_forest_profile() {
  return Hyperparams{{"trees", 10}, {"max_depth", 4}, {"max_leaves", 5}};
}

// ---------------------------------------------------------------------------
// Kind-specific parameters
// ---------------------------------------------------------------------------

struct TreeNode {
  std::int32_t feature = -1;  // column of the model input; -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  ClassScores distribution{};  // leaves only

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const ClassScores& leaf_distribution(std::span<const double> x) const noexcept {
    std::size_t i = 0;
    while (!nodes[i].is_leaf())
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                       ? nodes[i].left
                                       : nodes[i].right);
    return nodes[i].distribution;
  }

  DocType predict(std::span<const double> x) const noexcept { return argmax(leaf_distribution(x)); }

  std::size_t leaf_count() const noexcept {
    std::size_t n = 0;
    for (const auto& node : nodes) n += node.is_leaf();
    return n;
  }

  std::size_t depth() const noexcept {
    std::size_t best = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [i, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      if (!nodes[i].is_leaf()) {
        stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
        stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
      }
    }
    return best;
  }

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct RandomParams {
  ClassScores weights{};
  friend bool operator==(const RandomParams&, const RandomParams&) = default;
};

struct ThresholdParams {
  ThresholdTable table;
  DocType fallback = DocType::Research;
  friend bool operator==(const ThresholdParams&, const ThresholdParams&) = default;
};

struct GnbParams {
  ClassScores priors{};
  std::array<std::vector<double>, kNumClasses> means;
  std::array<std::vector<double>, kNumClasses> variances;
  friend bool operator==(const GnbParams&, const GnbParams&) = default;
};

struct KnnParams {
  std::size_t k = 5;
  Matrix points;  // transformed training inputs
  std::vector<DocType> labels;
  friend bool operator==(const KnnParams& a, const KnnParams& b) {
    return a.k == b.k && a.points.cols == b.points.cols && a.points.values == b.points.values &&
           a.labels == b.labels;
  }
};

struct TreeParams {
  Tree tree;
  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

struct ForestParams {
  std::vector<Tree> trees;
  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

struct BoostParams {
  std::vector<Tree> trees;
  std::vector<double> alphas;  // one finite vote weight per tree
  friend bool operator==(const BoostParams&, const BoostParams&) = default;
};

struct SvmParams {
  std::array<std::vector<double>, kNumClasses> weights;  // one-vs-rest separators
  ClassScores bias{};
  friend bool operator==(const SvmParams&, const SvmParams&) = default;
};

using ModelParams = std::variant<RandomParams, ThresholdParams, GnbParams, KnnParams, TreeParams, ForestParams,
                                 BoostParams, SvmParams>;

struct ModelArtifact {
  int format_version = kFormatVersion;
  ModelKind kind = ModelKind::RandomForest;
  FeatureSet features;
  TransformSpec transform;
  Hyperparams hyperparameters;
  std::uint64_t seed = 0;
  ModelParams params;

  friend bool operator==(const ModelArtifact&, const ModelArtifact&) = default;
};

struct Prediction {
  DocType label = DocType::Research;
  ClassScores scores{};
};

}  // namespace papertype
