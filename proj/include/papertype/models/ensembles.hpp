#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "papertype/matrix.hpp"
#include "papertype/models/model.hpp"
#include "papertype/models/tree.hpp"
#include "papertype/rng.hpp"

namespace papertype {

// Tree i of a forest (and the lone decision tree, as i = 0) draws its split
// features from this stream, so a one-tree forest without bootstrap matches
// a decision tree grown with the same seed and options.
inline std::uint64_t tree_seed(std::uint64_t seed, std::size_t i) { return derive_seed(seed, i); }

inline TreeOptions tree_options(const Hyperparams& hp, std::size_t default_depth, std::size_t default_features) {
  TreeOptions opt;
  opt.max_depth = hp.get_count("max_depth", default_depth);
  opt.min_leaf = std::max<std::size_t>(1, hp.get_count("min_leaf", 1));
  opt.max_leaves = hp.get_count("max_leaves", 0);
  opt.max_features = hp.get_count("max_features", default_features);
  if (opt.max_leaves == 1) throw ArgumentError("max_leaves must be 0 (unlimited) or at least 2");
  return opt;
}

inline TreeParams fit_decision_tree(const Dataset& data, const Hyperparams& hp, std::uint64_t seed) {
  Rng rng(tree_seed(seed, 0));
  return {grow_tree(data, tree_options(hp, 8, 0), rng)};
}

inline ForestParams fit_random_forest(const Dataset& data, const Hyperparams& hp, std::uint64_t seed) {
  const std::size_t n_trees = hp.get_count("trees", 10);
  const bool bootstrap = hp.get("bootstrap", 1.0) != 0.0;
  if (n_trees == 0) throw TrainingError("random-forest: trees must be positive");
  const auto opt = tree_options(hp, 0, 2);
  const std::size_t n = data.size();

  ForestParams forest;
  forest.trees.reserve(n_trees);
  std::vector<std::uint32_t> counts(n, 1);
  std::vector<double> weights(n, 1.0);
  for (std::size_t t = 0; t < n_trees; ++t) {
    const auto s = tree_seed(seed, t);
    if (bootstrap) {
      // resample n rows with replacement, expressed as multiplicities
      Rng draw(derive_seed(s, 0xB007));
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = 0; i < n; ++i) ++counts[draw.index(n)];
      for (std::size_t i = 0; i < n; ++i) weights[i] = counts[i];
    }
    Rng rng(s);
    forest.trees.push_back(grow_tree(data, weights, counts, opt, rng));
  }
  return forest;
}

// Mean of the trees' leaf distributions.
inline ClassScores forest_scores(const ForestParams& p, std::span<const double> x) {
  ClassScores s{};
  for (const auto& tree : p.trees) {
    const auto& d = tree.leaf_distribution(x);
    for (std::size_t c = 0; c < kNumClasses; ++c) s[c] += d[c];
  }
  for (auto& v : s) v /= static_cast<double>(p.trees.size());
  return s;
}

// Multi-class AdaBoost (SAMME) over depth-limited CART trees.
//
// Round m fits a tree to the current sample weights, measures its weighted
// error err, and votes with alpha = lr * (ln((1 - err) / err) + ln(K - 1)),
// where K is the number of classes present. Misclassified samples are scaled
// by exp(alpha). Boosting stops early once a learner is no better than
// chance (err >= 1 - 1/K) or perfect (err == 0); a perfect learner gets the
// alpha of err = 1e-10 so every weight stays finite.
inline BoostParams fit_adaboost(const Dataset& data, const Hyperparams& hp, std::uint64_t seed) {
  const std::size_t rounds = hp.get_count("rounds", 50);
  const double lr = hp.get("learning_rate", 1.0);
  if (rounds == 0) throw TrainingError("adaboost: rounds must be positive");
  if (!(lr > 0.0)) throw TrainingError("adaboost: learning_rate must be positive");
  const std::size_t n = data.size();
  if (n < 2) throw TrainingError("adaboost: needs at least two training examples");
  ClassCounts present{};
  for (auto t : data.y) ++present[index_of(t)];
  const double k = static_cast<double>((present[0] > 0) + (present[1] > 0) + (present[2] > 0));
  if (k < 2) throw TrainingError("adaboost: needs at least two classes");

  TreeOptions opt;
  opt.max_depth = std::max<std::size_t>(1, hp.get_count("max_depth", 1));
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  const std::vector<std::uint32_t> counts(n, 1);

  BoostParams model;
  for (std::size_t m = 0; m < rounds; ++m) {
    Rng rng(tree_seed(seed, m));
    auto tree = grow_tree(data, w, counts, opt, rng);
    std::vector<char> wrong(n);
    double err = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wrong[i] = tree.predict(data.x.row(i)) != data.y[i];
      err += wrong[i] ? w[i] : 0.0;
      total += w[i];
    }
    err /= total;
    if (err >= 1.0 - 1.0 / k) {
      if (model.trees.empty()) {
        model.trees.push_back(std::move(tree));
        model.alphas.push_back(1.0);
      }
      break;
    }
    const double e = std::max(err, 1e-10);
    const double alpha = lr * (std::log((1.0 - e) / e) + std::log(k - 1.0));
    model.trees.push_back(std::move(tree));
    model.alphas.push_back(alpha);
    if (err <= 0.0) break;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (wrong[i]) w[i] *= std::exp(alpha);
      sum += w[i];
    }
    for (auto& v : w) v /= sum;
  }
  return model;
}

// Alpha-weighted votes, normalized by the total alpha.
inline ClassScores adaboost_scores(const BoostParams& p, std::span<const double> x) {
  ClassScores s{};
  double total = 0.0;
  for (std::size_t m = 0; m < p.trees.size(); ++m) {
    s[index_of(p.trees[m].predict(x))] += p.alphas[m];
    total += p.alphas[m];
  }
  if (total > 0.0)
    for (auto& v : s) v /= total;
  return s;
}

}  // namespace papertype
