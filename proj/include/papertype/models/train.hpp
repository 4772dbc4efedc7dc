#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "papertype/matrix.hpp"
#include "papertype/models/baselines.hpp"
#include "papertype/models/ensembles.hpp"
#include "papertype/models/gnb.hpp"
#include "papertype/models/knn.hpp"
#include "papertype/models/model.hpp"
#include "papertype/models/svm.hpp"
#include "papertype/stats.hpp"

namespace papertype {

struct TrainOptions {
  Hyperparams hyperparameters;
  TransformKind transform = TransformKind::Identity;
  FeatureSet features;
  std::uint64_t seed = 0;
};

namespace detail {

inline bool is_baseline(ModelKind k) {
  return k == ModelKind::BaselineRandom || k == ModelKind::BaselineThreshold;
}

inline void check_hyperparams(ModelKind kind, const Hyperparams& hp) {
  const auto known = known_hyperparams(kind);
  for (const auto& [name, value] : hp.values()) {
    if (!known.contains(name))
      throw ArgumentError("unknown hyperparameter '" + name + "' for " + std::string(to_string(kind)));
    if (!std::isfinite(value)) throw ArgumentError("hyperparameter '" + name + "' is not finite");
  }
}

inline std::string ctx(ModelKind kind) { return std::string(to_string(kind)) + ": "; }

}  // namespace detail

// Fits `kind` on `examples`. The transform is fitted here, on these examples
// only, and stored in the artifact. Baselines always use the identity
// transform. Requires every selected feature to be present.
inline ModelArtifact train(ModelKind kind, std::span<const LabeledExample> examples, const TrainOptions& opt) {
  detail::check_hyperparams(kind, opt.hyperparameters);
  if (examples.empty()) throw TrainingError(detail::ctx(kind) + "empty training set");

  ModelArtifact model;
  model.kind = kind;
  model.features = opt.features;
  model.hyperparameters = opt.hyperparameters;
  model.seed = opt.seed;

  Dataset data;
  try {
    data = make_dataset(examples, opt.features);
  } catch (const ArgumentError& e) {
    throw TrainingError(detail::ctx(kind) + e.what() + " (impute before training)");
  }
  ClassCounts present{};
  for (auto t : data.y) ++present[index_of(t)];
  const int n_classes = (present[0] > 0) + (present[1] > 0) + (present[2] > 0);
  if (kind != ModelKind::Knn && kind != ModelKind::BaselineRandom && n_classes < 2)
    throw TrainingError(detail::ctx(kind) + "training data must contain at least two classes");

  if (!detail::is_baseline(kind)) {
    model.transform = fit_transform_spec(data.x, opt.transform);
    model.transform.apply(data.x);
  }

  const auto& hp = opt.hyperparameters;
  switch (kind) {
    case ModelKind::BaselineRandom: model.params = fit_baseline_random(data.y); break;
    case ModelKind::BaselineThreshold: {
      ThresholdParams p;
      try {
        p.table = derive_thresholds(examples, hp.get("quantile_lo", 0.025), hp.get("quantile_hi", 0.975));
      } catch (const ArgumentError& e) {
        throw TrainingError(detail::ctx(kind) + e.what());
      }
      p.fallback = kDocTypes[static_cast<std::size_t>(
          std::max_element(present.begin(), present.end()) - present.begin())];
      model.params = p;
      break;
    }
    case ModelKind::GaussianNB: model.params = fit_gnb(data, hp.get("var_floor", 1e-9)); break;
    case ModelKind::Knn: model.params = fit_knn(data, hp.get_count("k", 5)); break;
    case ModelKind::DecisionTree: model.params = fit_decision_tree(data, hp, opt.seed); break;
    case ModelKind::RandomForest: model.params = fit_random_forest(data, hp, opt.seed); break;
    case ModelKind::AdaBoost: model.params = fit_adaboost(data, hp, opt.seed); break;
    case ModelKind::LinearSvm: model.params = fit_linear_svm(data, hp, opt.seed); break;
  }
  return model;
}

namespace detail {

// Per-input draw for the random baseline: a pure function of the model seed
// and the input bits.
inline std::uint64_t input_seed(std::uint64_t seed, std::span<const double> x) {
  std::uint64_t h = seed;
  for (double v : x) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h = derive_seed(h, bits);
  }
  return h;
}

}  // namespace detail

// `raw` holds the model's selected features, untransformed.
inline Prediction predict_input(const ModelArtifact& model, InputVector raw) {
  if (raw.size != model.features.size()) throw ArgumentError("predict: input width does not match the model");
  Prediction out;
  if (model.kind == ModelKind::BaselineThreshold) {
    out.label = threshold_decide(std::get<ThresholdParams>(model.params), model.features, raw.span());
    out.scores[index_of(out.label)] = 1.0;
    return out;
  }
  if (model.kind == ModelKind::BaselineRandom) {
    const auto& p = std::get<RandomParams>(model.params);
    Rng rng(detail::input_seed(model.seed, raw.span()));
    out.label = kDocTypes[rng.categorical(p.weights)];
    out.scores = p.weights;
    return out;
  }
  model.transform.apply(raw.span());
  const auto x = std::as_const(raw).span();
  switch (model.kind) {
    case ModelKind::GaussianNB: out.scores = gnb_scores(std::get<GnbParams>(model.params), x); break;
    case ModelKind::Knn: out.scores = knn_scores(std::get<KnnParams>(model.params), x); break;
    case ModelKind::DecisionTree: out.scores = std::get<TreeParams>(model.params).tree.leaf_distribution(x); break;
    case ModelKind::RandomForest: out.scores = forest_scores(std::get<ForestParams>(model.params), x); break;
    case ModelKind::AdaBoost: out.scores = adaboost_scores(std::get<BoostParams>(model.params), x); break;
    case ModelKind::LinearSvm: {
      const auto& p = std::get<SvmParams>(model.params);
      out.label = argmax(svm_margins(p, x));
      out.scores = svm_scores(p, x);
      return out;
    }
    default: break;
  }
  out.label = argmax(out.scores);
  return out;
}

// Applies the model's transform, then its decision rule. Ties in the scores
// resolve to the earliest DocType.
inline Prediction predict(const ModelArtifact& model, const FeatureVector& fv) {
  return predict_input(model, select_features(fv, model.features));
}

// Batch prediction. The random baseline draws one seeded sequence for the
// whole batch instead of per-input draws.
inline std::vector<DocType> predict_all(const ModelArtifact& model, std::span<const LabeledExample> examples) {
  if (model.kind == ModelKind::BaselineRandom)
    return baseline_random_predict(std::get<RandomParams>(model.params), examples.size(), model.seed);
  std::vector<DocType> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(predict(model, e.features).label);
  return out;
}

// ---------------------------------------------------------------------------
// Structural validation
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_distribution(const ClassScores& d, const std::string& where) {
  double sum = 0.0;
  for (double v : d) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ModelFormatError(where + ": negative or non-finite probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ModelFormatError(where + ": leaf distribution does not sum to 1");
}

inline void validate_tree(const Tree& tree, std::size_t dims, const std::string& where) {
  if (tree.nodes.empty()) throw ModelFormatError(where + ": tree has no nodes");
  const auto n = static_cast<std::int64_t>(tree.nodes.size());
  std::vector<int> parents(tree.nodes.size(), 0);
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& node = tree.nodes[static_cast<std::size_t>(i)];
    const auto at = where + " node " + std::to_string(i);
    if (node.is_leaf()) {
      if (node.feature != -1 || node.left != -1 || node.right != -1)
        throw ModelFormatError(at + ": leaf with children");
      validate_distribution(node.distribution, at);
      continue;
    }
    if (static_cast<std::size_t>(node.feature) >= dims) throw ModelFormatError(at + ": feature id out of range");
    if (!std::isfinite(node.threshold)) throw ModelFormatError(at + ": non-finite threshold");
    // children come after their parent, which also rules out cycles
    for (auto child : {node.left, node.right}) {
      if (child <= i || child >= n) throw ModelFormatError(at + ": child index out of range");
      if (++parents[static_cast<std::size_t>(child)] > 1) throw ModelFormatError(at + ": node shared by two parents");
    }
  }
}

}  // namespace detail

// Throws ModelFormatError when the artifact breaks a structural invariant.
inline void validate(const ModelArtifact& m) {
  const std::size_t d = m.features.size();
  const std::string where(to_string(m.kind));
  const std::array<ModelKind, 8> kind_of_index{
      ModelKind::BaselineRandom, ModelKind::BaselineThreshold, ModelKind::GaussianNB, ModelKind::Knn,
      ModelKind::DecisionTree,   ModelKind::RandomForest,      ModelKind::AdaBoost,   ModelKind::LinearSvm};
  if (kind_of_index[m.params.index()] != m.kind) throw ModelFormatError(where + ": parameters do not match kind");
  if (m.transform.kind == TransformKind::ZScore && (m.transform.shift.size() != d || m.transform.scale.size() != d))
    throw ModelFormatError(where + ": transform width does not match the feature count");
  auto check_width = [&](const std::vector<double>& v) {
    if (v.size() != d) throw ModelFormatError(where + ": parameter width does not match the feature count");
    for (double x : v)
      if (!std::isfinite(x)) throw ModelFormatError(where + ": non-finite parameter");
  };
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, RandomParams>) {
          detail::validate_distribution(p.weights, where);
        } else if constexpr (std::is_same_v<P, ThresholdParams>) {
          for (const auto& row : p.table.bounds)
            for (const auto& b : row)
              if (!(b.lower <= b.upper)) throw ModelFormatError(where + ": lower bound above upper bound");
        } else if constexpr (std::is_same_v<P, GnbParams>) {
          detail::validate_distribution(p.priors, where + " priors");
          for (std::size_t c = 0; c < kNumClasses; ++c) {
            check_width(p.means[c]);
            check_width(p.variances[c]);
            for (double v : p.variances[c])
              if (!(v > 0.0)) throw ModelFormatError(where + ": variance must be positive");
          }
        } else if constexpr (std::is_same_v<P, KnnParams>) {
          if (p.k == 0) throw ModelFormatError(where + ": k must be positive");
          if (p.labels.empty() || p.points.cols != d || p.points.rows() != p.labels.size())
            throw ModelFormatError(where + ": stored points do not match labels or feature count");
        } else if constexpr (std::is_same_v<P, TreeParams>) {
          detail::validate_tree(p.tree, d, where);
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          if (p.trees.empty()) throw ModelFormatError(where + ": forest has no trees");
          for (std::size_t i = 0; i < p.trees.size(); ++i)
            detail::validate_tree(p.trees[i], d, where + " tree " + std::to_string(i));
        } else if constexpr (std::is_same_v<P, BoostParams>) {
          if (p.trees.empty() || p.trees.size() != p.alphas.size())
            throw ModelFormatError(where + ": need one weight per tree");
          for (double a : p.alphas)
            if (!std::isfinite(a)) throw ModelFormatError(where + ": non-finite tree weight");
          for (std::size_t i = 0; i < p.trees.size(); ++i)
            detail::validate_tree(p.trees[i], d, where + " tree " + std::to_string(i));
        } else if constexpr (std::is_same_v<P, SvmParams>) {
          for (const auto& w : p.weights) check_width(w);
          for (double b : p.bias)
            if (!std::isfinite(b)) throw ModelFormatError(where + ": non-finite bias");
        }
      },
      m.params);
}

}  // namespace papertype
