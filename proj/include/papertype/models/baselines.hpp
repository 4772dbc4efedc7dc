#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "papertype/models/model.hpp"
#include "papertype/rng.hpp"

namespace papertype {

// Class frequencies of the training labels.
inline RandomParams fit_baseline_random(std::span<const DocType> labels) {
  if (labels.empty()) throw TrainingError("baseline-random: empty training set");
  RandomParams p;
  for (auto t : labels) p.weights[index_of(t)] += 1.0;
  for (auto& w : p.weights) w /= static_cast<double>(labels.size());
  return p;
}

// n independent draws from the class-weight distribution.
inline std::vector<DocType> baseline_random_predict(const RandomParams& model, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DocType> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(kDocTypes[rng.categorical(model.weights)]);
  return out;
}

// Tested in this order; the first class whose bounds admit every feature wins.
inline constexpr std::array<DocType, kNumClasses> kThresholdTestOrder{DocType::Thesis, DocType::Slides,
                                                                      DocType::Research};

// Decides on the features in `features` only; `x` holds their raw values.
inline DocType threshold_decide(const ThresholdParams& model, const FeatureSet& features,
                                std::span<const double> x) {
  for (auto t : kThresholdTestOrder) {
    bool inside = true;
    for (std::size_t j = 0; j < features.size() && inside; ++j)
      inside = model.table.at(t, features[j]).contains(x[j]);
    if (inside) return t;
  }
  return model.fallback;
}

// The threshold baseline over all four features, falling back to Research.
inline DocType baseline_threshold_predict(const ThresholdTable& table, const FeatureVector& fv) {
  if (fv.has_missing()) throw ArgumentError("baseline-threshold: f1 is missing; impute first");
  const ThresholdParams model{table, DocType::Research};
  const std::array<double, kNumFeatures> x{static_cast<double>(*fv.authors), static_cast<double>(fv.total_words),
                                           static_cast<double>(fv.pages), fv.words_per_page};
  return threshold_decide(model, FeatureSet::all(), x);
}

}  // namespace papertype
