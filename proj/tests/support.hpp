#pragma once

// Seeded generators and independent reference computations shared by the
// unit and acceptance tests. The oracles deliberately avoid the library's own
// helpers (no log-space tricks, full sorts instead of selection, metrics from
// their textbook definitions).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "papertype/core.hpp"
#include "papertype/engagement.hpp"
#include "papertype/matrix.hpp"
#include "papertype/rng.hpp"

namespace testsupport {

using namespace papertype;

inline DocType random_type(Rng& rng) { return kDocTypes[rng.index(kNumClasses)]; }

// Feature vector with consistent F4 and F1 present.
inline FeatureVector random_features(Rng& rng) {
  FeatureVector fv;
  fv.authors = 1 + static_cast<std::int64_t>(rng.index(12));
  fv.pages = 1 + static_cast<std::int64_t>(rng.index(400));
  fv.total_words = static_cast<std::int64_t>(rng.index(200000));
  fv.words_per_page = static_cast<double>(fv.total_words) / static_cast<double>(fv.pages);
  return fv;
}

// Labeled examples whose features loosely depend on the class, so models
// have something to learn.
inline std::vector<LabeledExample> random_examples(Rng& rng, std::size_t n) {
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledExample e;
    e.id = "r" + std::to_string(i);
    e.label = i < kNumClasses ? kDocTypes[i] : random_type(rng);
    const double scale = 1.0 + 2.0 * static_cast<double>(index_of(e.label));
    e.features.authors = 1 + static_cast<std::int64_t>(rng.index(4) * index_of(e.label));
    e.features.pages = 1 + static_cast<std::int64_t>(rng.uniform() * 40.0 * scale);
    e.features.total_words = static_cast<std::int64_t>(rng.uniform() * 5000.0 * scale * scale);
    e.features.words_per_page =
        static_cast<double>(e.features.total_words) / static_cast<double>(e.features.pages);
    out.push_back(std::move(e));
  }
  return out;
}

// Small continuous dataset in `dims` dimensions with class-dependent means.
inline Dataset random_dataset(Rng& rng, std::size_t n, std::size_t dims) {
  Dataset d;
  d.x = Matrix(n, dims);
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = i < kNumClasses ? kDocTypes[i] : random_type(rng);
    d.y.push_back(t);
    for (std::size_t j = 0; j < dims; ++j)
      d.x(i, j) = static_cast<double>(index_of(t)) * (1.0 + static_cast<double>(j)) + 2.0 * rng.normal();
  }
  return d;
}

// Linear-interpolation quantile, 1-based rank formulation h = (n-1)q + 1.
inline double quantile_oracle(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q + 1.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo >= v.size()) return v.back();
  return v[lo - 1] + (h - static_cast<double>(lo)) * (v[lo] - v[lo - 1]);
}

// Class posterior as prior times the product of Gaussian densities,
// normalized; classes with zero prior get zero.
inline ClassScores gnb_oracle(const Dataset& train, std::span<const double> x, double var_floor = 1e-9) {
  ClassScores post{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < train.size(); ++i)
      if (index_of(train.y[i]) == c) rows.push_back(i);
    if (rows.empty()) continue;
    double p = static_cast<double>(rows.size()) / static_cast<double>(train.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      double mean = 0.0;
      for (auto i : rows) mean += train.x(i, j);
      mean /= static_cast<double>(rows.size());
      double var = 0.0;
      for (auto i : rows) var += (train.x(i, j) - mean) * (train.x(i, j) - mean);
      var = std::max(var / static_cast<double>(rows.size()), var_floor);
      p *= std::exp(-(x[j] - mean) * (x[j] - mean) / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
    }
    post[c] = p;
  }
  double total = post[0] + post[1] + post[2];
  for (auto& v : post) v /= total;
  return post;
}

// Vote fractions of the k nearest points by a full stable sort on distance.
inline ClassScores knn_oracle(const Dataset& train, std::span<const double> x, std::size_t k) {
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto dist = [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += (train.x(i, j) - x[j]) * (train.x(i, j) - x[j]);
    return s;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });
  k = std::min(k, order.size());
  ClassScores votes{};
  for (std::size_t i = 0; i < k; ++i) votes[index_of(train.y[order[i]])] += 1.0;
  for (auto& v : votes) v /= static_cast<double>(k);
  return votes;
}

// Weighted F1 from a confusion matrix [truth][predicted], straight from the
// definitions.
inline double weighted_f1_oracle(const std::array<std::array<std::size_t, 3>, 3>& cm) {
  double n = 0.0, acc = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    double tp = static_cast<double>(cm[c][c]), row = 0.0, col = 0.0;
    for (std::size_t o = 0; o < 3; ++o) {
      row += static_cast<double>(cm[c][o]);
      col += static_cast<double>(cm[o][c]);
    }
    const double p = col > 0.0 ? tp / col : 0.0;
    const double r = row > 0.0 ? tp / row : 0.0;
    const double f = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    acc += row * f;
    n += row;
  }
  return acc / n;
}

// Random but valid log event: unique positions 1..m, clicks on impressed
// documents only.
inline LogEvent random_event(Rng& rng, std::size_t id, const std::array<double, 3>& type_weights = {0.667, 0.061,
                                                                                                       0.272}) {
  LogEvent e;
  e.engine = rng.uniform() < 0.5 ? Engine::Search : Engine::Recommender;
  e.query_id = "q" + std::to_string(id);
  const std::size_t m = 1 + rng.index(e.engine == Engine::Search ? 10 : 5);
  for (std::size_t p = 1; p <= m; ++p)
    e.impressions.push_back({"d" + std::to_string(rng.index(5000)), static_cast<std::uint32_t>(p),
                             kDocTypes[rng.categorical(type_weights)]});
  const std::size_t clicks = rng.index(4);
  for (std::size_t c = 0; c < clicks; ++c) {
    const auto& imp = e.impressions[rng.index(m)];
    e.clicks.push_back({imp.doc_id, imp.position});
  }
  return e;
}

}  // namespace testsupport
