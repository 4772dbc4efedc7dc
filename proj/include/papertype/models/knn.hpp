#pragma once

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "papertype/matrix.hpp"
#include "papertype/models/model.hpp"

namespace papertype {

inline KnnParams fit_knn(const Dataset& data, std::size_t k) {
  if (data.size() == 0) throw TrainingError("knn: empty training set");
  if (k == 0) throw TrainingError("knn: k must be positive");
  return KnnParams{k, data.x, data.y};
}

// Vote fractions among the k nearest stored points (Euclidean). Equal
// distances are ordered by training index.
inline ClassScores knn_scores(const KnnParams& p, std::span<const double> x) {
  const std::size_t n = p.labels.size();
  const std::size_t k = std::min(p.k, n);
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = p.points.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += (row[j] - x[j]) * (row[j] - x[j]);
    dist[i] = {s, i};
  }
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
  ClassScores votes{};
  for (std::size_t i = 0; i < k; ++i) votes[index_of(p.labels[dist[i].second])] += 1.0;
  for (auto& v : votes) v /= static_cast<double>(k);
  return votes;
}

}  // namespace papertype
