#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <span>

#include "papertype/matrix.hpp"
#include "papertype/models/model.hpp"

namespace papertype {

inline GnbParams fit_gnb(const Dataset& data, double var_floor = 1e-9) {
  if (data.size() == 0) throw TrainingError("gnb: empty training set");
  const std::size_t d = data.dims();
  GnbParams p;
  ClassCounts n{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    p.means[c].assign(d, 0.0);
    p.variances[c].assign(d, 0.0);
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto c = index_of(data.y[i]);
    ++n[c];
    for (std::size_t j = 0; j < d; ++j) p.means[c][j] += data.x(i, j);
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    p.priors[c] = static_cast<double>(n[c]) / static_cast<double>(data.size());
    if (n[c] == 0) {
      std::fill(p.variances[c].begin(), p.variances[c].end(), 1.0);
      continue;
    }
    for (auto& m : p.means[c]) m /= static_cast<double>(n[c]);
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto c = index_of(data.y[i]);
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = data.x(i, j) - p.means[c][j];
      p.variances[c][j] += diff * diff;
    }
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (n[c] == 0) continue;
    for (auto& v : p.variances[c]) v = std::max(v / static_cast<double>(n[c]), var_floor);
  }
  return p;
}

// Posterior over classes, computed in log space and renormalized.
inline ClassScores gnb_scores(const GnbParams& p, std::span<const double> x) {
  std::array<double, kNumClasses> logp{};
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (!(p.priors[c] > 0.0)) {
      logp[c] = -std::numeric_limits<double>::infinity();
      continue;
    }
    double lp = std::log(p.priors[c]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double v = p.variances[c][j];
      const double diff = x[j] - p.means[c][j];
      lp -= 0.5 * (std::log(2.0 * std::numbers::pi * v) + diff * diff / v);
    }
    logp[c] = lp;
    best = std::max(best, lp);
  }
  ClassScores s{};
  double total = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    s[c] = std::isinf(logp[c]) ? 0.0 : std::exp(logp[c] - best);
    total += s[c];
  }
  for (auto& v : s) v /= total;
  return s;
}

}  // namespace papertype
