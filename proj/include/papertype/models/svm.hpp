#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "papertype/matrix.hpp"
#include "papertype/models/model.hpp"
#include "papertype/rng.hpp"

namespace papertype {

// One-vs-rest linear separators trained by stochastic subgradient descent on
// the L2-regularized hinge loss, with a constant step and a seeded visiting
// order per epoch.
inline SvmParams fit_linear_svm(const Dataset& data, const Hyperparams& hp, std::uint64_t seed) {
  const std::size_t epochs = hp.get_count("epochs", 100);
  const double step = hp.get("step", 1e-2);
  const double lambda = hp.get("lambda", 1e-4);
  const std::size_t n = data.size();
  if (n < 2) throw TrainingError("linear-svm: needs at least two training examples");
  if (!(step > 0.0) || !(lambda >= 0.0)) throw TrainingError("linear-svm: step must be positive, lambda >= 0");
  const std::size_t d = data.dims();

  SvmParams p;
  for (auto& w : p.weights) w.assign(d, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  const double shrink = 1.0 - step * lambda;
  for (std::size_t e = 0; e < epochs; ++e) {
    rng.shuffle(std::span<std::size_t>(order));
    for (auto i : order) {
      const auto x = data.x.row(i);
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        auto& w = p.weights[c];
        const double y = index_of(data.y[i]) == c ? 1.0 : -1.0;
        double margin = p.bias[c];
        for (std::size_t j = 0; j < d; ++j) margin += w[j] * x[j];
        for (auto& v : w) v *= shrink;
        if (y * margin < 1.0) {
          for (std::size_t j = 0; j < d; ++j) w[j] += step * y * x[j];
          p.bias[c] += step * y;
        }
      }
    }
  }
  for (const auto& w : p.weights)
    for (double v : w)
      if (!std::isfinite(v)) throw TrainingError("linear-svm: weights diverged; lower the step or scale features");
  return p;
}

inline ClassScores svm_margins(const SvmParams& p, std::span<const double> x) {
  ClassScores m{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    m[c] = p.bias[c];
    for (std::size_t j = 0; j < x.size(); ++j) m[c] += p.weights[c][j] * x[j];
  }
  return m;
}

// Softmax of the margins; argmax is the largest margin.
inline ClassScores svm_scores(const SvmParams& p, std::span<const double> x) {
  auto m = svm_margins(p, x);
  const double top = *std::max_element(m.begin(), m.end());
  double total = 0.0;
  for (auto& v : m) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : m) v /= total;
  return m;
}

}  // namespace papertype
