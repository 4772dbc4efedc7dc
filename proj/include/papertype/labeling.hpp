#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "papertype/core.hpp"
#include "papertype/rng.hpp"

namespace papertype {

// ---------------------------------------------------------------------------
// Rule-based labels
// ---------------------------------------------------------------------------

namespace detail {

inline bool icontains(std::string_view haystack, std::string_view needle) {
  auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; };
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                        [&](char a, char b) { return lower(a) == lower(b); });
  return it != haystack.end();
}

}  // namespace detail

// Subjects decide Thesis before the title is consulted for Slides.
// Matching is case-insensitive substring, so "doctoralthesis" counts.
inline DocType rule_label(const DocumentRecord& record) {
  for (const auto& s : record.subjects)
    if (detail::icontains(s, "thesis") || detail::icontains(s, "dissertation")) return DocType::Thesis;
  if (detail::icontains(record.title, "slides") || detail::icontains(record.title, "presentation"))
    return DocType::Slides;
  return DocType::Research;
}

// ---------------------------------------------------------------------------
// Sample size
// ---------------------------------------------------------------------------

// ceil(z^2 p (1-p) / c^2): examples needed for a proportion estimate at
// z-score `z` and half-width `c`.
inline std::int64_t sample_size(double z, double p_hat, double c) {
  if (!(c > 0.0)) throw ArgumentError("sample_size: confidence interval must be positive");
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw ArgumentError("sample_size: p_hat must lie in [0, 1]");
  const double n = z * z * p_hat * (1.0 - p_hat) / (c * c);
  // Results that are integral up to rounding noise (1.96^2 * 0.25 / 0.0001
  // evaluates to 9603.999999999998) snap to that integer; ceil otherwise.
  const double nearest = std::round(n);
  if (std::abs(n - nearest) <= 1e-9 * std::max(1.0, nearest)) return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::ceil(n));
}

// ---------------------------------------------------------------------------
// Class-balanced sampling
// ---------------------------------------------------------------------------

using ClassProportions = ClassScores;

inline void check_proportions(const ClassProportions& p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw ArgumentError("class proportions must be nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ArgumentError("class proportions sum to " + std::to_string(sum) + ", expected 1");
}

// Largest-remainder apportionment of `total` by `weights`. Remainder ties go
// to the class earlier in DocType order.
inline ClassCounts apportion(std::size_t total, const ClassScores& weights) {
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (!(wsum > 0.0)) throw ArgumentError("apportion: weights must have a positive sum");
  ClassCounts counts{};
  std::array<double, kNumClasses> frac{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double exact = static_cast<double>(total) * weights[c] / wsum;
    counts[c] = static_cast<std::size_t>(std::floor(exact));
    frac[c] = exact - std::floor(exact);
    assigned += counts[c];
  }
  // rounding can overshoot by one when a product lands just above an integer
  while (assigned > total) {
    std::size_t c = static_cast<std::size_t>(std::min_element(frac.begin(), frac.end()) - frac.begin());
    if (counts[c] == 0) {
      frac[c] = 2.0;
      continue;
    }
    --counts[c];
    --assigned;
    frac[c] += 1.0;
  }
  std::array<std::size_t, kNumClasses> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % kNumClasses, ++assigned) ++counts[order[i]];
  return counts;
}

namespace detail {

// Indices of `examples` grouped per class, in input order.
inline std::array<std::vector<std::size_t>, kNumClasses> by_class(
    std::span<const LabeledExample> examples) {
  std::array<std::vector<std::size_t>, kNumClasses> out;
  for (std::size_t i = 0; i < examples.size(); ++i) out[index_of(examples[i].label)].push_back(i);
  return out;
}

}  // namespace detail

// Seeded subsample with per-class counts apportioned from `target_total`.
// Output is grouped by class in DocType order, each group in sampled order.
inline std::vector<LabeledExample> balanced_sample(std::span<const LabeledExample> examples,
                                                   std::size_t target_total,
                                                   const ClassProportions& proportions,
                                                   std::uint64_t seed) {
  check_proportions(proportions);
  if (target_total == 0) return {};
  const auto want = apportion(target_total, proportions);
  auto groups = detail::by_class(examples);
  for (auto t : kDocTypes) {
    const auto c = index_of(t);
    if (groups[c].size() < want[c])
      throw ShortageError("class " + std::string(to_string(t)) + " has " +
                          std::to_string(groups[c].size()) + " examples, " + std::to_string(want[c]) +
                          " requested");
  }
  std::vector<LabeledExample> out;
  out.reserve(target_total);
  for (auto t : kDocTypes) {
    const auto c = index_of(t);
    Rng rng(derive_seed(seed, c));
    auto& g = groups[c];
    // partial Fisher-Yates: the first want[c] slots become a uniform sample
    for (std::size_t i = 0; i < want[c]; ++i) std::swap(g[i], g[i + rng.index(g.size() - i)]);
    for (std::size_t i = 0; i < want[c]; ++i) out.push_back(examples[g[i]]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stratified splits
// ---------------------------------------------------------------------------

struct DatasetSplit {
  std::vector<LabeledExample> train;                    // union of the folds
  std::vector<std::vector<LabeledExample>> folds;       // k disjoint test folds
  std::vector<LabeledExample> validation;
  std::uint64_t seed = 0;
};

// Index-level split; see stratified_split().
struct SplitIndices {
  std::vector<std::vector<std::size_t>> folds;
  std::vector<std::size_t> validation;
};

inline SplitIndices stratified_split_indices(std::span<const LabeledExample> examples,
                                             std::size_t k_folds, double validation_fraction,
                                             std::uint64_t seed) {
  if (k_folds < 2) throw ArgumentError("stratified_split: k_folds must be at least 2");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw ArgumentError("stratified_split: validation_fraction must lie in [0, 1)");

  auto groups = detail::by_class(examples);
  ClassScores sizes{};
  for (std::size_t c = 0; c < kNumClasses; ++c) sizes[c] = static_cast<double>(groups[c].size());

  ClassCounts n_val{};
  if (validation_fraction > 0.0 && !examples.empty()) {
    const auto total_val =
        static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(examples.size())));
    n_val = apportion(total_val, sizes);
  }

  SplitIndices out;
  out.folds.resize(k_folds);
  // Deal class by class into folds, continuing the rotation across classes so
  // that fold totals differ by at most one.
  std::size_t next_fold = 0;
  for (auto t : kDocTypes) {
    const auto c = index_of(t);
    auto& g = groups[c];
    Rng rng(derive_seed(seed, c));
    rng.shuffle(std::span<std::size_t>(g));
    out.validation.insert(out.validation.end(), g.begin(), g.begin() + static_cast<std::ptrdiff_t>(n_val[c]));
    const std::size_t remaining = g.size() - n_val[c];
    if (remaining > 0 && remaining < k_folds)
      throw ArgumentError("stratified_split: class " + std::string(to_string(t)) + " has " +
                          std::to_string(remaining) + " examples for " + std::to_string(k_folds) + " folds");
    for (std::size_t i = n_val[c]; i < g.size(); ++i) {
      out.folds[next_fold].push_back(g[i]);
      next_fold = (next_fold + 1) % k_folds;
    }
  }
  std::sort(out.validation.begin(), out.validation.end());
  for (auto& f : out.folds) std::sort(f.begin(), f.end());
  return out;
}

// Validation is drawn first (stratified), the rest is dealt into k
// stratified folds. Every part keeps input order.
inline DatasetSplit stratified_split(std::span<const LabeledExample> examples, std::size_t k_folds,
                                     double validation_fraction, std::uint64_t seed) {
  const auto idx = stratified_split_indices(examples, k_folds, validation_fraction, seed);
  DatasetSplit split;
  split.seed = seed;
  for (auto i : idx.validation) split.validation.push_back(examples[i]);
  std::vector<std::size_t> train_idx;
  for (const auto& f : idx.folds) {
    auto& fold = split.folds.emplace_back();
    for (auto i : f) fold.push_back(examples[i]);
    train_idx.insert(train_idx.end(), f.begin(), f.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  for (auto i : train_idx) split.train.push_back(examples[i]);
  return split;
}

}  // namespace papertype
