#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "papertype/core.hpp"
#include "papertype/labeling.hpp"
#include "papertype/rng.hpp"
#include "papertype/stats.hpp"

namespace papertype {

// Reference per-class thresholds for scholarly repository content: the 2.5%
// and 97.5% quantiles of each feature after Tukey filtering. Thesis F1 is the
// degenerate interval [1, 1].
inline ThresholdTable reference_thresholds() {
  ThresholdTable t;
  using F = FeatureId;
  using D = DocType;
  t.at(D::Research, F::Authors) = {1, 5};
  t.at(D::Research, F::TotalWords) = {1226.825, 19151.425};
  t.at(D::Research, F::Pages) = {3, 41};
  t.at(D::Research, F::WordsPerPage) = {208.2297, 926.8950};
  t.at(D::Slides, F::Authors) = {1, 8};
  t.at(D::Slides, F::TotalWords) = {93.6, 7339.8};
  t.at(D::Slides, F::Pages) = {1, 74.575};
  t.at(D::Slides, F::WordsPerPage) = {8.0625, 722.9375};
  t.at(D::Thesis, F::Authors) = {1, 1};
  t.at(D::Thesis, F::TotalWords) = {15184, 210720};
  t.at(D::Thesis, F::Pages) = {47, 478};
  t.at(D::Thesis, F::WordsPerPage) = {197.7846, 529.9571};
  return t;
}

struct LogNormal {
  double mu = 0.0;
  double sigma = 1.0;
};

namespace detail {

// For X = exp(mu + sigma Z), the z-scores of the q_lo and q_hi quantiles of X
// after Tukey filtering. The fences scale with exp(mu), so they only depend
// on sigma.
inline std::pair<double, double> filtered_quantile_z(double sigma, double q_lo, double q_hi) {
  static const boost::math::normal_distribution<double> std_normal;
  const double z75 = boost::math::quantile(std_normal, 0.75);
  const double a = std::exp(-z75 * sigma), b = std::exp(z75 * sigma);
  const double upper = b + 1.5 * (b - a);
  const double lower = a - 1.5 * (b - a);
  const double p_hi = boost::math::cdf(std_normal, std::log(upper) / sigma);
  const double p_lo = lower > 0.0 ? boost::math::cdf(std_normal, std::log(lower) / sigma) : 0.0;
  auto z = [&](double q) { return boost::math::quantile(std_normal, p_lo + q * (p_hi - p_lo)); };
  return {z(q_lo), z(q_hi)};
}

}  // namespace detail

// Log-normal whose Tukey-filtered q_lo / q_hi quantiles are `lo` / `hi`.
// Degenerate targets (lo == hi) give sigma 0.
inline LogNormal calibrate_lognormal(double lo, double hi, double q_lo = 0.025, double q_hi = 0.975) {
  if (!(lo > 0.0 && hi >= lo)) throw ArgumentError("calibrate_lognormal: need 0 < lo <= hi");
  if (hi == lo) return {std::log(lo), 0.0};
  const double target = std::log(hi / lo);
  auto spread = [&](double s) {
    auto [zl, zh] = detail::filtered_quantile_z(s, q_lo, q_hi);
    return s * (zh - zl);
  };
  double a = 1e-4, b = 8.0;
  if (spread(b) < target) throw ArgumentError("calibrate_lognormal: target spread out of range");
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    const double m = 0.5 * (a + b);
    (spread(m) < target ? a : b) = m;
  }
  const double s = 0.5 * (a + b);
  return {std::log(lo) - s * detail::filtered_quantile_z(s, q_lo, q_hi).first, s};
}

struct SyntheticOptions {
  ThresholdTable targets = reference_thresholds();
  // Fraction of Slides examples whose F1 is left missing.
  double slides_missing_f1 = 0.0;
};

namespace detail {

struct ClassProfile {
  LogNormal authors;  // sigma 0: constant
  LogNormal words;
  LogNormal pages;
  double rho = 0.0;  // correlation of log words and log pages
};

inline ClassProfile class_profile(const ThresholdTable& targets, DocType t) {
  ClassProfile p;
  const auto& a = targets.at(t, FeatureId::Authors);
  // author counts are small integers; a plain log-normal centred on the
  // geometric mean of the bounds keeps ~95% of draws inside them
  p.authors = {0.5 * (std::log(std::max(a.lower, 1.0)) + std::log(std::max(a.upper, 1.0))),
               std::log(std::max(a.upper, 1.0) / std::max(a.lower, 1.0)) / (2.0 * 1.959964)};
  const auto cal = [&](FeatureId f) {
    const auto& b = targets.at(t, f);
    return calibrate_lognormal(std::max(b.lower, 0.5), std::max(b.upper, std::max(b.lower, 0.5)),
                               targets.quantile_lo, targets.quantile_hi);
  };
  p.words = cal(FeatureId::TotalWords);
  p.pages = cal(FeatureId::Pages);
  const double s4 = cal(FeatureId::WordsPerPage).sigma;
  const double s2 = p.words.sigma, s3 = p.pages.sigma;
  // var(log f4) = s2^2 + s3^2 - 2 rho s2 s3, since f4 = f2 / f3
  p.rho = (s2 > 0.0 && s3 > 0.0) ? std::clamp((s2 * s2 + s3 * s3 - s4 * s4) / (2.0 * s2 * s3), -0.95, 0.95) : 0.0;
  return p;
}

}  // namespace detail

// Desk-scale stand-in for a labeled repository sample. Per class, author
// counts, total words and pages are right-skewed (log-normal, rounded),
// calibrated so the post-Tukey 2.5%/97.5% quantiles land on `targets`;
// words and pages are correlated in log space so words-per-page (always
// F2 / F3) spreads like its target too. Classes are interleaved by a seeded
// shuffle.
inline std::vector<LabeledExample> generate_synthetic(std::size_t n, const ClassProportions& proportions,
                                                      std::uint64_t seed, const SyntheticOptions& opt = {}) {
  if (n < 30) throw ArgumentError("generate_synthetic: n must be at least 30");
  check_proportions(proportions);
  const auto counts = apportion(n, proportions);
  std::vector<LabeledExample> out;
  out.reserve(n);
  for (auto t : kDocTypes) {
    const auto c = index_of(t);
    const auto prof = detail::class_profile(opt.targets, t);
    Rng rng(derive_seed(seed, 0x5E000 + c));
    Rng missing(derive_seed(seed, 0x5E100 + c));
    for (std::size_t i = 0; i < counts[c]; ++i) {
      LabeledExample e;
      e.label = t;
      const double za = rng.normal();
      const double z2 = rng.normal();
      const double z3 = prof.rho * z2 + std::sqrt(1.0 - prof.rho * prof.rho) * rng.normal();
      e.features.authors = std::max<std::int64_t>(
          1, static_cast<std::int64_t>(std::llround(std::exp(prof.authors.mu + prof.authors.sigma * za))));
      e.features.total_words = std::max<std::int64_t>(
          1, static_cast<std::int64_t>(std::llround(std::exp(prof.words.mu + prof.words.sigma * z2))));
      e.features.pages = std::max<std::int64_t>(
          1, static_cast<std::int64_t>(std::llround(std::exp(prof.pages.mu + prof.pages.sigma * z3))));
      e.features.words_per_page =
          static_cast<double>(e.features.total_words) / static_cast<double>(e.features.pages);
      if (t == DocType::Slides && opt.slides_missing_f1 > 0.0 && missing.uniform() < opt.slides_missing_f1)
        e.features.authors.reset();
      out.push_back(std::move(e));
    }
  }
  Rng shuffle(derive_seed(seed, 0x5E200));
  shuffle.shuffle(std::span<LabeledExample>(out));
  for (std::size_t i = 0; i < out.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "syn-%06zu", i);
    out[i].id = buf;
  }
  return out;
}

}  // namespace papertype
