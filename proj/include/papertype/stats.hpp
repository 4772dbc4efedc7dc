#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "papertype/core.hpp"
#include "papertype/io.hpp"
#include "papertype/matrix.hpp"

namespace papertype {

// ---------------------------------------------------------------------------
// Quantiles and Tukey fences
// ---------------------------------------------------------------------------

// Quantile of an already sorted sample, interpolating linearly between the
// order statistics at ranks floor(h) and floor(h)+1, h = (n-1) q.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ArgumentError("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("quantile: q must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(std::span<const double> values, double q) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, q);
}

struct Fences {
  double lower;
  double upper;
};

inline Fences tukey_fences(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = quantile_sorted(sorted, 0.25);
  const double q3 = quantile_sorted(sorted, 0.75);
  const double iqr = q3 - q1;
  return {q1 - 1.5 * iqr, q3 + 1.5 * iqr};
}

// Keeps the values inside [Q1 - 1.5 IQR, Q3 + 1.5 IQR], in input order.
inline std::vector<double> tukey_filter(std::span<const double> values) {
  const auto f = tukey_fences(values);
  std::vector<double> kept;
  kept.reserve(values.size());
  for (double v : values)
    if (v >= f.lower && v <= f.upper) kept.push_back(v);
  return kept;
}

// ---------------------------------------------------------------------------
// Threshold table
// ---------------------------------------------------------------------------

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double x) const noexcept { return x >= lower && x <= upper; }
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

// Per-class, per-feature acceptance intervals for the threshold baseline.
struct ThresholdTable {
  std::array<std::array<Bounds, kNumFeatures>, kNumClasses> bounds{};
  double quantile_lo = 0.025;
  double quantile_hi = 0.975;

  const Bounds& at(DocType t, FeatureId f) const noexcept { return bounds[index_of(t)][index_of(f)]; }
  Bounds& at(DocType t, FeatureId f) noexcept { return bounds[index_of(t)][index_of(f)]; }

  friend bool operator==(const ThresholdTable&, const ThresholdTable&) = default;
};

inline json to_json(const ThresholdTable& table) {
  json bounds = json::object();
  for (auto t : kDocTypes) {
    json row = json::object();
    for (auto f : kFeatureIds) {
      const auto& b = table.at(t, f);
      row[std::string(to_string(f))] = json::array({b.lower, b.upper});
    }
    bounds[std::string(to_string(t))] = std::move(row);
  }
  return json{{"format_version", kFormatVersion},
              {"quantile_lo", table.quantile_lo},
              {"quantile_hi", table.quantile_hi},
              {"bounds", std::move(bounds)}};
}

inline ThresholdTable threshold_table_from_json(const json& j) {
  try {
    if (!j.contains("format_version")) throw ModelFormatError("threshold table: missing format_version");
    if (j.at("format_version").get<int>() != kFormatVersion)
      throw UnsupportedVersionError("threshold table: unsupported format_version " +
                                    j.at("format_version").dump());
    ThresholdTable table;
    table.quantile_lo = j.at("quantile_lo").get<double>();
    table.quantile_hi = j.at("quantile_hi").get<double>();
    const auto& bounds = j.at("bounds");
    for (auto t : kDocTypes) {
      const auto& row = bounds.at(std::string(to_string(t)));
      for (auto f : kFeatureIds) {
        const auto& cell = row.at(std::string(to_string(f)));
        if (!cell.is_array() || cell.size() != 2)
          throw ModelFormatError("threshold table: cell " + std::string(to_string(t)) + "/" +
                                 std::string(to_string(f)) + " is not a [lower, upper] pair");
        Bounds b{cell[0].get<double>(), cell[1].get<double>()};
        if (!(b.lower <= b.upper))
          throw ModelFormatError("threshold table: lower > upper in " + std::string(to_string(t)) + "/" +
                                 std::string(to_string(f)));
        table.at(t, f) = b;
      }
    }
    return table;
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("threshold table: ") + e.what());
  }
}

// For every (class, feature) cell: Tukey-filter the class sample, then take
// the q_lo and q_hi quantiles of what remains. Missing F1 values are ignored.
inline ThresholdTable derive_thresholds(std::span<const LabeledExample> examples, double q_lo = 0.025,
                                        double q_hi = 0.975) {
  if (!(q_lo >= 0.0 && q_lo <= q_hi && q_hi <= 1.0))
    throw ArgumentError("derive_thresholds: need 0 <= q_lo <= q_hi <= 1");
  ThresholdTable table;
  table.quantile_lo = q_lo;
  table.quantile_hi = q_hi;
  for (auto t : kDocTypes) {
    for (auto f : kFeatureIds) {
      std::vector<double> values;
      for (const auto& e : examples)
        if (e.label == t)
          if (auto v = e.features.get(f)) values.push_back(*v);
      if (values.size() < 2)
        throw ArgumentError("derive_thresholds: cell " + std::string(to_string(t)) + "/" +
                            std::string(to_string(f)) + " has " + std::to_string(values.size()) +
                            " usable values, need at least 2");
      auto kept = tukey_filter(values);
      std::sort(kept.begin(), kept.end());
      table.at(t, f) = {quantile_sorted(kept, q_lo), quantile_sorted(kept, q_hi)};
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Feature transforms
// ---------------------------------------------------------------------------

enum class TransformKind { Identity, ZScore, LogScale };

constexpr std::string_view to_string(TransformKind k) noexcept {
  switch (k) {
    case TransformKind::Identity: return "identity";
    case TransformKind::ZScore: return "z-score";
    case TransformKind::LogScale: return "log-scale";
  }
  return "?";
}

inline std::optional<TransformKind> parse_transform_kind(std::string_view s) {
  for (auto k : {TransformKind::Identity, TransformKind::ZScore, TransformKind::LogScale})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

// Per-column x -> (x - shift) / scale for z-score, ln(1 + x) for log-scale.
struct TransformSpec {
  TransformKind kind = TransformKind::Identity;
  std::vector<double> shift;
  std::vector<double> scale;

  void apply(std::span<double> row) const {
    switch (kind) {
      case TransformKind::Identity: return;
      case TransformKind::ZScore:
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - shift[j]) / scale[j];
        return;
      case TransformKind::LogScale:
        for (auto& v : row) {
          if (v < 0.0) throw ArgumentError("log-scale transform of a negative value");
          v = std::log1p(v);
        }
        return;
    }
  }

  void apply(Matrix& m) const {
    for (std::size_t i = 0; i < m.rows(); ++i) apply(m.row(i));
  }

  friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

// Columns with zero spread keep shift 0 and scale 1, i.e. pass through.
inline TransformSpec fit_transform_spec(const Matrix& x, TransformKind kind) {
  if (x.rows() == 0) throw ArgumentError("fit_transform: empty dataset");
  TransformSpec spec;
  spec.kind = kind;
  if (kind != TransformKind::ZScore) return spec;
  spec.shift.assign(x.cols, 0.0);
  spec.scale.assign(x.cols, 1.0);
  const auto n = static_cast<double>(x.rows());
  for (std::size_t j = 0; j < x.cols; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
    const double sd = std::sqrt(var / n);
    if (sd > 0.0 && std::isfinite(sd)) {
      spec.shift[j] = mean;
      spec.scale[j] = sd;
    }
  }
  return spec;
}

// Fits on `x` and returns the spec together with the transformed copy.
inline std::pair<TransformSpec, Matrix> fit_transform(const Matrix& x, TransformKind kind) {
  auto spec = fit_transform_spec(x, kind);
  Matrix out = x;
  spec.apply(out);
  return {std::move(spec), std::move(out)};
}

inline json to_json(const TransformSpec& t) {
  json j{{"kind", std::string(to_string(t.kind))}};
  if (t.kind == TransformKind::ZScore) {
    j["shift"] = t.shift;
    j["scale"] = t.scale;
  }
  return j;
}

inline TransformSpec transform_from_json(const json& j, std::size_t dims) {
  TransformSpec t;
  auto kind = parse_transform_kind(j.at("kind").get<std::string>());
  if (!kind) throw ModelFormatError("unknown transform kind " + j.at("kind").dump());
  t.kind = *kind;
  if (t.kind == TransformKind::ZScore) {
    t.shift = j.at("shift").get<std::vector<double>>();
    t.scale = j.at("scale").get<std::vector<double>>();
    if (t.shift.size() != dims || t.scale.size() != dims)
      throw ModelFormatError("z-score transform does not match the feature count");
    for (double s : t.scale)
      if (!(s > 0.0) || !std::isfinite(s)) throw ModelFormatError("z-score scale must be positive");
  }
  return t;
}

// ---------------------------------------------------------------------------
// Missing-author imputation
// ---------------------------------------------------------------------------

// One least-squares regression of F1 on (F2, F3, F4) per class, plus a pooled
// regression over all classes for rows whose label must not be consulted.
// Predictors are standardized and constant ones dropped; rank-deficient
// systems take the minimum-norm solution. Predictions are rounded and clamped
// to the observed [min, max] of the fitting group.
class F1Imputer {
 public:
  static F1Imputer fit(std::span<const LabeledExample> examples) {
    F1Imputer imp;
    std::array<std::vector<const FeatureVector*>, kNumClasses> groups;
    std::vector<const FeatureVector*> all;
    for (const auto& e : examples) {
      if (!e.features.authors) continue;
      groups[index_of(e.label)].push_back(&e.features);
      all.push_back(&e.features);
    }
    for (std::size_t c = 0; c < kNumClasses; ++c)
      if (!groups[c].empty()) imp.per_class_[c] = fit_group(groups[c]);
    if (!all.empty()) imp.pooled_ = fit_group(all);
    return imp;
  }

  bool has_class_model(DocType t) const noexcept { return per_class_[index_of(t)].has_value(); }

  std::int64_t predict(const FeatureVector& fv, DocType t) const {
    const auto& g = per_class_[index_of(t)];
    if (!g)
      throw ArgumentError("impute_f1: class " + std::string(to_string(t)) + " has no observed f1 values");
    return g->predict(fv);
  }

  std::int64_t predict_pooled(const FeatureVector& fv) const {
    if (!pooled_) throw ArgumentError("impute_f1: no observed f1 values");
    return pooled_->predict(fv);
  }

  // Fills missing F1 using each example's class model.
  void apply_labeled(std::span<LabeledExample> examples) const {
    for (auto& e : examples)
      if (!e.features.authors) e.features.authors = predict(e.features, e.label);
  }

  // Fills missing F1 using the pooled model only.
  void apply_unlabeled(std::span<LabeledExample> examples) const {
    for (auto& e : examples)
      if (!e.features.authors) e.features.authors = predict_pooled(e.features);
  }

 private:
  static constexpr std::size_t kPredictors = 3;

  struct Group {
    double y_mean = 0.0;
    std::array<double, kPredictors> x_mean{};
    std::array<double, kPredictors> x_scale{};
    std::array<double, kPredictors> coef{};  // zero for dropped predictors
    std::int64_t lo = 0;
    std::int64_t hi = 0;

    std::int64_t predict(const FeatureVector& fv) const {
      const auto x = predictors(fv);
      double y = y_mean;
      for (std::size_t j = 0; j < kPredictors; ++j)
        if (coef[j] != 0.0) y += coef[j] * (x[j] - x_mean[j]) / x_scale[j];
      if (!std::isfinite(y)) y = y_mean;
      const auto r = static_cast<std::int64_t>(std::llround(y));
      return std::clamp(r, lo, hi);
    }
  };

  static std::array<double, kPredictors> predictors(const FeatureVector& fv) {
    return {static_cast<double>(fv.total_words), static_cast<double>(fv.pages), fv.words_per_page};
  }

  static Group fit_group(const std::vector<const FeatureVector*>& rows) {
    Group g;
    const auto n = static_cast<double>(rows.size());
    g.lo = g.hi = *rows.front()->authors;
    for (const auto* fv : rows) {
      g.y_mean += static_cast<double>(*fv->authors);
      g.lo = std::min(g.lo, *fv->authors);
      g.hi = std::max(g.hi, *fv->authors);
      const auto x = predictors(*fv);
      for (std::size_t j = 0; j < kPredictors; ++j) g.x_mean[j] += x[j];
    }
    g.y_mean /= n;
    for (auto& m : g.x_mean) m /= n;
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < kPredictors; ++j) {
      double var = 0.0;
      for (const auto* fv : rows) {
        const double d = predictors(*fv)[j] - g.x_mean[j];
        var += d * d;
      }
      g.x_scale[j] = std::sqrt(var / n);
      if (g.x_scale[j] > 0.0) active.push_back(j);
    }
    if (active.empty() || rows.size() < 2) return g;

    Eigen::MatrixXd a(rows.size(), active.size());
    Eigen::VectorXd b(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto x = predictors(*rows[i]);
      for (std::size_t k = 0; k < active.size(); ++k) {
        const auto j = active[k];
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = (x[j] - g.x_mean[j]) / g.x_scale[j];
      }
      b(static_cast<Eigen::Index>(i)) = static_cast<double>(*rows[i]->authors) - g.y_mean;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    const Eigen::VectorXd beta = cod.solve(b);
    for (std::size_t k = 0; k < active.size(); ++k) {
      const double c = beta(static_cast<Eigen::Index>(k));
      g.coef[active[k]] = std::isfinite(c) ? c : 0.0;
    }
    return g;
  }

  std::array<std::optional<Group>, kNumClasses> per_class_;
  std::optional<Group> pooled_;
};

// Fills every missing F1 from its class's regression; observed values are
// untouched. The fit is deterministic, so `seed` only exists to keep the
// signature uniform with the other seeded dataset operations.
inline std::vector<LabeledExample> impute_f1(std::span<const LabeledExample> examples,
                                             [[maybe_unused]] std::uint64_t seed = 0) {
  std::vector<LabeledExample> out(examples.begin(), examples.end());
  const auto imp = F1Imputer::fit(out);
  for (auto t : kDocTypes) {
    bool needs = false;
    for (const auto& e : out) needs = needs || (e.label == t && !e.features.authors);
    if (needs && !imp.has_class_model(t))
      throw ArgumentError("impute_f1: class " + std::string(to_string(t)) +
                          " has missing f1 values but none observed");
  }
  imp.apply_labeled(out);
  return out;
}

}  // namespace papertype
