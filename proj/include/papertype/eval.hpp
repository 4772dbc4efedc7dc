#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "papertype/core.hpp"
#include "papertype/io.hpp"
#include "papertype/labeling.hpp"
#include "papertype/models.hpp"
#include "papertype/stats.hpp"

namespace papertype {

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

using ConfusionMatrix = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;  // [truth][predicted]

struct EvalReport {
  ClassScores precision{};
  ClassScores recall{};
  ClassScores f1{};
  ClassCounts support{};  // true examples per class
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  ConfusionMatrix confusion{};
  std::size_t n_examples = 0;
};

// Per-class metrics use 0 when a denominator is empty; weighted metrics
// average them by true-class support.
inline EvalReport report_from_confusion(const ConfusionMatrix& cm) {
  EvalReport r;
  r.confusion = cm;
  ClassCounts predicted{};
  for (std::size_t t = 0; t < kNumClasses; ++t)
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      r.support[t] += cm[t][p];
      predicted[p] += cm[t][p];
      r.n_examples += cm[t][p];
    }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double tp = static_cast<double>(cm[c][c]);
    r.precision[c] = predicted[c] ? tp / static_cast<double>(predicted[c]) : 0.0;
    r.recall[c] = r.support[c] ? tp / static_cast<double>(r.support[c]) : 0.0;
    const double s = r.precision[c] + r.recall[c];
    r.f1[c] = s > 0.0 ? 2.0 * r.precision[c] * r.recall[c] / s : 0.0;
  }
  if (r.n_examples > 0) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const double w = static_cast<double>(r.support[c]) / static_cast<double>(r.n_examples);
      r.weighted_precision += w * r.precision[c];
      r.weighted_recall += w * r.recall[c];
      r.weighted_f1 += w * r.f1[c];
    }
  }
  return r;
}

inline EvalReport evaluate(std::span<const DocType> predictions, std::span<const DocType> truths) {
  if (predictions.size() != truths.size())
    throw ArgumentError("evaluate: " + std::to_string(predictions.size()) + " predictions for " +
                        std::to_string(truths.size()) + " truths");
  if (truths.empty()) throw ArgumentError("evaluate: no examples");
  ConfusionMatrix cm{};
  for (std::size_t i = 0; i < truths.size(); ++i) ++cm[index_of(truths[i])][index_of(predictions[i])];
  return report_from_confusion(cm);
}

// Fold average: metrics are means over reports, confusion and counts are sums.
inline EvalReport mean_report(std::span<const EvalReport> reports) {
  if (reports.empty()) throw ArgumentError("mean_report: no reports");
  EvalReport m;
  const auto k = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      m.precision[c] += r.precision[c] / k;
      m.recall[c] += r.recall[c] / k;
      m.f1[c] += r.f1[c] / k;
      m.support[c] += r.support[c];
      for (std::size_t p = 0; p < kNumClasses; ++p) m.confusion[c][p] += r.confusion[c][p];
    }
    m.weighted_precision += r.weighted_precision / k;
    m.weighted_recall += r.weighted_recall / k;
    m.weighted_f1 += r.weighted_f1 / k;
    m.n_examples += r.n_examples;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

struct CvOptions {
  std::size_t k = 10;
  TrainOptions train;  // train.seed drives the split and per-fold model seeds
};

struct CvResult {
  std::vector<EvalReport> folds;
  EvalReport mean;
};

namespace detail {
inline constexpr std::uint64_t kSplitStream = 0x5B117;
}

// Stratified k-fold CV. For each fold, imputation and the feature transform
// are fitted on the other k-1 folds only; held-out rows with missing F1 are
// filled from the pooled (label-free) regression.
inline CvResult cross_validate(ModelKind kind, std::span<const LabeledExample> examples, const CvOptions& opt) {
  const auto seed = opt.train.seed;
  const auto split = stratified_split_indices(examples, opt.k, 0.0, derive_seed(seed, detail::kSplitStream));
  const bool needs_f1 = opt.train.features.contains(FeatureId::Authors);
  CvResult out;
  for (std::size_t f = 0; f < opt.k; ++f) {
    std::vector<LabeledExample> train_set, test_set;
    for (std::size_t g = 0; g < opt.k; ++g)
      for (auto i : split.folds[g]) (g == f ? test_set : train_set).push_back(examples[i]);
    if (test_set.empty()) continue;
    if (needs_f1) {
      const auto imp = F1Imputer::fit(train_set);
      imp.apply_labeled(train_set);
      imp.apply_unlabeled(test_set);
    }
    auto topt = opt.train;
    topt.seed = derive_seed(seed, f + 1);
    const auto model = train(kind, train_set, topt);
    const auto preds = predict_all(model, test_set);
    std::vector<DocType> truths;
    truths.reserve(test_set.size());
    for (const auto& e : test_set) truths.push_back(e.label);
    out.folds.push_back(evaluate(preds, truths));
  }
  out.mean = mean_report(out.folds);
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

using ParamGrid = std::map<std::string, std::vector<double>>;

// Cartesian product in key order, last key varying fastest.
inline std::vector<Hyperparams> expand_grid(const ParamGrid& grid) {
  std::vector<Hyperparams> out{Hyperparams{}};
  for (const auto& [name, values] : grid) {
    if (values.empty()) throw ArgumentError("sweep grid: no values for '" + name + "'");
    std::vector<Hyperparams> next;
    for (const auto& h : out)
      for (double v : values) {
        auto copy = h;
        copy.set(name, v);
        next.push_back(std::move(copy));
      }
    out = std::move(next);
  }
  return out;
}

inline ParamGrid default_grid(ModelKind kind) {
  switch (kind) {
    case ModelKind::RandomForest: return {{"trees", {5, 10, 20}}, {"max_depth", {2, 3, 4}}};
    case ModelKind::Knn: return {{"k", {1, 3, 5, 7}}};
    case ModelKind::AdaBoost: return {{"rounds", {10, 25, 50}}, {"max_depth", {1, 2}}};
    case ModelKind::LinearSvm: return {{"epochs", {50, 200}}, {"step", {1e-2, 1e-3}}};
    case ModelKind::DecisionTree: return {{"max_depth", {3, 5, 8}}};
    default: return {};
  }
}

inline std::vector<TransformKind> default_transforms() {
  return {TransformKind::Identity, TransformKind::ZScore, TransformKind::LogScale};
}

// Size used to break ties between equally scoring grid points.
inline double model_size(ModelKind kind, const Hyperparams& hp) {
  switch (kind) {
    case ModelKind::RandomForest: return hp.get("trees", 10);
    case ModelKind::Knn: return hp.get("k", 5);
    case ModelKind::AdaBoost: return hp.get("rounds", 50);
    case ModelKind::LinearSvm: return hp.get("epochs", 100);
    case ModelKind::DecisionTree: return hp.get("max_depth", 8);
    default: return 0.0;
  }
}

struct SweepEntry {
  Hyperparams hyperparameters;
  TransformKind transform = TransformKind::Identity;
  EvalReport mean;
};

struct SweepResult {
  ModelKind kind = ModelKind::RandomForest;
  std::vector<SweepEntry> entries;
  std::size_t best = 0;
};

// Index of the entry with the highest mean weighted F1; ties go to the
// smaller model, then to the earlier entry.
inline std::size_t best_entry(ModelKind kind, std::span<const SweepEntry> entries) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const double f = entries[i].mean.weighted_f1, fb = entries[best].mean.weighted_f1;
    if (f > fb || (f == fb && model_size(kind, entries[i].hyperparameters) <
                                  model_size(kind, entries[best].hyperparameters)))
      best = i;
  }
  return best;
}

// Every grid point under every transform, all on the same folds. Entries are
// independent, so they are spread over `threads` workers (0: one per core);
// the result does not depend on the thread count.
inline SweepResult sweep(ModelKind kind, std::span<const LabeledExample> examples, std::span<const Hyperparams> grid,
                         std::vector<TransformKind> transforms, std::size_t k, std::uint64_t seed,
                         const FeatureSet& features = FeatureSet::all(), std::size_t threads = 1) {
  if (grid.empty()) throw ArgumentError("sweep: empty grid");
  if (transforms.empty()) throw ArgumentError("sweep: no transforms");
  if (detail::is_baseline(kind)) transforms = {TransformKind::Identity};
  SweepResult result;
  result.kind = kind;
  for (const auto& hp : grid)
    for (auto t : transforms) result.entries.push_back({hp, t, {}});

  std::vector<std::exception_ptr> errors(result.entries.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < result.entries.size();) {
      auto& e = result.entries[i];
      try {
        CvOptions opt;
        opt.k = k;
        opt.train = TrainOptions{e.hyperparameters, e.transform, features, seed};
        e.mean = cross_validate(kind, examples, opt).mean;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, result.entries.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  result.best = best_entry(kind, result.entries);
  return result;
}

// ---------------------------------------------------------------------------
// Feature ablation
// ---------------------------------------------------------------------------

struct AblationCell {
  ModelKind kind;
  FeatureSet features;
  double weighted_f1;
};

struct AblationResult {
  std::vector<AblationCell> cells;

  double at(ModelKind kind, const FeatureSet& features) const {
    for (const auto& c : cells)
      if (c.kind == kind && c.features == features) return c.weighted_f1;
    throw ArgumentError("ablation: no cell for " + std::string(to_string(kind)) + "/" + features.label());
  }
};

inline std::vector<FeatureSet> ablation_subsets() {
  std::vector<FeatureSet> out;
  for (auto f : kFeatureIds) out.push_back(FeatureSet::only(f));
  out.push_back(FeatureSet::all());
  return out;
}

// Mean CV weighted F1 for each kind on each single feature and on all four.
inline AblationResult ablation(std::span<const LabeledExample> examples, std::span<const ModelKind> kinds,
                               std::size_t k, std::uint64_t seed,
                               const std::map<ModelKind, Hyperparams>& hyperparams = {},
                               TransformKind transform = TransformKind::Identity) {
  AblationResult out;
  for (auto kind : kinds) {
    const auto it = hyperparams.find(kind);
    const Hyperparams hp = it == hyperparams.end() ? Hyperparams{} : it->second;
    for (const auto& fs : ablation_subsets()) {
      CvOptions opt;
      opt.k = k;
      opt.train = TrainOptions{hp, transform, fs, seed};
      out.cells.push_back({kind, fs, cross_validate(kind, examples, opt).mean.weighted_f1});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report output
// ---------------------------------------------------------------------------

inline json to_json(const EvalReport& r) {
  json per_class = json::object();
  for (auto t : kDocTypes) {
    const auto c = index_of(t);
    per_class[std::string(to_string(t))] = {
        {"precision", r.precision[c]}, {"recall", r.recall[c]}, {"f1", r.f1[c]}, {"support", r.support[c]}};
  }
  return json{{"per_class", per_class},
              {"weighted", {{"precision", r.weighted_precision}, {"recall", r.weighted_recall}, {"f1", r.weighted_f1}}},
              {"confusion", r.confusion},
              {"n_examples", r.n_examples}};
}

inline json to_json(const CvResult& r) {
  json folds = json::array();
  for (const auto& f : r.folds) folds.push_back(to_json(f));
  return json{{"mean", to_json(r.mean)}, {"folds", folds}};
}

inline json to_json(const SweepResult& s) {
  json entries = json::array();
  for (const auto& e : s.entries)
    entries.push_back({{"hyperparameters", e.hyperparameters.values()},
                       {"transform", std::string(to_string(e.transform))},
                       {"mean", to_json(e.mean)}});
  return json{{"kind", std::string(to_string(s.kind))}, {"entries", entries}, {"best", s.best}};
}

inline json to_json(const AblationResult& a) {
  json cells = json::array();
  for (const auto& c : a.cells)
    cells.push_back({{"kind", std::string(to_string(c.kind))}, {"features", c.features.label()},
                     {"weighted_f1", c.weighted_f1}});
  return json{{"cells", cells}};
}

inline std::string format_human(const EvalReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << std::left << std::setw(10) << "class" << std::right << std::setw(11) << "precision" << std::setw(10)
     << "recall" << std::setw(10) << "f1" << std::setw(10) << "support" << '\n';
  for (auto t : kDocTypes) {
    const auto c = index_of(t);
    os << std::left << std::setw(10) << to_string(t) << std::right << std::setw(11) << r.precision[c]
       << std::setw(10) << r.recall[c] << std::setw(10) << r.f1[c] << std::setw(10) << r.support[c] << '\n';
  }
  os << std::left << std::setw(10) << "weighted" << std::right << std::setw(11) << r.weighted_precision
     << std::setw(10) << r.weighted_recall << std::setw(10) << r.weighted_f1 << std::setw(10) << r.n_examples
     << '\n';
  os << "\nconfusion (rows: truth, columns: predicted)\n" << std::setw(10) << "";
  for (auto t : kDocTypes) os << std::setw(10) << to_string(t);
  os << '\n';
  for (auto t : kDocTypes) {
    os << std::left << std::setw(10) << to_string(t) << std::right;
    for (auto p : kDocTypes) os << std::setw(10) << r.confusion[index_of(t)][index_of(p)];
    os << '\n';
  }
  return os.str();
}

inline std::string format_hyperparams(const Hyperparams& hp) {
  if (hp.empty()) return "-";
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : hp.values()) {
    os << (first ? "" : ",") << k << '=' << v;
    first = false;
  }
  return os.str();
}

inline std::string format_human(const SweepResult& s) {
  std::ostringstream os;
  os << "sweep: " << to_string(s.kind) << " (" << s.entries.size() << " entries)\n";
  os << std::left << std::setw(4) << "" << std::setw(36) << "hyperparameters" << std::setw(12) << "transform"
     << std::right << std::setw(10) << "w-prec" << std::setw(10) << "w-rec" << std::setw(10) << "w-f1" << '\n';
  os << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    const auto& e = s.entries[i];
    os << std::left << std::setw(4) << (i == s.best ? "*" : "") << std::setw(36) << format_hyperparams(e.hyperparameters)
       << std::setw(12) << to_string(e.transform) << std::right << std::setw(10) << e.mean.weighted_precision
       << std::setw(10) << e.mean.weighted_recall << std::setw(10) << e.mean.weighted_f1 << '\n';
  }
  return os.str();
}

inline std::string format_human(const AblationResult& a) {
  std::ostringstream os;
  std::vector<ModelKind> kinds;
  for (const auto& c : a.cells)
    if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) kinds.push_back(c.kind);
  os << std::left << std::setw(10) << "features";
  for (auto k : kinds) os << std::right << std::setw(20) << to_string(k);
  os << '\n' << std::fixed << std::setprecision(4);
  for (const auto& fs : ablation_subsets()) {
    os << std::left << std::setw(10) << fs.label();
    for (auto k : kinds) os << std::right << std::setw(20) << a.at(k, fs);
    os << '\n';
  }
  return os.str();
}

}  // namespace papertype
