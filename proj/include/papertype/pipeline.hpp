#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "papertype/core.hpp"
#include "papertype/engagement.hpp"
#include "papertype/eval.hpp"
#include "papertype/ingest.hpp"
#include "papertype/io.hpp"
#include "papertype/labeling.hpp"
#include "papertype/models.hpp"
#include "papertype/stats.hpp"
#include "papertype/synthetic.hpp"

namespace papertype {

inline constexpr std::string_view kVersion = "1.0.0";

// A failure inside one pipeline stage.
struct StageError : Error {
  StageError(std::string stage_name, const std::string& what)
      : Error("stage '" + stage_name + "': " + what), stage(std::move(stage_name)) {}
  std::string stage;
};

struct RunConfig {
  std::uint64_t seed = 42;
  // Input: raw records (labeled by rule), an already labeled feature file, or
  // neither, in which case a synthetic set of `synthetic_n` rows is used.
  std::optional<std::filesystem::path> records;
  std::optional<std::filesystem::path> labeled;
  std::optional<std::filesystem::path> log;
  std::optional<std::filesystem::path> predictions;
  std::size_t synthetic_n = 11500;
  double slides_missing_f1 = 0.0;
  ClassProportions proportions{0.55, 0.10, 0.35};
  std::optional<std::size_t> sample_size;  // balanced sample drawn before splitting
  std::size_t k = 10;
  double validation_fraction = 0.1;
  double quantile_lo = 0.025;
  double quantile_hi = 0.975;
  std::vector<ModelKind> kinds{kModelKinds.begin(), kModelKinds.end()};
  std::map<ModelKind, ParamGrid> grids;  // kinds without an entry use default_grid()
  std::vector<TransformKind> transforms = default_transforms();
  std::optional<ModelKind> deploy;  // empty: best mean weighted F1 across kinds
  std::filesystem::path out = "out";
  std::size_t threads = 0;  // 0: one per core; never affects results

  ParamGrid grid(ModelKind kind) const {
    auto it = grids.find(kind);
    return it == grids.end() ? default_grid(kind) : it->second;
  }
};

namespace detail {

inline json path_json(const std::optional<std::filesystem::path>& p) {
  return p ? json(p->generic_string()) : json(nullptr);
}

inline json proportions_json(const ClassProportions& p) {
  json j = json::object();
  for (auto t : kDocTypes) j[std::string(to_string(t))] = p[index_of(t)];
  return j;
}

inline ClassProportions proportions_from_json(const json& j) {
  if (!j.is_object()) throw ArgumentError("config: 'proportions' must be an object");
  ClassProportions p{};
  for (const auto& [key, value] : j.items()) {
    auto t = parse_doc_type(key);
    if (!t) throw ArgumentError("config: unknown class '" + key + "' in proportions");
    p[index_of(*t)] = value.get<double>();
  }
  return p;
}

inline std::optional<std::filesystem::path> optional_path(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return std::filesystem::path(j.at(key).get<std::string>());
}

}  // namespace detail

// Everything that determines the results. The output directory and thread
// count are left out so that reruns elsewhere hash the same.
inline json to_json(const RunConfig& c) {
  json kinds = json::array(), transforms = json::array(), grids = json::object();
  for (auto k : c.kinds) {
    kinds.push_back(std::string(to_string(k)));
    grids[std::string(to_string(k))] = c.grid(k);
  }
  for (auto t : c.transforms) transforms.push_back(std::string(to_string(t)));
  return json{{"seed", c.seed},
              {"records", detail::path_json(c.records)},
              {"labeled", detail::path_json(c.labeled)},
              {"log", detail::path_json(c.log)},
              {"predictions", detail::path_json(c.predictions)},
              {"synthetic_n", c.synthetic_n},
              {"slides_missing_f1", c.slides_missing_f1},
              {"proportions", detail::proportions_json(c.proportions)},
              {"sample_size", c.sample_size ? json(*c.sample_size) : json(nullptr)},
              {"k", c.k},
              {"validation_fraction", c.validation_fraction},
              {"quantiles", {c.quantile_lo, c.quantile_hi}},
              {"kinds", kinds},
              {"grids", grids},
              {"transforms", transforms},
              {"deploy", c.deploy ? json(std::string(to_string(*c.deploy))) : json(nullptr)}};
}

inline std::string config_hash(const RunConfig& c) { return hex64(fnv1a(to_json(c).dump())); }

// Throws ArgumentError on a malformed or inconsistent config. Relative paths
// resolve against `base`.
inline RunConfig config_from_json(const json& j, const std::filesystem::path& base = {}) {
  if (!j.is_object()) throw ArgumentError("config: expected a JSON object");
  static const std::set<std::string> known{
      "seed",   "records",     "labeled",   "log",   "predictions", "synthetic_n",         "slides_missing_f1",
      "proportions", "sample_size", "k", "validation_fraction", "quantiles", "kinds", "grids", "transforms",
      "deploy", "out", "threads"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw ArgumentError("config: unknown key '" + key + "'");
  RunConfig c;
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    auto resolve = [&](std::optional<std::filesystem::path> p) {
      if (p && p->is_relative() && !base.empty()) p = base / *p;
      return p;
    };
    c.records = resolve(detail::optional_path(j, "records"));
    c.labeled = resolve(detail::optional_path(j, "labeled"));
    c.log = resolve(detail::optional_path(j, "log"));
    c.predictions = resolve(detail::optional_path(j, "predictions"));
    if (j.contains("synthetic_n")) c.synthetic_n = j.at("synthetic_n").get<std::size_t>();
    if (j.contains("slides_missing_f1")) c.slides_missing_f1 = j.at("slides_missing_f1").get<double>();
    if (j.contains("proportions")) c.proportions = detail::proportions_from_json(j.at("proportions"));
    if (j.contains("sample_size") && !j.at("sample_size").is_null())
      c.sample_size = j.at("sample_size").get<std::size_t>();
    if (j.contains("k")) c.k = j.at("k").get<std::size_t>();
    if (j.contains("validation_fraction")) c.validation_fraction = j.at("validation_fraction").get<double>();
    if (j.contains("quantiles")) {
      const auto q = j.at("quantiles").get<std::vector<double>>();
      if (q.size() != 2) throw ArgumentError("config: 'quantiles' must be [lo, hi]");
      c.quantile_lo = q[0];
      c.quantile_hi = q[1];
    }
    if (j.contains("kinds")) {
      c.kinds.clear();
      for (const auto& k : j.at("kinds")) {
        auto kind = parse_model_kind(k.get<std::string>());
        if (!kind) throw ArgumentError("config: unknown model kind " + k.dump());
        c.kinds.push_back(*kind);
      }
    }
    if (j.contains("grids"))
      for (const auto& [name, grid] : j.at("grids").items()) {
        auto kind = parse_model_kind(name);
        if (!kind) throw ArgumentError("config: unknown model kind '" + name + "' in grids");
        c.grids[*kind] = grid.get<ParamGrid>();
      }
    if (j.contains("transforms")) {
      c.transforms.clear();
      for (const auto& t : j.at("transforms")) {
        auto kind = parse_transform_kind(t.get<std::string>());
        if (!kind) throw ArgumentError("config: unknown transform " + t.dump());
        c.transforms.push_back(*kind);
      }
    }
    if (j.contains("deploy") && !j.at("deploy").is_null()) {
      auto kind = parse_model_kind(j.at("deploy").get<std::string>());
      if (!kind) throw ArgumentError("config: unknown deploy kind " + j.at("deploy").dump());
      c.deploy = *kind;
    }
    if (j.contains("out")) {
      c.out = j.at("out").get<std::string>();
      if (c.out.is_relative() && !base.empty()) c.out = base / c.out;
    }
    if (j.contains("threads")) c.threads = j.at("threads").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config: ") + e.what());
  }
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ArgumentError("config " + path.string() + ": " + e.what());
  } catch (const IngestError& e) {
    throw ArgumentError(e.what());
  }
  return config_from_json(j, path.parent_path());
}

// Checks everything that can be checked before any work starts.
inline void check_config(const RunConfig& c) {
  check_proportions(c.proportions);
  if (c.records && c.labeled) throw ArgumentError("config: give either 'records' or 'labeled', not both");
  for (const auto* p : {&c.records, &c.labeled, &c.log, &c.predictions})
    if (*p && !std::filesystem::exists(**p)) throw ArgumentError("config: input not found: " + (*p)->string());
  if (c.k < 2) throw ArgumentError("config: k must be at least 2");
  if (!(c.validation_fraction >= 0.0 && c.validation_fraction < 1.0))
    throw ArgumentError("config: validation_fraction must lie in [0, 1)");
  if (!(0.0 <= c.quantile_lo && c.quantile_lo < c.quantile_hi && c.quantile_hi <= 1.0))
    throw ArgumentError("config: quantiles must satisfy 0 <= lo < hi <= 1");
  if (c.kinds.empty()) throw ArgumentError("config: no model kinds");
  if (c.transforms.empty()) throw ArgumentError("config: no transforms");
  if (c.deploy && std::find(c.kinds.begin(), c.kinds.end(), *c.deploy) == c.kinds.end())
    throw ArgumentError("config: deploy kind is not among 'kinds'");
  for (auto k : c.kinds) {
    const auto known = known_hyperparams(k);
    for (const auto& [name, values] : c.grid(k)) {
      if (!known.contains(name))
        throw ArgumentError("config: unknown hyperparameter '" + name + "' for " + std::string(to_string(k)));
      if (values.empty()) throw ArgumentError("config: empty value list for '" + name + "'");
    }
  }
  if (!c.records && !c.labeled && c.synthetic_n < 30) throw ArgumentError("config: synthetic_n must be at least 30");
}

// Sub-seeds of the run, one per randomized stage.
struct StageSeeds {
  std::uint64_t synth, sample, split, sweep, train;
};

inline StageSeeds stage_seeds(std::uint64_t seed) {
  return {derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 3), derive_seed(seed, 4),
          derive_seed(seed, 5)};
}

struct PipelineSummary {
  std::size_t n_examples = 0;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  ModelKind deployed = ModelKind::RandomForest;
  Hyperparams hyperparameters;
  TransformKind transform = TransformKind::Identity;
  double cv_weighted_f1 = 0.0;
  std::optional<double> validation_weighted_f1;
  std::vector<std::filesystem::path> files;
};

namespace detail {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

inline json stamped(json body, const std::string& content, const std::string& hash) {
  body["format_version"] = kFormatVersion;
  body["content"] = content;
  body["config_hash"] = hash;
  return body;
}

}  // namespace detail

// extract/synth -> label -> sample -> split -> impute -> thresholds -> sweep
// -> train -> evaluate. Outputs under config.out:
//   model.json, models/<kind>.json, thresholds.json, sweep/<kind>.json,
//   evaluation.json, evaluation.txt, engagement.json (when a log is given),
//   manifest.json.
// No timings or absolute paths are written, so a rerun of the same config
// reproduces every file byte for byte.
inline PipelineSummary run_pipeline(const RunConfig& config) {
  check_config(config);
  const auto hash = config_hash(config);
  const auto seeds = stage_seeds(config.seed);
  const auto& out = config.out;
  PipelineSummary summary;
  std::map<std::string, std::string> written;  // relative name -> content
  auto emit = [&](const std::string& name, std::string content) {
    write_file_atomic(out / name, content);
    summary.files.push_back(out / name);
    written[name] = std::move(content);
  };

  std::vector<LabeledExample> examples = detail::stage("load", [&] {
    std::vector<LabeledExample> ex;
    if (config.records) {
      std::ifstream in(*config.records);
      if (!in) throw IngestError("cannot open " + config.records->string());
      for (const auto& r : parse_records(in).items) ex.push_back({r.id, extract_features(r), rule_label(r)});
    } else if (config.labeled) {
      std::ifstream in(*config.labeled);
      if (!in) throw IngestError("cannot open " + config.labeled->string());
      ex = parse_labeled(in).items;
    } else {
      SyntheticOptions so;
      so.slides_missing_f1 = config.slides_missing_f1;
      ex = generate_synthetic(config.synthetic_n, config.proportions, seeds.synth, so);
    }
    if (ex.empty()) throw IngestError("no labeled examples");
    return ex;
  });

  if (config.sample_size)
    examples = detail::stage("sample", [&] {
      return balanced_sample(examples, *config.sample_size, config.proportions, seeds.sample);
    });
  summary.n_examples = examples.size();

  auto split = detail::stage(
      "split", [&] { return stratified_split(examples, config.k, config.validation_fraction, seeds.split); });
  summary.n_train = split.train.size();
  summary.n_validation = split.validation.size();

  // The sweep imputes inside each fold; the final model and thresholds use the
  // training part imputed by class, and validation rows use the pooled model.
  auto train_imputed = split.train;
  auto validation = split.validation;
  detail::stage("impute", [&] {
    const auto imp = F1Imputer::fit(train_imputed);
    imp.apply_labeled(train_imputed);
    imp.apply_unlabeled(validation);
  });

  const auto table = detail::stage(
      "thresholds", [&] { return derive_thresholds(train_imputed, config.quantile_lo, config.quantile_hi); });
  emit("thresholds.json", detail::stamped(to_json(table), "thresholds", hash).dump() + '\n');

  std::map<ModelKind, SweepResult> sweeps;
  detail::stage("sweep", [&] {
    for (auto kind : config.kinds) {
      const auto grid = expand_grid(config.grid(kind));
      auto result = sweep(kind, split.train, grid, config.transforms, config.k, seeds.sweep, FeatureSet::all(),
                          config.threads);
      emit("sweep/" + std::string(to_string(kind)) + ".json",
           detail::stamped(to_json(result), "sweep", hash).dump() + '\n');
      sweeps.emplace(kind, std::move(result));
    }
  });

  ModelKind deployed = config.deploy.value_or(config.kinds.front());
  if (!config.deploy) {
    double best = -1.0;
    for (auto kind : config.kinds) {
      const auto& s = sweeps.at(kind);
      const double f1 = s.entries[s.best].mean.weighted_f1;
      if (f1 > best) {
        best = f1;
        deployed = kind;
      }
    }
  }

  json eval_json = json::object();
  std::ostringstream eval_text;
  std::map<ModelKind, ModelArtifact> models;
  detail::stage("train", [&] {
    for (auto kind : config.kinds) {
      const auto& s = sweeps.at(kind);
      const auto& best = s.entries[s.best];
      auto model = train(kind, train_imputed,
                         TrainOptions{best.hyperparameters, best.transform, FeatureSet::all(), seeds.train});
      auto j = to_json(model);
      j["config_hash"] = hash;
      emit("models/" + std::string(to_string(kind)) + ".json", j.dump() + '\n');
      if (kind == deployed) emit("model.json", j.dump() + '\n');
      models.emplace(kind, std::move(model));
    }
  });

  detail::stage("evaluate", [&] {
    for (auto kind : config.kinds) {
      const auto& s = sweeps.at(kind);
      const auto& best = s.entries[s.best];
      CvOptions opt;
      opt.k = config.k;
      opt.train = TrainOptions{best.hyperparameters, best.transform, FeatureSet::all(), seeds.sweep};
      const auto cv = cross_validate(kind, split.train, opt);
      json entry{{"hyperparameters", best.hyperparameters.values()},
                 {"transform", std::string(to_string(best.transform))},
                 {"cv", to_json(cv.mean)},
                 {"test_folds", to_json(cv).at("folds")}};
      eval_text << "== " << to_string(kind) << (kind == deployed ? " (deployed)" : "") << "  ["
                << format_hyperparams(best.hyperparameters) << ", " << to_string(best.transform) << "]\n"
                << "-- cv mean over " << cv.folds.size() << " test folds\n"
                << format_human(cv.mean);
      if (!validation.empty()) {
        const auto preds = predict_all(models.at(kind), validation);
        std::vector<DocType> truths;
        for (const auto& e : validation) truths.push_back(e.label);
        const auto report = evaluate(preds, truths);
        entry["validation"] = to_json(report);
        eval_text << "-- validation\n" << format_human(report);
        if (kind == deployed) summary.validation_weighted_f1 = report.weighted_f1;
      } else {
        entry["validation"] = nullptr;
      }
      eval_text << '\n';
      if (kind == deployed) summary.cv_weighted_f1 = cv.mean.weighted_f1;
      eval_json[std::string(to_string(kind))] = entry;
    }
  });
  emit("evaluation.json",
       detail::stamped(json{{"deployed", std::string(to_string(deployed))}, {"models", eval_json}}, "evaluation", hash)
               .dump() +
           '\n');
  emit("evaluation.txt", "config " + hash + "\n\n" + eval_text.str());

  if (config.log)
    detail::stage("engagement", [&] {
      DocTypeIndex types;
      if (config.predictions) {
        std::ifstream pin(*config.predictions);
        if (!pin) throw IngestError("cannot open " + config.predictions->string());
        types = parse_predictions(pin);
      }
      std::ifstream lin(*config.log);
      if (!lin) throw IngestError("cannot open " + config.log->string());
      const auto parsed = parse_log(lin, config.predictions ? &types : nullptr);
      EngagementAccumulator acc;
      for (const auto& e : parsed.events) acc.add(e);
      acc.add_rejected(parsed.unresolved);
      emit("engagement.json", detail::stamped(to_json(make_report(acc)), "engagement", hash).dump() + '\n');
    });

  summary.deployed = deployed;
  const auto& best = sweeps.at(deployed).entries[sweeps.at(deployed).best];
  summary.hyperparameters = best.hyperparameters;
  summary.transform = best.transform;

  json files = json::object();
  for (const auto& [name, content] : written) files[name] = hex64(fnv1a(content));
  json manifest{{"version", std::string(kVersion)},
                {"config", to_json(config)},
                {"seeds",
                 {{"base", config.seed},
                  {"synth", seeds.synth},
                  {"sample", seeds.sample},
                  {"split", seeds.split},
                  {"sweep", seeds.sweep},
                  {"train", seeds.train}}},
                {"counts",
                 {{"examples", summary.n_examples},
                  {"train", summary.n_train},
                  {"validation", summary.n_validation}}},
                {"deployed", std::string(to_string(deployed))},
                {"files", files}};
  emit("manifest.json", detail::stamped(manifest, "manifest", hash).dump(2) + '\n');
  return summary;
}

}  // namespace papertype
