// papertype: command-line front end for document-type classification of
// repository content and engagement reporting.
//
// Exit status: 0 success, 1 usage or config error, 2 data error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "papertype/pipeline.hpp"

namespace fs = std::filesystem;
using namespace papertype;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "machine";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Run config (JSON) supplying defaults")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "Seed for every random choice");
  sub->add_option("--out", c.out, "Output path (default: stdout)");
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"machine", "human"}));
}

RunConfig base_config(const Common& c) {
  RunConfig rc = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (c.seed) rc.seed = *c.seed;
  return rc;
}

bool human(const Common& c) { return c.format == "human"; }

// Settings that produced an output, fingerprinted into its header.
std::string settings_hash(const std::string& command, const json& settings) {
  return hex64(fnv1a(json{{"command", command}, {"settings", settings}}.dump()));
}

void emit(const std::string& out, const std::string& content) {
  if (out.empty() || out == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    write_file_atomic(out, content);
  }
}

std::string stamped_json(json body, const std::string& content, const std::string& hash) {
  body["format_version"] = kFormatVersion;
  body["content"] = content;
  body["config_hash"] = hash;
  return body.dump(2) + '\n';
}

template <typename Rows>
std::string jsonl(const Rows& rows, const std::string& content, const std::string& hash) {
  std::ostringstream os;
  const auto header = format_header(content, hash);
  write_jsonl(os, rows, &header);
  return os.str();
}

// Opens `path` ("-" for stdin) and hands the stream to `fn`.
template <typename Fn>
auto with_input(const std::string& path, Fn&& fn) {
  if (path == "-") return fn(std::cin);
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path + "' for reading");
  return fn(in);
}

void report_skips(const ParseReport& r, const std::string& what) {
  if (r.skipped == 0) return;
  std::cerr << "warning: skipped " << r.skipped << ' ' << what << '\n';
  for (std::size_t i = 0; i < r.diagnostics.size() && i < 10; ++i) std::cerr << "  " << r.diagnostics[i] << '\n';
  if (r.diagnostics.size() > 10) std::cerr << "  ...\n";
}

std::vector<LabeledExample> read_labeled(const std::string& path) {
  auto parsed = with_input(path, [](std::istream& in) { return parse_labeled(in); });
  report_skips(parsed.report, "rows");
  return std::move(parsed.items);
}

ClassProportions parse_proportions(const std::string& text) {
  ClassProportions p{};
  std::stringstream ss(text);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= kNumClasses) throw ArgumentError("--proportions takes three values (Research,Slides,Thesis)");
    try {
      p[i++] = std::stod(item);
    } catch (const std::exception&) {
      throw ArgumentError("--proportions: '" + item + "' is not a number");
    }
  }
  if (i != kNumClasses) throw ArgumentError("--proportions takes three values (Research,Slides,Thesis)");
  check_proportions(p);
  return p;
}

FeatureSet parse_features(const std::string& text) {
  if (text.empty() || text == "all") return FeatureSet::all();
  std::vector<FeatureId> ids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto id = parse_feature_id(item);
    if (!id) throw ArgumentError("unknown feature '" + item + "'");
    ids.push_back(*id);
  }
  return FeatureSet(std::move(ids));
}

ModelKind parse_kind(const std::string& text) {
  auto k = parse_model_kind(text);
  if (!k) throw ArgumentError("unknown model kind '" + text + "'");
  return *k;
}

TransformKind parse_transform(const std::string& text) {
  auto t = parse_transform_kind(text);
  if (!t) throw ArgumentError("unknown transform '" + text + "'");
  return *t;
}

// name=value
Hyperparams parse_params(const std::vector<std::string>& items) {
  Hyperparams hp;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ArgumentError("--param expects name=value, got '" + item + "'");
    try {
      hp.set(item.substr(0, eq), std::stod(item.substr(eq + 1)));
    } catch (const std::invalid_argument&) {
      throw ArgumentError("--param '" + item + "': value is not a number");
    }
  }
  return hp;
}

// name=v1,v2,...
ParamGrid parse_grid(const std::vector<std::string>& items) {
  ParamGrid grid;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ArgumentError("--grid expects name=v1,v2,..., got '" + item + "'");
    std::stringstream ss(item.substr(eq + 1));
    std::string v;
    auto& values = grid[item.substr(0, eq)];
    while (std::getline(ss, v, ',')) {
      try {
        values.push_back(std::stod(v));
      } catch (const std::invalid_argument&) {
        throw ArgumentError("--grid '" + item + "': '" + v + "' is not a number");
      }
    }
  }
  return grid;
}

ModelArtifact read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open model '" + path + "'");
  return load_model(in);
}

std::vector<DocType> truths_of(const std::vector<LabeledExample>& examples) {
  std::vector<DocType> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.label);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Document-type classification for repository content"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // extract / label
  Common c_extract, c_label;
  std::string extract_in, label_in;
  auto* extract = app.add_subcommand("extract", "Records to feature rows");
  extract->add_option("input", extract_in, "Record file (JSON lines, '-' for stdin)")->required();
  add_common(extract, c_extract);
  auto* label = app.add_subcommand("label", "Records to rule-labeled feature rows");
  label->add_option("input", label_in, "Record file (JSON lines, '-' for stdin)")->required();
  add_common(label, c_label);

  // samplesize
  Common c_ss;
  double ss_z = 1.96, ss_p = 0.5, ss_c = 0.01;
  auto* samplesize = app.add_subcommand("samplesize", "Sample size for a proportion estimate");
  samplesize->add_option("--z", ss_z, "Standard score")->capture_default_str();
  samplesize->add_option("--p", ss_p, "Expected proportion")->capture_default_str();
  samplesize->add_option("--c", ss_c, "Margin of error")->capture_default_str();
  add_common(samplesize, c_ss);

  // sample
  Common c_sample;
  std::string sample_in, sample_props;
  std::size_t sample_total = 0;
  auto* sample = app.add_subcommand("sample", "Class-balanced sample of a labeled set");
  sample->add_option("input", sample_in, "Labeled feature rows")->required();
  sample->add_option("--total", sample_total, "Sample size")->required();
  sample->add_option("--proportions", sample_props, "Research,Slides,Thesis (default from config)");
  add_common(sample, c_sample);

  // split
  Common c_split;
  std::string split_in;
  std::optional<std::size_t> split_k;
  std::optional<double> split_val;
  auto* split = app.add_subcommand("split", "Stratified folds plus validation hold-out");
  split->add_option("input", split_in, "Labeled feature rows")->required();
  split->add_option("--k", split_k, "Number of folds");
  split->add_option("--validation", split_val, "Validation fraction");
  add_common(split, c_split);

  // impute
  Common c_impute;
  std::string impute_in;
  auto* impute = app.add_subcommand("impute", "Fill missing author counts by per-class regression");
  impute->add_option("input", impute_in, "Labeled feature rows")->required();
  add_common(impute, c_impute);

  // thresholds
  Common c_thr;
  std::string thr_in;
  std::optional<double> thr_lo, thr_hi;
  auto* thresholds = app.add_subcommand("thresholds", "Per-class feature bounds after outlier removal");
  thresholds->add_option("input", thr_in, "Labeled feature rows (author counts complete)")->required();
  thresholds->add_option("--q-lo", thr_lo, "Lower quantile");
  thresholds->add_option("--q-hi", thr_hi, "Upper quantile");
  add_common(thresholds, c_thr);

  // train
  Common c_train;
  std::string train_in, train_kind, train_transform = "identity", train_features = "all";
  std::vector<std::string> train_params;
  bool train_impute = false;
  auto* trn = app.add_subcommand("train", "Fit one model");
  trn->add_option("input", train_in, "Labeled feature rows")->required();
  trn->add_option("--kind", train_kind, "Model kind")->required();
  trn->add_option("--param", train_params, "Hyperparameter name=value (repeatable)");
  trn->add_option("--transform", train_transform, "identity | z-score | log-scale")->capture_default_str();
  trn->add_option("--features", train_features, "Comma-separated f1..f4 or 'all'")->capture_default_str();
  trn->add_flag("--impute", train_impute, "Impute missing author counts first");
  add_common(trn, c_train);

  // sweep
  Common c_sweep;
  std::string sweep_in, sweep_kind, sweep_features = "all";
  std::vector<std::string> sweep_grid, sweep_transforms;
  std::optional<std::size_t> sweep_k;
  std::size_t sweep_threads = 0;
  auto* swp = app.add_subcommand("sweep", "Cross-validated hyperparameter and transform sweep");
  swp->add_option("input", sweep_in, "Labeled feature rows")->required();
  swp->add_option("--kind", sweep_kind, "Model kind")->required();
  swp->add_option("--grid", sweep_grid, "name=v1,v2,... (repeatable; default grid otherwise)");
  swp->add_option("--transforms", sweep_transforms, "Transforms to try")->delimiter(',');
  swp->add_option("--k", sweep_k, "Number of folds");
  swp->add_option("--features", sweep_features, "Comma-separated f1..f4 or 'all'")->capture_default_str();
  swp->add_option("--threads", sweep_threads, "Worker threads (0: one per core)")->capture_default_str();
  add_common(swp, c_sweep);

  // evaluate
  Common c_eval;
  std::string eval_model, eval_in;
  auto* evl = app.add_subcommand("evaluate", "Score a saved model on labeled rows");
  evl->add_option("model", eval_model, "Model file")->required();
  evl->add_option("input", eval_in, "Labeled feature rows")->required();
  add_common(evl, c_eval);

  // ablation
  Common c_abl;
  std::string abl_in, abl_transform = "identity";
  std::vector<std::string> abl_kinds{"decision-tree", "random-forest", "adaboost"};
  std::optional<std::size_t> abl_k;
  auto* abl = app.add_subcommand("ablation", "Weighted F1 per single feature and for all features");
  abl->add_option("input", abl_in, "Labeled feature rows")->required();
  abl->add_option("--kinds", abl_kinds, "Model kinds")->delimiter(',')->capture_default_str();
  abl->add_option("--k", abl_k, "Number of folds");
  abl->add_option("--transform", abl_transform, "Feature transform")->capture_default_str();
  add_common(abl, c_abl);

  // predict
  Common c_pred;
  std::string pred_model, pred_in;
  auto* prd = app.add_subcommand("predict", "Classify feature rows with a saved model");
  prd->add_option("model", pred_model, "Model file")->required();
  prd->add_option("input", pred_in, "Feature rows ('-' for stdin)")->required();
  add_common(prd, c_pred);

  // engagement
  Common c_eng;
  std::string eng_log, eng_pred;
  auto* eng = app.add_subcommand("engagement", "CTR, QTCTR and RQTCTR from search/recommender logs");
  eng->add_option("log", eng_log, "Log file (JSON lines)")->required();
  eng->add_option("--predictions", eng_pred, "Predictions used to resolve document types");
  add_common(eng, c_eng);

  // synth
  Common c_synth;
  std::optional<std::size_t> synth_n;
  std::string synth_props;
  std::optional<double> synth_missing;
  auto* syn = app.add_subcommand("synth", "Generate a labeled synthetic feature set");
  syn->add_option("--n", synth_n, "Number of rows (default from config)");
  syn->add_option("--proportions", synth_props, "Research,Slides,Thesis");
  syn->add_option("--slides-missing-f1", synth_missing, "Fraction of Slides rows without an author count");
  add_common(syn, c_synth);

  // pipeline
  Common c_pipe;
  std::size_t pipe_threads = 0;
  bool pipe_threads_set = false;
  auto* pipe = app.add_subcommand("pipeline", "Run every stage end to end from a config");
  auto* threads_opt = pipe->add_option("--threads", pipe_threads, "Worker threads (0: one per core)");
  add_common(pipe, c_pipe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  pipe_threads_set = threads_opt->count() > 0;

  try {
    if (*extract || *label) {
      const bool labeled = label->parsed();
      const auto& c = labeled ? c_label : c_extract;
      const auto& path = labeled ? label_in : extract_in;
      base_config(c);
      auto parsed = with_input(path, [](std::istream& in) { return parse_records(in); });
      report_skips(parsed.report, "records");
      std::vector<FeatureRow> rows;
      ClassCounts counts{};
      for (const auto& r : parsed.items) {
        FeatureRow row{r.id, extract_features(r), std::nullopt};
        if (labeled) {
          row.label = rule_label(r);
          ++counts[index_of(*row.label)];
        }
        rows.push_back(std::move(row));
      }
      const auto name = labeled ? "label" : "extract";
      emit(c.out, jsonl(rows, labeled ? "labeled" : "features", settings_hash(name, json{{"input", path}})));
      if (rows.empty()) std::cerr << "warning: no records in input\n";
      std::cerr << name << ": " << rows.size() << " rows, " << parsed.report.skipped << " skipped";
      if (labeled)
        std::cerr << " (Research " << counts[0] << ", Slides " << counts[1] << ", Thesis " << counts[2] << ')';
      std::cerr << '\n';
      return kOk;
    }

    if (*samplesize) {
      const auto n = sample_size(ss_z, ss_p, ss_c);
      if (human(c_ss))
        emit(c_ss.out, std::to_string(n) + '\n');
      else
        emit(c_ss.out, stamped_json(json{{"z", ss_z}, {"p", ss_p}, {"c", ss_c}, {"sample_size", n}}, "samplesize",
                                    settings_hash("samplesize", json{ss_z, ss_p, ss_c})));
      return kOk;
    }

    if (*sample) {
      const auto rc = base_config(c_sample);
      const auto props = sample_props.empty() ? rc.proportions : parse_proportions(sample_props);
      const auto examples = read_labeled(sample_in);
      const auto seed = derive_seed(rc.seed, 2);
      const auto out = balanced_sample(examples, sample_total, props, seed);
      emit(c_sample.out, jsonl(out, "labeled",
                               settings_hash("sample", json{{"input", sample_in}, {"total", sample_total},
                                                            {"proportions", props}, {"seed", rc.seed}})));
      std::cerr << "sample: " << out.size() << " rows\n";
      return kOk;
    }

    if (*split) {
      const auto rc = base_config(c_split);
      const auto k = split_k.value_or(rc.k);
      const auto val = split_val.value_or(rc.validation_fraction);
      const auto examples = read_labeled(split_in);
      const auto s = stratified_split(examples, k, val, derive_seed(rc.seed, 3));
      const fs::path dir = c_split.out.empty() ? fs::path("split") : fs::path(c_split.out);
      const auto hash = settings_hash("split", json{{"input", split_in}, {"k", k}, {"validation", val},
                                                    {"seed", rc.seed}});
      for (std::size_t f = 0; f < s.folds.size(); ++f)
        write_file_atomic(dir / ("fold_" + std::to_string(f) + ".jsonl"), jsonl(s.folds[f], "labeled", hash));
      write_file_atomic(dir / "train.jsonl", jsonl(s.train, "labeled", hash));
      write_file_atomic(dir / "validation.jsonl", jsonl(s.validation, "labeled", hash));
      std::cerr << "split: " << s.folds.size() << " folds, " << s.train.size() << " train, " << s.validation.size()
                << " validation -> " << dir.string() << '\n';
      return kOk;
    }

    if (*impute) {
      const auto rc = base_config(c_impute);
      const auto examples = read_labeled(impute_in);
      std::size_t missing = 0;
      for (const auto& e : examples) missing += !e.features.authors;
      const auto out = impute_f1(examples, rc.seed);
      emit(c_impute.out, jsonl(out, "labeled", settings_hash("impute", json{{"input", impute_in}})));
      std::cerr << "impute: filled " << missing << " of " << out.size() << " rows\n";
      return kOk;
    }

    if (*thresholds) {
      const auto rc = base_config(c_thr);
      const auto examples = read_labeled(thr_in);
      const double lo = thr_lo.value_or(rc.quantile_lo), hi = thr_hi.value_or(rc.quantile_hi);
      const auto table = derive_thresholds(examples, lo, hi);
      if (human(c_thr)) {
        std::ostringstream os;
        os << std::left << std::setw(10) << "class";
        for (auto f : kFeatureIds) os << std::setw(26) << to_string(f);
        os << '\n';
        for (auto t : kDocTypes) {
          os << std::left << std::setw(10) << to_string(t);
          for (auto f : kFeatureIds) {
            const auto& b = table.at(t, f);
            std::ostringstream cell;
            cell << '[' << b.lower << ", " << b.upper << ']';
            os << std::setw(26) << cell.str();
          }
          os << '\n';
        }
        emit(c_thr.out, os.str());
      } else {
        emit(c_thr.out, stamped_json(to_json(table), "thresholds",
                                     settings_hash("thresholds", json{{"input", thr_in}, {"q", {lo, hi}}})));
      }
      return kOk;
    }

    if (*trn) {
      const auto rc = base_config(c_train);
      auto examples = read_labeled(train_in);
      if (train_impute) examples = impute_f1(examples, rc.seed);
      const auto kind = parse_kind(train_kind);
      TrainOptions opt{parse_params(train_params), parse_transform(train_transform), parse_features(train_features),
                       rc.seed};
      const auto model = train(kind, examples, opt);
      auto j = to_json(model);
      j["config_hash"] = settings_hash("train", json{{"input", train_in}, {"kind", train_kind},
                                                     {"params", train_params}, {"transform", train_transform},
                                                     {"features", train_features}, {"seed", rc.seed},
                                                     {"impute", train_impute}});
      emit(c_train.out, j.dump() + '\n');
      std::cerr << "train: " << to_string(kind) << " on " << examples.size() << " rows\n";
      return kOk;
    }

    if (*swp) {
      const auto rc = base_config(c_sweep);
      const auto kind = parse_kind(sweep_kind);
      const auto examples = read_labeled(sweep_in);
      const auto grid = sweep_grid.empty() ? rc.grid(kind) : parse_grid(sweep_grid);
      std::vector<TransformKind> transforms;
      for (const auto& t : sweep_transforms) transforms.push_back(parse_transform(t));
      if (transforms.empty()) transforms = rc.transforms;
      const auto k = sweep_k.value_or(rc.k);
      const auto result = sweep(kind, examples, expand_grid(grid), transforms, k, rc.seed,
                                parse_features(sweep_features), sweep_threads);
      if (human(c_sweep))
        emit(c_sweep.out, format_human(result));
      else
        emit(c_sweep.out,
             stamped_json(to_json(result), "sweep",
                          settings_hash("sweep", json{{"input", sweep_in}, {"kind", to_string(kind)}, {"grid", grid},
                                                      {"transforms", sweep_transforms}, {"k", k},
                                                      {"features", sweep_features}, {"seed", rc.seed}})));
      return kOk;
    }

    if (*evl) {
      const auto model = read_model(eval_model);
      auto examples = read_labeled(eval_in);
      if (model.features.contains(FeatureId::Authors) || model.kind == ModelKind::BaselineThreshold) {
        const auto before = examples.size();
        std::erase_if(examples, [](const LabeledExample& e) { return !e.features.authors; });
        if (examples.size() != before)
          std::cerr << "warning: skipped " << before - examples.size() << " rows without an author count\n";
      }
      const auto report = evaluate(predict_all(model, examples), truths_of(examples));
      if (human(c_eval))
        emit(c_eval.out, format_human(report));
      else
        emit(c_eval.out, stamped_json(to_json(report), "evaluation",
                                      settings_hash("evaluate", json{{"model", eval_model}, {"input", eval_in}})));
      return kOk;
    }

    if (*abl) {
      const auto rc = base_config(c_abl);
      auto examples = read_labeled(abl_in);
      std::vector<ModelKind> kinds;
      for (const auto& k : abl_kinds) kinds.push_back(parse_kind(k));
      const auto k = abl_k.value_or(rc.k);
      const auto result = ablation(examples, kinds, k, rc.seed, {}, parse_transform(abl_transform));
      if (human(c_abl))
        emit(c_abl.out, format_human(result));
      else
        emit(c_abl.out, stamped_json(to_json(result), "ablation",
                                     settings_hash("ablation", json{{"input", abl_in}, {"kinds", abl_kinds}, {"k", k},
                                                                    {"transform", abl_transform},
                                                                    {"seed", rc.seed}})));
      return kOk;
    }

    if (*prd) {
      const auto model = read_model(pred_model);
      auto parsed = with_input(pred_in, [](std::istream& in) { return parse_feature_rows(in); });
      report_skips(parsed.report, "rows");
      std::ostringstream os;
      os << format_header("predictions", settings_hash("predict", json{{"model", pred_model}, {"input", pred_in}}))
                .dump()
         << '\n';
      std::size_t ok = 0, failed = 0;
      std::chrono::nanoseconds busy{0};
      for (const auto& row : parsed.items) {
        json line;
        try {
          const auto t0 = std::chrono::steady_clock::now();
          const auto p = predict(model, row.features);
          busy += std::chrono::steady_clock::now() - t0;
          json scores = json::object();
          for (auto t : kDocTypes) scores[std::string(to_string(t))] = p.scores[index_of(t)];
          line = {{"doc_id", row.id}, {"doc_type", std::string(to_string(p.label))}, {"scores", scores}};
          ++ok;
        } catch (const ArgumentError& e) {
          line = {{"doc_id", row.id}, {"error", e.what()}};
          ++failed;
        }
        os << line.dump() << '\n';
      }
      emit(c_pred.out, os.str());
      const double ms = std::chrono::duration<double, std::milli>(busy).count();
      std::cerr << "predict: " << ok << " rows, " << failed << " errors";
      if (ok > 0) std::cerr << ", mean " << ms / static_cast<double>(ok) << " ms/row";
      std::cerr << '\n';
      return kOk;
    }

    if (*eng) {
      base_config(c_eng);
      DocTypeIndex types;
      if (!eng_pred.empty()) types = with_input(eng_pred, [](std::istream& in) { return parse_predictions(in); });
      auto parsed = with_input(eng_log, [&](std::istream& in) { return parse_log(in, eng_pred.empty() ? nullptr : &types); });
      report_skips(parsed.report, "malformed log lines");
      EngagementAccumulator acc;
      for (const auto& e : parsed.events) acc.add(e);
      acc.add_rejected(parsed.unresolved);
      const auto report = make_report(acc);
      const auto hash = settings_hash("engagement", json{{"log", eng_log}, {"predictions", eng_pred}});
      if (human(c_eng))
        emit(c_eng.out, format_human(report));
      else
        emit(c_eng.out, stamped_json(to_json(report), "engagement", hash));
      std::size_t valid = 0;
      for (const auto& [e, counts] : report.counts) valid += counts.events;
      const std::size_t invalid = report.rejected + parsed.report.skipped;
      if (report.rejected > 0) {
        std::cerr << "warning: rejected " << report.rejected << " events\n";
        for (std::size_t i = 0; i < parsed.unresolved_diagnostics.size() && i < 10; ++i)
          std::cerr << "  " << parsed.unresolved_diagnostics[i] << '\n';
        for (std::size_t i = 0; i < report.diagnostics.size() && i < 10; ++i)
          std::cerr << "  " << report.diagnostics[i] << '\n';
      }
      if (valid == 0 && invalid > 0) {
        std::cerr << "error: every event was invalid\n";
        return kData;
      }
      return kOk;
    }

    if (*syn) {
      const auto rc = base_config(c_synth);
      const auto n = synth_n.value_or(rc.synthetic_n);
      const auto props = synth_props.empty() ? rc.proportions : parse_proportions(synth_props);
      SyntheticOptions so;
      so.slides_missing_f1 = synth_missing.value_or(rc.slides_missing_f1);
      const auto seed = derive_seed(rc.seed, 1);
      const auto rows = generate_synthetic(n, props, seed, so);
      emit(c_synth.out, jsonl(rows, "labeled",
                              settings_hash("synth", json{{"n", n}, {"proportions", props},
                                                          {"slides_missing_f1", so.slides_missing_f1},
                                                          {"seed", rc.seed}})));
      std::cerr << "synth: " << rows.size() << " rows\n";
      return kOk;
    }

    if (*pipe) {
      if (c_pipe.config.empty()) throw ArgumentError("pipeline needs --config");
      auto rc = base_config(c_pipe);
      if (!c_pipe.out.empty()) rc.out = c_pipe.out;
      if (pipe_threads_set) rc.threads = pipe_threads;
      const auto s = run_pipeline(rc);
      std::ostringstream os;
      if (human(c_pipe)) {
        os << "examples " << s.n_examples << " (train " << s.n_train << ", validation " << s.n_validation << ")\n"
           << "deployed " << to_string(s.deployed) << " [" << format_hyperparams(s.hyperparameters) << ", "
           << to_string(s.transform) << "]\n"
           << "cv weighted F1 " << s.cv_weighted_f1 << '\n';
        if (s.validation_weighted_f1) os << "validation weighted F1 " << *s.validation_weighted_f1 << '\n';
        os << "outputs in " << rc.out.string() << '\n';
      } else {
        json files = json::array();
        for (const auto& f : s.files) files.push_back(f.generic_string());
        os << json{{"deployed", std::string(to_string(s.deployed))},
                   {"cv_weighted_f1", s.cv_weighted_f1},
                   {"validation_weighted_f1",
                    s.validation_weighted_f1 ? json(*s.validation_weighted_f1) : json(nullptr)},
                   {"config_hash", config_hash(rc)},
                   {"files", files}}
                  .dump()
           << '\n';
      }
      std::cout << os.str();
      return kOk;
    }
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
