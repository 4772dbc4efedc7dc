// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Tolerances and time budgets are fixed here.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "fixtures.hpp"
#include "papertype/pipeline.hpp"
#include "support.hpp"

using namespace papertype;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Each criterion reports its own timing; `budget` is in seconds.
Outcome timed(double budget, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  auto out = body();
  const double s = seconds_since(t0);
  out.detail += fmt(" [%.3fs, budget %.3gs]", s, budget);
  out.pass = out.pass && s <= budget;
  return out;
}

Outcome sample_size_formula() {
  return timed(1e-3, [] {
    const auto n = sample_size(1.96, 0.5, 0.01);
    return Outcome{n == 9604, fmt("samplesize(1.96, 0.5, 0.01) = %lld", static_cast<long long>(n))};
  });
}

Outcome threshold_baseline() {
  // Load the reference table through its file format, then classify.
  const auto text = to_json(reference_thresholds()).dump();
  return timed(1e-3, [&] {
    const auto table = threshold_table_from_json(json::parse(text));
    const FeatureVector thesis{1, 50000, 200, 250};
    const FeatureVector fallback{20, 5000, 10, 500};
    const FeatureVector slides{6, 500, 60, 8.3};
    const auto a = baseline_threshold_predict(table, thesis);
    const auto b = baseline_threshold_predict(table, fallback);
    const auto c = baseline_threshold_predict(table, slides);
    const bool ok = a == DocType::Thesis && b == DocType::Research && c == DocType::Slides;
    return Outcome{ok, fmt("got %s / %s / %s", std::string(to_string(a)).c_str(), std::string(to_string(b)).c_str(),
                           std::string(to_string(c)).c_str())};
  });
}

Outcome desk_scale_classification() {
  return timed(60.0, [] {
    const auto xs = generate_synthetic(11500, {0.55, 0.10, 0.35}, 2024);
    auto cv = [&](ModelKind kind, Hyperparams hp) {
      CvOptions opt;
      opt.k = 10;
      opt.train.hyperparameters = std::move(hp);
      opt.train.seed = 7;
      return cross_validate(kind, xs, opt).mean.weighted_f1;
    };
    const double rf = cv(ModelKind::RandomForest, deployed_forest_profile());
    const double ada = cv(ModelKind::AdaBoost, {});
    const double b1 = cv(ModelKind::BaselineRandom, {});
    const double b2 = cv(ModelKind::BaselineThreshold, {});
    const bool ok = rf >= 0.90 && std::min(rf, ada) > std::max(b1, b2);
    return Outcome{ok, fmt("weighted F1 rf=%.4f adaboost=%.4f random=%.4f threshold=%.4f", rf, ada, b1, b2)};
  });
}

Outcome random_baseline_expectation() {
  return timed(5.0, [] {
    const std::vector<double> w{0.55, 0.10, 0.35};
    constexpr std::size_t n = 100'000;
    const auto pred = baseline_random_predict(RandomParams{{0.55, 0.10, 0.35}}, n, 11);
    Rng truth(12);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += pred[i] == kDocTypes[truth.categorical(w)];
    const double acc = static_cast<double>(hits) / n;
    const double expected = 0.55 * 0.55 + 0.10 * 0.10 + 0.35 * 0.35;
    return Outcome{std::abs(acc - expected) <= 0.02, fmt("accuracy %.4f vs %.4f", acc, expected)};
  });
}

Outcome oracle_equivalence() {
  return timed(10.0, [] {
    Rng rng(13);
    double worst = 0.0;
    std::size_t knn_mismatch = 0;
    for (int inst = 0; inst < 100; ++inst) {
      const std::size_t n = 10 + rng.index(191);
      const std::size_t dims = 1 + rng.index(4);
      const auto data = testsupport::random_dataset(rng, n, dims);
      const auto g = fit_gnb(data, 1e-9);
      const std::size_t k = 1 + rng.index(15);
      const auto kn = fit_knn(data, k);
      for (int q = 0; q < 20; ++q) {
        std::vector<double> x(dims);
        for (auto& v : x) v = rng.uniform() * 120.0 - 10.0;
        const auto got = gnb_scores(g, x), want = testsupport::gnb_oracle(data, x);
        for (std::size_t c = 0; c < kNumClasses; ++c) worst = std::max(worst, std::abs(got[c] - want[c]));
        knn_mismatch += knn_scores(kn, x) != testsupport::knn_oracle(data, x, k);
      }
    }
    return Outcome{worst <= 1e-9 && knn_mismatch == 0,
                   fmt("max gnb deviation %.3g, knn mismatches %zu", worst, knn_mismatch)};
  });
}

Outcome tukey_and_quantiles() {
  const std::vector<double> xs{1, 2, 3, 4, 100};
  const bool tukey = tukey_filter(xs) == std::vector<double>{1, 2, 3, 4};
  const std::vector<double> flat(9, 7.5);
  const bool constant = tukey_filter(flat) == flat;
  // Hand values are decimals; "exact" means equal up to binary rounding of
  // the interpolation (4 ulps, as gtest's double equality).
  const auto got = derive_thresholds(fixtures::threshold_fixture());
  const auto want = fixtures::threshold_fixture_expected();
  auto same = [](double a, double b) {
    return std::abs(a - b) <= 4 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
  };
  bool table = true;
  for (auto t : kDocTypes)
    for (auto f : kFeatureIds)
      table = table && same(got.at(t, f).lower, want.at(t, f).lower) && same(got.at(t, f).upper, want.at(t, f).upper);
  return {tukey && constant && table,
          fmt("tukey %s, constant %s, fixture table %s", tukey ? "ok" : "bad", constant ? "ok" : "bad",
              table ? "exact" : "differs")};
}

Outcome metric_identities() {
  return timed(5.0, [] {
    Rng rng(14);
    std::vector<LogEvent> log;
    for (std::size_t i = 0; i < 1000; ++i) log.push_back(testsupport::random_event(rng, i));
    const auto r = engagement_report(log);
    const auto sets = build_impression_sets(log).sets;
    double worst = 0.0;
    bool bounds = true;
    for (auto engine : {Engine::Search, Engine::Recommender}) {
      std::vector<ImpressionSet> mine;
      for (const auto& s : sets)
        if (s.engine == engine) mine.push_back(s);
      // impression share counted directly from the materialized sets
      std::array<double, kNumClasses> typed{};
      double total = 0;
      for (const auto& s : mine)
        for (const auto& imp : s.impressions) {
          typed[index_of(*imp.doc_type)] += 1;
          total += 1;
        }
      double sum_any = 0.0;
      for (auto t : kDocTypes) {
        for (auto v : {PositionVariant::Any, PositionVariant::Top}) {
          const double expected = qtctr(mine, t, v) * (typed[index_of(t)] / total);
          worst = std::max(worst, std::abs(r.rqtctr(engine, t, v) - expected));
        }
        const double any = r.qtctr(engine, t, PositionVariant::Any);
        bounds = bounds && r.qtctr(engine, t, PositionVariant::Top) <= any;
        sum_any += any;
      }
      bounds = bounds && sum_any <= 1.0 + 1e-12;
    }
    return Outcome{worst <= 1e-12 && bounds, fmt("max |rqtctr - qtctr*share| %.3g, bounds %s", worst,
                                                bounds ? "hold" : "violated")};
  });
}

Outcome constructed_log_rate() {
  return timed(30.0, [] {
    EngagementAccumulator acc;
    fixtures::constructed_search_log([&](const LogEvent& e) { acc.add(e); });
    const auto r = make_report(acc);
    const auto sets = r.engine(Engine::Search).sets;
    const double q = r.qtctr(Engine::Search, DocType::Thesis, PositionVariant::Any);
    return Outcome{sets == 1'000'000 && std::abs(q - 0.32358) <= 5e-6, fmt("%zu sets, qtctr %.6f", sets, q)};
  });
}

Outcome prediction_latency() {
  const auto xs = generate_synthetic(11500, {0.55, 0.10, 0.35}, 2025);
  TrainOptions opt;
  opt.hyperparameters = deployed_forest_profile();
  opt.seed = 3;
  const auto model = train(ModelKind::RandomForest, xs, opt);
  const auto& forest = std::get<ForestParams>(model.params);
  std::size_t max_leaves = 0;
  for (const auto& t : forest.trees) max_leaves = std::max(max_leaves, t.leaf_count());
  constexpr std::size_t n = 10'000;
  std::size_t sink = 0;
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < n; ++i) sink += index_of(predict(model, xs[i % xs.size()].features).label);
  const double mean_ms = seconds_since(t0) * 1e3 / n;
  const bool shape = forest.trees.size() <= 10 && max_leaves <= 5;
  return {shape && mean_ms < 1.0, fmt("%zu trees, <= %zu leaves, mean %.5f ms (checksum %zu)", forest.trees.size(),
                                      max_leaves, mean_ms, sink)};
}

Outcome pipeline_determinism() {
  const auto base = fs::temp_directory_path() / "papertype-acceptance";
  fs::remove_all(base);
  RunConfig cfg;
  cfg.seed = 99;
  cfg.synthetic_n = 1500;
  cfg.k = 5;
  cfg.out = base / "a";
  const auto a = run_pipeline(cfg);
  cfg.out = base / "b";
  run_pipeline(cfg);
  std::size_t differing = 0;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (const auto& f : a.files)
    differing += slurp(f) != slurp(base / "b" / fs::relative(f, base / "a"));
  return {differing == 0 && !a.files.empty(), fmt("%zu files compared, %zu differ", a.files.size(), differing)};
}

Outcome ablation_direction() {
  const auto xs = fixtures::f2_signal_dataset(3000, 15);
  const std::vector<ModelKind> kinds{ModelKind::RandomForest};
  const auto r = ablation(xs, kinds, 5, 16);
  auto at = [&](FeatureId f) { return r.at(ModelKind::RandomForest, FeatureSet::only(f)); };
  const double f2 = at(FeatureId::TotalWords);
  const double others = std::max({at(FeatureId::Authors), at(FeatureId::Pages), at(FeatureId::WordsPerPage)});
  const double all = r.at(ModelKind::RandomForest, FeatureSet::all());
  return {f2 - others >= 0.2 && all >= f2,
          fmt("F2-only %.4f, best other singleton %.4f, all features %.4f", f2, others, all)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"sample-size formula", sample_size_formula},
      {"threshold baseline on reference table", threshold_baseline},
      {"desk-scale classification", desk_scale_classification},
      {"random baseline expectation", random_baseline_expectation},
      {"gnb and knn oracle equivalence", oracle_equivalence},
      {"tukey and quantile suite", tukey_and_quantiles},
      {"engagement metric identities", metric_identities},
      {"constructed search log qtctr", constructed_log_rate},
      {"deployed forest latency", prediction_latency},
      {"pipeline determinism", pipeline_determinism},
      {"ablation direction", ablation_direction},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
