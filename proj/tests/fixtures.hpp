#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "papertype/core.hpp"
#include "papertype/engagement.hpp"
#include "papertype/rng.hpp"
#include "papertype/stats.hpp"

namespace fixtures {

using namespace papertype;

// 20 Research rows (F2 clustered near 5000 plus one 1e9 outlier) and three
// rows each of Slides and Thesis. Bounds worked out by hand below.
inline std::vector<LabeledExample> threshold_fixture() {
  const std::vector<std::int64_t> f1{1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3, 3, 4, 4, 4, 5, 5, 6, 8, 30};
  const std::vector<std::int64_t> f2{4900, 4920, 4950, 4970, 4980, 4990, 5000, 5000, 5010, 5020,
                                     5030, 5040, 5050, 5060, 5080, 5100, 5120, 5150, 5200, 1000000000};
  std::vector<LabeledExample> out;
  auto add = [&](DocType t, std::int64_t a, std::int64_t words, std::int64_t pages) {
    LabeledExample e;
    e.id = "fx" + std::to_string(out.size());
    e.label = t;
    e.features.authors = a;
    e.features.total_words = words;
    e.features.pages = pages;
    e.features.words_per_page = static_cast<double>(words) / static_cast<double>(pages);
    out.push_back(e);
  };
  // interleave the input order so nothing relies on sorted input
  for (std::size_t i = 0; i < 20; ++i) {
    const std::size_t j = (i * 7) % 20;
    add(DocType::Research, f1[j], f2[j], 10);
  }
  add(DocType::Slides, 4, 200, 40);
  add(DocType::Slides, 6, 300, 60);
  add(DocType::Slides, 2, 100, 20);
  add(DocType::Thesis, 1, 30000, 150);
  add(DocType::Thesis, 1, 40000, 200);
  add(DocType::Thesis, 1, 20000, 100);
  return out;
}

// Hand derivation (linear interpolation at h = (n-1)q, 0-based):
//
// Research F2, n=20: Q1 at h=4.75 -> 4980 + .75*10 = 4987.5; Q3 at h=14.25 ->
//   5080 + .25*20 = 5085; IQR 97.5; fences [4841.25, 5231.25] drop 1e9.
//   n=19: lower at h=.45 -> 4900 + .45*20 = 4909; upper at h=17.55 ->
//   5150 + .55*50 = 5177.5.
// Research F1, n=20: Q1 = 2 + .75*0 = 2; Q3 = 4 + .25*1 = 4.25; fences
//   [-1.375, 7.625] drop 8 and 30. n=18: lower at h=.425 -> 1; upper at
//   h=16.575 -> 5 + .575*1 = 5.575.
// Research F3 is constant 10 -> [10, 10]. Research F4 = F2/10 -> [490.9, 517.75].
// Slides (3 rows, nothing filtered): F1 {2,4,6} -> [2.1, 5.9]; F2 {100,200,300}
//   -> [105, 295]; F3 {20,40,60} -> [21, 59]; F4 constant 5 -> [5, 5].
// Thesis: F1 constant 1 -> [1, 1]; F2 {20000,30000,40000} -> [20500, 39500];
//   F3 {100,150,200} -> [102.5, 197.5]; F4 constant 200 -> [200, 200].
inline ThresholdTable threshold_fixture_expected() {
  ThresholdTable t;
  using F = FeatureId;
  t.at(DocType::Research, F::Authors) = {1, 5.575};
  t.at(DocType::Research, F::TotalWords) = {4909, 5177.5};
  t.at(DocType::Research, F::Pages) = {10, 10};
  t.at(DocType::Research, F::WordsPerPage) = {490.9, 517.75};
  t.at(DocType::Slides, F::Authors) = {2.1, 5.9};
  t.at(DocType::Slides, F::TotalWords) = {105, 295};
  t.at(DocType::Slides, F::Pages) = {21, 59};
  t.at(DocType::Slides, F::WordsPerPage) = {5, 5};
  t.at(DocType::Thesis, F::Authors) = {1, 1};
  t.at(DocType::Thesis, F::TotalWords) = {20500, 39500};
  t.at(DocType::Thesis, F::Pages) = {102.5, 197.5};
  t.at(DocType::Thesis, F::WordsPerPage) = {200, 200};
  return t;
}

// Classes differ only in F2 (disjoint log-normal bands); F1 and F3 share one
// distribution across classes, and F3 is wide so F4 = F2/F3 is noisy.
inline std::vector<LabeledExample> f2_signal_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const std::array<double, kNumClasses> centre{std::log(5000.0), std::log(400.0), std::log(60000.0)};
  const std::array<double, kNumClasses> weights{0.55, 0.10, 0.35};
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledExample e;
    e.id = "f2s-" + std::to_string(i);
    e.label = kDocTypes[rng.categorical(weights)];
    const double z = std::clamp(rng.normal(), -2.5, 2.5);
    e.features.total_words = std::llround(std::exp(centre[index_of(e.label)] + 0.35 * z));
    e.features.authors = 1 + static_cast<std::int64_t>(rng.index(6));
    e.features.pages = std::max<std::int64_t>(1, std::llround(std::exp(std::log(30.0) + 1.6 * rng.normal())));
    e.features.words_per_page =
        static_cast<double>(e.features.total_words) / static_cast<double>(e.features.pages);
    out.push_back(std::move(e));
  }
  return out;
}

// Streams a Search log whose derived impression sets number exactly
// 1,000,000, of which 323,576 are Thesis-typed:
//   323,576 events with one Thesis click (half of them at position 1),
//   50,000 events with Research and Slides clicks (two sets each),
//   300,000 events with a Research click,
//   276,424 events without clicks.
// A handful of recommender events ride along to check per-engine separation.
template <typename Sink>
void constructed_search_log(Sink&& sink) {
  LogEvent e;
  e.engine = Engine::Search;
  std::size_t q = 0;
  auto reset = [&](DocType a, DocType b, DocType c) {
    e.query_id = "q" + std::to_string(q++);
    e.impressions = {{"d1", 1, a}, {"d2", 2, b}, {"d3", 3, c}};
    e.clicks.clear();
  };
  for (std::size_t i = 0; i < 323'576; ++i) {
    if (i % 2 == 0) {
      reset(DocType::Thesis, DocType::Research, DocType::Research);
      e.clicks = {{"d1", 1}};
    } else {
      reset(DocType::Research, DocType::Thesis, DocType::Slides);
      e.clicks = {{"d2", 2}};
    }
    sink(e);
  }
  for (std::size_t i = 0; i < 50'000; ++i) {
    reset(DocType::Research, DocType::Slides, DocType::Thesis);
    e.clicks = {{"d1", 1}, {"d2", 2}};
    sink(e);
  }
  for (std::size_t i = 0; i < 300'000; ++i) {
    reset(DocType::Research, DocType::Research, DocType::Thesis);
    e.clicks = {{"d2", 2}};
    sink(e);
  }
  for (std::size_t i = 0; i < 276'424; ++i) {
    reset(DocType::Research, DocType::Thesis, DocType::Research);
    sink(e);
  }
  e.engine = Engine::Recommender;
  for (std::size_t i = 0; i < 10; ++i) {
    reset(DocType::Thesis, DocType::Thesis, DocType::Thesis);
    e.clicks = {{"d3", 3}};
    sink(e);
  }
}

}  // namespace fixtures
