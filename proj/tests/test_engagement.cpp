#include <gtest/gtest.h>

#include <sstream>

#include "papertype/engagement.hpp"
#include "support.hpp"

using namespace papertype;

namespace {

using D = DocType;
constexpr auto kAny = PositionVariant::Any;
constexpr auto kTop = PositionVariant::Top;

LogEvent event(std::string q, std::vector<D> types, std::vector<std::uint32_t> clicked_positions,
               Engine engine = Engine::Search) {
  LogEvent e;
  e.engine = engine;
  e.query_id = std::move(q);
  for (std::uint32_t p = 1; p <= types.size(); ++p)
    e.impressions.push_back({"d" + std::to_string(p), p, types[p - 1]});
  for (auto p : clicked_positions) e.clicks.push_back({"d" + std::to_string(p), p});
  return e;
}

std::vector<LogEvent> random_log(Rng& rng, std::size_t n) {
  std::vector<LogEvent> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(testsupport::random_event(rng, i));
  return out;
}

// Counts recomputed from materialized impression sets, without the
// accumulator.
struct SetCounts {
  std::size_t sets = 0, impressions = 0;
  std::array<std::size_t, 3> any{}, top{}, typed_impressions{};
};

SetCounts count_sets(const std::vector<ImpressionSet>& sets, Engine engine) {
  SetCounts c;
  for (const auto& s : sets) {
    if (s.engine != engine) continue;
    ++c.sets;
    if (s.assigned_type) {
      ++c.any[index_of(*s.assigned_type)];
      c.top[index_of(*s.assigned_type)] += s.clicked_top;
    }
    for (const auto& imp : s.impressions) {
      ++c.impressions;
      ++c.typed_impressions[index_of(*imp.doc_type)];
    }
  }
  return c;
}

std::vector<ImpressionSet> only(const std::vector<ImpressionSet>& sets, Engine engine) {
  std::vector<ImpressionSet> out;
  for (const auto& s : sets)
    if (s.engine == engine) out.push_back(s);
  return out;
}

}  // namespace

TEST(ImpressionSets, TwoTypesClickedGivesTwoSets) {
  const std::vector<LogEvent> log{event("q", {D::Research, D::Research, D::Thesis, D::Slides}, {3, 4})};
  const auto b = build_impression_sets(log);
  ASSERT_EQ(b.sets.size(), 2u);
  EXPECT_EQ(b.sets[0].assigned_type, D::Slides);
  EXPECT_EQ(b.sets[1].assigned_type, D::Thesis);
  for (const auto& s : b.sets) {
    EXPECT_EQ(s.impressions.size(), 4u);
    EXPECT_FALSE(s.clicked_top);
  }
}

TEST(ImpressionSets, ClicklessGivesOneUntypedSet) {
  const std::vector<LogEvent> log{event("q", {D::Research, D::Research, D::Research, D::Research, D::Research}, {})};
  const auto b = build_impression_sets(log);
  ASSERT_EQ(b.sets.size(), 1u);
  EXPECT_FALSE(b.sets[0].assigned_type.has_value());
}

TEST(ImpressionSets, TwoResearchClicksGiveOneSet) {
  const std::vector<LogEvent> log{event("q", {D::Research, D::Thesis, D::Research}, {1, 3})};
  const auto b = build_impression_sets(log);
  ASSERT_EQ(b.sets.size(), 1u);
  EXPECT_EQ(b.sets[0].assigned_type, D::Research);
  EXPECT_TRUE(b.sets[0].clicked_top);
}

TEST(ImpressionSets, TopMeansPositionOneOfThatType) {
  const std::vector<LogEvent> log{event("q", {D::Thesis, D::Research}, {1, 2})};
  const auto b = build_impression_sets(log);
  ASSERT_EQ(b.sets.size(), 2u);
  EXPECT_EQ(b.sets[0].assigned_type, D::Research);
  EXPECT_FALSE(b.sets[0].clicked_top);
  EXPECT_TRUE(b.sets[1].clicked_top);
}

TEST(ImpressionSets, InvalidEventsRejectedAndCounted) {
  auto unimpressed = event("a", {D::Research}, {});
  unimpressed.clicks.push_back({"zz", 1});
  auto wrong_position = event("b", {D::Research, D::Slides}, {});
  wrong_position.clicks.push_back({"d1", 2});
  auto dup = event("c", {D::Research, D::Slides}, {});
  dup.impressions[1].position = 1;
  auto zero = event("d", {D::Research}, {});
  zero.impressions[0].position = 0;
  auto untyped = event("e", {D::Research}, {});
  untyped.impressions[0].doc_type.reset();
  const std::vector<LogEvent> log{unimpressed, wrong_position, dup, zero, untyped, event("ok", {D::Thesis}, {1})};
  const auto b = build_impression_sets(log);
  EXPECT_EQ(b.rejected, 5u);
  EXPECT_EQ(b.diagnostics.size(), 5u);
  ASSERT_EQ(b.sets.size(), 1u);
  EXPECT_EQ(b.sets[0].query_id, "ok");
  EXPECT_NE(b.diagnostics[0].find("'a'"), std::string::npos);
}

TEST(Rates, Ctr) {
  EXPECT_DOUBLE_EQ(ctr(5, 100), 0.05);
  EXPECT_EQ(ctr(0, 7), 0.0);
  EXPECT_EQ(ctr(9, 9), 1.0);
  EXPECT_THROW(ctr(0, 0), UndefinedRateError);
}

TEST(Rates, QtctrCounts) {
  std::vector<LogEvent> log;
  for (int i = 0; i < 10; ++i) log.push_back(event("q" + std::to_string(i), {D::Research, D::Thesis}, {}));
  log[0].clicks = {{"d2", 2}};
  log[1].clicks = {{"d2", 2}};
  const auto sets = build_impression_sets(log).sets;
  EXPECT_DOUBLE_EQ(qtctr(sets, D::Thesis, kAny), 0.2);
  EXPECT_EQ(qtctr(sets, D::Thesis, kTop), 0.0);
  EXPECT_EQ(qtctr(sets, D::Slides, kAny), 0.0);
  // thesis holds half of all impressions
  EXPECT_DOUBLE_EQ(rqtctr(sets, D::Thesis, kAny), 0.1);
  EXPECT_EQ(rqtctr(sets, D::Slides, kAny), 0.0);
  EXPECT_THROW(qtctr(std::vector<ImpressionSet>{}, D::Thesis, kAny), UndefinedRateError);
  EXPECT_THROW(rqtctr(std::vector<ImpressionSet>{}, D::Thesis, kAny), UndefinedRateError);
}

TEST(Rates, AllUntypedSetsGiveZero) {
  const std::vector<LogEvent> log{event("a", {D::Research, D::Slides}, {}), event("b", {D::Thesis}, {})};
  const auto sets = build_impression_sets(log).sets;
  for (auto t : kDocTypes)
    for (auto v : {kAny, kTop}) EXPECT_EQ(qtctr(sets, t, v), 0.0);
}

TEST(Report, SingleClicklessEvent) {
  const std::vector<LogEvent> log{event("q", {D::Research, D::Thesis}, {}, Engine::Recommender)};
  const auto r = engagement_report(log);
  for (auto t : kDocTypes) {
    for (auto v : {kAny, kTop}) EXPECT_EQ(r.qtctr(Engine::Recommender, t, v), 0.0);
    if (t == D::Slides)
      EXPECT_FALSE(r.ctr(Engine::Recommender, t).has_value());
    else
      EXPECT_EQ(r.ctr(Engine::Recommender, t), 0.0);
  }
  EXPECT_THROW(r.engine(Engine::Search), ArgumentError);
}

TEST(Report, CtrCountsOriginalEvents) {
  // one event, clicks on two types: sets double the impressions, CTR does not
  const std::vector<LogEvent> log{event("q", {D::Research, D::Thesis, D::Research, D::Slides}, {1, 2})};
  const auto r = engagement_report(log);
  const auto& c = r.engine(Engine::Search);
  EXPECT_EQ(c.sets, 2u);
  EXPECT_EQ(c.set_impressions, 8u);
  EXPECT_EQ(r.ctr(Engine::Search, D::Research), 0.5);
  EXPECT_EQ(r.ctr(Engine::Search, D::Thesis), 1.0);
  EXPECT_EQ(r.ctr(Engine::Search, D::Slides), 0.0);
  EXPECT_DOUBLE_EQ(r.impression_share(Engine::Search, D::Research), 0.5);
}

TEST(Report, PropertyMatchesMaterializedSets) {
  Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    const auto log = random_log(rng, 1 + rng.index(300));
    const auto r = engagement_report(log);
    const auto b = build_impression_sets(log);
    std::size_t expected_sets = 0;
    for (const auto& e : log) {
      std::set<D> types;
      for (const auto& c : e.clicks)
        for (const auto& imp : e.impressions)
          if (imp.doc_id == c.doc_id && imp.position == c.position) types.insert(*imp.doc_type);
      expected_sets += std::max<std::size_t>(1, types.size());
    }
    EXPECT_EQ(b.sets.size(), expected_sets);
    for (const auto& [engine, counts] : r.counts) {
      const auto sc = count_sets(b.sets, engine);
      const auto sets = only(b.sets, engine);
      EXPECT_EQ(counts.sets, sc.sets);
      EXPECT_EQ(counts.set_impressions, sc.impressions);
      std::size_t typed = 0;
      for (auto t : kDocTypes) {
        const auto c = index_of(t);
        EXPECT_EQ(counts.typed_any[c], sc.any[c]);
        EXPECT_EQ(counts.typed_top[c], sc.top[c]);
        EXPECT_EQ(counts.set_impressions_by_type[c], sc.typed_impressions[c]);
        typed += counts.typed_any[c];
        for (auto v : {kAny, kTop}) {
          EXPECT_EQ(r.qtctr(engine, t, v), qtctr(sets, t, v));
          EXPECT_NEAR(r.rqtctr(engine, t, v), rqtctr(sets, t, v), 1e-15);
        }
      }
      EXPECT_LE(typed, counts.sets);
    }
  }
}

TEST(Report, PropertyIdentitiesAndBounds) {
  Rng rng(102);
  for (int trial = 0; trial < 30; ++trial) {
    const auto log = random_log(rng, 1 + rng.index(500));
    const auto r = engagement_report(log);
    for (const auto& [engine, c] : r.counts) {
      double sum_any = 0.0;
      for (auto t : kDocTypes) {
        const auto i = index_of(t);
        for (auto v : {kAny, kTop}) {
          const double q = static_cast<double>(v == kAny ? c.typed_any[i] : c.typed_top[i]) / static_cast<double>(c.sets);
          const double share = static_cast<double>(c.set_impressions_by_type[i]) / static_cast<double>(c.set_impressions);
          EXPECT_NEAR(r.rqtctr(engine, t, v), q * share, 1e-12);
          EXPECT_LE(r.rqtctr(engine, t, v), r.qtctr(engine, t, v));
          EXPECT_GE(r.rqtctr(engine, t, v), 0.0);
        }
        EXPECT_LE(r.qtctr(engine, t, kTop), r.qtctr(engine, t, kAny));
        sum_any += r.qtctr(engine, t, kAny);
      }
      EXPECT_LE(sum_any, 1.0 + 1e-12);
    }
  }
}

TEST(Report, PropertyPermutationInvariantAndShardable) {
  Rng rng(103);
  for (int trial = 0; trial < 20; ++trial) {
    auto log = random_log(rng, 2 + rng.index(400));
    log[0].clicks.push_back({"nowhere", 99});  // one invalid event
    const auto a = engagement_report(log);
    rng.shuffle(std::span<LogEvent>(log));
    const auto b = engagement_report(log);
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_EQ(a.rejected, 1u);
    EXPECT_EQ(b.rejected, 1u);

    const auto cut = rng.index(log.size());
    EngagementAccumulator left, right;
    for (std::size_t i = 0; i < log.size(); ++i) (i < cut ? left : right).add(log[i]);
    right.merge(left);
    EXPECT_EQ(make_report(right).counts, a.counts);
    EXPECT_EQ(to_json(make_report(right)).dump(), to_json(a).dump());
  }
}

TEST(Report, SkewedSharesGiveOrderOfMagnitudeGap) {
  Rng rng(104);
  const auto log = random_log(rng, 20000);
  const auto r = engagement_report(log);
  for (auto engine : {Engine::Search, Engine::Recommender}) {
    const double slides = r.rqtctr(engine, D::Slides, kAny);
    EXPECT_GE(r.rqtctr(engine, D::Research, kAny), 10.0 * slides);
    EXPECT_GE(r.rqtctr(engine, D::Thesis, kAny), 10.0 * slides);
    EXPECT_NEAR(r.impression_share(engine, D::Slides), 0.061, 0.01);
  }
}

TEST(Report, DiagnosticsAreCapped) {
  EngagementAccumulator acc;
  auto bad = event("q", {D::Research}, {});
  bad.clicks.push_back({"x", 5});
  for (int i = 0; i < 500; ++i) acc.add(bad);
  EXPECT_EQ(acc.rejected(), 500u);
  EXPECT_EQ(acc.diagnostics().size(), 100u);
}

TEST(LogIo, ParseWithEmbeddedTypes) {
  std::istringstream in(
      R"({"engine":"search","query_id":"q1","impressions":[{"doc_id":"a","position":1,"doc_type":"Thesis"},{"doc_id":"b","position":2,"doc_type":"Research"}],"clicks":[{"doc_id":"a","position":1}]}
{"engine":"recommender","query_id":"q2","impressions":[{"doc_id":"c","position":1,"doc_type":"Slides"}]}
{"engine":"radio","query_id":"q3","impressions":[]}
not json
)");
  const auto p = parse_log(in);
  ASSERT_EQ(p.events.size(), 2u);
  EXPECT_EQ(p.report.skipped, 2u);
  EXPECT_EQ(p.unresolved, 0u);
  EXPECT_TRUE(p.events[1].clicks.empty());
  const auto r = engagement_report(p.events);
  EXPECT_EQ(r.qtctr(Engine::Search, D::Thesis, kTop), 1.0);
}

TEST(LogIo, JoinAgainstPredictions) {
  std::istringstream preds(R"({"format_version":1,"content":"predictions","config_hash":"x"}
{"doc_id":"a","doc_type":"Thesis","scores":{"Research":0,"Slides":0,"Thesis":1}}
{"doc_id":"b","doc_type":"Research"}
{"doc_id":"z","error":"feature f1 is missing"}
)");
  const auto index = parse_predictions(preds);
  EXPECT_EQ(index.size(), 2u);
  std::istringstream log(
      R"({"engine":"search","query_id":"q1","impressions":[{"doc_id":"a","position":1},{"doc_id":"b","position":2}],"clicks":[{"doc_id":"a","position":1}]}
{"engine":"search","query_id":"q2","impressions":[{"doc_id":"a","position":1},{"doc_id":"z","position":2}],"clicks":[]}
{"engine":"search","query_id":"q3","impressions":[{"doc_id":"b","position":1,"doc_type":"Slides"}],"clicks":[]}
)");
  const auto p = parse_log(log, &index);
  ASSERT_EQ(p.events.size(), 2u);
  EXPECT_EQ(p.unresolved, 1u);
  EXPECT_NE(p.unresolved_diagnostics[0].find("'z'"), std::string::npos);
  EXPECT_EQ(p.events[0].impressions[0].doc_type, D::Thesis);
  // an embedded type wins over the join
  EXPECT_EQ(p.events[1].impressions[0].doc_type, D::Slides);
}

TEST(LogIo, MissingTypeWithoutJoinIsUnresolved) {
  std::istringstream log(R"({"engine":"search","query_id":"q1","impressions":[{"doc_id":"a","position":1}]})");
  const auto p = parse_log(log);
  EXPECT_TRUE(p.events.empty());
  EXPECT_EQ(p.unresolved, 1u);
}

TEST(LogIo, EventJsonRoundTrip) {
  Rng rng(105);
  std::ostringstream out;
  const auto log = random_log(rng, 50);
  for (const auto& e : log) out << to_json(e).dump() << '\n';
  std::istringstream in(out.str());
  const auto p = parse_log(in);
  ASSERT_EQ(p.events.size(), log.size());
  EXPECT_EQ(engagement_report(p.events).counts, engagement_report(log).counts);
}

TEST(LogIo, ReportFormats) {
  Rng rng(106);
  const auto r = engagement_report(random_log(rng, 100));
  const auto j = to_json(r);
  EXPECT_TRUE(j["engines"]["search"]["types"]["Thesis"]["any"]["qtctr"].is_number());
  EXPECT_EQ(j["rejected"], 0);
  EXPECT_NE(format_human(r).find("RQTCTR"), std::string::npos);
}
