#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "papertype/core.hpp"
#include "papertype/ingest.hpp"
#include "papertype/io.hpp"

namespace papertype {

enum class Engine : std::uint8_t { Search = 0, Recommender = 1 };

constexpr std::string_view to_string(Engine e) noexcept {
  return e == Engine::Search ? "search" : "recommender";
}

inline std::optional<Engine> parse_engine(std::string_view s) {
  if (s == "search") return Engine::Search;
  if (s == "recommender") return Engine::Recommender;
  return std::nullopt;
}

enum class PositionVariant : std::uint8_t { Any, Top };

constexpr std::string_view to_string(PositionVariant v) noexcept { return v == PositionVariant::Any ? "any" : "top"; }

struct Impression {
  std::string doc_id;
  std::uint32_t position = 0;  // 1-based
  std::optional<DocType> doc_type;
};

struct Click {
  std::string doc_id;
  std::uint32_t position = 0;
};

// One query (or, for the recommender, one source document) with what was
// served and what was clicked.
struct LogEvent {
  Engine engine = Engine::Search;
  std::string query_id;
  std::vector<Impression> impressions;
  std::vector<Click> clicks;
};

struct ImpressionSet {
  Engine engine = Engine::Search;
  std::string query_id;
  std::vector<Impression> impressions;
  std::optional<DocType> assigned_type;  // empty for click-free queries
  bool clicked_top = false;              // a click of assigned_type at position 1
};

// Throws ValidationError unless positions are unique and 1-based, every
// impression has a document type, and every click hits an impressed
// (doc_id, position) pair.
inline void validate_event(const LogEvent& e) {
  std::set<std::uint32_t> positions;
  for (const auto& imp : e.impressions) {
    if (imp.position < 1) throw ValidationError("query '" + e.query_id + "': position must be 1-based");
    if (!positions.insert(imp.position).second)
      throw ValidationError("query '" + e.query_id + "': duplicate position " + std::to_string(imp.position));
    if (!imp.doc_type) throw ValidationError("query '" + e.query_id + "': no document type for '" + imp.doc_id + "'");
  }
  for (const auto& c : e.clicks) {
    const bool hit = std::any_of(e.impressions.begin(), e.impressions.end(), [&](const Impression& imp) {
      return imp.doc_id == c.doc_id && imp.position == c.position;
    });
    if (!hit)
      throw ValidationError("query '" + e.query_id + "': click on unimpressed '" + c.doc_id + "'@" +
                            std::to_string(c.position));
  }
}

namespace detail {

// Clicked types of a validated event, in DocType order, and whether each was
// clicked at position 1.
inline std::array<std::pair<bool, bool>, kNumClasses> clicked_types(const LogEvent& e) {
  std::array<std::pair<bool, bool>, kNumClasses> out{};
  for (const auto& c : e.clicks)
    for (const auto& imp : e.impressions)
      if (imp.doc_id == c.doc_id && imp.position == c.position) {
        auto& slot = out[index_of(*imp.doc_type)];
        slot.first = true;
        slot.second = slot.second || c.position == 1;
        break;
      }
  return out;
}

}  // namespace detail

struct SetBuild {
  std::vector<ImpressionSet> sets;
  std::size_t rejected = 0;
  std::vector<std::string> diagnostics;
};

// One set per distinct clicked document type, or a single untyped set when
// nothing was clicked. Each set carries a full copy of the impressions.
inline SetBuild build_impression_sets(std::span<const LogEvent> events) {
  SetBuild out;
  for (const auto& e : events) {
    try {
      validate_event(e);
    } catch (const ValidationError& err) {
      ++out.rejected;
      out.diagnostics.emplace_back(err.what());
      continue;
    }
    const auto clicked = detail::clicked_types(e);
    bool any = false;
    for (auto t : kDocTypes) {
      const auto [was_clicked, top] = clicked[index_of(t)];
      if (!was_clicked) continue;
      any = true;
      out.sets.push_back({e.engine, e.query_id, e.impressions, t, top});
    }
    if (!any) out.sets.push_back({e.engine, e.query_id, e.impressions, std::nullopt, false});
  }
  return out;
}

inline double ctr(std::size_t clicks, std::size_t impressions) {
  if (impressions == 0) throw UndefinedRateError("ctr: no impressions");
  return static_cast<double>(clicks) / static_cast<double>(impressions);
}

// Share of sets typed `t` (and, for Top, clicked at position 1).
inline double qtctr(std::span<const ImpressionSet> sets, DocType t, PositionVariant v) {
  if (sets.empty()) throw UndefinedRateError("qtctr: no impression sets");
  std::size_t hits = 0;
  for (const auto& s : sets) hits += s.assigned_type == t && (v == PositionVariant::Any || s.clicked_top);
  return static_cast<double>(hits) / static_cast<double>(sets.size());
}

// qtctr scaled by the share of impressions (over the same sets) of type `t`.
inline double rqtctr(std::span<const ImpressionSet> sets, DocType t, PositionVariant v) {
  std::size_t typed = 0, total = 0;
  for (const auto& s : sets)
    for (const auto& imp : s.impressions) {
      ++total;
      typed += imp.doc_type == t;
    }
  if (total == 0) throw UndefinedRateError("rqtctr: no impressions");
  return qtctr(sets, t, v) * (static_cast<double>(typed) / static_cast<double>(total));
}

// ---------------------------------------------------------------------------
// Streaming aggregation
// ---------------------------------------------------------------------------

// Raw counts for one engine. "Set" counts follow build_impression_sets()
// (impressions repeat once per derived set); event counts feed plain CTR.
struct EngineCounts {
  std::size_t events = 0;
  std::size_t sets = 0;                          // |Q|
  ClassCounts typed_any{};                       // |Q_T|, any position
  ClassCounts typed_top{};                       // |Q_T|, top position
  std::size_t set_impressions = 0;               // |Impressions|
  ClassCounts set_impressions_by_type{};         // |Impressions_T|
  ClassCounts event_impressions_by_type{};
  ClassCounts event_clicks_by_type{};

  void merge(const EngineCounts& o) {
    events += o.events;
    sets += o.sets;
    set_impressions += o.set_impressions;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      typed_any[c] += o.typed_any[c];
      typed_top[c] += o.typed_top[c];
      set_impressions_by_type[c] += o.set_impressions_by_type[c];
      event_impressions_by_type[c] += o.event_impressions_by_type[c];
      event_clicks_by_type[c] += o.event_clicks_by_type[c];
    }
  }

  friend bool operator==(const EngineCounts&, const EngineCounts&) = default;
};

// Commutative fold over events: shards can be accumulated independently and
// merged. Invalid events are counted, not aggregated.
class EngagementAccumulator {
 public:
  void add(const LogEvent& e) {
    try {
      validate_event(e);
    } catch (const ValidationError& err) {
      ++rejected_;
      if (diagnostics_.size() < kMaxDiagnostics) diagnostics_.emplace_back(err.what());
      return;
    }
    auto& c = counts_[e.engine];
    ++c.events;
    ClassCounts imp_by_type{};
    for (const auto& imp : e.impressions) ++imp_by_type[index_of(*imp.doc_type)];
    for (const auto& click : e.clicks)
      for (const auto& imp : e.impressions)
        if (imp.doc_id == click.doc_id && imp.position == click.position) {
          ++c.event_clicks_by_type[index_of(*imp.doc_type)];
          break;
        }
    const auto clicked = detail::clicked_types(e);
    std::size_t n_sets = 0;
    for (std::size_t t = 0; t < kNumClasses; ++t) {
      if (!clicked[t].first) continue;
      ++n_sets;
      ++c.typed_any[t];
      c.typed_top[t] += clicked[t].second;
    }
    n_sets = std::max<std::size_t>(n_sets, 1);
    c.sets += n_sets;
    c.set_impressions += n_sets * e.impressions.size();
    for (std::size_t t = 0; t < kNumClasses; ++t) {
      c.set_impressions_by_type[t] += n_sets * imp_by_type[t];
      c.event_impressions_by_type[t] += imp_by_type[t];
    }
  }

  void add_rejected(std::size_t n, std::string diagnostic = {}) {
    rejected_ += n;
    if (!diagnostic.empty() && diagnostics_.size() < kMaxDiagnostics) diagnostics_.push_back(std::move(diagnostic));
  }

  void merge(const EngagementAccumulator& o) {
    for (const auto& [engine, c] : o.counts_) counts_[engine].merge(c);
    rejected_ += o.rejected_;
    for (const auto& d : o.diagnostics_)
      if (diagnostics_.size() < kMaxDiagnostics) diagnostics_.push_back(d);
  }

  const std::map<Engine, EngineCounts>& counts() const noexcept { return counts_; }
  std::size_t rejected() const noexcept { return rejected_; }
  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  static constexpr std::size_t kMaxDiagnostics = 100;
  std::map<Engine, EngineCounts> counts_;
  std::size_t rejected_ = 0;
  std::vector<std::string> diagnostics_;
};

// Engagement metrics per engine present in the input. Rates are computed
// from the raw counts at read time.
struct EngagementReport {
  std::map<Engine, EngineCounts> counts;
  std::size_t rejected = 0;
  std::vector<std::string> diagnostics;

  const EngineCounts& engine(Engine e) const {
    auto it = counts.find(e);
    if (it == counts.end()) throw ArgumentError("engagement report: no events for " + std::string(to_string(e)));
    return it->second;
  }

  double qtctr(Engine e, DocType t, PositionVariant v) const {
    const auto& c = engine(e);
    const auto hits = v == PositionVariant::Any ? c.typed_any[index_of(t)] : c.typed_top[index_of(t)];
    if (c.sets == 0) throw UndefinedRateError("qtctr: no impression sets");
    return static_cast<double>(hits) / static_cast<double>(c.sets);
  }

  double impression_share(Engine e, DocType t) const {
    const auto& c = engine(e);
    if (c.set_impressions == 0) throw UndefinedRateError("impression share: no impressions");
    return static_cast<double>(c.set_impressions_by_type[index_of(t)]) / static_cast<double>(c.set_impressions);
  }

  double rqtctr(Engine e, DocType t, PositionVariant v) const { return qtctr(e, t, v) * impression_share(e, t); }

  std::optional<double> ctr(Engine e, DocType t) const {
    const auto& c = engine(e);
    if (c.event_impressions_by_type[index_of(t)] == 0) return std::nullopt;
    return papertype::ctr(c.event_clicks_by_type[index_of(t)], c.event_impressions_by_type[index_of(t)]);
  }
};

inline EngagementReport make_report(const EngagementAccumulator& acc) {
  return {acc.counts(), acc.rejected(), acc.diagnostics()};
}

inline EngagementReport engagement_report(std::span<const LogEvent> events) {
  EngagementAccumulator acc;
  for (const auto& e : events) acc.add(e);
  return make_report(acc);
}

// ---------------------------------------------------------------------------
// Log files
// ---------------------------------------------------------------------------

using DocTypeIndex = std::unordered_map<std::string, DocType>;

struct LogParse {
  std::vector<LogEvent> events;
  ParseReport report;      // malformed lines
  std::size_t unresolved = 0;  // events whose document types could not be joined
  std::vector<std::string> unresolved_diagnostics;
};

inline std::uint32_t position_from_json(const json& j) {
  if (!j.contains("position") || !j.at("position").is_number_integer() || j.at("position").get<std::int64_t>() < 1 ||
      j.at("position").get<std::int64_t>() > 1'000'000)
    throw ValidationError("'position' must be a positive integer");
  return static_cast<std::uint32_t>(j.at("position").get<std::int64_t>());
}

// One event per line:
//   {"engine": "search"|"recommender", "query_id": "...",
//    "impressions": [{"doc_id", "position", "doc_type"?}],
//    "clicks": [{"doc_id", "position"}]}
// A missing doc_type is looked up in `types` when given; events that still
// lack a type are dropped and counted as unresolved.
inline LogParse parse_log(std::istream& in, const DocTypeIndex* types = nullptr) {
  LogParse out;
  auto parsed = detail::parse_lines<LogEvent>(in, [&](const json& j) -> std::optional<LogEvent> {
    LogEvent e;
    if (!j.contains("engine") || !j.at("engine").is_string()) throw ValidationError("missing 'engine'");
    auto engine = parse_engine(j.at("engine").get<std::string>());
    if (!engine) throw ValidationError("unknown engine " + j.at("engine").dump());
    e.engine = *engine;
    e.query_id = detail::required_id(j, "query_id");
    if (!j.contains("impressions") || !j.at("impressions").is_array()) throw ValidationError("missing 'impressions'");
    for (const auto& ij : j.at("impressions")) {
      Impression imp;
      imp.doc_id = detail::required_id(ij, "doc_id");
      imp.position = position_from_json(ij);
      if (ij.contains("doc_type") && !ij.at("doc_type").is_null()) {
        imp.doc_type = parse_doc_type(ij.at("doc_type").get<std::string>());
        if (!imp.doc_type) throw ValidationError("unknown doc_type " + ij.at("doc_type").dump());
      }
      e.impressions.push_back(std::move(imp));
    }
    if (j.contains("clicks")) {
      if (!j.at("clicks").is_array()) throw ValidationError("'clicks' is not an array");
      for (const auto& cj : j.at("clicks")) e.clicks.push_back({detail::required_id(cj, "doc_id"), position_from_json(cj)});
    }
    for (auto& imp : e.impressions) {
      if (imp.doc_type) continue;
      if (types) {
        auto it = types->find(imp.doc_id);
        if (it != types->end()) {
          imp.doc_type = it->second;
          continue;
        }
      }
      ++out.unresolved;
      out.unresolved_diagnostics.push_back("query '" + e.query_id + "': no document type for '" + imp.doc_id + "'");
      return std::nullopt;
    }
    return e;
  });
  out.events = std::move(parsed.items);
  out.report = std::move(parsed.report);
  return out;
}

// Reads {doc_id, doc_type, ...} rows as written by the predict command.
// Error rows (with an "error" key) are skipped.
inline DocTypeIndex parse_predictions(std::istream& in) {
  DocTypeIndex out;
  auto parsed = detail::parse_lines<std::pair<std::string, DocType>>(
      in, [](const json& j) -> std::optional<std::pair<std::string, DocType>> {
        if (j.contains("error")) return std::nullopt;
        auto id = detail::required_id(j, "doc_id");
        if (!j.contains("doc_type") || !j.at("doc_type").is_string()) throw ValidationError("missing 'doc_type'");
        auto t = parse_doc_type(j.at("doc_type").get<std::string>());
        if (!t) throw ValidationError("unknown doc_type");
        return std::pair{std::move(id), *t};
      });
  for (auto& [id, t] : parsed.items) out.emplace(std::move(id), t);
  return out;
}

inline json to_json(const LogEvent& e) {
  json imps = json::array(), clicks = json::array();
  for (const auto& i : e.impressions) {
    json ij{{"doc_id", i.doc_id}, {"position", i.position}};
    if (i.doc_type) ij["doc_type"] = std::string(to_string(*i.doc_type));
    imps.push_back(std::move(ij));
  }
  for (const auto& c : e.clicks) clicks.push_back({{"doc_id", c.doc_id}, {"position", c.position}});
  return json{{"engine", std::string(to_string(e.engine))}, {"query_id", e.query_id}, {"impressions", imps},
              {"clicks", clicks}};
}

// ---------------------------------------------------------------------------
// Report output
// ---------------------------------------------------------------------------

inline json to_json(const EngagementReport& r) {
  json engines = json::object();
  for (const auto& [engine, c] : r.counts) {
    json types = json::object();
    for (auto t : kDocTypes) {
      const auto i = index_of(t);
      json metrics{{"sets_any", c.typed_any[i]},
                   {"sets_top", c.typed_top[i]},
                   {"set_impressions", c.set_impressions_by_type[i]},
                   {"event_impressions", c.event_impressions_by_type[i]},
                   {"event_clicks", c.event_clicks_by_type[i]}};
      for (auto v : {PositionVariant::Any, PositionVariant::Top}) {
        json m = json::object();
        m["qtctr"] = c.sets ? json(r.qtctr(engine, t, v)) : json(nullptr);
        m["rqtctr"] = c.set_impressions ? json(r.rqtctr(engine, t, v)) : json(nullptr);
        metrics[std::string(to_string(v))] = m;
      }
      const auto rate = r.ctr(engine, t);
      metrics["ctr"] = rate ? json(*rate) : json(nullptr);
      types[std::string(to_string(t))] = metrics;
    }
    engines[std::string(to_string(engine))] = {
        {"events", c.events}, {"sets", c.sets}, {"set_impressions", c.set_impressions}, {"types", types}};
  }
  return json{{"engines", engines}, {"rejected", r.rejected}};
}

inline std::string format_human(const EngagementReport& r) {
  std::ostringstream os;
  os << std::setprecision(5) << std::fixed;
  for (const auto& [engine, c] : r.counts) {
    os << "engine: " << to_string(engine) << "  events=" << c.events << "  sets=" << c.sets
       << "  impressions=" << c.set_impressions << '\n';
    os << std::left << std::setw(8) << "metric" << std::setw(10) << "variant" << std::right;
    for (auto t : kDocTypes) os << std::setw(12) << to_string(t);
    os << '\n';
    for (auto metric : {"QTCTR", "RQTCTR"})
      for (auto v : {PositionVariant::Any, PositionVariant::Top}) {
        os << std::left << std::setw(8) << metric << std::setw(10) << to_string(v) << std::right;
        for (auto t : kDocTypes) {
          const bool ok = std::string_view(metric) == "QTCTR" ? c.sets > 0 : c.set_impressions > 0;
          if (!ok) {
            os << std::setw(12) << "n/a";
            continue;
          }
          os << std::setw(12)
             << (std::string_view(metric) == "QTCTR" ? r.qtctr(engine, t, v) : r.rqtctr(engine, t, v));
        }
        os << '\n';
      }
    os << std::left << std::setw(18) << "CTR" << std::right;
    for (auto t : kDocTypes) {
      const auto rate = r.ctr(engine, t);
      if (rate)
        os << std::setw(12) << *rate;
      else
        os << std::setw(12) << "n/a";
    }
    os << "\n\n";
  }
  os << "rejected events: " << r.rejected << '\n';
  return os.str();
}

}  // namespace papertype
