#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "papertype/core.hpp"
#include "papertype/io.hpp"

namespace papertype {

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

namespace detail {

enum class CharClass { Space, Punct, Word };

inline CharClass classify(char32_t cp) noexcept {
  if (cp < 0x80) {
    const auto c = static_cast<unsigned char>(cp);
    if (c == ' ' || (c >= '\t' && c <= '\r')) return CharClass::Space;
    if ((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'))
      return CharClass::Word;
    return CharClass::Punct;  // remaining printable ASCII and control bytes
  }
  if (cp == 0x85 || cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 ||
      cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000)
    return CharClass::Space;
  if ((cp >= 0xA1 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7 || (cp >= 0x200B && cp <= 0x2027) ||
      (cp >= 0x2030 && cp <= 0x205E) || (cp >= 0x3001 && cp <= 0x303F) || cp == 0xFEFF)
    return CharClass::Punct;
  return CharClass::Word;
}

struct CodePoint {
  std::size_t offset;
  std::size_t length;
  CharClass cls;
};

// Lenient UTF-8 decode; an invalid byte decodes as a one-byte word character.
inline std::vector<CodePoint> decode(std::string_view text) {
  std::vector<CodePoint> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 >= 0xC0) {
      const std::size_t want = b0 >= 0xF0 ? 4 : b0 >= 0xE0 ? 3 : 2;
      bool ok = i + want <= text.size() && want <= 4 && b0 < 0xF8;
      char32_t v = b0 & (0x7F >> want);
      for (std::size_t k = 1; ok && k < want; ++k) {
        const auto b = static_cast<unsigned char>(text[i + k]);
        if ((b & 0xC0) != 0x80) ok = false;
        v = (v << 6) | (b & 0x3F);
      }
      if (ok) {
        len = want;
        cp = v;
      } else {
        cp = 0xFFFD;
      }
    } else if (b0 >= 0x80) {
      cp = 0xFFFD;
    }
    out.push_back({i, len, classify(cp)});
    i += len;
  }
  return out;
}

}  // namespace detail

// Whitespace-delimited runs with leading/trailing punctuation stripped.
// Runs that contain no letter or digit are dropped.
inline std::vector<std::string> tokenize(std::string_view text) {
  using detail::CharClass;
  std::vector<std::string> tokens;
  const auto cps = detail::decode(text);
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && cps[i].cls == CharClass::Space) ++i;
    std::size_t begin = i;
    while (i < cps.size() && cps[i].cls != CharClass::Space) ++i;
    std::size_t end = i;
    while (begin < end && cps[begin].cls == CharClass::Punct) ++begin;
    while (end > begin && cps[end - 1].cls == CharClass::Punct) --end;
    if (begin == end) continue;
    // after stripping, both ends are word characters
    const std::size_t from = cps[begin].offset;
    const std::size_t to = cps[end - 1].offset + cps[end - 1].length;
    tokens.emplace_back(text.substr(from, to - from));
  }
  return tokens;
}

inline std::size_t count_words(std::string_view text) {
  // same rule as tokenize() without materializing the tokens
  using detail::CharClass;
  const auto cps = detail::decode(text);
  std::size_t n = 0;
  bool in_run = false, has_word = false;
  for (const auto& cp : cps) {
    if (cp.cls == CharClass::Space) {
      n += in_run && has_word;
      in_run = has_word = false;
    } else {
      in_run = true;
      has_word = has_word || cp.cls == CharClass::Word;
    }
  }
  return n + (in_run && has_word);
}

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

// Reads only authors and pages.
inline FeatureVector extract_features(const DocumentRecord& record) {
  FeatureVector fv;
  if (!record.authors.empty()) fv.authors = static_cast<std::int64_t>(record.authors.size());
  std::int64_t words = 0;
  for (const auto& page : record.pages) words += static_cast<std::int64_t>(count_words(page));
  fv.total_words = words;
  fv.pages = static_cast<std::int64_t>(record.pages.size());
  fv.words_per_page = fv.pages > 0 ? static_cast<double>(words) / static_cast<double>(fv.pages) : 0.0;
  return fv;
}

// ---------------------------------------------------------------------------
// Record files
// ---------------------------------------------------------------------------

struct ParseReport {
  std::size_t skipped = 0;
  std::vector<std::string> diagnostics;  // one per skipped line, "line N: reason"
};

template <typename T>
struct Parsed {
  std::vector<T> items;
  ParseReport report;
};

namespace detail {

inline std::vector<std::string> string_array(const json& obj, const char* key, bool required) {
  if (!obj.contains(key)) {
    if (required) throw ValidationError(std::string("missing '") + key + "'");
    return {};
  }
  const auto& arr = obj.at(key);
  if (!arr.is_array()) throw ValidationError(std::string("'") + key + "' is not an array");
  std::vector<std::string> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_string()) throw ValidationError(std::string("'") + key + "' has a non-string entry");
    out.push_back(v.get<std::string>());
  }
  return out;
}

inline std::string required_id(const json& obj, const char* key = "id") {
  if (!obj.contains(key) || !obj.at(key).is_string())
    throw ValidationError(std::string("missing or non-string '") + key + "'");
  auto id = obj.at(key).get<std::string>();
  if (id.empty()) throw ValidationError(std::string("empty '") + key + "'");
  return id;
}

inline bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

// Drives a per-line parser, turning ValidationError and JSON errors into
// counted skips.
template <typename T, typename LineFn>
Parsed<T> parse_lines(std::istream& in, LineFn&& fn) {
  if (!in) throw IngestError("input stream is not readable");
  Parsed<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    try {
      auto j = json::parse(line);
      if (is_format_header(j)) {
        if (j.at("format_version").get<int>() > kFormatVersion)
          throw IngestError("line " + std::to_string(line_no) + ": unsupported format_version");
        continue;
      }
      if (!j.is_object()) throw ValidationError("not an object");
      if (auto item = fn(j)) out.items.push_back(std::move(*item));
    } catch (const json::exception& e) {
      ++out.report.skipped;
      out.report.diagnostics.push_back("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      ++out.report.skipped;
      out.report.diagnostics.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) throw IngestError("read error after line " + std::to_string(line_no));
  return out;
}

}  // namespace detail

// One record per line: {id, authors, title, subjects, pages}. `id` and
// `pages` are required; the rest default to empty. Unknown keys are ignored.
// Lines with a duplicate id are skipped like any other malformed line.
inline Parsed<DocumentRecord> parse_records(std::istream& in) {
  std::set<std::string> seen;
  return detail::parse_lines<DocumentRecord>(in, [&](const json& j) -> std::optional<DocumentRecord> {
    DocumentRecord r;
    r.id = detail::required_id(j);
    r.authors = detail::string_array(j, "authors", false);
    if (j.contains("title")) {
      if (!j.at("title").is_string()) throw ValidationError("'title' is not a string");
      r.title = j.at("title").get<std::string>();
    }
    r.subjects = detail::string_array(j, "subjects", false);
    r.pages = detail::string_array(j, "pages", true);
    if (!seen.insert(r.id).second) throw ValidationError("duplicate id '" + r.id + "'");
    return r;
  });
}

inline json to_json(const DocumentRecord& r) {
  return json{{"id", r.id},
              {"authors", r.authors},
              {"title", r.title},
              {"subjects", r.subjects},
              {"pages", r.pages}};
}

// ---------------------------------------------------------------------------
// Feature rows: {id, f1, f2, f3, f4, label}, f1 nullable, label optional
// ---------------------------------------------------------------------------

struct FeatureRow {
  std::string id;
  FeatureVector features;
  std::optional<DocType> label;
};

inline json to_json(const FeatureRow& row) {
  json j{{"id", row.id},
         {"f1", row.features.authors ? json(*row.features.authors) : json(nullptr)},
         {"f2", row.features.total_words},
         {"f3", row.features.pages},
         {"f4", row.features.words_per_page}};
  if (row.label) j["label"] = std::string(to_string(*row.label));
  return j;
}

inline json to_json(const LabeledExample& e) { return to_json(FeatureRow{e.id, e.features, e.label}); }

inline FeatureRow feature_row_from_json(const json& j) {
  FeatureRow row;
  row.id = detail::required_id(j);
  auto count = [&](const char* key) -> std::int64_t {
    if (!j.contains(key)) throw ValidationError(std::string("missing '") + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      throw ValidationError(std::string("'") + key + "' is not a nonnegative integer");
    return v.get<std::int64_t>();
  };
  if (!j.contains("f1")) throw ValidationError("missing 'f1'");
  if (!j.at("f1").is_null()) row.features.authors = count("f1");
  row.features.total_words = count("f2");
  row.features.pages = count("f3");
  if (!j.contains("f4") || !j.at("f4").is_number() || j.at("f4").get<double>() < 0.0)
    throw ValidationError("'f4' is not a nonnegative number");
  row.features.words_per_page = j.at("f4").get<double>();
  if (j.contains("label") && !j.at("label").is_null()) {
    if (!j.at("label").is_string()) throw ValidationError("'label' is not a string");
    row.label = parse_doc_type(j.at("label").get<std::string>());
    if (!row.label) throw ValidationError("unknown label '" + j.at("label").get<std::string>() + "'");
  }
  return row;
}

inline Parsed<FeatureRow> parse_feature_rows(std::istream& in) {
  return detail::parse_lines<FeatureRow>(
      in, [](const json& j) -> std::optional<FeatureRow> { return feature_row_from_json(j); });
}

// Rows without a label are skipped and counted.
inline Parsed<LabeledExample> parse_labeled(std::istream& in) {
  auto rows = parse_feature_rows(in);
  Parsed<LabeledExample> out{{}, std::move(rows.report)};
  for (auto& row : rows.items) {
    if (!row.label) {
      ++out.report.skipped;
      out.report.diagnostics.push_back("row '" + row.id + "': missing label");
      continue;
    }
    out.items.push_back({std::move(row.id), row.features, *row.label});
  }
  return out;
}

template <typename Rows>
void write_jsonl(std::ostream& out, const Rows& rows, const json* header = nullptr) {
  if (header) out << header->dump() << '\n';
  for (const auto& row : rows) out << to_json(row).dump() << '\n';
}

}  // namespace papertype
