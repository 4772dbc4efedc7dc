#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace papertype {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violated precondition on a function argument.
struct ArgumentError : Error {
  using Error::Error;
};

// Input could not be read at all (as opposed to a skipped malformed line).
struct IngestError : Error {
  using Error::Error;
};

// A class cannot supply the number of examples requested of it.
struct ShortageError : Error {
  using Error::Error;
};

struct TrainingError : Error {
  using Error::Error;
};

struct ModelFormatError : Error {
  using Error::Error;
};

struct UnsupportedVersionError : ModelFormatError {
  using ModelFormatError::ModelFormatError;
};

// A rate whose denominator is zero.
struct UndefinedRateError : Error {
  using Error::Error;
};

struct ValidationError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Document types
// ---------------------------------------------------------------------------

// Declaration order is the total order used for tie-breaking and output.
enum class DocType : std::uint8_t { Research = 0, Slides = 1, Thesis = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<DocType, kNumClasses> kDocTypes{DocType::Research, DocType::Slides,
                                                             DocType::Thesis};

constexpr std::size_t index_of(DocType t) noexcept { return static_cast<std::size_t>(t); }

constexpr std::string_view to_string(DocType t) noexcept {
  switch (t) {
    case DocType::Research: return "Research";
    case DocType::Slides: return "Slides";
    case DocType::Thesis: return "Thesis";
  }
  return "?";
}

inline std::optional<DocType> parse_doc_type(std::string_view s) {
  auto lower = [](std::string_view in) {
    std::string out(in);
    for (auto& c : out)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
  };
  const auto l = lower(s);
  if (l == "research") return DocType::Research;
  if (l == "slides") return DocType::Slides;
  if (l == "thesis") return DocType::Thesis;
  return std::nullopt;
}

// Per-class values indexed by index_of(DocType).
using ClassScores = std::array<double, kNumClasses>;
using ClassCounts = std::array<std::size_t, kNumClasses>;

// First maximum in DocType order.
inline DocType argmax(const ClassScores& scores) noexcept {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c)
    if (scores[c] > scores[best]) best = c;
  return kDocTypes[best];
}

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

enum class FeatureId : std::uint8_t { Authors = 0, TotalWords = 1, Pages = 2, WordsPerPage = 3 };

inline constexpr std::size_t kNumFeatures = 4;
inline constexpr std::array<FeatureId, kNumFeatures> kFeatureIds{
    FeatureId::Authors, FeatureId::TotalWords, FeatureId::Pages, FeatureId::WordsPerPage};

constexpr std::size_t index_of(FeatureId f) noexcept { return static_cast<std::size_t>(f); }

constexpr std::string_view to_string(FeatureId f) noexcept {
  switch (f) {
    case FeatureId::Authors: return "f1";
    case FeatureId::TotalWords: return "f2";
    case FeatureId::Pages: return "f3";
    case FeatureId::WordsPerPage: return "f4";
  }
  return "?";
}

inline std::optional<FeatureId> parse_feature_id(std::string_view s) {
  if (s.size() != 2 || (s[0] != 'f' && s[0] != 'F') || s[1] < '1' || s[1] > '4') return std::nullopt;
  return kFeatureIds[static_cast<std::size_t>(s[1] - '1')];
}

struct FeatureVector {
  std::optional<std::int64_t> authors;  // F1; empty when the author list is unknown
  std::int64_t total_words = 0;         // F2
  std::int64_t pages = 0;               // F3
  double words_per_page = 0.0;          // F4

  bool has_missing() const noexcept { return !authors.has_value(); }

  std::optional<double> get(FeatureId f) const noexcept {
    switch (f) {
      case FeatureId::Authors:
        return authors ? std::optional<double>(static_cast<double>(*authors)) : std::nullopt;
      case FeatureId::TotalWords: return static_cast<double>(total_words);
      case FeatureId::Pages: return static_cast<double>(pages);
      case FeatureId::WordsPerPage: return words_per_page;
    }
    return std::nullopt;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Sorted, duplicate-free, non-empty selection of features a model consumes.
class FeatureSet {
 public:
  FeatureSet() : ids_(kFeatureIds.begin(), kFeatureIds.end()) {}
  explicit FeatureSet(std::vector<FeatureId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    if (ids_.empty()) throw ArgumentError("feature set must not be empty");
  }
  static FeatureSet all() { return FeatureSet(); }
  static FeatureSet only(FeatureId f) { return FeatureSet({f}); }

  std::size_t size() const noexcept { return ids_.size(); }
  FeatureId operator[](std::size_t i) const { return ids_[i]; }
  auto begin() const noexcept { return ids_.begin(); }
  auto end() const noexcept { return ids_.end(); }
  bool contains(FeatureId f) const noexcept {
    return std::find(ids_.begin(), ids_.end(), f) != ids_.end();
  }
  std::string label() const {
    if (ids_.size() == kNumFeatures) return "all";
    std::string out;
    for (auto f : ids_) {
      if (!out.empty()) out += '+';
      out += to_string(f);
    }
    return out;
  }

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

 private:
  std::vector<FeatureId> ids_;
};

// Raw inputs for one document, with pages as already-extracted text.
struct DocumentRecord {
  std::string id;
  std::vector<std::string> authors;
  std::string title;
  std::vector<std::string> subjects;
  std::vector<std::string> pages;
};

struct LabeledExample {
  std::string id;
  FeatureVector features;
  DocType label = DocType::Research;
};

inline ClassCounts class_counts(std::span<const LabeledExample> examples) noexcept {
  ClassCounts counts{};
  for (const auto& e : examples) ++counts[index_of(e.label)];
  return counts;
}

}  // namespace papertype
