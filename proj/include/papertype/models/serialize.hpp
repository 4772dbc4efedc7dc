#pragma once

#include <istream>
#include <iterator>
#include <ostream>
#include <string>

#include "papertype/io.hpp"
#include "papertype/models/model.hpp"
#include "papertype/models/train.hpp"

namespace papertype {

// Model file layout (one JSON object):
//
//   {"format_version": 1, "kind": "...", "features": ["f1", ...],
//    "transform": {...}, "hyperparameters": {...}, "seed": N,
//    "parameters": {...}}
//
// Trees are stored as parallel node arrays (feature, threshold, left, right,
// distribution); leaves have feature -1 and a distribution, internal nodes a
// null distribution. Doubles are written in shortest round-trip form, so
// load(save(m)) == m exactly.

namespace detail {

inline json classes_json(const ClassScores& s) {
  json j = json::object();
  for (auto t : kDocTypes) j[std::string(to_string(t))] = s[index_of(t)];
  return j;
}

inline ClassScores classes_from_json(const json& j) {
  ClassScores s{};
  for (auto t : kDocTypes) s[index_of(t)] = j.at(std::string(to_string(t))).get<double>();
  return s;
}

inline json tree_json(const Tree& tree) {
  json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
       dist = json::array();
  for (const auto& n : tree.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    dist.push_back(n.is_leaf() ? json(n.distribution) : json(nullptr));
  }
  return json{{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"distribution", dist}};
}

inline Tree tree_from_json(const json& j) {
  const auto& feature = j.at("feature");
  const auto& threshold = j.at("threshold");
  const auto& left = j.at("left");
  const auto& right = j.at("right");
  const auto& dist = j.at("distribution");
  const auto n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n || dist.size() != n)
    throw ModelFormatError("tree node arrays differ in length");
  Tree tree;
  tree.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = tree.nodes[i];
    node.feature = feature[i].get<std::int32_t>();
    node.threshold = threshold[i].get<double>();
    node.left = left[i].get<std::int32_t>();
    node.right = right[i].get<std::int32_t>();
    if (node.is_leaf()) {
      if (dist[i].is_null()) throw ModelFormatError("tree leaf without a distribution");
      node.distribution = dist[i].get<ClassScores>();
    }
  }
  return tree;
}

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

inline json params_json(const ModelParams& params) {
  return std::visit(
      [](const auto& p) -> json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, RandomParams>) {
          return json{{"weights", classes_json(p.weights)}};
        } else if constexpr (std::is_same_v<P, ThresholdParams>) {
          return json{{"table", to_json(p.table)}, {"fallback", std::string(to_string(p.fallback))}};
        } else if constexpr (std::is_same_v<P, GnbParams>) {
          json means = json::object(), vars = json::object();
          for (auto t : kDocTypes) {
            means[std::string(to_string(t))] = p.means[index_of(t)];
            vars[std::string(to_string(t))] = p.variances[index_of(t)];
          }
          return json{{"priors", classes_json(p.priors)}, {"means", means}, {"variances", vars}};
        } else if constexpr (std::is_same_v<P, KnnParams>) {
          json labels = json::array();
          for (auto t : p.labels) labels.push_back(std::string(to_string(t)));
          return json{{"k", p.k}, {"points", matrix_json(p.points)}, {"labels", labels}};
        } else if constexpr (std::is_same_v<P, TreeParams>) {
          return json{{"tree", tree_json(p.tree)}};
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          json trees = json::array();
          for (const auto& t : p.trees) trees.push_back(tree_json(t));
          return json{{"trees", trees}};
        } else if constexpr (std::is_same_v<P, BoostParams>) {
          json trees = json::array();
          for (const auto& t : p.trees) trees.push_back(tree_json(t));
          return json{{"trees", trees}, {"alphas", p.alphas}};
        } else {
          json w = json::object();
          for (auto t : kDocTypes) w[std::string(to_string(t))] = p.weights[index_of(t)];
          return json{{"weights", w}, {"bias", classes_json(p.bias)}};
        }
      },
      params);
}

inline DocType doc_type_from_json(const json& j) {
  auto t = parse_doc_type(j.get<std::string>());
  if (!t) throw ModelFormatError("unknown document type " + j.dump());
  return *t;
}

inline ModelParams params_from_json(ModelKind kind, const json& j, std::size_t dims) {
  switch (kind) {
    case ModelKind::BaselineRandom: return RandomParams{classes_from_json(j.at("weights"))};
    case ModelKind::BaselineThreshold:
      return ThresholdParams{threshold_table_from_json(j.at("table")), doc_type_from_json(j.at("fallback"))};
    case ModelKind::GaussianNB: {
      GnbParams p;
      p.priors = classes_from_json(j.at("priors"));
      for (auto t : kDocTypes) {
        p.means[index_of(t)] = j.at("means").at(std::string(to_string(t))).get<std::vector<double>>();
        p.variances[index_of(t)] = j.at("variances").at(std::string(to_string(t))).get<std::vector<double>>();
      }
      return p;
    }
    case ModelKind::Knn: {
      KnnParams p;
      p.k = j.at("k").get<std::size_t>();
      p.points.cols = dims;
      for (const auto& row : j.at("points")) {
        const auto r = row.get<std::vector<double>>();
        if (r.size() != dims) throw ModelFormatError("knn point width does not match the feature count");
        p.points.values.insert(p.points.values.end(), r.begin(), r.end());
      }
      for (const auto& l : j.at("labels")) p.labels.push_back(doc_type_from_json(l));
      return p;
    }
    case ModelKind::DecisionTree: return TreeParams{tree_from_json(j.at("tree"))};
    case ModelKind::RandomForest: {
      ForestParams p;
      for (const auto& t : j.at("trees")) p.trees.push_back(tree_from_json(t));
      return p;
    }
    case ModelKind::AdaBoost: {
      BoostParams p;
      for (const auto& t : j.at("trees")) p.trees.push_back(tree_from_json(t));
      p.alphas = j.at("alphas").get<std::vector<double>>();
      return p;
    }
    case ModelKind::LinearSvm: {
      SvmParams p;
      for (auto t : kDocTypes)
        p.weights[index_of(t)] = j.at("weights").at(std::string(to_string(t))).get<std::vector<double>>();
      p.bias = classes_from_json(j.at("bias"));
      return p;
    }
  }
  throw ModelFormatError("unknown model kind");
}

}  // namespace detail

inline json to_json(const ModelArtifact& m) {
  json features = json::array();
  for (auto f : m.features) features.push_back(std::string(to_string(f)));
  return json{{"format_version", m.format_version},
              {"kind", std::string(to_string(m.kind))},
              {"features", features},
              {"transform", to_json(m.transform)},
              {"hyperparameters", m.hyperparameters.values()},
              {"seed", m.seed},
              {"parameters", detail::params_json(m.params)}};
}

// Validates structure; throws UnsupportedVersionError for a format_version
// this build does not read and ModelFormatError for anything else.
inline ModelArtifact model_from_json(const json& j) {
  try {
    if (!j.is_object() || !j.contains("format_version")) throw ModelFormatError("model: missing format_version");
    const int version = j.at("format_version").get<int>();
    if (version != kFormatVersion)
      throw UnsupportedVersionError("model: unsupported format_version " + std::to_string(version) +
                                    " (this build reads " + std::to_string(kFormatVersion) + ")");
    ModelArtifact m;
    m.format_version = version;
    auto kind = parse_model_kind(j.at("kind").get<std::string>());
    if (!kind) throw ModelFormatError("model: unknown kind " + j.at("kind").dump());
    m.kind = *kind;
    std::vector<FeatureId> ids;
    for (const auto& f : j.at("features")) {
      auto id = parse_feature_id(f.get<std::string>());
      if (!id) throw ModelFormatError("model: unknown feature " + f.dump());
      ids.push_back(*id);
    }
    const auto n_listed = ids.size();
    m.features = FeatureSet(std::move(ids));
    if (m.features.size() != n_listed) throw ModelFormatError("model: duplicate feature ids");
    m.transform = transform_from_json(j.at("transform"), m.features.size());
    m.hyperparameters = Hyperparams(j.at("hyperparameters").get<std::map<std::string, double>>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.params = detail::params_from_json(m.kind, j.at("parameters"), m.features.size());
    validate(m);
    return m;
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("model: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ModelFormatError(std::string("model: ") + e.what());
  }
}

inline std::string serialize_model(const ModelArtifact& m) { return to_json(m).dump() + '\n'; }

inline void save_model(const ModelArtifact& m, std::ostream& out) { out << serialize_model(m); }

inline ModelArtifact load_model(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelFormatError(std::string("model: parse error: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace papertype
