#include <gtest/gtest.h>

#include <limits>
#include <sstream>

#include "papertype/models.hpp"
#include "support.hpp"

using namespace papertype;

namespace {

ModelArtifact round_trip(const ModelArtifact& m) {
  std::stringstream ss;
  save_model(m, ss);
  return load_model(ss);
}

ModelArtifact trained(ModelKind kind, TransformKind tr = TransformKind::Identity) {
  Rng rng(80);
  TrainOptions opt;
  opt.transform = tr;
  opt.seed = 17;
  return train(kind, testsupport::random_examples(rng, 120), opt);
}

json tree_param(const ModelArtifact& m) { return to_json(m)["parameters"]["tree"]; }

}  // namespace

TEST(Serialize, PropertyRoundTripPredictsIdentically) {
  Rng rng(81);
  for (auto kind : kModelKinds)
    for (auto tr : {TransformKind::Identity, TransformKind::ZScore, TransformKind::LogScale}) {
      const auto m = trained(kind, tr);
      const auto back = round_trip(m);
      EXPECT_EQ(back, m) << to_string(kind);
      EXPECT_EQ(serialize_model(back), serialize_model(m));
      for (int i = 0; i < 1000; ++i) {
        const auto v = testsupport::random_features(rng);
        const auto a = predict(m, v), b = predict(back, v);
        EXPECT_EQ(a.label, b.label);
        EXPECT_EQ(a.scores, b.scores);
      }
    }
}

TEST(Serialize, SubsetFeaturesRoundTrip) {
  Rng rng(82);
  TrainOptions opt;
  opt.features = FeatureSet({FeatureId::Pages, FeatureId::TotalWords});
  const auto m = train(ModelKind::RandomForest, testsupport::random_examples(rng, 100), opt);
  EXPECT_EQ(round_trip(m), m);
}

TEST(Serialize, FutureVersionRejected) {
  auto j = to_json(trained(ModelKind::GaussianNB));
  j["format_version"] = kFormatVersion + 1;
  std::istringstream in(j.dump());
  EXPECT_THROW(load_model(in), UnsupportedVersionError);
}

TEST(Serialize, TruncatedFileIsFormatError) {
  const auto text = serialize_model(trained(ModelKind::RandomForest));
  for (std::size_t cut : {std::size_t{0}, std::size_t{1}, text.size() / 3, text.size() / 2, text.size() - 3}) {
    std::istringstream in(text.substr(0, cut));
    EXPECT_THROW(load_model(in), ModelFormatError) << cut;
  }
}

TEST(Serialize, UnknownKeysIgnored) {
  auto j = to_json(trained(ModelKind::Knn));
  j["config_hash"] = "abc";
  j["note"] = {{"x", 1}};
  std::istringstream in(j.dump());
  EXPECT_NO_THROW(load_model(in));
}

TEST(Serialize, StructuralDefectsRejected) {
  const auto tree = trained(ModelKind::DecisionTree);
  ASSERT_GE(std::get<TreeParams>(tree.params).tree.nodes.size(), 3u);

  auto load_with = [&](const std::string& key, json value) {
    auto j = to_json(tree);
    j["parameters"]["tree"][key] = std::move(value);
    return model_from_json(j);
  };
  auto t = tree_param(tree);
  auto left = t["left"];
  left[0] = 0;  // self-loop
  EXPECT_THROW(load_with("left", left), ModelFormatError);
  left = t["left"];
  left[0] = 9999;
  EXPECT_THROW(load_with("left", left), ModelFormatError);
  auto feature = t["feature"];
  feature[0] = 7;
  EXPECT_THROW(load_with("feature", feature), ModelFormatError);
  auto dist = t["distribution"];
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (!dist[i].is_null()) {
      dist[i] = json::array({0.5, 0.2, 0.2});
      break;
    }
  EXPECT_THROW(load_with("distribution", dist), ModelFormatError);
  auto thr = t["threshold"];
  thr.erase(thr.size() - 1);
  EXPECT_THROW(load_with("threshold", thr), ModelFormatError);

  auto j = to_json(tree);
  j["kind"] = "random-forest";
  EXPECT_THROW(model_from_json(j), ModelFormatError);
  j = to_json(tree);
  j["features"] = json::array({"f1", "f1"});
  EXPECT_THROW(model_from_json(j), ModelFormatError);
  j = to_json(tree);
  j["kind"] = "perceptron";
  EXPECT_THROW(model_from_json(j), ModelFormatError);
}

TEST(Serialize, ValidateRejectsBadArtifacts) {
  auto rnd = trained(ModelKind::BaselineRandom);
  std::get<RandomParams>(rnd.params).weights = {0.5, 0.5, 0.5};
  EXPECT_THROW(validate(rnd), ModelFormatError);

  auto boost = trained(ModelKind::AdaBoost);
  std::get<BoostParams>(boost.params).alphas[0] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(validate(boost), ModelFormatError);
  boost = trained(ModelKind::AdaBoost);
  std::get<BoostParams>(boost.params).alphas.pop_back();
  EXPECT_THROW(validate(boost), ModelFormatError);

  auto gnb = trained(ModelKind::GaussianNB);
  std::get<GnbParams>(gnb.params).variances[1][2] = 0.0;
  EXPECT_THROW(validate(gnb), ModelFormatError);

  auto knn = trained(ModelKind::Knn);
  std::get<KnnParams>(knn.params).labels.pop_back();
  EXPECT_THROW(validate(knn), ModelFormatError);

  auto svm = trained(ModelKind::LinearSvm, TransformKind::ZScore);
  svm.transform.scale.pop_back();
  EXPECT_THROW(validate(svm), ModelFormatError);

  auto forest = trained(ModelKind::RandomForest);
  forest.params = TreeParams{};
  EXPECT_THROW(validate(forest), ModelFormatError);
}
