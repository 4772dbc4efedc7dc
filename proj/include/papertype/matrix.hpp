#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "papertype/core.hpp"

namespace papertype {

// Dense row-major matrix of model inputs.
struct Matrix {
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t columns) : cols(columns), values(rows * columns, 0.0) {}

  std::size_t rows() const noexcept { return cols == 0 ? 0 : values.size() / cols; }
  std::span<const double> row(std::size_t i) const noexcept { return {values.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) noexcept { return {values.data() + i * cols, cols}; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return values[i * cols + j]; }
};

struct Dataset {
  Matrix x;
  std::vector<DocType> y;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t dims() const noexcept { return x.cols; }
};

// Model input for one document; at most four features, no allocation.
struct InputVector {
  std::array<double, kNumFeatures> values{};
  std::size_t size = 0;

  std::span<double> span() noexcept { return {values.data(), size}; }
  std::span<const double> span() const noexcept { return {values.data(), size}; }
};

inline InputVector select_features(const FeatureVector& fv, const FeatureSet& features) {
  InputVector in;
  in.size = features.size();
  for (std::size_t j = 0; j < features.size(); ++j) {
    auto v = fv.get(features[j]);
    if (!v) throw ArgumentError("feature " + std::string(to_string(features[j])) + " is missing");
    in.values[j] = *v;
  }
  return in;
}

inline Dataset make_dataset(std::span<const LabeledExample> examples, const FeatureSet& features) {
  Dataset d;
  d.x = Matrix(examples.size(), features.size());
  d.y.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto in = select_features(examples[i].features, features);
    std::copy(in.values.begin(), in.values.begin() + static_cast<std::ptrdiff_t>(in.size), d.x.row(i).begin());
    d.y.push_back(examples[i].label);
  }
  return d;
}

}  // namespace papertype
