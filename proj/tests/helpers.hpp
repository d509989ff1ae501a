#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairaudit/core_data.hpp"
#include "fairaudit/random.hpp"

namespace testing {

using fairaudit::Dataset;
using fairaudit::FeatureColumn;
using fairaudit::PredictionSet;
using fairaudit::SensitiveAttribute;

inline SensitiveAttribute binary_groups(std::vector<int> codes, std::string name = "A") {
  return SensitiveAttribute(std::move(name), std::move(codes), {"0", "1"});
}

// Dataset with one continuous feature per entry of `features`.
inline Dataset make_dataset(std::vector<std::vector<double>> features, std::vector<int> groups,
                            std::optional<std::vector<int>> target = std::nullopt) {
  std::vector<FeatureColumn> cols;
  for (std::size_t k = 0; k < features.size(); ++k)
    cols.push_back(FeatureColumn::continuous("x" + std::to_string(k), std::move(features[k])));
  return Dataset(std::move(cols), binary_groups(std::move(groups)), std::move(target));
}

inline PredictionSet decisions(std::vector<int> d) {
  PredictionSet p;
  p.decisions = std::move(d);
  return p;
}

inline PredictionSet scores(std::vector<double> s) {
  PredictionSet p;
  p.scores = std::move(s);
  return p;
}

// Random binary-group dataset with `dims` continuous features, target and
// decisions.
struct RandomCase {
  Dataset ds;
  PredictionSet preds;
};

inline RandomCase random_case(fairaudit::Rng& rng, std::size_t n, std::size_t dims) {
  std::vector<std::vector<double>> x(dims, std::vector<double>(n));
  std::vector<int> a(n), y(n), d(n);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.uniform_index(2));
    for (auto& col : x) col[i] = std::round(rng.normal() * 4.0) / 4.0;  // coarse grid: ties
    y[i] = static_cast<int>(rng.uniform_index(2));
    d[i] = static_cast<int>(rng.uniform_index(2));
    s[i] = std::round(rng.uniform01() * 20.0) / 20.0;
  }
  RandomCase c{make_dataset(std::move(x), std::move(a), std::move(y)), {}};
  c.preds.decisions = std::move(d);
  c.preds.scores = std::move(s);
  return c;
}

}  // namespace testing
