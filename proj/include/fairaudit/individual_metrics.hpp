#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fairaudit/core_data.hpp"

namespace fairaudit {

enum class DistanceKind { euclidean_standardized, euclidean_raw, user_weighted };

// Distance on feature space. Categorical features are one-hot encoded.
// euclidean_standardized z-scores every encoded column (zero-variance
// columns are left centred but unscaled); user_weighted applies the same
// standardization and then weights squared differences per source feature.
struct DistanceSpec {
  DistanceKind kind = DistanceKind::euclidean_standardized;
  std::vector<double> weights;

  static DistanceSpec parse(const std::string& text);
};

// Rows of a dataset embedded in R^d for distance computations.
class FeatureSpace {
 public:
  // include_sensitive appends the sensitive attribute (one-hot) as the last
  // source feature; user weights then need features()+1 entries.
  FeatureSpace(const Dataset& ds, const DistanceSpec& spec, bool include_sensitive = false);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dims() const noexcept { return dims_; }
  double squared_distance(std::size_t i, std::size_t j) const;
  double distance(std::size_t i, std::size_t j) const;

 private:
  std::size_t rows_ = 0;
  std::size_t dims_ = 0;
  std::vector<double> coords_;  // row-major
};

// 1 - (1/n) sum_i |yhat_i - mean of yhat over kNN(x_i)|. Neighbours exclude
// the row itself; every row tied with the k-th distance is included.
double consistency(const Dataset& ds, const PredictionSet& preds, std::size_t k,
                   const DistanceSpec& dist = {});

// Rows of the k-nearest-neighbour sets used by consistency (for audits).
std::vector<std::size_t> nearest_neighbours(const FeatureSpace& space, std::size_t row, std::size_t k);

// (1/(n1 n0)) sum_{a_i=1, a_j=0} exp(-dist(x_i,x_j)) |yhat_i - yhat_j| for a
// two-group sensitive attribute; group code 1 plays a_i = 1.
double similarity_weighted_disparity(const Dataset& ds, const PredictionSet& preds,
                                     const DistanceSpec& dist = {});

// A deployed decision rule: maps a dataset (with its sensitive column) to
// binary decisions. FTU rules simply never read the sensitive column.
using DecisionFunction = std::function<std::vector<int>(const Dataset&)>;

struct FlipReport {
  double flip_rate = 0.0;         // mean |yhat - yhat'|
  double flip_consistency = 1.0;  // 1 - flip_rate
  std::size_t rows = 0;
  std::vector<std::string> groups;
  // Flip rate restricted to units of each original group.
  std::vector<std::optional<double>> group_flip_rate;
  std::vector<int> original;
  std::vector<int> flipped;
};

// Re-evaluates the rule with every unit's group replaced by
// flip_map[group]. A binary attribute defaults to |1 - A|; more groups need
// an explicit permutation.
FlipReport flip_assessment(const Dataset& ds, const DecisionFunction& model,
                           const std::optional<std::vector<int>>& flip_map = std::nullopt);

struct LipschitzPair {
  std::size_t i = 0;
  std::size_t j = 0;
  double dist_x = 0.0;
  double dist_y = 0.0;
  double ratio() const { return dist_y / dist_x; }
};

struct LipschitzReport {
  double lipschitz_constant = 1.0;
  bool exhaustive = false;
  bool used_scores = false;
  std::size_t pairs_examined = 0;
  std::size_t pairs_positive_distance = 0;
  // Pairs with dist_y >= L * dist_x among pairs at positive distance.
  std::size_t violations = 0;
  std::vector<LipschitzPair> worst;  // largest ratios first
  // Identical feature vectors with different outputs: infinite ratio.
  std::size_t infinite_ratio_pairs = 0;
  std::vector<LipschitzPair> infinite_witnesses;
  std::optional<double> empirical_constant;  // max ratio observed
};

inline constexpr std::size_t kLipschitzWitnesses = 10;

// Checks dist_Y < L dist_X~ on pairs of rows, where X~ includes the sensitive
// attribute and dist_Y is |delta yhat| (or |delta s| when only scores exist).
// Every unordered pair is examined when max_pairs covers them; otherwise
// max_pairs pairs are drawn uniformly with replacement.
LipschitzReport lipschitz_audit(const Dataset& ds, const PredictionSet& preds,
                                const DistanceSpec& dist, double lipschitz_constant,
                                std::size_t max_pairs, std::uint64_t seed);

}  // namespace fairaudit
