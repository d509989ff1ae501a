#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairaudit/causal.hpp"
#include "fairaudit/core_data.hpp"
#include "fairaudit/threshold_policy.hpp"

// Logistic-regression classifier and the mitigation strategies built on it:
// unaware training, suppression of correlated features, and group-specific
// threshold post-processing towards (conditional) demographic parity.

namespace fairaudit {

enum class Strategy { full, ftu, suppression, dp_post, cdp_post };

struct MitigationSpec {
  Strategy strategy = Strategy::full;
  // Suppression keeps features with |corr(feature, A)| <= threshold, unless
  // an explicit drop list is given.
  double threshold = 0.05;
  std::vector<std::string> drop;
  std::string conditioning;  // cdp_post

  // full | ftu | supp:<threshold> | supp-drop:<col,col> | dp | cdp:<column>
  static MitigationSpec parse(const std::string& text);
  std::string to_string() const;
  bool uses_sensitive() const noexcept {
    return strategy == Strategy::full || strategy == Strategy::dp_post ||
           strategy == Strategy::cdp_post;
  }
};

struct TrainConfig {
  double l2 = 0.0;
  std::size_t max_epochs = 20000;
  double gradient_tolerance = 1e-8;
  std::size_t grid_size = 200;  // post-processing rate grid
  std::size_t min_count = 30;   // cdp strata below this use the global policy
};

// One model input. Categorical inputs (and the sensitive attribute) use
// reference coding: the first training level gets no column.
struct EncodedSource {
  std::string name;
  bool categorical = false;
  bool sensitive = false;
  std::vector<std::string> levels;
};

struct FeatureEncoding {
  std::vector<EncodedSource> sources;
  std::vector<double> means;   // per design column
  std::vector<double> scales;  // per design column, > 0

  std::size_t columns() const noexcept { return means.size(); }
  // Standardized design matrix, row-major. Unseen categorical levels throw.
  std::vector<double> design(const Dataset& ds) const;
};

struct SuppressionReport {
  std::vector<std::pair<std::string, double>> correlations;  // |corr| with A
  std::vector<std::string> dropped;
  std::vector<std::string> kept;
};

struct ClassifierModel {
  MitigationSpec spec;
  FeatureEncoding encoding;
  std::vector<double> weights;
  double intercept = 0.0;
  std::size_t epochs = 0;
  double gradient_norm = 0.0;
  std::optional<ThresholdPolicy> policy;
  std::optional<SuppressionReport> suppression;

  bool uses_sensitive() const;
  std::vector<std::string> input_names() const;
  std::vector<double> scores(const Dataset& ds) const;
  // Score from raw input values aligned with `encoding.sources`; categorical
  // values are matched against numerically parsed level labels.
  double score_values(std::span<const double> values) const;
};

// Absolute point-biserial correlation of every feature with A (max over
// levels and group indicators for non-binary columns); 0 for constant columns.
std::vector<std::pair<std::string, double>> sensitive_correlations(const Dataset& ds);

// Mean log-loss (+ l2/2 |w|^2) and its gradient on a standardized design;
// gradient[0] is the intercept term.
double log_loss(std::span<const double> design, std::size_t columns, std::span<const int> y,
                double intercept, std::span<const double> weights, double l2,
                std::vector<double>* gradient = nullptr);

// Deterministic: same inputs give bit-identical weights. The seed is
// accepted for interface symmetry; training draws no randomness.
ClassifierModel train(const Dataset& ds, const MitigationSpec& spec, const TrainConfig& cfg = {},
                      std::uint64_t seed = 0);

// Common acceptance rate r on a grid; group g accepts its ceil(r n_g)
// highest-scored rows. The rate with most correct decisions wins, ties to
// the smaller rate.
ThresholdPolicy fit_dp_threshold(const Dataset& ds, std::span<const double> scores,
                                 std::size_t grid_size);
ThresholdPolicy fit_dp_threshold(const Dataset& ds, const ClassifierModel& model,
                                 std::size_t grid_size);
ThresholdPolicy fit_cdp_threshold(const Dataset& ds, std::span<const double> scores,
                                  const std::string& conditioning, std::size_t grid_size,
                                  std::size_t min_count);
ThresholdPolicy fit_cdp_threshold(const Dataset& ds, const ClassifierModel& model,
                                  const std::string& conditioning, std::size_t grid_size,
                                  std::size_t min_count);

// Scores plus decisions: by `policy` when given, else by the model's own
// policy, else S >= 0.5.
PredictionSet predict(const ClassifierModel& model, const Dataset& ds,
                      const std::optional<ThresholdPolicy>& policy = std::nullopt);

// The model's decision rule as a function of a dataset (for flip audits).
std::function<std::vector<int>(const Dataset&)> decision_function(
    const ClassifierModel& model, const std::optional<ThresholdPolicy>& policy = std::nullopt);

// The model's decision rule over the nodes of a structural model.
ScmDecision scm_decision(const ClassifierModel& model, const Scm& scm,
                         const std::optional<ThresholdPolicy>& policy = std::nullopt);

std::string model_to_json(const ClassifierModel& model);
ClassifierModel model_from_json(const std::string& text);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace fairaudit
