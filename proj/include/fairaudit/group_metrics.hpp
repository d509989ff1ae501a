#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/core_data.hpp"
#include "fairaudit/threshold_policy.hpp"

// Observational group-fairness criteria over decisions and scores.
//
// Every report carries per-group values; a value is undefined (with a
// reason) when its denominator is empty. Aggregates are taken over the
// defined groups only:
//   gap   = max pairwise |v_a - v_b| = max - min
//   ratio = min / max, and 1 when max = 0
// Both are absent when fewer than two groups are defined.

namespace fairaudit {

struct MetricValue {
  std::optional<double> value;
  std::string reason;  // why the value is undefined

  static MetricValue of(double v) { return {v, {}}; }
  static MetricValue undefined(std::string why) { return {std::nullopt, std::move(why)}; }
};

struct MetricReport {
  std::string metric;
  std::vector<std::string> groups;
  std::vector<MetricValue> values;
  // Composite criteria (equality of odds, sufficiency) keep one report per
  // component rate; their gap is the max of component gaps and their ratio
  // the min of component ratios.
  std::vector<MetricReport> components;
  std::optional<double> gap;
  std::optional<double> ratio;
  std::vector<std::string> undefined_groups;

  bool has_undefined() const noexcept { return !undefined_groups.empty(); }
  bool aggregate_defined() const noexcept { return gap.has_value(); }
  std::optional<double> value_for(const std::string& group) const;
};

MetricReport make_report(std::string metric, std::vector<std::string> groups,
                         std::vector<MetricValue> values);
MetricReport make_composite(std::string metric, std::vector<MetricReport> components);

// Confusion counts and score moments of one group.
struct GroupCounts {
  std::size_t n = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t accepted = 0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double score_sum_pos = 0.0;
  double score_sum_neg = 0.0;
  std::optional<double> auc;
};

class GroupStats {
 public:
  // Decisions, target and scores are each optional; rates that need a
  // missing part come back undefined.
  static GroupStats compute(const Dataset& ds, const PredictionSet& preds);

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<GroupCounts>& groups() const noexcept { return groups_; }
  std::size_t size() const noexcept { return groups_.size(); }
  bool has_decisions() const noexcept { return has_decisions_; }
  bool has_target() const noexcept { return has_target_; }
  bool has_scores() const noexcept { return has_scores_; }

  MetricValue base_rate(std::size_t g) const;
  MetricValue acceptance_rate(std::size_t g) const;
  MetricValue tpr(std::size_t g) const;
  MetricValue fpr(std::size_t g) const;
  MetricValue fnr(std::size_t g) const;
  MetricValue tnr(std::size_t g) const;
  MetricValue ppv(std::size_t g) const;
  MetricValue npv(std::size_t g) const;
  MetricValue accuracy(std::size_t g) const;
  MetricValue mean_score_pos(std::size_t g) const;
  MetricValue mean_score_neg(std::size_t g) const;
  MetricValue auc(std::size_t g) const;

  // Report over groups of one of the rates above.
  template <typename Rate>
  MetricReport report(std::string metric, Rate rate) const {
    std::vector<MetricValue> v;
    for (std::size_t g = 0; g < groups_.size(); ++g) v.push_back((this->*rate)(g));
    return make_report(std::move(metric), labels_, std::move(v));
  }

 private:
  std::vector<std::string> labels_;
  std::vector<GroupCounts> groups_;
  bool has_decisions_ = false;
  bool has_target_ = false;
  bool has_scores_ = false;
};

// Mann-Whitney AUC, ties counted 1/2. Undefined without both classes.
std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels);

MetricReport demographic_parity(const Dataset& ds, const PredictionSet& preds);
MetricReport equality_of_odds(const Dataset& ds, const PredictionSet& preds);
MetricReport predictive_equality(const Dataset& ds, const PredictionSet& preds);
MetricReport equality_of_opportunity(const Dataset& ds, const PredictionSet& preds);
MetricReport predictive_parity(const Dataset& ds, const PredictionSet& preds);
MetricReport sufficiency(const Dataset& ds, const PredictionSet& preds);
MetricReport accuracy_parity(const Dataset& ds, const PredictionSet& preds);
MetricReport balance_positive_class(const Dataset& ds, const PredictionSet& preds);
MetricReport balance_negative_class(const Dataset& ds, const PredictionSet& preds);
MetricReport auc_parity(const Dataset& ds, const PredictionSet& preds);

struct StratumReport {
  std::string label;
  std::size_t count = 0;
  // Every group has at least min_count rows in this stratum.
  bool qualifies = false;
  MetricReport report;
};

struct StratifiedReport {
  std::string metric;
  std::string conditioning;
  std::size_t min_count = 0;
  std::vector<StratumReport> strata;
  std::optional<double> max_gap;
  // Mean of qualifying stratum gaps weighted by stratum row count.
  std::optional<double> weighted_mean_gap;
  std::vector<std::string> skipped;
};

StratifiedReport conditional_demographic_parity(const Dataset& ds, const PredictionSet& preds,
                                                const std::string& conditioning,
                                                std::size_t min_count);
StratifiedReport conditional_demographic_parity(const Dataset& ds, const PredictionSet& preds,
                                                const Strata& strata, std::size_t min_count);

struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  std::size_t positives = 0;
  double mean_score = 0.0;
  double empirical_rate = 0.0;
  bool qualifies = false;

  double error() const { return std::abs(empirical_rate - mean_score); }
};

struct GroupCalibration {
  std::string group;
  std::vector<CalibrationBin> bins;
  std::optional<double> error;  // max over qualifying bins
  std::vector<std::size_t> excluded_bins;
};

struct CalibrationReport {
  int bins = 10;
  std::size_t min_count = 30;
  std::vector<GroupCalibration> groups;
  // Per-group calibration errors as a report (gap compares groups).
  MetricReport errors;
  // Largest calibration error over groups: the violation magnitude.
  std::optional<double> max_error;
};

inline constexpr int kDefaultCalibrationBins = 10;
inline constexpr std::size_t kDefaultCalibrationMinCount = 30;

CalibrationReport calibration_within_groups(const Dataset& ds, const PredictionSet& preds,
                                            int bins = kDefaultCalibrationBins,
                                            std::size_t min_count = kDefaultCalibrationMinCount);

// Decisions S >= t_cell; scores are kept. `strata` must be given iff the
// policy is stratified.
PredictionSet apply_threshold(const PredictionSet& preds, const ThresholdPolicy& policy,
                              const SensitiveAttribute& groups,
                              const std::optional<Strata>& strata = std::nullopt);

}  // namespace fairaudit
