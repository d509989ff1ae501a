#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairaudit/core_data.hpp"
#include "fairaudit/individual_metrics.hpp"
#include "fairaudit/modeling.hpp"
#include "fairaudit/report_json.hpp"

namespace fairaudit::cli {

struct MetricInfo {
  std::string name;
  std::string description;
  bool needs_decisions = false;
  bool needs_target = false;
  bool needs_scores = false;
  bool needs_model = false;
  bool needs_condition = false;
};

const std::vector<MetricInfo>& metric_registry();
const MetricInfo* find_metric(const std::string& name);
// Comma-separated names, "all" for the whole registry. Unknown names throw
// std::invalid_argument.
std::vector<std::string> parse_metric_list(const std::string& text);

struct AuditOptions {
  std::optional<std::string> condition_on;
  std::size_t k = 5;
  DistanceSpec distance;
  std::size_t min_count = 30;
  int bins = 10;
  double lipschitz = 1.0;
  std::size_t max_pairs = 100000;
  std::uint64_t seed = 1;
};

struct AuditOutcome {
  ojson metrics = ojson::object();
  ojson skipped = ojson::object();
  // Some metric was skipped or reported undefined cells.
  bool partial = false;
};

// Metrics whose inputs are missing are skipped (recorded with a reason) when
// `explicit_request` is false, and raise PreconditionError otherwise.
AuditOutcome run_audit(const Dataset& ds, const PredictionSet& preds, const ClassifierModel* model,
                       const std::vector<std::string>& metrics, const AuditOptions& opts,
                       bool explicit_request);

// "path.to.key,value" lines for the csv output format.
std::string flatten_csv(const ojson& doc);

}  // namespace fairaudit::cli
