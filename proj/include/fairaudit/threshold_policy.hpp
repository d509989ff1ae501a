#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fairaudit {

// Per-group (optionally per-stratum) score thresholds t: accept iff S >= t.
// Cells are keyed by labels rather than codes so a policy fitted on one file
// applies to another whose categorical codes were assigned in a different
// order. Unstratified policies use the empty string as stratum label.
struct ThresholdPolicy {
  std::optional<std::string> stratum_column;
  std::map<std::pair<std::string, std::string>, double> cells;
  // Common acceptance rate chosen for the whole population (DP) or, for a
  // stratified policy, for the fallback policy.
  double target_rate = 0.0;
  std::map<std::string, double> stratum_rates;
  std::vector<std::string> flags;

  // Throws PreconditionError for an uncovered cell.
  double threshold(const std::string& group, const std::string& stratum = {}) const;
  bool covers(const std::string& group, const std::string& stratum = {}) const;
};

}  // namespace fairaudit
