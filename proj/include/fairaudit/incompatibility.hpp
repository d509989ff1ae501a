#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/core_data.hpp"

namespace fairaudit {

// Gaps of the three observational criteria on one set of decisions. A gap is
// absent when its rates are undefined in fewer than two groups' worth of data;
// `undefined` lists the components that were affected.
struct CriteriaGaps {
  std::optional<double> indep_gap;      // acceptance-rate gap
  std::optional<double> sep_gap;        // max(fpr gap, fnr gap)
  std::optional<double> suff_gap;       // max(ppv gap, npv gap)
  std::optional<double> base_rate_gap;  // max pairwise |p_a - p_b|
  double usefulness = 0.0;              // U(Y, Yhat)
  std::vector<std::string> undefined;
};

CriteriaGaps gaps(const Dataset& ds, const PredictionSet& preds);

// Acceptance-rate gap implied by exact separation: the acceptance rate of
// group a is fpr (1 - p_a) + tpr p_a.
double separation_implies_dp_gap(double tpr, double fpr, std::span<const double> base_rates);

struct ImpliedGap {
  std::optional<double> gap;
  // ppv + npv = 1: the decision carries no information about Y and the
  // acceptance rate is not determined by the base rate.
  bool degenerate = false;
};

// Acceptance-rate gap implied by exact sufficiency, from
// p = ppv ppr + (1 - npv)(1 - ppr).
ImpliedGap sufficiency_implies_dp_gap(double ppv, double npv, std::span<const double> base_rates,
                                      double degenerate_tol = 1e-12);

// Binary check of the separation/sufficiency exclusion: with unequal base
// rates and at least one false positive, both criteria cannot hold.
struct ExclusionVerdict {
  bool applicable = false;
  // Separation, sufficiency, unequal base rates and a false positive all
  // hold at once. Never expected when `applicable`.
  bool forbidden_combination = false;
  bool separation_holds = false;
  bool sufficiency_holds = false;
  std::optional<double> sep_gap;
  std::optional<double> suff_gap;
  std::optional<double> base_rate_gap;
  std::size_t false_positives = 0;
  std::string note;
};

ExclusionVerdict check_sep_suff_exclusion(const Dataset& ds, const PredictionSet& preds,
                                          double tol = 1e-9);

}  // namespace fairaudit
