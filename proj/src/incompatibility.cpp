#include "fairaudit/incompatibility.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fairaudit/errors.hpp"
#include "fairaudit/group_metrics.hpp"
#include "fairaudit/info_theory.hpp"

namespace fairaudit {
namespace {

std::optional<double> max_opt(std::optional<double> a, std::optional<double> b) {
  if (!a || !b) return std::nullopt;
  return std::max(*a, *b);
}

double max_pairwise_diff(std::span<const double> v) {
  if (v.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError(std::string(what) + " must lie in [0,1]");
}

}  // namespace

CriteriaGaps gaps(const Dataset& ds, const PredictionSet& preds) {
  const auto& yhat = preds.require_decisions("gaps");
  const auto& y = ds.require_target("gaps");
  const auto stats = GroupStats::compute(ds, preds);
  CriteriaGaps out;

  auto track = [&](const MetricReport& r) {
    if (r.has_undefined() || !r.gap) out.undefined.push_back(r.metric);
    return r.gap;
  };
  out.indep_gap = track(stats.report("acceptance_rate", &GroupStats::acceptance_rate));
  out.base_rate_gap = track(stats.report("base_rate", &GroupStats::base_rate));
  const auto fpr = track(stats.report("fpr", &GroupStats::fpr));
  const auto fnr = track(stats.report("fnr", &GroupStats::fnr));
  const auto ppv = track(stats.report("ppv", &GroupStats::ppv));
  const auto npv = track(stats.report("npv", &GroupStats::npv));
  out.sep_gap = max_opt(fpr, fnr);
  out.suff_gap = max_opt(ppv, npv);
  out.usefulness = symmetric_uncertainty(JointTable::from_pairs(y, yhat, 2, 2)).value;
  return out;
}

double separation_implies_dp_gap(double tpr, double fpr, std::span<const double> base_rates) {
  check_unit(tpr, "tpr");
  check_unit(fpr, "fpr");
  for (double p : base_rates) check_unit(p, "base rate");
  return std::abs(tpr - fpr) * max_pairwise_diff(base_rates);
}

ImpliedGap sufficiency_implies_dp_gap(double ppv, double npv, std::span<const double> base_rates,
                                      double degenerate_tol) {
  check_unit(ppv, "ppv");
  check_unit(npv, "npv");
  for (double p : base_rates) check_unit(p, "base rate");
  const double denom = std::abs(ppv + npv - 1.0);
  if (denom <= degenerate_tol) return {std::nullopt, true};
  return {max_pairwise_diff(base_rates) / denom, false};
}

ExclusionVerdict check_sep_suff_exclusion(const Dataset& ds, const PredictionSet& preds,
                                          double tol) {
  const auto& yhat = preds.require_decisions("check_sep_suff_exclusion");
  const auto& y = ds.require_target("check_sep_suff_exclusion");
  ExclusionVerdict v;
  for (std::size_t i = 0; i < y.size(); ++i) v.false_positives += (yhat[i] == 1 && y[i] == 0);

  const auto g = gaps(ds, preds);
  v.sep_gap = g.sep_gap;
  v.suff_gap = g.suff_gap;
  v.base_rate_gap = g.base_rate_gap;
  v.separation_holds = g.sep_gap && *g.sep_gap < tol;
  v.sufficiency_holds = g.suff_gap && *g.suff_gap < tol;

  if (v.false_positives == 0) {
    v.note = "degenerate case, proposition inapplicable: no false positives";
    return v;
  }
  if (!g.base_rate_gap || *g.base_rate_gap < tol) {
    v.note = "degenerate case, proposition inapplicable: equal base rates";
    return v;
  }
  if (!g.sep_gap || !g.suff_gap) {
    v.note = "proposition inapplicable: undefined rates (" + fmt::format("{}", fmt::join(g.undefined, ", ")) + ")";
    return v;
  }
  v.applicable = true;
  v.forbidden_combination = v.separation_holds && v.sufficiency_holds;
  if (v.forbidden_combination)
    v.note = "separation and sufficiency both hold with unequal base rates";
  else if (v.separation_holds)
    v.note = "separation holds, sufficiency violated";
  else if (v.sufficiency_holds)
    v.note = "sufficiency holds, separation violated";
  else
    v.note = "neither separation nor sufficiency holds";
  return v;
}

}  // namespace fairaudit
