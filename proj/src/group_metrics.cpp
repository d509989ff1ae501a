#include "fairaudit/group_metrics.hpp"

#include <algorithm>
#include <numeric>

#include "fairaudit/errors.hpp"

namespace fairaudit {

namespace {

MetricValue ratio_of(std::size_t num, std::size_t den, const char* why) {
  if (den == 0) return MetricValue::undefined(why);
  return MetricValue::of(static_cast<double>(num) / static_cast<double>(den));
}

void aggregate(MetricReport& r) {
  std::optional<double> lo, hi;
  r.undefined_groups.clear();
  for (std::size_t g = 0; g < r.values.size(); ++g) {
    const auto& v = r.values[g].value;
    if (!v) {
      r.undefined_groups.push_back(r.groups[g]);
      continue;
    }
    lo = lo ? std::min(*lo, *v) : *v;
    hi = hi ? std::max(*hi, *v) : *v;
  }
  const auto defined = r.values.size() - r.undefined_groups.size();
  if (defined < 2) {
    r.gap.reset();
    r.ratio.reset();
    return;
  }
  r.gap = *hi - *lo;
  r.ratio = *hi > 0.0 ? *lo / *hi : 1.0;
}

}  // namespace

std::optional<double> MetricReport::value_for(const std::string& group) const {
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (groups[g] == group) return values[g].value;
  return std::nullopt;
}

MetricReport make_report(std::string metric, std::vector<std::string> groups,
                         std::vector<MetricValue> values) {
  MetricReport r;
  r.metric = std::move(metric);
  r.groups = std::move(groups);
  r.values = std::move(values);
  aggregate(r);
  return r;
}

MetricReport make_composite(std::string metric, std::vector<MetricReport> components) {
  MetricReport r;
  r.metric = std::move(metric);
  if (!components.empty()) r.groups = components.front().groups;
  for (const auto& c : components) {
    if (c.gap) r.gap = r.gap ? std::max(*r.gap, *c.gap) : *c.gap;
    if (c.ratio) r.ratio = r.ratio ? std::min(*r.ratio, *c.ratio) : *c.ratio;
    for (const auto& u : c.undefined_groups)
      if (std::find(r.undefined_groups.begin(), r.undefined_groups.end(), u) == r.undefined_groups.end())
        r.undefined_groups.push_back(u);
  }
  r.components = std::move(components);
  return r;
}

// ---------------------------------------------------------------------------

std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw PreconditionError("scores and labels differ in length");
  const auto n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Average 1-based rank of the tie block [i, j).
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const auto n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos);
  const double u = rank_sum_pos - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

GroupStats GroupStats::compute(const Dataset& ds, const PredictionSet& preds) {
  const auto n = ds.rows();
  if (preds.decisions && preds.decisions->size() != n)
    throw DataError("decision vector length does not match dataset");
  if (preds.scores && preds.scores->size() != n)
    throw DataError("score vector length does not match dataset");

  GroupStats s;
  s.labels_ = ds.sensitive().labels();
  s.groups_.resize(s.labels_.size());
  s.has_decisions_ = preds.decisions.has_value();
  s.has_scores_ = preds.scores.has_value();
  s.has_target_ = ds.has_target();
  const auto& a = ds.sensitive().codes();
  std::vector<std::vector<double>> group_scores(s.groups_.size());
  std::vector<std::vector<int>> group_labels(s.groups_.size());

  for (std::size_t i = 0; i < n; ++i) {
    auto& g = s.groups_[a[i]];
    ++g.n;
    const int d = s.has_decisions_ ? (*preds.decisions)[i] : 0;
    if (s.has_decisions_ && d) ++g.accepted;
    if (!s.has_target_) continue;
    const int y = (*ds.target())[i];
    if (y) {
      ++g.positives;
      if (s.has_decisions_) (d ? g.tp : g.fn)++;
    } else {
      ++g.negatives;
      if (s.has_decisions_) (d ? g.fp : g.tn)++;
    }
    if (s.has_scores_) {
      const double sc = (*preds.scores)[i];
      (y ? g.score_sum_pos : g.score_sum_neg) += sc;
      group_scores[a[i]].push_back(sc);
      group_labels[a[i]].push_back(y);
    }
  }
  if (s.has_target_ && s.has_scores_)
    for (std::size_t g = 0; g < s.groups_.size(); ++g)
      s.groups_[g].auc = roc_auc(group_scores[g], group_labels[g]);
  return s;
}

MetricValue GroupStats::base_rate(std::size_t g) const {
  if (!has_target_) return MetricValue::undefined("no target");
  return ratio_of(groups_[g].positives, groups_[g].n, "empty group");
}

MetricValue GroupStats::acceptance_rate(std::size_t g) const {
  if (!has_decisions_) return MetricValue::undefined("no decisions");
  return ratio_of(groups_[g].accepted, groups_[g].n, "empty group");
}

MetricValue GroupStats::tpr(std::size_t g) const {
  if (!has_decisions_ || !has_target_) return MetricValue::undefined("needs decisions and target");
  return ratio_of(groups_[g].tp, groups_[g].positives, "no positives in group");
}

MetricValue GroupStats::fpr(std::size_t g) const {
  if (!has_decisions_ || !has_target_) return MetricValue::undefined("needs decisions and target");
  return ratio_of(groups_[g].fp, groups_[g].negatives, "no negatives in group");
}

MetricValue GroupStats::fnr(std::size_t g) const {
  if (!has_decisions_ || !has_target_) return MetricValue::undefined("needs decisions and target");
  return ratio_of(groups_[g].fn, groups_[g].positives, "no positives in group");
}

MetricValue GroupStats::tnr(std::size_t g) const {
  if (!has_decisions_ || !has_target_) return MetricValue::undefined("needs decisions and target");
  return ratio_of(groups_[g].tn, groups_[g].negatives, "no negatives in group");
}

MetricValue GroupStats::ppv(std::size_t g) const {
  if (!has_decisions_ || !has_target_) return MetricValue::undefined("needs decisions and target");
  return ratio_of(groups_[g].tp, groups_[g].tp + groups_[g].fp, "no accepted rows in group");
}

MetricValue GroupStats::npv(std::size_t g) const {
  if (!has_decisions_ || !has_target_) return MetricValue::undefined("needs decisions and target");
  return ratio_of(groups_[g].tn, groups_[g].tn + groups_[g].fn, "no rejected rows in group");
}

MetricValue GroupStats::accuracy(std::size_t g) const {
  if (!has_decisions_ || !has_target_) return MetricValue::undefined("needs decisions and target");
  return ratio_of(groups_[g].tp + groups_[g].tn, groups_[g].n, "empty group");
}

MetricValue GroupStats::mean_score_pos(std::size_t g) const {
  if (!has_scores_ || !has_target_) return MetricValue::undefined("needs scores and target");
  if (groups_[g].positives == 0) return MetricValue::undefined("no positives in group");
  return MetricValue::of(groups_[g].score_sum_pos / static_cast<double>(groups_[g].positives));
}

MetricValue GroupStats::mean_score_neg(std::size_t g) const {
  if (!has_scores_ || !has_target_) return MetricValue::undefined("needs scores and target");
  if (groups_[g].negatives == 0) return MetricValue::undefined("no negatives in group");
  return MetricValue::of(groups_[g].score_sum_neg / static_cast<double>(groups_[g].negatives));
}

MetricValue GroupStats::auc(std::size_t g) const {
  if (!has_scores_ || !has_target_) return MetricValue::undefined("needs scores and target");
  if (!groups_[g].auc) return MetricValue::undefined("group lacks positives or negatives");
  return MetricValue::of(*groups_[g].auc);
}

// ---------------------------------------------------------------------------

MetricReport demographic_parity(const Dataset& ds, const PredictionSet& preds) {
  preds.require_decisions("demographic_parity");
  return GroupStats::compute(ds, preds).report("demographic_parity", &GroupStats::acceptance_rate);
}

MetricReport equality_of_odds(const Dataset& ds, const PredictionSet& preds) {
  preds.require_decisions("equality_of_odds");
  ds.require_target("equality_of_odds");
  const auto s = GroupStats::compute(ds, preds);
  return make_composite("equality_of_odds",
                        {s.report("fpr", &GroupStats::fpr), s.report("fnr", &GroupStats::fnr)});
}

MetricReport predictive_equality(const Dataset& ds, const PredictionSet& preds) {
  preds.require_decisions("predictive_equality");
  ds.require_target("predictive_equality");
  return GroupStats::compute(ds, preds).report("predictive_equality", &GroupStats::fpr);
}

MetricReport equality_of_opportunity(const Dataset& ds, const PredictionSet& preds) {
  preds.require_decisions("equality_of_opportunity");
  ds.require_target("equality_of_opportunity");
  return GroupStats::compute(ds, preds).report("equality_of_opportunity", &GroupStats::fnr);
}

MetricReport predictive_parity(const Dataset& ds, const PredictionSet& preds) {
  preds.require_decisions("predictive_parity");
  ds.require_target("predictive_parity");
  return GroupStats::compute(ds, preds).report("predictive_parity", &GroupStats::ppv);
}

MetricReport sufficiency(const Dataset& ds, const PredictionSet& preds) {
  preds.require_decisions("sufficiency");
  ds.require_target("sufficiency");
  const auto s = GroupStats::compute(ds, preds);
  return make_composite("sufficiency",
                        {s.report("ppv", &GroupStats::ppv), s.report("npv", &GroupStats::npv)});
}

MetricReport accuracy_parity(const Dataset& ds, const PredictionSet& preds) {
  preds.require_decisions("accuracy_parity");
  ds.require_target("accuracy_parity");
  return GroupStats::compute(ds, preds).report("accuracy_parity", &GroupStats::accuracy);
}

MetricReport balance_positive_class(const Dataset& ds, const PredictionSet& preds) {
  preds.require_scores("balance_positive_class");
  ds.require_target("balance_positive_class");
  return GroupStats::compute(ds, preds).report("balance_positive_class", &GroupStats::mean_score_pos);
}

MetricReport balance_negative_class(const Dataset& ds, const PredictionSet& preds) {
  preds.require_scores("balance_negative_class");
  ds.require_target("balance_negative_class");
  return GroupStats::compute(ds, preds).report("balance_negative_class", &GroupStats::mean_score_neg);
}

MetricReport auc_parity(const Dataset& ds, const PredictionSet& preds) {
  preds.require_scores("auc_parity");
  ds.require_target("auc_parity");
  return GroupStats::compute(ds, preds).report("auc_parity", &GroupStats::auc);
}

// ---------------------------------------------------------------------------

StratifiedReport conditional_demographic_parity(const Dataset& ds, const PredictionSet& preds,
                                                const std::string& conditioning,
                                                std::size_t min_count) {
  return conditional_demographic_parity(ds, preds, strata_for(ds, conditioning), min_count);
}

StratifiedReport conditional_demographic_parity(const Dataset& ds, const PredictionSet& preds,
                                                const Strata& strata, std::size_t min_count) {
  preds.require_decisions("conditional_demographic_parity");
  if (strata.codes.size() != ds.rows()) throw DataError("strata length does not match dataset");
  StratifiedReport out;
  out.metric = "conditional_demographic_parity";
  out.conditioning = strata.name;
  out.min_count = min_count;

  std::vector<std::vector<std::size_t>> rows(strata.labels.size());
  for (std::size_t i = 0; i < strata.codes.size(); ++i) rows.at(strata.codes[i]).push_back(i);

  double weighted = 0.0;
  std::size_t weight = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].empty()) continue;
    const auto sub = ds.subset(rows[k]);
    StratumReport sr;
    sr.label = strata.labels[k];
    sr.count = rows[k].size();
    sr.report = demographic_parity(sub, preds.subset(rows[k]));
    const auto sizes = sub.sensitive().group_sizes();
    sr.qualifies = sr.report.gap.has_value() &&
                   std::all_of(sizes.begin(), sizes.end(), [&](auto c) { return c >= min_count; });
    if (sr.qualifies) {
      out.max_gap = out.max_gap ? std::max(*out.max_gap, *sr.report.gap) : *sr.report.gap;
      weighted += static_cast<double>(sr.count) * *sr.report.gap;
      weight += sr.count;
    } else {
      out.skipped.push_back(sr.label);
    }
    out.strata.push_back(std::move(sr));
  }
  if (weight > 0) out.weighted_mean_gap = weighted / static_cast<double>(weight);
  return out;
}

// ---------------------------------------------------------------------------

CalibrationReport calibration_within_groups(const Dataset& ds, const PredictionSet& preds,
                                            int bins, std::size_t min_count) {
  const auto& s = preds.require_scores("calibration_within_groups");
  const auto& y = ds.require_target("calibration_within_groups");
  if (bins < 1) throw PreconditionError("calibration needs at least one bin");
  if (s.size() != ds.rows()) throw DataError("score vector length does not match dataset");

  CalibrationReport out;
  out.bins = bins;
  out.min_count = min_count;
  const auto& labels = ds.sensitive().labels();
  std::vector<std::vector<double>> sums(labels.size(), std::vector<double>(bins, 0.0));
  out.groups.resize(labels.size());
  for (std::size_t g = 0; g < labels.size(); ++g) {
    out.groups[g].group = labels[g];
    out.groups[g].bins.resize(bins);
    for (int b = 0; b < bins; ++b) {
      out.groups[g].bins[b].lower = static_cast<double>(b) / bins;
      out.groups[g].bins[b].upper = static_cast<double>(b + 1) / bins;
    }
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int b = std::min(bins - 1, static_cast<int>(s[i] * bins));
    auto& cell = out.groups[ds.sensitive().code(i)].bins[b];
    ++cell.count;
    cell.positives += y[i];
    sums[ds.sensitive().code(i)][b] += s[i];
  }
  std::vector<MetricValue> errors;
  for (std::size_t g = 0; g < labels.size(); ++g) {
    auto& gc = out.groups[g];
    for (int b = 0; b < bins; ++b) {
      auto& cell = gc.bins[b];
      if (cell.count > 0) {
        cell.mean_score = sums[g][b] / static_cast<double>(cell.count);
        cell.empirical_rate = static_cast<double>(cell.positives) / static_cast<double>(cell.count);
      }
      cell.qualifies = cell.count > 0 && cell.count >= min_count;
      if (cell.qualifies) {
        gc.error = gc.error ? std::max(*gc.error, cell.error()) : cell.error();
      } else if (cell.count > 0) {
        gc.excluded_bins.push_back(static_cast<std::size_t>(b));
      }
    }
    errors.push_back(gc.error ? MetricValue::of(*gc.error)
                              : MetricValue::undefined("no bin reaches min_count"));
    if (gc.error) out.max_error = out.max_error ? std::max(*out.max_error, *gc.error) : *gc.error;
  }
  out.errors = make_report("calibration_within_groups", labels, std::move(errors));
  return out;
}

// ---------------------------------------------------------------------------

double ThresholdPolicy::threshold(const std::string& group, const std::string& stratum) const {
  auto it = cells.find({group, stratum});
  if (it == cells.end())
    throw PreconditionError("threshold policy does not cover group '" + group + "'" +
                            (stratum.empty() ? std::string() : " in stratum '" + stratum + "'"));
  return it->second;
}

bool ThresholdPolicy::covers(const std::string& group, const std::string& stratum) const {
  return cells.contains({group, stratum});
}

PredictionSet apply_threshold(const PredictionSet& preds, const ThresholdPolicy& policy,
                              const SensitiveAttribute& groups, const std::optional<Strata>& strata) {
  const auto& s = preds.require_scores("apply_threshold");
  if (s.size() != groups.size()) throw DataError("score vector length does not match groups");
  if (policy.stratum_column.has_value() != strata.has_value())
    throw PreconditionError(strata ? "policy is not stratified but strata were given"
                                   : "stratified policy needs the '" + *policy.stratum_column +
                                         "' column");
  if (strata && strata->codes.size() != s.size()) throw DataError("strata length does not match scores");
  PredictionSet out;
  out.scores = s;
  std::vector<int> d(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& g = groups.labels()[groups.code(i)];
    const std::string stratum = strata ? strata->labels[strata->codes[i]] : std::string();
    d[i] = s[i] >= policy.threshold(g, stratum) ? 1 : 0;
  }
  out.decisions = std::move(d);
  return out;
}

}  // namespace fairaudit
