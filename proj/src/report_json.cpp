#include "fairaudit/report_json.hpp"

namespace fairaudit {
namespace {

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

ojson pair_json(const LipschitzPair& p) {
  return {{"i", p.i}, {"j", p.j}, {"dist_x", p.dist_x}, {"dist_y", p.dist_y}};
}

}  // namespace

ojson to_json(const MetricReport& r) {
  ojson j;
  j["metric"] = r.metric;
  ojson groups = ojson::object();
  ojson undefined = ojson::object();
  for (std::size_t g = 0; g < r.groups.size() && g < r.values.size(); ++g) {
    groups[r.groups[g]] = opt(r.values[g].value);
    if (!r.values[g].value) undefined[r.groups[g]] = r.values[g].reason;
  }
  if (r.components.empty()) {
    j["groups"] = groups;
  } else {
    ojson comps = ojson::array();
    for (const auto& c : r.components) comps.push_back(to_json(c));
    j["components"] = comps;
  }
  j["gap"] = opt(r.gap);
  j["ratio"] = opt(r.ratio);
  if (!undefined.empty()) j["undefined"] = undefined;
  return j;
}

ojson to_json(const StratifiedReport& r) {
  ojson strata = ojson::array();
  for (const auto& s : r.strata) {
    strata.push_back({{"stratum", s.label},
                      {"rows", s.count},
                      {"qualifies", s.qualifies},
                      {"report", to_json(s.report)}});
  }
  return {{"metric", r.metric},
          {"conditioning", r.conditioning},
          {"min_count", r.min_count},
          {"max_gap", opt(r.max_gap)},
          {"weighted_mean_gap", opt(r.weighted_mean_gap)},
          {"skipped", r.skipped},
          {"strata", strata}};
}

ojson to_json(const CalibrationReport& r) {
  ojson groups = ojson::array();
  for (const auto& g : r.groups) {
    ojson bins = ojson::array();
    for (const auto& b : g.bins) {
      bins.push_back({{"lower", b.lower},
                      {"upper", b.upper},
                      {"count", b.count},
                      {"positives", b.positives},
                      {"mean_score", b.mean_score},
                      {"empirical_rate", b.empirical_rate},
                      {"qualifies", b.qualifies}});
    }
    groups.push_back({{"group", g.group},
                      {"error", opt(g.error)},
                      {"excluded_bins", g.excluded_bins},
                      {"bins", bins}});
  }
  ojson j = to_json(r.errors);
  j["metric"] = "calibration_within_groups";
  j["bins"] = r.bins;
  j["min_count"] = r.min_count;
  j["max_error"] = opt(r.max_error);
  j["detail"] = groups;
  return j;
}

ojson to_json(const FlipReport& r) {
  ojson groups = ojson::object();
  for (std::size_t g = 0; g < r.groups.size(); ++g) groups[r.groups[g]] = opt(r.group_flip_rate[g]);
  return {{"metric", "flip"},
          {"rows", r.rows},
          {"flip_rate", r.flip_rate},
          {"flip_consistency", r.flip_consistency},
          {"group_flip_rate", groups}};
}

ojson to_json(const LipschitzReport& r) {
  ojson worst = ojson::array();
  for (const auto& p : r.worst) worst.push_back(pair_json(p));
  ojson inf = ojson::array();
  for (const auto& p : r.infinite_witnesses) inf.push_back(pair_json(p));
  return {{"metric", "lipschitz"},
          {"lipschitz_constant", r.lipschitz_constant},
          {"exhaustive", r.exhaustive},
          {"output", r.used_scores ? "scores" : "decisions"},
          {"pairs_examined", r.pairs_examined},
          {"pairs_positive_distance", r.pairs_positive_distance},
          {"violations", r.violations},
          {"empirical_constant", opt(r.empirical_constant)},
          {"worst", worst},
          {"infinite_ratio_pairs", r.infinite_ratio_pairs},
          {"infinite_witnesses", inf}};
}

ojson to_json(const CriteriaGaps& g) {
  return {{"metric", "gaps"},
          {"indep_gap", opt(g.indep_gap)},
          {"sep_gap", opt(g.sep_gap)},
          {"suff_gap", opt(g.suff_gap)},
          {"base_rate_gap", opt(g.base_rate_gap)},
          {"usefulness", g.usefulness},
          {"undefined", g.undefined}};
}

ojson to_json(const ExclusionVerdict& v) {
  return {{"applicable", v.applicable},
          {"forbidden_combination", v.forbidden_combination},
          {"separation_holds", v.separation_holds},
          {"sufficiency_holds", v.sufficiency_holds},
          {"sep_gap", opt(v.sep_gap)},
          {"suff_gap", opt(v.suff_gap)},
          {"base_rate_gap", opt(v.base_rate_gap)},
          {"false_positives", v.false_positives},
          {"note", v.note}};
}

ojson to_json(const CounterfactualResult& r) {
  ojson means = ojson::object();
  for (std::size_t k = 0; k < r.nodes.size(); ++k) means[r.nodes[k]] = r.means[k];
  ojson j{{"exact", r.exact}, {"worlds", r.worlds}, {"means", means}};
  if (!r.samples.empty()) {
    j["weights"] = r.weights;
    j["samples"] = r.samples;
  }
  return j;
}

ojson to_json(const CounterfactualGapReport& r) {
  return {{"a", r.a},
          {"b", r.b},
          {"mediators_held", r.mediators_held},
          {"units", r.units.size()},
          {"cff_gap", r.cff_gap},
          {"ecff_gap", r.ecff_gap},
          {"std_error", r.std_error},
          {"exact", r.exact}};
}

ojson to_json(const ThresholdPolicy& p) {
  ojson cells = ojson::array();
  for (const auto& [cell, t] : p.cells)
    cells.push_back({{"group", cell.first}, {"stratum", cell.second}, {"threshold", t}});
  return {{"stratum_column", p.stratum_column ? ojson(*p.stratum_column) : ojson(nullptr)},
          {"target_rate", p.target_rate},
          {"stratum_rates", p.stratum_rates},
          {"cells", cells},
          {"flags", p.flags}};
}

}  // namespace fairaudit
