#include "audit.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "fairaudit/errors.hpp"
#include "fairaudit/group_metrics.hpp"
#include "fairaudit/incompatibility.hpp"

namespace fairaudit::cli {

const std::vector<MetricInfo>& metric_registry() {
  static const std::vector<MetricInfo> registry{
      {"dp", "demographic parity (acceptance rates)", true},
      {"cdp", "conditional demographic parity (needs --condition-on)", true, false, false, false, true},
      {"eo", "equality of odds (fpr and fnr)", true, true},
      {"pe", "predictive equality (fpr)", true, true},
      {"eop", "equality of opportunity (tpr)", true, true},
      {"pp", "predictive parity (ppv)", true, true},
      {"suff", "sufficiency (ppv and npv)", true, true},
      {"acc", "accuracy parity", true, true},
      {"bal_pos", "balance for the positive class (mean score)", false, true, true},
      {"bal_neg", "balance for the negative class (mean score)", false, true, true},
      {"auc", "ROC AUC parity", false, true, true},
      {"calib", "calibration within groups", false, true, true},
      {"consistency", "kNN consistency of decisions", true},
      {"swd", "similarity-weighted disparity between the two groups", true},
      {"lipschitz", "Lipschitz check on decisions (or scores)"},
      {"flip", "flip consistency under a swapped sensitive attribute (needs --model)", false, false,
       false, true},
      {"gaps", "independence/separation/sufficiency gaps and the exclusion verdict", true, true},
  };
  return registry;
}

const MetricInfo* find_metric(const std::string& name) {
  for (const auto& m : metric_registry())
    if (m.name == name) return &m;
  return nullptr;
}

std::vector<std::string> parse_metric_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    auto name = text.substr(start, end - start);
    start = end + 1;
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t") + 1);
    if (name.empty()) continue;
    if (name == "all") {
      for (const auto& m : metric_registry()) out.push_back(m.name);
      continue;
    }
    if (!find_metric(name)) throw std::invalid_argument("unknown metric '" + name + "'");
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
  }
  if (out.empty()) throw std::invalid_argument("no metrics requested");
  return out;
}

namespace {

std::optional<std::string> missing_input(const MetricInfo& m, const Dataset& ds,
                                         const PredictionSet& preds, const ClassifierModel* model,
                                         const AuditOptions& opts) {
  if (m.needs_decisions && !preds.decisions) return "needs decisions";
  if (m.needs_scores && !preds.scores) return "needs scores";
  if (m.needs_target && !ds.has_target()) return "needs a target column";
  if (m.needs_model && !model) return "needs --model";
  if (m.needs_condition && !opts.condition_on) return "needs --condition-on";
  if (m.name == "lipschitz" && !preds.decisions && !preds.scores) return "needs decisions or scores";
  if (m.name == "swd" && ds.sensitive().group_count() != 2)
    return "needs a two-group sensitive attribute";
  return std::nullopt;
}

bool report_partial(const MetricReport& r) {
  if (r.has_undefined() || !r.gap) return true;
  for (const auto& c : r.components)
    if (report_partial(c)) return true;
  return false;
}

}  // namespace

AuditOutcome run_audit(const Dataset& ds, const PredictionSet& preds, const ClassifierModel* model,
                       const std::vector<std::string>& metrics, const AuditOptions& opts,
                       bool explicit_request) {
  AuditOutcome out;
  for (const auto& name : metrics) {
    const auto* info = find_metric(name);
    if (!info) throw std::invalid_argument("unknown metric '" + name + "'");
    if (auto why = missing_input(*info, ds, preds, model, opts)) {
      if (explicit_request) throw PreconditionError("metric '" + name + "' " + *why);
      out.skipped[name] = *why;
      out.partial = true;
      continue;
    }
    auto group = [&](const MetricReport& r) {
      out.partial = out.partial || report_partial(r);
      out.metrics[name] = to_json(r);
    };
    if (name == "dp") group(demographic_parity(ds, preds));
    else if (name == "eo") group(equality_of_odds(ds, preds));
    else if (name == "pe") group(predictive_equality(ds, preds));
    else if (name == "eop") group(equality_of_opportunity(ds, preds));
    else if (name == "pp") group(predictive_parity(ds, preds));
    else if (name == "suff") group(sufficiency(ds, preds));
    else if (name == "acc") group(accuracy_parity(ds, preds));
    else if (name == "bal_pos") group(balance_positive_class(ds, preds));
    else if (name == "bal_neg") group(balance_negative_class(ds, preds));
    else if (name == "auc") group(auc_parity(ds, preds));
    else if (name == "cdp") {
      const auto r = conditional_demographic_parity(ds, preds, *opts.condition_on, opts.min_count);
      out.partial = out.partial || !r.skipped.empty() || !r.max_gap;
      out.metrics[name] = to_json(r);
    } else if (name == "calib") {
      const auto r = calibration_within_groups(ds, preds, opts.bins, opts.min_count);
      out.partial = out.partial || report_partial(r.errors);
      out.metrics[name] = to_json(r);
    } else if (name == "consistency") {
      out.metrics[name] = {{"metric", "consistency"},
                           {"k", opts.k},
                           {"value", consistency(ds, preds, opts.k, opts.distance)}};
    } else if (name == "swd") {
      out.metrics[name] = {{"metric", "similarity_weighted_disparity"},
                           {"value", similarity_weighted_disparity(ds, preds, opts.distance)}};
    } else if (name == "lipschitz") {
      out.metrics[name] =
          to_json(lipschitz_audit(ds, preds, opts.distance, opts.lipschitz, opts.max_pairs, opts.seed));
    } else if (name == "flip") {
      out.metrics[name] = to_json(flip_assessment(ds, decision_function(*model)));
    } else if (name == "gaps") {
      const auto g = gaps(ds, preds);
      out.partial = out.partial || !g.undefined.empty();
      auto j = to_json(g);
      j["exclusion"] = to_json(check_sep_suff_exclusion(ds, preds));
      out.metrics[name] = j;
    }
  }
  return out;
}

namespace {

std::string scalar(const ojson& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return fmt::format("{:.17g}", v.get<double>());
  return v.dump();
}

void flatten(const ojson& v, const std::string& path, std::string& out) {
  if (v.is_object()) {
    for (const auto& [key, child] : v.items()) flatten(child, path.empty() ? key : path + "." + key, out);
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], path + "." + std::to_string(i), out);
  } else {
    out += csv_escape(path) + "," + csv_escape(scalar(v)) + "\n";
  }
}

}  // namespace

std::string flatten_csv(const ojson& doc) {
  std::string out = "key,value\n";
  flatten(doc, "", out);
  return out;
}

}  // namespace fairaudit::cli
