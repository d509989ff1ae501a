#include "fairaudit/synth_experiment.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "fairaudit/errors.hpp"
#include "fairaudit/group_metrics.hpp"
#include "fairaudit/individual_metrics.hpp"
#include "fairaudit/info_theory.hpp"
#include "fairaudit/random.hpp"
#include "parallel.hpp"

namespace fairaudit {

const char* to_string(SynthTarget t) { return t == SynthTarget::high ? "high" : "low"; }

const char* to_string(NoiseInterpretation i) {
  return i == NoiseInterpretation::std_dev ? "std" : "variance";
}

SynthTarget parse_synth_target(const std::string& text) {
  if (text == "high") return SynthTarget::high;
  if (text == "low") return SynthTarget::low;
  throw DomainError("target must be 'high' or 'low', got '" + text + "'");
}

NoiseInterpretation parse_noise_interpretation(const std::string& text) {
  if (text == "std") return NoiseInterpretation::std_dev;
  if (text == "variance") return NoiseInterpretation::variance;
  throw DomainError("noise interpretation must be 'std' or 'variance', got '" + text + "'");
}

const char* to_string(Approach a) {
  switch (a) {
    case Approach::ftu: return "FTU";
    case Approach::supp_low: return "Supp_l";
    case Approach::supp_high: return "Supp_h";
    case Approach::cdp: return "CDP";
    case Approach::dp: return "DP";
  }
  return "?";
}

double noise_std(NoiseInterpretation i) {
  return i == NoiseInterpretation::std_dev ? 0.5 : std::sqrt(0.5);
}

// E X1 = 1/4, E X2 = 0, E X3 = 3/4, E A = 1/2.
double zeta_mean(SynthTarget t) { return t == SynthTarget::high ? 2.625 : 0.625; }

Scm build_synth_scm(SynthTarget target, NoiseInterpretation interpretation) {
  const double sd = noise_std(interpretation);
  std::vector<Node> nodes;
  nodes.push_back({"A", NodeRole::sensitive, {}, Assignment::exogenous(), NoiseSpec::bernoulli(0.5)});
  nodes.push_back({"X1", NodeRole::feature, {"A"}, Assignment::linear(0.0, {0.5}),
                   NoiseSpec::gaussian(0.0, sd)});
  nodes.push_back({"X2", NodeRole::feature, {}, Assignment::exogenous(), NoiseSpec::gaussian(0.0, sd)});
  nodes.push_back({"X3", NodeRole::feature, {"A"}, Assignment::threshold(0.0, {1.0}, 1.0, false),
                   NoiseSpec::bernoulli(0.5)});
  if (target == SynthTarget::high) {
    nodes.push_back({"zeta", NodeRole::latent, {"X1", "X2", "X3", "A"},
                     Assignment::linear(0.0, {1.0, 2.0, 0.5, 4.0}), NoiseSpec::gaussian(0.0, sd)});
  } else {
    nodes.push_back({"zeta", NodeRole::latent, {"X1", "X2", "X3"},
                     Assignment::linear(0.0, {1.0, 2.0, 0.5}), NoiseSpec::gaussian(0.0, sd)});
  }
  nodes.push_back({"Y", NodeRole::target, {"zeta"},
                   Assignment::threshold(0.0, {1.0}, zeta_mean(target), true), NoiseSpec::point(0.0)});
  return Scm(std::move(nodes));
}

std::uint64_t synth_seed(std::uint64_t seed, SynthTarget target) {
  return derive_seed(seed, target == SynthTarget::high ? "synthetic#1" : "synthetic#2");
}

Dataset generate(const SynthConfig& cfg) {
  if (cfg.n < 1) throw PreconditionError("n must be at least 1");
  const auto interp = cfg.interpretation
                          ? *cfg.interpretation
                          : calibrate_noise_interpretation(cfg.seed).chosen;
  return sample(build_synth_scm(cfg.target, interp), cfg.n, cfg.seed);
}

namespace {

double u_percent(const Dataset& ds) {
  return 100.0 * symmetric_uncertainty(ds.sensitive().codes(), *ds.target());
}

}  // namespace

NoiseCalibration calibrate_noise_interpretation(std::uint64_t seed, std::size_t n) {
  NoiseCalibration c;
  c.n = n;
  auto u = [&](SynthTarget t, NoiseInterpretation i) {
    return u_percent(sample(build_synth_scm(t, i), n, synth_seed(seed, t)));
  };
  c.u_high_std = u(SynthTarget::high, NoiseInterpretation::std_dev);
  c.u_low_std = u(SynthTarget::low, NoiseInterpretation::std_dev);
  c.u_high_variance = u(SynthTarget::high, NoiseInterpretation::variance);
  c.u_low_variance = u(SynthTarget::low, NoiseInterpretation::variance);
  c.distance_std = std::max(std::abs(c.u_high_std - kReferenceUHigh), std::abs(c.u_low_std - kReferenceULow));
  c.distance_variance =
      std::max(std::abs(c.u_high_variance - kReferenceUHigh), std::abs(c.u_low_variance - kReferenceULow));
  c.chosen = c.distance_variance < c.distance_std ? NoiseInterpretation::variance
                                                  : NoiseInterpretation::std_dev;
  return c;
}

ExperimentDataset synthetic_dataset(SynthTarget target, NoiseInterpretation interpretation,
                                    std::size_t n, std::uint64_t seed) {
  ExperimentDataset d;
  d.name = target == SynthTarget::high ? "synthetic#1" : "synthetic#2";
  d.data = sample(build_synth_scm(target, interpretation), n, seed);
  d.supp_low = MitigationSpec::parse("supp:0.05");
  // A correlation threshold cannot remove X1 while keeping X3, whose
  // correlation with A is the larger one, so the high variant names X1.
  d.supp_high = MitigationSpec::parse("supp-drop:X1");
  d.cdp_column = "X3";
  return d;
}

ExperimentDataset adult_dataset(Dataset data, std::string cdp_column) {
  ExperimentDataset d;
  d.name = "adult";
  d.data = std::move(data);
  d.supp_low = MitigationSpec::parse("supp:0.05");
  d.supp_high = MitigationSpec::parse("supp:0.10");
  d.cdp_column = std::move(cdp_column);
  return d;
}

const DatasetBlock& ExperimentReport::block(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b;
  throw PreconditionError("report has no dataset '" + name + "'");
}

const ApproachResult& ExperimentReport::result(const std::string& dataset, Approach a) const {
  for (const auto& r : block(dataset).results)
    if (r.approach == a) return r;
  throw PreconditionError(std::string("report has no approach ") + to_string(a));
}

namespace {

MitigationSpec spec_for(const ExperimentDataset& d, Approach a) {
  switch (a) {
    case Approach::ftu: return MitigationSpec::parse("ftu");
    case Approach::supp_low: return d.supp_low;
    case Approach::supp_high: return d.supp_high;
    case Approach::cdp: return MitigationSpec::parse("cdp:" + d.cdp_column);
    case Approach::dp: return MitigationSpec::parse("dp");
  }
  return {};
}

ApproachResult evaluate(const ExperimentDataset& d, const SplitResult& split, Approach a,
                        const TrainConfig& tc) {
  const auto spec = spec_for(d, a);
  ApproachResult r;
  r.approach = a;
  r.strategy = spec.to_string();
  const auto model = train(split.train, spec, tc);
  if (model.suppression) r.dropped = model.suppression->dropped;

  std::optional<ThresholdPolicy> policy;
  if (a == Approach::dp) policy = fit_dp_threshold(split.test, model, tc.grid_size);
  if (a == Approach::cdp)
    policy = fit_cdp_threshold(split.test, model, d.cdp_column, tc.grid_size, tc.min_count);
  if (policy) r.flags = policy->flags;

  const auto& test = split.test;
  const auto preds = predict(model, test, policy);
  const auto& yhat = *preds.decisions;
  const auto& y = *test.target();
  r.u_yhat_a = 100.0 * symmetric_uncertainty(yhat, test.sensitive().codes());

  // Post-processed approaches are judged on their binary decisions.
  r.auc_on_decisions = policy.has_value();
  std::vector<double> ranking = *preds.scores;
  if (r.auc_on_decisions) ranking.assign(yhat.begin(), yhat.end());
  r.auc = 100.0 * roc_auc(ranking, y).value_or(0.5);

  r.flip = 100.0 * flip_assessment(test, decision_function(model, policy)).flip_consistency;
  const auto dp = demographic_parity(test, preds);
  r.dp_ratio = 100.0 * dp.ratio.value_or(0.0);
  return r;
}

}  // namespace

ExperimentReport run_experiment(const std::vector<ExperimentDataset>& datasets,
                                const ExperimentConfig& cfg,
                                const std::vector<Approach>& approaches) {
  ExperimentReport rep;
  rep.seed = cfg.seed;
  rep.train_fraction = cfg.train_fraction;
  std::vector<SplitResult> splits;
  for (const auto& d : datasets) {
    if (!d.data.has_target()) throw PreconditionError("dataset '" + d.name + "' has no target");
    if (d.data.sensitive().group_count() != 2)
      throw PreconditionError("dataset '" + d.name + "' needs a binary sensitive attribute");
    splits.push_back(split(d.data, std::nullopt, cfg.train_fraction,
                           derive_seed(cfg.seed, "split/" + d.name)));
    DatasetBlock b;
    b.name = d.name;
    b.u_y_a = u_percent(d.data);
    b.rows = d.data.rows();
    b.train_rows = splits.back().train.rows();
    b.test_rows = splits.back().test.rows();
    b.results.resize(approaches.size());
    rep.blocks.push_back(std::move(b));
  }
  const auto cells = datasets.size() * approaches.size();
  std::vector<std::string> errors(cells);
  detail::parallel_for(cells, [&](std::size_t c) {
    const auto di = c / approaches.size();
    const auto ai = c % approaches.size();
    try {
      rep.blocks[di].results[ai] = evaluate(datasets[di], splits[di], approaches[ai], cfg.train);
    } catch (const std::exception& e) {
      errors[c] = datasets[di].name + "/" + to_string(approaches[ai]) + ": " + e.what();
    }
  }, 1);
  for (const auto& e : errors)
    if (!e.empty()) throw DataError(e);
  return rep;
}

ExperimentReport run_standard_experiment(const ExperimentConfig& cfg, std::size_t n,
                                      std::optional<NoiseInterpretation> interpretation,
                                      std::optional<Dataset> adult) {
  std::optional<NoiseCalibration> calibration;
  if (!interpretation) {
    calibration = calibrate_noise_interpretation(cfg.seed, n);
    interpretation = calibration->chosen;
  }
  std::vector<ExperimentDataset> datasets;
  if (adult) datasets.push_back(adult_dataset(std::move(*adult)));
  for (auto t : {SynthTarget::high, SynthTarget::low})
    datasets.push_back(synthetic_dataset(t, *interpretation, n, synth_seed(cfg.seed, t)));
  auto rep = run_experiment(datasets, cfg);
  rep.interpretation = interpretation;
  rep.calibration = calibration;
  return rep;
}

namespace {

std::string one_decimal(double v) {
  const auto s = fmt::format("{:.1f}", v);
  return s == "-0.0" ? "0.0" : s;
}

double rounded(double v) {
  const double r = std::round(v * 10.0) / 10.0;
  return r == 0.0 ? 0.0 : r;
}

}  // namespace

std::string experiment_csv(const ExperimentReport& rep) {
  std::string out;
  out += fmt::format("# held-out evaluation: models trained on {:.0f}% of rows, metrics on the rest\n",
                     100.0 * rep.train_fraction);
  out += fmt::format("# seed={}", rep.seed);
  if (rep.interpretation) out += fmt::format("; noise interpretation={}", to_string(*rep.interpretation));
  out += "\n";
  if (rep.calibration) {
    const auto& c = *rep.calibration;
    out += fmt::format(
        "# calibration: std U(Y_h,A)={} U(Y_l,A)={} distance={}; variance U(Y_h,A)={} "
        "U(Y_l,A)={} distance={}\n",
        one_decimal(c.u_high_std), one_decimal(c.u_low_std), one_decimal(c.distance_std),
        one_decimal(c.u_high_variance), one_decimal(c.u_low_variance),
        one_decimal(c.distance_variance));
  }
  out += "# DP and CDP AUC computed on post-processed decisions; other approaches on scores\n";
  for (const auto& b : rep.blocks) {
    out += "dataset,U(Y;A),metric";
    for (const auto& r : b.results) out += std::string(",") + to_string(r.approach);
    out += "\n";
    auto line = [&](const char* metric, auto get) {
      out += fmt::format("{},{},{}", b.name, one_decimal(b.u_y_a), metric);
      for (const auto& r : b.results) out += "," + one_decimal(get(r));
      out += "\n";
    };
    line("U(Yhat;A)", [](const ApproachResult& r) { return r.u_yhat_a; });
    line("ROC AUC", [](const ApproachResult& r) { return r.auc; });
    line("Flip", [](const ApproachResult& r) { return r.flip; });
    line("DP-ratio", [](const ApproachResult& r) { return r.dp_ratio; });
  }
  return out;
}

std::string experiment_json(const ExperimentReport& rep) {
  using json = nlohmann::ordered_json;
  json j;
  j["evaluation"] = "held-out";
  j["train_fraction"] = rep.train_fraction;
  j["seed"] = rep.seed;
  j["noise_interpretation"] = rep.interpretation ? json(to_string(*rep.interpretation)) : json(nullptr);
  if (rep.calibration) {
    const auto& c = *rep.calibration;
    j["calibration"] = {
        {"chosen", to_string(c.chosen)},
        {"n", c.n},
        {"reference", {{"U(Y_h;A)", kReferenceUHigh}, {"U(Y_l;A)", kReferenceULow}}},
        {"std", {{"U(Y_h;A)", rounded(c.u_high_std)}, {"U(Y_l;A)", rounded(c.u_low_std)},
                 {"distance", rounded(c.distance_std)}}},
        {"variance", {{"U(Y_h;A)", rounded(c.u_high_variance)}, {"U(Y_l;A)", rounded(c.u_low_variance)},
                      {"distance", rounded(c.distance_variance)}}}};
  }
  json blocks = json::array();
  for (const auto& b : rep.blocks) {
    json approaches = json::array();
    for (const auto& r : b.results) {
      approaches.push_back({{"approach", to_string(r.approach)},
                            {"strategy", r.strategy},
                            {"U(Yhat;A)", rounded(r.u_yhat_a)},
                            {"ROC AUC", rounded(r.auc)},
                            {"auc_on", r.auc_on_decisions ? "decisions" : "scores"},
                            {"Flip", rounded(r.flip)},
                            {"DP-ratio", rounded(r.dp_ratio)},
                            {"dropped", r.dropped},
                            {"flags", r.flags}});
    }
    blocks.push_back({{"dataset", b.name},
                      {"U(Y;A)", rounded(b.u_y_a)},
                      {"rows", b.rows},
                      {"train_rows", b.train_rows},
                      {"test_rows", b.test_rows},
                      {"approaches", approaches}});
  }
  j["datasets"] = blocks;
  return j.dump(2) + "\n";
}

}  // namespace fairaudit
