// fairaudit command-line front end.
//
// Exit status: 0 success, 2 partial result (skipped metrics or undefined
// cells), 64 usage error, 65 data error, 70 internal error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "audit.hpp"
#include "fairaudit/causal.hpp"
#include "fairaudit/errors.hpp"
#include "fairaudit/random.hpp"
#include "fairaudit/scm_json.hpp"
#include "fairaudit/synth_experiment.hpp"

#ifndef FAIRAUDIT_DATA_DIR
#define FAIRAUDIT_DATA_DIR "data"
#endif

namespace fa = fairaudit;
using fa::ojson;

namespace {

constexpr int kExitPartial = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitInternal = 70;

struct Globals {
  std::uint64_t seed = 1;
  std::string output;
  std::string format = "json";
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void emit(const Globals& g, const std::string& text) {
  if (g.output.empty() || g.output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(g.output, std::ios::binary);
  if (!out) throw fa::DataError("cannot write '" + g.output + "'");
  out << text;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fa::DataError("cannot write '" + path + "'");
  out << text;
}

std::string render(const Globals& g, const ojson& doc) {
  return g.format == "csv" ? fa::cli::flatten_csv(doc) : doc.dump(2) + "\n";
}

// "k=v,k=v" -> map of doubles.
std::map<std::string, double> parse_assignments(const std::string& text, const char* flag) {
  std::map<std::string, double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError(fmt::format("{}: expected name=value, got '{}'", flag, item));
    const auto value = item.substr(eq + 1);
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != value.size())
      throw UsageError(fmt::format("{}: '{}' is not a number", flag, value));
    out[item.substr(0, eq)] = v;
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct PredictionColumns {
  std::optional<std::string> decision;
  std::optional<std::string> score;
};

PredictionColumns parse_prediction_columns(const std::string& text) {
  PredictionColumns pc;
  for (const auto& item : split_list(text)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      pc.decision = item;
      continue;
    }
    const auto key = item.substr(0, eq);
    const auto col = item.substr(eq + 1);
    if (key == "decision") pc.decision = col;
    else if (key == "score") pc.score = col;
    else throw UsageError("--predictions: keys are decision= and score=");
  }
  return pc;
}

std::string metric_help() {
  std::string s = "Metrics (comma-separated, or 'all'):\n";
  for (const auto& m : fa::cli::metric_registry()) s += fmt::format("  {:<12} {}\n", m.name, m.description);
  return s;
}

// ---------------------------------------------------------------------------

struct AuditArgs {
  std::string data, schema, predictions, model, metrics = "all", condition_on, distance = "standardized";
  std::size_t k = 5, min_count = 30, max_pairs = 100000;
  int bins = 10;
  double lipschitz = 1.0;
};

int cmd_audit(const Globals& g, const AuditArgs& a, bool metrics_given) {
  std::vector<std::string> metrics;
  try {
    metrics = fa::cli::parse_metric_list(a.metrics);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.predictions.empty() && a.model.empty())
    throw UsageError("audit needs --predictions and/or --model");
  auto schema = fa::Schema::load(a.schema);
  PredictionColumns pc;
  if (!a.predictions.empty()) {
    pc = parse_prediction_columns(a.predictions);
    for (const auto& c : {pc.decision, pc.score})
      if (c) schema.ignored.push_back(*c);
  }
  const auto table = fa::read_csv(a.data);
  const auto ds = fa::dataset_from_table(table, schema);
  std::optional<fa::ClassifierModel> model;
  if (!a.model.empty()) model = fa::load_model(a.model);
  fa::PredictionSet preds;
  if (!a.predictions.empty()) preds = fa::predictions_from_table(table, pc.decision, pc.score);
  else preds = fa::predict(*model, ds);

  fa::cli::AuditOptions opts;
  if (!a.condition_on.empty()) opts.condition_on = a.condition_on;
  opts.k = a.k;
  opts.distance = fa::DistanceSpec::parse(a.distance);
  opts.min_count = a.min_count;
  opts.bins = a.bins;
  opts.lipschitz = a.lipschitz;
  opts.max_pairs = a.max_pairs;
  opts.seed = fa::derive_seed(g.seed, "audit/lipschitz");
  const auto res = fa::cli::run_audit(ds, preds, model ? &*model : nullptr, metrics, opts,
                                      metrics_given && a.metrics != "all");
  ojson doc{{"data", a.data},
            {"rows", ds.rows()},
            {"sensitive", ds.sensitive().name()},
            {"groups", ds.sensitive().labels()},
            {"metrics", res.metrics},
            {"skipped", res.skipped}};
  emit(g, render(g, doc));
  return res.partial ? kExitPartial : 0;
}

struct SynthArgs {
  std::string target = "high", interpretation;
  std::size_t n = fa::kSynthRows;
};

int cmd_synth(const Globals& g, const SynthArgs& a) {
  fa::SynthConfig cfg;
  cfg.n = a.n;
  cfg.target = fa::parse_synth_target(a.target);
  if (!a.interpretation.empty()) cfg.interpretation = fa::parse_noise_interpretation(a.interpretation);
  cfg.seed = g.seed;
  emit(g, fa::dataset_to_csv(fa::generate(cfg), fa::kSynthColumns));
  return 0;
}

struct TrainArgs {
  std::string data, schema, strategy = "full", model_out;
  std::size_t grid = 200, min_count = 30, max_epochs = 20000;
  double l2 = 0.0;
};

int cmd_train(const Globals& g, const TrainArgs& a) {
  const auto spec = fa::MitigationSpec::parse(a.strategy);
  const auto ds = fa::load_csv(a.data, fa::Schema::load(a.schema));
  fa::TrainConfig tc;
  tc.grid_size = a.grid;
  tc.min_count = a.min_count;
  tc.max_epochs = a.max_epochs;
  tc.l2 = a.l2;
  const auto model = fa::train(ds, spec, tc, g.seed);
  std::cerr << fmt::format("strategy {}: {} inputs, {} epochs, gradient norm {:.3g}\n", spec.to_string(),
                           model.encoding.sources.size(), model.epochs, model.gradient_norm);
  if (model.suppression) {
    for (const auto& [name, c] : model.suppression->correlations)
      std::cerr << fmt::format("  |corr({}, {})| = {:.4f}\n", name, ds.sensitive().name(), c);
    std::cerr << fmt::format("dropped: {}\n", fmt::join(model.suppression->dropped, ", "));
    std::cerr << fmt::format("kept: {}\n", fmt::join(model.suppression->kept, ", "));
  }
  if (model.policy)
    for (const auto& f : model.policy->flags) std::cerr << "policy: " << f << "\n";
  const auto path = a.model_out.empty() ? g.output : a.model_out;
  if (path.empty() || path == "-") std::cout << fa::model_to_json(model);
  else fa::save_model(model, path);
  return 0;
}

struct CounterfactualArgs {
  std::string scm, unit, intervene, hold, nodes, data, schema, model;
  std::size_t budget = fa::kDefaultMcBudget;
  double a = 1.0, b = 0.0;
  bool samples = false;
};

int cmd_counterfactual(const Globals& g, const CounterfactualArgs& a) {
  const auto scm = fa::load_scm(a.scm);
  std::set<std::string> held;
  auto intervention = parse_assignments(a.intervene, "--do");
  for (const auto& h : split_list(a.hold)) {
    if (h == "all-descendants") {
      const auto roots = intervention.empty() ? std::map<std::string, double>{{scm.sensitive_name(), 0.0}}
                                              : intervention;
      for (const auto& [name, v] : roots)
        for (const auto& d : scm.descendants(name)) held.insert(d);
    } else {
      held.insert(h);
    }
  }
  for (const auto& [name, v] : intervention) held.erase(name);

  if (!a.model.empty()) {
    if (a.data.empty() || a.schema.empty()) throw UsageError("gap mode needs --data and --schema");
    const auto model = fa::load_model(a.model);
    const auto ds = fa::load_csv(a.data, fa::Schema::load(a.schema));
    const auto dec = fa::scm_decision(model, scm);
    const auto seed = fa::derive_seed(g.seed, "counterfactual/gap");
    const auto rep = fa::pcff_gap(scm, dec, ds, a.a, a.b, held, a.budget, seed);
    const auto eig = fa::expectation_intervention_gap(scm, dec, a.a, a.b, a.budget,
                                                      fa::derive_seed(g.seed, "counterfactual/interventional"));
    ojson doc = fa::to_json(rep);
    doc["expectation_intervention_gap"] = ojson{{"p_a", eig.p_a}, {"p_b", eig.p_b}, {"gap", eig.gap},
                                                {"std_error", eig.std_error}, {"draws", eig.draws}};
    emit(g, render(g, doc));
    return 0;
  }

  fa::CounterfactualQuery q;
  q.observed = parse_assignments(a.unit, "--unit");
  q.intervention = intervention;
  q.mediators_held = held;
  const auto res = fa::counterfactual(scm, q, a.budget, fa::derive_seed(g.seed, "counterfactual"),
                                      split_list(a.nodes), a.samples);
  ojson doc{{"observed", q.observed},
            {"do", q.intervention},
            {"held", std::vector<std::string>(held.begin(), held.end())}};
  doc["counterfactual"] = fa::to_json(res);
  emit(g, render(g, doc));
  return 0;
}

struct ExperimentArgs {
  std::string adult, adult_schema = std::string(FAIRAUDIT_DATA_DIR) + "/adult.schema", out,
                     interpretation;
  std::size_t n = fa::kSynthRows;
};

int cmd_experiment(const Globals& g, const ExperimentArgs& a) {
  fa::ExperimentConfig cfg;
  cfg.seed = g.seed;
  std::optional<fa::NoiseInterpretation> interp;
  if (!a.interpretation.empty()) interp = fa::parse_noise_interpretation(a.interpretation);
  std::optional<fa::Dataset> adult;
  if (!a.adult.empty()) adult = fa::load_csv(a.adult, fa::Schema::load(a.adult_schema));
  const auto rep = fa::run_standard_experiment(cfg, a.n, interp, std::move(adult));
  const auto csv = fa::experiment_csv(rep);
  const auto json = fa::experiment_json(rep);
  if (!a.out.empty()) {
    write_file(a.out + ".csv", csv);
    write_file(a.out + ".json", json);
  }
  if (a.out.empty() || !g.output.empty()) emit(g, g.format == "csv" ? csv : json);
  return 0;
}

int cmd_metrics(const Globals& g) {
  ojson list = ojson::array();
  for (const auto& m : fa::cli::metric_registry()) {
    std::vector<std::string> needs;
    if (m.needs_decisions) needs.push_back("decisions");
    if (m.needs_scores) needs.push_back("scores");
    if (m.needs_target) needs.push_back("target");
    if (m.needs_model) needs.push_back("model");
    if (m.needs_condition) needs.push_back("condition-on");
    list.push_back({{"name", m.name}, {"description", m.description}, {"needs", needs}});
  }
  if (g.format == "csv") {
    std::string s = "name,description\n";
    for (const auto& m : fa::cli::metric_registry())
      s += fa::csv_escape(m.name) + "," + fa::csv_escape(m.description) + "\n";
    emit(g, s);
  } else {
    emit(g, list.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness audit toolkit: group, individual and causal fairness metrics."};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(metric_help());
  Globals g;
  app.add_option("--seed", g.seed, "Root seed for every random stream")->envname("FAIRAUDIT_SEED");
  app.add_option("-o,--output", g.output, "Output file (default: stdout)")->envname("FAIRAUDIT_OUTPUT");
  app.add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->envname("FAIRAUDIT_FORMAT");

  AuditArgs audit;
  auto* audit_cmd = app.add_subcommand("audit", "Compute fairness metrics on a labelled CSV");
  audit_cmd->add_option("--data", audit.data, "Data CSV")->required()->check(CLI::ExistingFile);
  audit_cmd->add_option("--schema", audit.schema, "Schema file")->required()->check(CLI::ExistingFile);
  audit_cmd->add_option("--predictions", audit.predictions,
                        "Prediction columns in the data CSV: decision=<col>,score=<col>");
  audit_cmd->add_option("--model", audit.model, "Model JSON from 'train'")->check(CLI::ExistingFile);
  auto* metrics_opt = audit_cmd->add_option("--metrics", audit.metrics, metric_help());
  audit_cmd->add_option("--condition-on", audit.condition_on, "Categorical column for cdp");
  audit_cmd->add_option("--k", audit.k, "Neighbours for consistency")->check(CLI::PositiveNumber);
  audit_cmd->add_option("--distance", audit.distance, "standardized | raw | weighted:w1,w2,...");
  audit_cmd->add_option("--min-count", audit.min_count, "Minimum rows per cell for cdp and calib")
      ->envname("FAIRAUDIT_MIN_COUNT");
  audit_cmd->add_option("--bins", audit.bins, "Calibration bins")->check(CLI::PositiveNumber);
  audit_cmd->add_option("--lipschitz", audit.lipschitz, "Lipschitz constant")->check(CLI::PositiveNumber);
  audit_cmd->add_option("--max-pairs", audit.max_pairs, "Pair budget for the Lipschitz check");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset (CSV: A,X1,X2,X3,Y)");
  synth_cmd->add_option("--target", synth.target, "high | low")->check(CLI::IsMember({"high", "low"}));
  synth_cmd->add_option("--n", synth.n, "Rows")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--interpretation", synth.interpretation,
                        "Noise scale read as std | variance (default: calibrated)")
      ->check(CLI::IsMember({"std", "variance"}));

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the built-in classifier with a mitigation strategy");
  train_cmd->add_option("--data", tr.data, "Data CSV")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--schema", tr.schema, "Schema file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--strategy", tr.strategy,
                        "full | ftu | supp:<thr> | supp-drop:<cols> | dp | cdp:<col>");
  train_cmd->add_option("--model-out", tr.model_out, "Model JSON path");
  train_cmd->add_option("--grid", tr.grid, "Acceptance-rate grid for dp/cdp")->check(CLI::PositiveNumber);
  train_cmd->add_option("--min-count", tr.min_count, "Minimum group rows per cdp stratum")
      ->envname("FAIRAUDIT_MIN_COUNT");
  train_cmd->add_option("--max-epochs", tr.max_epochs, "Gradient-descent epoch cap");
  train_cmd->add_option("--l2", tr.l2, "L2 penalty")->check(CLI::NonNegativeNumber);

  CounterfactualArgs cf;
  auto* cf_cmd = app.add_subcommand("counterfactual", "Counterfactuals and causal fairness gaps for an SCM");
  cf_cmd->add_option("--scm", cf.scm, "Structural model JSON")->required()->check(CLI::ExistingFile);
  cf_cmd->add_option("--unit", cf.unit, "Observed unit: node=value,...");
  cf_cmd->add_option("--do", cf.intervene, "Intervention: node=value,...");
  cf_cmd->add_option("--hold", cf.hold, "Nodes kept at factual values, or all-descendants");
  cf_cmd->add_option("--nodes", cf.nodes, "Nodes to report (default: all)");
  cf_cmd->add_option("--budget", cf.budget, "Monte Carlo draws")->envname("FAIRAUDIT_MC_BUDGET");
  cf_cmd->add_flag("--samples", cf.samples, "Include per-world values");
  cf_cmd->add_option("--data", cf.data, "Gap mode: units to average over")->check(CLI::ExistingFile);
  cf_cmd->add_option("--schema", cf.schema, "Gap mode: schema for --data")->check(CLI::ExistingFile);
  cf_cmd->add_option("--model", cf.model, "Gap mode: model whose decisions are compared")
      ->check(CLI::ExistingFile);
  cf_cmd->add_option("--a", cf.a, "Gap mode: factual group value");
  cf_cmd->add_option("--b", cf.b, "Gap mode: counterfactual group value");

  ExperimentArgs ex;
  auto* ex_cmd = app.add_subcommand("experiment", "Five-approach comparison on the synthetic datasets");
  ex_cmd->add_option("--adult", ex.adult, "Optional Adult CSV")->check(CLI::ExistingFile);
  ex_cmd->add_option("--adult-schema", ex.adult_schema, "Schema for --adult");
  ex_cmd->add_option("--out", ex.out, "Write <out>.csv and <out>.json");
  ex_cmd->add_option("--n", ex.n, "Rows per synthetic dataset")->check(CLI::PositiveNumber);
  ex_cmd->add_option("--interpretation", ex.interpretation, "Force std | variance")
      ->check(CLI::IsMember({"std", "variance"}));

  app.add_subcommand("metrics", "List the metric registry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*audit_cmd) return cmd_audit(g, audit, metrics_opt->count() > 0);
    if (*synth_cmd) return cmd_synth(g, synth);
    if (*train_cmd) return cmd_train(g, tr);
    if (*cf_cmd) return cmd_counterfactual(g, cf);
    if (*ex_cmd) return cmd_experiment(g, ex);
    return cmd_metrics(g);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
