#include "fairaudit/modeling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "fairaudit/errors.hpp"
#include "fairaudit/group_metrics.hpp"
#include "fairaudit/report_json.hpp"

namespace fairaudit {

// ---------------------------------------------------------------------------
// Strategy specs

MitigationSpec MitigationSpec::parse(const std::string& text) {
  MitigationSpec s;
  auto after = [&](const std::string& prefix) { return text.substr(prefix.size()); };
  if (text == "full") return s;
  if (text == "ftu") {
    s.strategy = Strategy::ftu;
  } else if (text == "dp") {
    s.strategy = Strategy::dp_post;
  } else if (text.rfind("cdp:", 0) == 0) {
    s.strategy = Strategy::cdp_post;
    s.conditioning = after("cdp:");
    if (s.conditioning.empty()) throw DomainError("cdp strategy needs a column: cdp:<column>");
  } else if (text.rfind("supp-drop:", 0) == 0) {
    s.strategy = Strategy::suppression;
    std::istringstream in(after("supp-drop:"));
    std::string item;
    while (std::getline(in, item, ','))
      if (!item.empty()) s.drop.push_back(item);
    if (s.drop.empty()) throw DomainError("supp-drop needs at least one column");
  } else if (text.rfind("supp:", 0) == 0) {
    s.strategy = Strategy::suppression;
    const auto v = after("supp:");
    std::size_t pos = 0;
    try {
      s.threshold = std::stod(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != v.size()) throw DomainError("bad suppression threshold '" + v + "'");
    if (!(s.threshold >= 0.0 && s.threshold <= 1.0))
      throw DomainError("suppression threshold must lie in [0,1]");
  } else {
    throw DomainError("unknown strategy '" + text +
                      "' (full | ftu | supp:<thr> | supp-drop:<cols> | dp | cdp:<col>)");
  }
  return s;
}

std::string MitigationSpec::to_string() const {
  switch (strategy) {
    case Strategy::full: return "full";
    case Strategy::ftu: return "ftu";
    case Strategy::dp_post: return "dp";
    case Strategy::cdp_post: return "cdp:" + conditioning;
    case Strategy::suppression: break;
  }
  if (!drop.empty()) return fmt::format("supp-drop:{}", fmt::join(drop, ","));
  return fmt::format("supp:{}", threshold);
}

// ---------------------------------------------------------------------------
// Encoding

namespace {

struct ColumnView {
  bool categorical = false;
  const std::vector<double>* values = nullptr;  // continuous
  std::vector<int> codes;                       // categorical
  const std::vector<std::string>* levels = nullptr;
};

ColumnView view(const Dataset& ds, const std::string& name, bool sensitive) {
  ColumnView v;
  if (sensitive) {
    if (ds.sensitive().name() != name)
      throw PreconditionError("model expects sensitive attribute '" + name + "', dataset has '" +
                              ds.sensitive().name() + "'");
    v.categorical = true;
    v.codes = ds.sensitive().codes();
    v.levels = &ds.sensitive().labels();
    return v;
  }
  const auto* f = ds.find_feature(name);
  if (!f) throw PreconditionError("dataset lacks model input '" + name + "'");
  v.categorical = f->is_categorical();
  if (v.categorical) {
    v.codes.resize(f->size());
    for (std::size_t i = 0; i < f->size(); ++i) v.codes[i] = f->code(i);
    v.levels = &f->levels;
  } else {
    v.values = &f->values;
  }
  return v;
}

std::optional<double> numeric(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double pearson(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  if (x.empty()) return 0.0;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// Raw (unstandardized) design columns of one source.
std::vector<std::vector<double>> raw_columns(const EncodedSource& src, const Dataset& ds) {
  const auto v = view(ds, src.name, src.sensitive);
  const auto n = ds.rows();
  if (src.categorical != v.categorical)
    throw PreconditionError("model input '" + src.name + "' is " +
                            (src.categorical ? "categorical" : "continuous") + " in training data");
  if (!src.categorical) return {*v.values};
  std::map<std::string, std::size_t> level_index;
  for (std::size_t k = 0; k < src.levels.size(); ++k) level_index[src.levels[k]] = k;
  std::vector<std::vector<double>> cols(src.levels.size() - 1, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& label = (*v.levels)[v.codes[i]];
    auto it = level_index.find(label);
    if (it == level_index.end())
      throw DomainError("column '" + src.name + "' has level '" + label +
                        "' unseen in training (row " + std::to_string(i + 1) + ")");
    if (it->second > 0) cols[it->second - 1][i] = 1.0;
  }
  return cols;
}

EncodedSource make_source(const Dataset& ds, const std::string& name, bool sensitive) {
  const auto v = view(ds, name, sensitive);
  EncodedSource src{name, v.categorical, sensitive, {}};
  if (v.categorical) {
    std::vector<bool> present(v.levels->size(), false);
    for (int c : v.codes) present[c] = true;
    for (std::size_t k = 0; k < present.size(); ++k)
      if (present[k]) src.levels.push_back((*v.levels)[k]);
    if (src.levels.empty()) throw PreconditionError("column '" + name + "' has no rows");
  }
  return src;
}

FeatureEncoding fit_encoding(const Dataset& ds, const std::vector<std::string>& features,
                             bool with_sensitive) {
  FeatureEncoding enc;
  for (const auto& f : features) enc.sources.push_back(make_source(ds, f, false));
  if (with_sensitive) enc.sources.push_back(make_source(ds, ds.sensitive().name(), true));
  const auto n = static_cast<double>(ds.rows());
  for (const auto& src : enc.sources) {
    for (const auto& col : raw_columns(src, ds)) {
      const double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
      double ss = 0.0;
      for (double x : col) ss += (x - mean) * (x - mean);
      const double sd = std::sqrt(ss / n);
      enc.means.push_back(mean);
      enc.scales.push_back(sd > 0.0 ? sd : 1.0);
    }
  }
  return enc;
}

}  // namespace

std::vector<double> FeatureEncoding::design(const Dataset& ds) const {
  const auto n = ds.rows();
  const auto d = columns();
  std::vector<double> x(n * d);
  std::size_t c = 0;
  for (const auto& src : sources) {
    for (const auto& col : raw_columns(src, ds)) {
      for (std::size_t i = 0; i < n; ++i) x[i * d + c] = (col[i] - means[c]) / scales[c];
      ++c;
    }
  }
  return x;
}

bool ClassifierModel::uses_sensitive() const {
  return std::any_of(encoding.sources.begin(), encoding.sources.end(),
                     [](const auto& s) { return s.sensitive; });
}

std::vector<std::string> ClassifierModel::input_names() const {
  std::vector<std::string> out;
  for (const auto& s : encoding.sources) out.push_back(s.name);
  return out;
}

std::vector<double> ClassifierModel::scores(const Dataset& ds) const {
  const auto x = encoding.design(ds);
  const auto d = encoding.columns();
  std::vector<double> s(ds.rows());
  for (std::size_t i = 0; i < s.size(); ++i) {
    double z = intercept;
    for (std::size_t c = 0; c < d; ++c) z += weights[c] * x[i * d + c];
    s[i] = sigmoid(z);
  }
  return s;
}

double ClassifierModel::score_values(std::span<const double> values) const {
  if (values.size() != encoding.sources.size())
    throw PreconditionError("score_values: one value per model input expected");
  double z = intercept;
  std::size_t c = 0;
  for (std::size_t k = 0; k < encoding.sources.size(); ++k) {
    const auto& src = encoding.sources[k];
    if (!src.categorical) {
      z += weights[c] * (values[k] - encoding.means[c]) / encoding.scales[c];
      ++c;
      continue;
    }
    std::optional<std::size_t> level;
    for (std::size_t l = 0; l < src.levels.size(); ++l)
      if (numeric(src.levels[l]) == values[k]) level = l;
    if (!level)
      throw DomainError(fmt::format("input '{}' value {} matches no training level", src.name,
                                    values[k]));
    for (std::size_t l = 1; l < src.levels.size(); ++l, ++c)
      z += weights[c] * ((*level == l ? 1.0 : 0.0) - encoding.means[c]) / encoding.scales[c];
  }
  return sigmoid(z);
}

// ---------------------------------------------------------------------------
// Training

std::vector<std::pair<std::string, double>> sensitive_correlations(const Dataset& ds) {
  const auto& a = ds.sensitive();
  const auto n = ds.rows();
  std::vector<std::vector<double>> indicators;
  const std::size_t first = a.group_count() == 2 ? 1 : 0;
  for (std::size_t g = first; g < a.group_count(); ++g) {
    std::vector<double> ind(n);
    for (std::size_t i = 0; i < n; ++i) ind[i] = a.code(i) == static_cast<int>(g) ? 1.0 : 0.0;
    indicators.push_back(std::move(ind));
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& f : ds.features()) {
    std::vector<std::vector<double>> cols;
    if (f.is_categorical()) {
      const std::size_t start = f.level_count() == 2 ? 1 : 0;
      for (std::size_t l = start; l < f.level_count(); ++l) {
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) c[i] = f.code(i) == static_cast<int>(l) ? 1.0 : 0.0;
        cols.push_back(std::move(c));
      }
    } else {
      cols.push_back(f.values);
    }
    double best = 0.0;
    for (const auto& c : cols)
      for (const auto& ind : indicators) best = std::max(best, std::abs(pearson(c, ind)));
    out.emplace_back(f.name, best);
  }
  return out;
}

double log_loss(std::span<const double> design, std::size_t columns, std::span<const int> y,
                double intercept, std::span<const double> weights, double l2,
                std::vector<double>* gradient) {
  const auto n = y.size();
  if (gradient) gradient->assign(columns + 1, 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = design.data() + i * columns;
    double z = intercept;
    for (std::size_t c = 0; c < columns; ++c) z += weights[c] * row[c];
    loss += softplus(z) - y[i] * z;
    if (gradient) {
      const double r = sigmoid(z) - y[i];
      (*gradient)[0] += r;
      for (std::size_t c = 0; c < columns; ++c) (*gradient)[c + 1] += r * row[c];
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  loss *= inv;
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  loss += 0.5 * l2 * reg;
  if (gradient) {
    for (auto& g : *gradient) g *= inv;
    for (std::size_t c = 0; c < columns; ++c) (*gradient)[c + 1] += l2 * weights[c];
  }
  return loss;
}

namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Nesterov-accelerated gradient descent with gradient-based restart. The
// step is 1/L for L = (1 + d)/4 + l2, an upper bound on the curvature of the
// mean log-loss when every design column has unit variance.
void fit_logistic(ClassifierModel& m, const std::vector<double>& x, std::span<const int> y,
                  const TrainConfig& cfg) {
  const auto d = m.encoding.columns();
  const double step = 1.0 / (0.25 * static_cast<double>(d + 1) + cfg.l2);
  std::vector<double> theta(d + 1, 0.0), prev(d + 1, 0.0), look(d + 1, 0.0), grad;
  double t = 1.0;
  auto loss_at = [&](const std::vector<double>& p, std::vector<double>* g) {
    return log_loss(x, d, y, p[0], std::span<const double>(p).subspan(1), cfg.l2, g);
  };
  std::size_t epoch = 0;
  for (; epoch < cfg.max_epochs; ++epoch) {
    loss_at(look, &grad);
    if (norm(grad) <= cfg.gradient_tolerance) {
      theta = look;
      break;
    }
    prev = theta;
    for (std::size_t k = 0; k <= d; ++k) theta[k] = look[k] - step * grad[k];
    double progress = 0.0;
    for (std::size_t k = 0; k <= d; ++k) progress += grad[k] * (theta[k] - prev[k]);
    if (progress > 0.0) t = 1.0;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    for (std::size_t k = 0; k <= d; ++k) look[k] = theta[k] + beta * (theta[k] - prev[k]);
    t = t_next;
  }
  loss_at(theta, &grad);
  m.intercept = theta[0];
  m.weights.assign(theta.begin() + 1, theta.end());
  m.epochs = epoch;
  m.gradient_norm = norm(grad);
}

}  // namespace

ClassifierModel train(const Dataset& ds, const MitigationSpec& spec, const TrainConfig& cfg,
                      std::uint64_t /*seed*/) {
  const auto& y = ds.require_target("train");
  if (ds.rows() == 0) throw PreconditionError("cannot train on an empty dataset");
  ClassifierModel m;
  m.spec = spec;
  std::vector<std::string> features = ds.feature_names();

  if (spec.strategy == Strategy::suppression) {
    SuppressionReport rep;
    rep.correlations = sensitive_correlations(ds);
    for (const auto& name : spec.drop)
      if (!ds.find_feature(name)) throw PreconditionError("cannot drop unknown feature '" + name + "'");
    for (const auto& [name, corr] : rep.correlations) {
      const bool drop = spec.drop.empty()
                            ? corr > spec.threshold
                            : std::find(spec.drop.begin(), spec.drop.end(), name) != spec.drop.end();
      (drop ? rep.dropped : rep.kept).push_back(name);
    }
    if (rep.kept.empty())
      throw PreconditionError("degenerate model: suppression dropped every feature");
    features = rep.kept;
    m.suppression = std::move(rep);
  }
  if (spec.strategy == Strategy::cdp_post) strata_for(ds, spec.conditioning);

  m.encoding = fit_encoding(ds, features, spec.uses_sensitive());
  fit_logistic(m, m.encoding.design(ds), y, cfg);

  if (spec.strategy == Strategy::dp_post) {
    m.policy = fit_dp_threshold(ds, m, cfg.grid_size);
  } else if (spec.strategy == Strategy::cdp_post) {
    m.policy = fit_cdp_threshold(ds, m, spec.conditioning, cfg.grid_size, cfg.min_count);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Threshold post-processing

namespace {

struct DpFit {
  std::size_t k = 0;
  std::vector<std::optional<double>> thresholds;  // per group, absent when empty
  std::vector<std::string> flags;
};

DpFit fit_dp(const SensitiveAttribute& a, std::span<const int> y, std::span<const double> s,
             std::size_t grid) {
  if (grid == 0) throw PreconditionError("grid size must be positive");
  const auto groups = a.group_count();
  struct Group {
    std::vector<double> scores;  // descending
    std::vector<std::size_t> pos_prefix;
    std::size_t positives = 0;
  };
  std::vector<Group> g(groups);
  {
    std::vector<std::vector<std::pair<double, int>>> rows(groups);
    for (std::size_t i = 0; i < s.size(); ++i) rows[a.code(i)].emplace_back(s[i], y[i]);
    for (std::size_t k = 0; k < groups; ++k) {
      std::stable_sort(rows[k].begin(), rows[k].end(),
                       [](const auto& l, const auto& r) { return l.first > r.first; });
      g[k].pos_prefix.push_back(0);
      for (const auto& [score, label] : rows[k]) {
        g[k].scores.push_back(score);
        g[k].pos_prefix.push_back(g[k].pos_prefix.back() + static_cast<std::size_t>(label));
      }
      g[k].positives = g[k].pos_prefix.back();
    }
  }
  const double reject_all = [&] {
    double hi = 1.0;
    for (double v : s) hi = std::max(hi, v);
    return std::nextafter(hi, std::numeric_limits<double>::infinity());
  }();
  auto accepted = [&](const Group& gr, std::size_t m) -> std::pair<double, std::size_t> {
    if (m == 0) return {reject_all, 0};
    const double t = gr.scores[m - 1];
    const auto it = std::partition_point(gr.scores.begin(), gr.scores.end(),
                                         [t](double v) { return v >= t; });
    return {t, static_cast<std::size_t>(it - gr.scores.begin())};
  };
  auto quota = [&](std::size_t k, std::size_t n) { return (k * n + grid - 1) / grid; };

  DpFit fit;
  std::size_t best_correct = 0;
  bool have_best = false;
  for (std::size_t k = 0; k <= grid; ++k) {
    std::size_t correct = 0;
    for (const auto& gr : g) {
      const auto n = gr.scores.size();
      if (n == 0) continue;
      const auto acc = accepted(gr, quota(k, n)).second;
      const auto tp = gr.pos_prefix[acc];
      const auto tn = (n - gr.positives) - (acc - tp);
      correct += tp + tn;
    }
    if (!have_best || correct > best_correct) {
      best_correct = correct;
      fit.k = k;
      have_best = true;
    }
  }
  fit.thresholds.resize(groups);
  for (std::size_t k = 0; k < groups; ++k) {
    const auto& gr = g[k];
    const auto n = gr.scores.size();
    if (n == 0) continue;
    const auto m = quota(fit.k, n);
    const auto [t, acc] = accepted(gr, m);
    fit.thresholds[k] = t;
    if (n > 1 && gr.scores.front() == gr.scores.back())
      fit.flags.push_back("group '" + a.labels()[k] + "': constant scores");
    if (acc > m)
      fit.flags.push_back(fmt::format("group '{}': {} rows tied at the threshold", a.labels()[k],
                                      acc - m + 1));
  }
  return fit;
}

}  // namespace

ThresholdPolicy fit_dp_threshold(const Dataset& ds, std::span<const double> scores,
                                 std::size_t grid_size) {
  const auto& y = ds.require_target("fit_dp_threshold");
  if (scores.size() != ds.rows()) throw DataError("score vector length does not match dataset");
  const auto fit = fit_dp(ds.sensitive(), y, scores, grid_size);
  ThresholdPolicy p;
  p.target_rate = static_cast<double>(fit.k) / static_cast<double>(grid_size);
  for (std::size_t g = 0; g < fit.thresholds.size(); ++g)
    if (fit.thresholds[g]) p.cells[{ds.sensitive().labels()[g], ""}] = *fit.thresholds[g];
  p.flags = fit.flags;
  return p;
}

ThresholdPolicy fit_dp_threshold(const Dataset& ds, const ClassifierModel& model,
                                 std::size_t grid_size) {
  return fit_dp_threshold(ds, model.scores(ds), grid_size);
}

ThresholdPolicy fit_cdp_threshold(const Dataset& ds, std::span<const double> scores,
                                  const std::string& conditioning, std::size_t grid_size,
                                  std::size_t min_count) {
  const auto strata = strata_for(ds, conditioning);
  const auto global = fit_dp_threshold(ds, scores, grid_size);
  const auto& a = ds.sensitive();
  ThresholdPolicy p;
  p.stratum_column = conditioning;
  p.target_rate = global.target_rate;
  for (const auto& f : global.flags) p.flags.push_back("global: " + f);

  for (std::size_t s = 0; s < strata.labels.size(); ++s) {
    const auto& label = strata.labels[s];
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.rows(); ++i)
      if (strata.codes[i] == static_cast<int>(s)) rows.push_back(i);
    if (rows.empty()) continue;
    std::vector<std::size_t> counts(a.group_count(), 0);
    for (auto i : rows) ++counts[a.code(i)];
    const bool qualifies = std::all_of(counts.begin(), counts.end(),
                                       [&](auto c) { return c >= std::max<std::size_t>(1, min_count); });
    if (!qualifies) {
      p.flags.push_back(fmt::format("stratum '{}': a group has fewer than {} rows; global policy used",
                                    label, min_count));
      for (const auto& [cell, t] : global.cells) p.cells[{cell.first, label}] = t;
      continue;
    }
    std::vector<double> sub_scores;
    for (auto i : rows) sub_scores.push_back(scores[i]);
    const auto local = fit_dp_threshold(ds.subset(rows), sub_scores, grid_size);
    p.stratum_rates[label] = local.target_rate;
    for (const auto& [cell, t] : local.cells) p.cells[{cell.first, label}] = t;
    for (const auto& f : local.flags) p.flags.push_back("stratum '" + label + "': " + f);
  }
  return p;
}

ThresholdPolicy fit_cdp_threshold(const Dataset& ds, const ClassifierModel& model,
                                  const std::string& conditioning, std::size_t grid_size,
                                  std::size_t min_count) {
  return fit_cdp_threshold(ds, model.scores(ds), conditioning, grid_size, min_count);
}

PredictionSet predict(const ClassifierModel& model, const Dataset& ds,
                      const std::optional<ThresholdPolicy>& policy) {
  PredictionSet out;
  out.scores = model.scores(ds);
  const auto& pol = policy ? policy : model.policy;
  if (!pol) {
    std::vector<int> d(ds.rows());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*out.scores)[i] >= 0.5 ? 1 : 0;
    out.decisions = std::move(d);
    return out;
  }
  std::optional<Strata> strata;
  if (pol->stratum_column) strata = strata_for(ds, *pol->stratum_column);
  return apply_threshold(out, *pol, ds.sensitive(), strata);
}

std::function<std::vector<int>(const Dataset&)> decision_function(
    const ClassifierModel& model, const std::optional<ThresholdPolicy>& policy) {
  return [model, policy](const Dataset& ds) { return *predict(model, ds, policy).decisions; };
}

ScmDecision scm_decision(const ClassifierModel& model, const Scm& scm,
                         const std::optional<ThresholdPolicy>& policy) {
  const auto pol = policy ? policy : model.policy;
  ScmDecision dec;
  dec.inputs = model.input_names();
  for (const auto& name : dec.inputs) scm.require_index(name);
  const std::size_t n_model = dec.inputs.size();

  auto input_slot = [&](const std::string& name) {
    auto it = std::find(dec.inputs.begin(), dec.inputs.end(), name);
    if (it != dec.inputs.end()) return static_cast<std::size_t>(it - dec.inputs.begin());
    scm.require_index(name);
    dec.inputs.push_back(name);
    return dec.inputs.size() - 1;
  };
  std::optional<std::size_t> group_slot, stratum_slot;
  // Numeric node value -> policy label, per axis.
  std::vector<std::pair<double, std::string>> group_labels, stratum_labels;
  if (pol) {
    group_slot = input_slot(scm.sensitive_name());
    if (pol->stratum_column) stratum_slot = input_slot(*pol->stratum_column);
    for (const auto& [cell, t] : pol->cells) {
      auto add = [](auto& list, const std::string& label) {
        const auto v = numeric(label);
        if (!v) throw DomainError("policy label '" + label + "' is not a numeric node value");
        for (const auto& e : list)
          if (e.second == label) return;
        list.emplace_back(*v, label);
      };
      add(group_labels, cell.first);
      if (pol->stratum_column) add(stratum_labels, cell.second);
    }
  }
  dec.fn = [model, pol, n_model, group_slot, stratum_slot, group_labels,
            stratum_labels](std::span<const double> v) {
    const double s = model.score_values(v.subspan(0, n_model));
    if (!pol) return s >= 0.5 ? 1.0 : 0.0;
    auto label = [](const auto& list, double x) -> const std::string& {
      for (const auto& e : list)
        if (e.first == x) return e.second;
      throw DomainError(fmt::format("node value {} has no threshold cell", x));
    };
    const std::string stratum = stratum_slot ? label(stratum_labels, v[*stratum_slot]) : std::string();
    return s >= pol->threshold(label(group_labels, v[*group_slot]), stratum) ? 1.0 : 0.0;
  };
  return dec;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

using json = nlohmann::ordered_json;

ThresholdPolicy policy_from(const json& j) {
  ThresholdPolicy p;
  if (!j.at("stratum_column").is_null()) p.stratum_column = j.at("stratum_column").get<std::string>();
  p.target_rate = j.at("target_rate").get<double>();
  p.stratum_rates = j.value("stratum_rates", std::map<std::string, double>{});
  for (const auto& c : j.at("cells"))
    p.cells[{c.at("group").get<std::string>(), c.at("stratum").get<std::string>()}] =
        c.at("threshold").get<double>();
  p.flags = j.value("flags", std::vector<std::string>{});
  return p;
}

}  // namespace

std::string model_to_json(const ClassifierModel& m) {
  json sources = json::array();
  for (const auto& s : m.encoding.sources)
    sources.push_back({{"name", s.name},
                       {"categorical", s.categorical},
                       {"sensitive", s.sensitive},
                       {"levels", s.levels}});
  json j{{"kind", "logistic"},
         {"strategy", m.spec.to_string()},
         {"intercept", m.intercept},
         {"weights", m.weights},
         {"encoding", {{"sources", sources}, {"means", m.encoding.means}, {"scales", m.encoding.scales}}},
         {"epochs", m.epochs},
         {"gradient_norm", m.gradient_norm}};
  if (m.suppression) {
    json corr = json::array();
    for (const auto& [name, c] : m.suppression->correlations)
      corr.push_back({{"feature", name}, {"abs_correlation", c}});
    j["suppression"] = {{"correlations", corr},
                        {"dropped", m.suppression->dropped},
                        {"kept", m.suppression->kept}};
  }
  j["policy"] = m.policy ? to_json(*m.policy) : json(nullptr);
  return j.dump(2) + "\n";
}

ClassifierModel model_from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    if (j.at("kind").get<std::string>() != "logistic")
      throw SchemaError("unsupported model kind '" + j.at("kind").get<std::string>() + "'");
    ClassifierModel m;
    m.spec = MitigationSpec::parse(j.at("strategy").get<std::string>());
    m.intercept = j.at("intercept").get<double>();
    m.weights = j.at("weights").get<std::vector<double>>();
    const auto& enc = j.at("encoding");
    for (const auto& s : enc.at("sources"))
      m.encoding.sources.push_back({s.at("name").get<std::string>(), s.at("categorical").get<bool>(),
                                    s.at("sensitive").get<bool>(),
                                    s.at("levels").get<std::vector<std::string>>()});
    m.encoding.means = enc.at("means").get<std::vector<double>>();
    m.encoding.scales = enc.at("scales").get<std::vector<double>>();
    m.epochs = j.value("epochs", std::size_t{0});
    m.gradient_norm = j.value("gradient_norm", 0.0);
    if (j.contains("suppression")) {
      SuppressionReport r;
      for (const auto& c : j["suppression"].at("correlations"))
        r.correlations.emplace_back(c.at("feature").get<std::string>(),
                                    c.at("abs_correlation").get<double>());
      r.dropped = j["suppression"].at("dropped").get<std::vector<std::string>>();
      r.kept = j["suppression"].at("kept").get<std::vector<std::string>>();
      m.suppression = std::move(r);
    }
    if (j.contains("policy") && !j.at("policy").is_null()) m.policy = policy_from(j.at("policy"));
    std::size_t expected = 0;
    for (const auto& s : m.encoding.sources)
      expected += s.categorical ? s.levels.size() - 1 : 1;
    if (m.weights.size() != expected || m.encoding.means.size() != expected ||
        m.encoding.scales.size() != expected)
      throw SchemaError("model weights do not match its encoding");
    for (double sc : m.encoding.scales)
      if (!(sc > 0.0)) throw SchemaError("model encoding has a non-positive scale");
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model JSON: ") + e.what());
  }
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << model_to_json(model);
}

ClassifierModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace fairaudit
