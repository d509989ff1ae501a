#include "fairaudit/causal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "fairaudit/errors.hpp"
#include "fairaudit/random.hpp"
#include "parallel.hpp"

namespace fairaudit {

NoiseSpec NoiseSpec::gaussian(double mean, double std) {
  NoiseSpec s;
  s.kind = Kind::gaussian;
  s.mean = mean;
  s.std = std;
  return s;
}

NoiseSpec NoiseSpec::bernoulli(double p) {
  NoiseSpec s;
  s.kind = Kind::bernoulli;
  s.p = p;
  return s;
}

NoiseSpec NoiseSpec::point(double value) {
  NoiseSpec s;
  s.kind = Kind::point;
  s.value = value;
  return s;
}

Assignment Assignment::exogenous() { return {}; }

Assignment Assignment::linear(double intercept, std::vector<double> coefficients) {
  Assignment a;
  a.kind = Kind::linear;
  a.intercept = intercept;
  a.coefficients = std::move(coefficients);
  return a;
}

Assignment Assignment::threshold(double intercept, std::vector<double> coefficients, double cutoff,
                                 bool strict) {
  Assignment a;
  a.kind = Kind::threshold;
  a.intercept = intercept;
  a.coefficients = std::move(coefficients);
  a.cutoff = cutoff;
  a.strict = strict;
  return a;
}

const char* to_string(NodeRole role) {
  switch (role) {
    case NodeRole::sensitive: return "sensitive";
    case NodeRole::target: return "target";
    case NodeRole::feature: return "feature";
    case NodeRole::latent: return "latent";
  }
  return "?";
}

NodeRole parse_node_role(const std::string& text) {
  if (text == "sensitive") return NodeRole::sensitive;
  if (text == "target") return NodeRole::target;
  if (text == "feature") return NodeRole::feature;
  if (text == "latent") return NodeRole::latent;
  throw DomainError("unknown node role '" + text + "'");
}

bool Node::binary() const noexcept {
  if (assignment.kind == Assignment::Kind::threshold) return true;
  if (assignment.kind != Assignment::Kind::exogenous) return false;
  if (noise.kind == NoiseSpec::Kind::bernoulli) return true;
  return noise.kind == NoiseSpec::Kind::point && (noise.value == 0.0 || noise.value == 1.0);
}

// ---------------------------------------------------------------------------
// Scm

Scm::Scm(std::vector<Node> nodes) {
  if (nodes.empty()) throw PreconditionError("a structural model needs at least one node");
  const auto n = nodes.size();
  std::map<std::string, std::size_t> input_index;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& nd = nodes[i];
    if (nd.name.empty()) throw PreconditionError("node names must be non-empty");
    if (!input_index.emplace(nd.name, i).second)
      throw PreconditionError("duplicate node '" + nd.name + "'");
  }
  for (const auto& nd : nodes) {
    std::set<std::string> seen;
    for (const auto& p : nd.parents) {
      if (!input_index.count(p))
        throw PreconditionError("node '" + nd.name + "' has unknown parent '" + p + "'");
      if (p == nd.name) throw PreconditionError("node '" + nd.name + "' is its own parent");
      if (!seen.insert(p).second)
        throw PreconditionError("node '" + nd.name + "' lists parent '" + p + "' twice");
    }
    const auto& as = nd.assignment;
    if (as.kind == Assignment::Kind::exogenous) {
      if (!nd.parents.empty())
        throw PreconditionError("exogenous node '" + nd.name + "' cannot have parents");
    } else if (as.coefficients.size() != nd.parents.size()) {
      throw PreconditionError("node '" + nd.name + "': coefficients must cover exactly its parents");
    }
    if (nd.noise.kind == NoiseSpec::Kind::gaussian && !(nd.noise.std > 0.0))
      throw DomainError("node '" + nd.name + "': gaussian noise needs std > 0");
    if (nd.noise.kind == NoiseSpec::Kind::bernoulli && !(nd.noise.p >= 0.0 && nd.noise.p <= 1.0))
      throw DomainError("node '" + nd.name + "': bernoulli noise needs p in [0,1]");
  }

  // Stable Kahn: always place the earliest ready node in input order.
  std::vector<bool> placed(n, false);
  nodes_.reserve(n);
  while (nodes_.size() < n) {
    bool progressed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (placed[i]) continue;
      const bool ready = std::all_of(nodes[i].parents.begin(), nodes[i].parents.end(),
                                     [&](const auto& p) { return placed[input_index[p]]; });
      if (!ready) continue;
      placed[i] = true;
      nodes_.push_back(nodes[i]);
      progressed = true;
      break;
    }
    if (!progressed) throw PreconditionError("the causal graph has a cycle");
  }

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[nodes_[i].name] = i;
  parents_.assign(n, {});
  children_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& p : nodes_[i].parents) {
      parents_[i].push_back(index[p]);
      children_[index[p]].push_back(i);
    }
  }

  std::optional<std::size_t> sensitive;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& nd = nodes_[i];
    if (nd.role == NodeRole::sensitive) {
      if (sensitive) throw PreconditionError("exactly one sensitive node is allowed");
      if (!nd.binary()) throw PreconditionError("sensitive node '" + nd.name + "' must be binary");
      sensitive = i;
    } else if (nd.role == NodeRole::target) {
      if (target_) throw PreconditionError("at most one target node is allowed");
      if (!nd.binary()) throw PreconditionError("target node '" + nd.name + "' must be binary");
      target_ = i;
    }
  }
  if (!sensitive) throw PreconditionError("the model needs a sensitive node");
  sensitive_ = *sensitive;
}

const Node& Scm::node(const std::string& name) const { return nodes_[require_index(name)]; }

std::optional<std::size_t> Scm::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].name == name) return i;
  return std::nullopt;
}

std::size_t Scm::require_index(const std::string& name) const {
  if (auto i = index_of(name)) return *i;
  throw PreconditionError("unknown node '" + name + "'");
}

Dag Scm::dag() const {
  Dag d;
  for (const auto& nd : nodes_) {
    d.nodes.push_back(nd.name);
    for (const auto& p : nd.parents) d.edges.emplace_back(p, nd.name);
  }
  return d;
}

std::vector<bool> Scm::descendant_mask(std::size_t i) const {
  std::vector<bool> mask(nodes_.size(), false);
  // Children always follow their parents in storage order.
  for (auto c : children_[i]) mask[c] = true;
  for (std::size_t k = i + 1; k < nodes_.size(); ++k) {
    if (!mask[k]) continue;
    for (auto c : children_[k]) mask[c] = true;
  }
  return mask;
}

std::vector<std::string> Scm::descendants(const std::string& name) const {
  const auto mask = descendant_mask(require_index(name));
  std::vector<std::string> out;
  for (std::size_t k = 0; k < nodes_.size(); ++k)
    if (mask[k]) out.push_back(nodes_[k].name);
  return out;
}

Scm intervene(const Scm& scm, const std::map<std::string, double>& values) {
  std::vector<Node> nodes = scm.nodes();
  for (const auto& [name, v] : values) {
    auto& nd = nodes[scm.require_index(name)];
    nd.parents.clear();
    nd.assignment = Assignment::exogenous();
    nd.noise = NoiseSpec::point(v);
  }
  return Scm(std::move(nodes));
}

double evaluate_node(const Node& node, std::span<const double> parents, double u) {
  const auto& as = node.assignment;
  if (as.kind == Assignment::Kind::exogenous) return u;
  double s = as.intercept;
  for (std::size_t k = 0; k < parents.size(); ++k) s += as.coefficients[k] * parents[k];
  s += u;
  if (as.kind == Assignment::Kind::linear) return s;
  return (as.strict ? s > as.cutoff : s >= as.cutoff) ? 1.0 : 0.0;
}

// ---------------------------------------------------------------------------
// Sampling

NodeMatrix draw_noise(const Scm& scm, std::size_t n, std::uint64_t seed) {
  NodeMatrix m{n, scm.size(), std::vector<double>(n * scm.size())};
  Rng rng(seed);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < scm.size(); ++i) {
      const auto& nz = scm.node(i).noise;
      double u = nz.value;
      if (nz.kind == NoiseSpec::Kind::gaussian) u = rng.normal(nz.mean, nz.std);
      else if (nz.kind == NoiseSpec::Kind::bernoulli) u = rng.bernoulli(nz.p) ? 1.0 : 0.0;
      m.data[r * m.cols + i] = u;
    }
  }
  return m;
}

NodeMatrix propagate(const Scm& scm, const NodeMatrix& noise) {
  if (noise.cols != scm.size()) throw PreconditionError("noise matrix does not match the model");
  NodeMatrix v{noise.rows, noise.cols, std::vector<double>(noise.data.size())};
  std::vector<double> pa;
  for (std::size_t r = 0; r < noise.rows; ++r) {
    double* row = v.data.data() + r * v.cols;
    for (std::size_t i = 0; i < scm.size(); ++i) {
      const auto& nd = scm.node(i);
      pa.clear();
      for (auto p : scm.parent_indices(i)) pa.push_back(row[p]);
      const double u = nd.noise.kind == NoiseSpec::Kind::point ? nd.noise.value : noise.at(r, i);
      row[i] = evaluate_node(nd, pa, u);
    }
  }
  return v;
}

SampleResult sample_full(const Scm& scm, std::size_t n, std::uint64_t seed) {
  SampleResult out;
  out.values = propagate(scm, draw_noise(scm, n, seed));
  const auto& vals = out.values;
  auto column = [&](std::size_t i) {
    std::vector<double> c(n);
    for (std::size_t r = 0; r < n; ++r) c[r] = vals.at(r, i);
    return c;
  };
  auto codes = [&](std::size_t i) {
    std::vector<int> c(n);
    for (std::size_t r = 0; r < n; ++r) c[r] = static_cast<int>(vals.at(r, i));
    return c;
  };
  std::vector<FeatureColumn> features;
  for (std::size_t i = 0; i < scm.size(); ++i) {
    const auto& nd = scm.node(i);
    if (nd.role != NodeRole::feature) continue;
    if (nd.binary())
      features.push_back(FeatureColumn::categorical(nd.name, codes(i), {"0", "1"}));
    else
      features.push_back(FeatureColumn::continuous(nd.name, column(i)));
  }
  SensitiveAttribute a(scm.sensitive_name(), codes(scm.sensitive_index()), {"0", "1"});
  std::optional<std::vector<int>> target;
  std::string target_name = "Y";
  if (auto t = scm.target_index()) {
    target = codes(*t);
    target_name = scm.node(*t).name;
  }
  out.data = Dataset(std::move(features), std::move(a), std::move(target), target_name);
  return out;
}

Dataset sample(const Scm& scm, std::size_t n, std::uint64_t seed) {
  return sample_full(scm, n, seed).data;
}

namespace {

double parse_level(const std::string& label, const std::string& column) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(label, &pos);
    if (pos == label.size()) return v;
  } catch (const std::exception&) {
  }
  throw DomainError("column '" + column + "' level '" + label + "' is not a numeric node value");
}

}  // namespace

std::vector<std::optional<double>> observe_row(const Scm& scm, const Dataset& ds, std::size_t row) {
  std::vector<std::optional<double>> obs(scm.size());
  for (std::size_t i = 0; i < scm.size(); ++i) {
    const auto& name = scm.node(i).name;
    if (name == ds.sensitive().name()) {
      const auto& a = ds.sensitive();
      obs[i] = parse_level(a.labels()[a.code(row)], name);
    } else if (ds.has_target() && name == ds.target_name()) {
      obs[i] = (*ds.target())[row];
    } else if (const auto* f = ds.find_feature(name)) {
      obs[i] = f->is_categorical() ? parse_level(f->levels[f->code(row)], name) : f->values[row];
    }
  }
  if (!obs[scm.sensitive_index()])
    throw PreconditionError("dataset lacks the sensitive node '" + scm.sensitive_name() + "'");
  return obs;
}

// ---------------------------------------------------------------------------
// Abduction

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxEnumeration = 1u << 16;

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

Posterior point_posterior(double v) {
  Posterior p;
  p.values = {v};
  p.weights = {1.0};
  return p;
}

Posterior discrete_posterior(std::vector<double> values, std::vector<double> weights) {
  std::vector<double> v, w;
  double total = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (weights[k] > 0.0) {
      v.push_back(values[k]);
      w.push_back(weights[k]);
      total += weights[k];
    }
  }
  if (v.size() == 1) return point_posterior(v[0]);
  Posterior p;
  p.kind = Posterior::Kind::discrete;
  p.values = std::move(v);
  for (double& x : w) x /= total;
  p.weights = std::move(w);
  return p;
}

Posterior prior_posterior(const NoiseSpec& nz) {
  switch (nz.kind) {
    case NoiseSpec::Kind::point: return point_posterior(nz.value);
    case NoiseSpec::Kind::bernoulli: return discrete_posterior({0.0, 1.0}, {1.0 - nz.p, nz.p});
    case NoiseSpec::Kind::gaussian: break;
  }
  Posterior p;
  p.kind = Posterior::Kind::gaussian;
  p.mean = nz.mean;
  p.std = nz.std;
  return p;
}

Posterior truncated(const NoiseSpec& nz, double lower, double upper, const std::string& name) {
  if (!(lower < upper)) throw AbductionError("observation of '" + name + "' has zero probability");
  Posterior p;
  p.kind = Posterior::Kind::truncated_gaussian;
  p.mean = nz.mean;
  p.std = nz.std;
  p.lower = lower;
  p.upper = upper;
  return p;
}

double linear_part(const Scm& scm, std::size_t i, const std::vector<std::optional<double>>& obs) {
  const auto& as = scm.node(i).assignment;
  if (as.kind == Assignment::Kind::exogenous) return 0.0;
  double g = as.intercept;
  const auto& pa = scm.parent_indices(i);
  for (std::size_t k = 0; k < pa.size(); ++k) g += as.coefficients[k] * *obs[pa[k]];
  return g;
}

bool threshold_fires(const Assignment& as, double inner) {
  return as.strict ? inner > as.cutoff : inner >= as.cutoff;
}

// Unobserved Gaussian node whose children are all observed point-noise
// threshold nodes with otherwise observed parents.
bool truncatable(const Scm& scm, std::size_t v, const std::vector<std::optional<double>>& obs) {
  const auto& nd = scm.node(v);
  if (nd.noise.kind != NoiseSpec::Kind::gaussian) return false;
  if (nd.assignment.kind == Assignment::Kind::threshold) return false;
  for (auto p : scm.parent_indices(v))
    if (!obs[p]) return false;
  for (auto c : scm.child_indices(v)) {
    const auto& ch = scm.node(c);
    if (!obs[c] || ch.assignment.kind != Assignment::Kind::threshold ||
        ch.noise.kind != NoiseSpec::Kind::point)
      return false;
    for (auto p : scm.parent_indices(c))
      if (p != v && !obs[p]) return false;
  }
  return true;
}

}  // namespace

Abduction abduct(const Scm& scm, std::vector<std::optional<double>> observed) {
  const auto n = scm.size();
  if (observed.size() != n) throw PreconditionError("observation does not match the model");
  Abduction ab;
  ab.observed = std::move(observed);
  const auto& obs = ab.observed;
  ab.noise.resize(n);

  enum class Mode { observed, prior, truncated };
  std::vector<Mode> mode(n, Mode::observed);
  for (std::size_t i = 0; i < n; ++i) {
    if (obs[i]) continue;
    const auto desc = scm.descendant_mask(i);
    bool observed_below = false;
    for (std::size_t k = 0; k < n; ++k) observed_below = observed_below || (desc[k] && obs[k]);
    if (!observed_below) {
      mode[i] = Mode::prior;
    } else if (truncatable(scm, i, obs)) {
      mode[i] = Mode::truncated;
    } else {
      throw PreconditionError("partial observation: '" + scm.node(i).name +
                              "' is unobserved but observed nodes depend on it");
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& nd = scm.node(i);
    const auto& nz = nd.noise;
    if (mode[i] == Mode::prior) {
      ab.noise[i] = prior_posterior(nz);
      continue;
    }
    if (mode[i] == Mode::truncated) {
      const double g = linear_part(scm, i, obs);
      double lo = -kInf, hi = kInf;
      for (auto c : scm.child_indices(i)) {
        const auto& ch = scm.node(c);
        const auto& pa = scm.parent_indices(c);
        double beta = 0.0, rest = ch.assignment.intercept + ch.noise.value;
        for (std::size_t k = 0; k < pa.size(); ++k) {
          if (pa[k] == i) beta = ch.assignment.coefficients[k];
          else rest += ch.assignment.coefficients[k] * *obs[pa[k]];
        }
        const bool fired = *obs[c] == 1.0;
        if (*obs[c] != 0.0 && !fired)
          throw AbductionError("binary node '" + ch.name + "' observed with a value other than 0/1");
        if (beta == 0.0) {
          if (threshold_fires(ch.assignment, rest) != fired)
            throw AbductionError("observation of '" + ch.name + "' has zero probability");
          continue;
        }
        // beta * (g + u) >= cutoff - rest  iff  the child fires.
        const double bound = (ch.assignment.cutoff - rest) / beta - g;
        if (fired == (beta > 0.0)) lo = std::max(lo, bound);
        else hi = std::min(hi, bound);
      }
      ab.noise[i] = truncated(nz, lo, hi, nd.name);
      continue;
    }

    const double x = *obs[i];
    const bool truncated_parent = std::any_of(
        scm.parent_indices(i).begin(), scm.parent_indices(i).end(),
        [&](auto p) { return mode[p] == Mode::truncated; });
    if (truncated_parent) {
      // Consistency is enforced by the parent's truncation.
      ab.noise[i] = point_posterior(nz.value);
      continue;
    }
    const double g = linear_part(scm, i, obs);
    if (nd.assignment.kind == Assignment::Kind::threshold) {
      if (x != 0.0 && x != 1.0)
        throw AbductionError("binary node '" + nd.name + "' observed with a value other than 0/1");
      const bool fired = x == 1.0;
      switch (nz.kind) {
        case NoiseSpec::Kind::point:
          if (threshold_fires(nd.assignment, g + nz.value) != fired)
            throw AbductionError("observation of '" + nd.name + "' has zero probability");
          ab.noise[i] = point_posterior(nz.value);
          break;
        case NoiseSpec::Kind::bernoulli: {
          std::vector<double> w{1.0 - nz.p, nz.p};
          for (int u = 0; u < 2; ++u)
            if (threshold_fires(nd.assignment, g + u) != fired) w[u] = 0.0;
          if (w[0] <= 0.0 && w[1] <= 0.0)
            throw AbductionError("observation of '" + nd.name + "' has zero probability");
          ab.noise[i] = discrete_posterior({0.0, 1.0}, w);
          break;
        }
        case NoiseSpec::Kind::gaussian: {
          const double cut = nd.assignment.cutoff - g;
          ab.noise[i] = fired ? truncated(nz, cut, kInf, nd.name) : truncated(nz, -kInf, cut, nd.name);
          break;
        }
      }
      continue;
    }
    const double r = x - g;
    switch (nz.kind) {
      case NoiseSpec::Kind::gaussian:
        ab.noise[i] = point_posterior(r);
        break;
      case NoiseSpec::Kind::point:
        if (!close(r, nz.value))
          throw AbductionError("observation of '" + nd.name + "' has zero probability");
        ab.noise[i] = point_posterior(nz.value);
        break;
      case NoiseSpec::Kind::bernoulli:
        if (close(r, 0.0) && nz.p < 1.0) ab.noise[i] = point_posterior(0.0);
        else if (close(r, 1.0) && nz.p > 0.0) ab.noise[i] = point_posterior(1.0);
        else throw AbductionError("observation of '" + nd.name + "' has zero probability");
        break;
    }
  }
  return ab;
}

// ---------------------------------------------------------------------------
// Prediction

namespace {

double sample_truncated_normal(Rng& rng, double mean, double sd, double lower, double upper) {
  static const boost::math::normal standard;
  double a = (lower - mean) / sd;
  double b = (upper - mean) / sd;
  // Work in the lower tail, where the cdf keeps its precision.
  const bool flip = a > 0.0;
  if (flip) {
    std::swap(a, b);
    a = -a;
    b = -b;
  }
  const double fa = std::isinf(a) ? 0.0 : boost::math::cdf(standard, a);
  const double fb = std::isinf(b) ? 1.0 : boost::math::cdf(standard, b);
  double z;
  const double q = fa + rng.uniform01() * (fb - fa);
  if (!(fb > fa) || q <= 0.0 || q >= 1.0) {
    z = std::isinf(b) ? a : (std::isinf(a) ? b : 0.5 * (a + b));
  } else {
    z = boost::math::quantile(standard, q);
    z = std::clamp(z, a, b);
  }
  if (flip) z = -z;
  return mean + sd * z;
}

double draw(const Posterior& p, Rng& rng) {
  switch (p.kind) {
    case Posterior::Kind::point: return p.values[0];
    case Posterior::Kind::discrete: {
      const double u = rng.uniform01();
      double acc = 0.0;
      for (std::size_t k = 0; k < p.values.size(); ++k) {
        acc += p.weights[k];
        if (u < acc) return p.values[k];
      }
      return p.values.back();
    }
    case Posterior::Kind::gaussian: return rng.normal(p.mean, p.std);
    case Posterior::Kind::truncated_gaussian:
      return sample_truncated_normal(rng, p.mean, p.std, p.lower, p.upper);
  }
  return 0.0;
}

struct Action {
  std::vector<std::optional<double>> forced;
  std::vector<bool> held;
};

Action make_action(const Scm& scm, const std::map<std::string, double>& intervention,
                   const std::set<std::string>& held) {
  Action act{std::vector<std::optional<double>>(scm.size()), std::vector<bool>(scm.size(), false)};
  for (const auto& [name, v] : intervention) act.forced[scm.require_index(name)] = v;
  for (const auto& name : held) {
    const auto i = scm.require_index(name);
    if (act.forced[i]) throw PreconditionError("node '" + name + "' is both intervened on and held");
    act.held[i] = true;
  }
  return act;
}

// Which nodes a set of outputs depends on in the counterfactual world
// (`cf`), which unobserved held nodes need their factual value (`fact`),
// and whose noise must therefore be drawn.
struct Needs {
  std::vector<bool> cf, fact, noise;
};

Needs compute_needs(const Scm& scm, const Abduction& ab, const Action& act,
                    const std::vector<std::size_t>& outputs) {
  const auto n = scm.size();
  Needs nd{std::vector<bool>(n, false), std::vector<bool>(n, false), std::vector<bool>(n, false)};
  std::vector<std::size_t> stack(outputs.begin(), outputs.end());
  std::vector<std::size_t> fact_stack;
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    if (nd.cf[i]) continue;
    nd.cf[i] = true;
    if (act.forced[i]) continue;
    if (act.held[i]) {
      if (!ab.observed[i]) fact_stack.push_back(i);
      continue;
    }
    for (auto p : scm.parent_indices(i)) stack.push_back(p);
  }
  while (!fact_stack.empty()) {
    const auto i = fact_stack.back();
    fact_stack.pop_back();
    if (nd.fact[i]) continue;
    nd.fact[i] = true;
    if (ab.observed[i]) continue;
    for (auto p : scm.parent_indices(i)) fact_stack.push_back(p);
  }
  for (std::size_t i = 0; i < n; ++i)
    nd.noise[i] = (nd.cf[i] && !act.forced[i] && !act.held[i]) || (nd.fact[i] && !ab.observed[i]);
  return nd;
}

struct Worlds {
  std::vector<std::vector<double>> u;
  std::vector<double> w;
  bool exact = true;
};

Worlds make_worlds(const Abduction& ab, const std::vector<bool>& needed, std::size_t mc_budget,
                   Rng& rng) {
  const auto n = ab.noise.size();
  Worlds out;
  bool finite = true;
  double combos = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!needed[i]) continue;
    finite = finite && ab.noise[i].finite_support();
    if (ab.noise[i].finite_support()) combos *= static_cast<double>(ab.noise[i].values.size());
  }
  if (finite && combos <= static_cast<double>(kMaxEnumeration)) {
    out.u.push_back(std::vector<double>(n, 0.0));
    out.w.push_back(1.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!needed[i]) continue;
      const auto& p = ab.noise[i];
      std::vector<std::vector<double>> u;
      std::vector<double> w;
      for (std::size_t k = 0; k < out.u.size(); ++k) {
        for (std::size_t s = 0; s < p.values.size(); ++s) {
          u.push_back(out.u[k]);
          u.back()[i] = p.values[s];
          w.push_back(out.w[k] * p.weights[s]);
        }
      }
      out.u = std::move(u);
      out.w = std::move(w);
    }
    return out;
  }
  out.exact = false;
  const std::size_t m = std::max<std::size_t>(1, mc_budget);
  out.u.assign(m, std::vector<double>(n, 0.0));
  out.w.assign(m, 1.0 / static_cast<double>(m));
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (needed[i]) out.u[k][i] = draw(ab.noise[i], rng);
  return out;
}

// Counterfactual node values of one world (entries outside `needs.cf` are
// left at zero).
void evaluate_world(const Scm& scm, const Abduction& ab, const Action& act, const Needs& needs,
                    const std::vector<double>& u, std::vector<double>& fact,
                    std::vector<double>& cf) {
  const auto n = scm.size();
  fact.assign(n, 0.0);
  cf.assign(n, 0.0);
  std::vector<double> pa;
  for (std::size_t i = 0; i < n; ++i) {
    if (!needs.fact[i]) continue;
    if (ab.observed[i]) {
      fact[i] = *ab.observed[i];
      continue;
    }
    pa.clear();
    for (auto p : scm.parent_indices(i)) pa.push_back(fact[p]);
    fact[i] = evaluate_node(scm.node(i), pa, u[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!needs.cf[i]) continue;
    if (act.forced[i]) {
      cf[i] = *act.forced[i];
    } else if (act.held[i]) {
      cf[i] = ab.observed[i] ? *ab.observed[i] : fact[i];
    } else {
      pa.clear();
      for (auto p : scm.parent_indices(i)) pa.push_back(cf[p]);
      cf[i] = evaluate_node(scm.node(i), pa, u[i]);
    }
  }
}

std::vector<std::optional<double>> observation_vector(const Scm& scm,
                                                      const std::map<std::string, double>& obs) {
  std::vector<std::optional<double>> v(scm.size());
  for (const auto& [name, x] : obs) v[scm.require_index(name)] = x;
  return v;
}

std::vector<std::size_t> indices_of(const Scm& scm, const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  for (const auto& name : names) out.push_back(scm.require_index(name));
  return out;
}

struct UnitResult {
  double p_a = 0.0;
  double p_b = 0.0;
  double se = 0.0;
  bool exact = true;
};

// Both arms share one set of posterior worlds (common random numbers).
UnitResult unit_gap(const Scm& scm, const ScmDecision& decision,
                    const std::vector<std::size_t>& inputs, const Abduction& ab,
                    const Action& arm_a, const Action& arm_b, std::size_t mc_budget, Rng& rng) {
  const auto needs_a = compute_needs(scm, ab, arm_a, inputs);
  const auto needs_b = compute_needs(scm, ab, arm_b, inputs);
  std::vector<bool> noise(scm.size());
  for (std::size_t i = 0; i < scm.size(); ++i) noise[i] = needs_a.noise[i] || needs_b.noise[i];
  const auto worlds = make_worlds(ab, noise, mc_budget, rng);

  UnitResult r;
  r.exact = worlds.exact;
  std::vector<double> fact, cf, buf(inputs.size());
  double sum_d = 0.0, sum_d2 = 0.0;
  for (std::size_t k = 0; k < worlds.u.size(); ++k) {
    evaluate_world(scm, ab, arm_a, needs_a, worlds.u[k], fact, cf);
    for (std::size_t j = 0; j < inputs.size(); ++j) buf[j] = cf[inputs[j]];
    const double da = decision.fn(buf);
    evaluate_world(scm, ab, arm_b, needs_b, worlds.u[k], fact, cf);
    for (std::size_t j = 0; j < inputs.size(); ++j) buf[j] = cf[inputs[j]];
    const double db = decision.fn(buf);
    r.p_a += worlds.w[k] * da;
    r.p_b += worlds.w[k] * db;
    sum_d += da - db;
    sum_d2 += (da - db) * (da - db);
  }
  if (!worlds.exact) {
    const double m = static_cast<double>(worlds.u.size());
    const double var = m > 1.0 ? std::max(0.0, (sum_d2 - sum_d * sum_d / m) / (m - 1.0)) : 0.0;
    r.se = std::sqrt(var / m);
  }
  return r;
}

CounterfactualGapReport gap_report(const Scm& scm, const ScmDecision& decision, const Dataset& ds,
                                   double a, double b, const std::set<std::string>& held,
                                   std::size_t mc_budget, std::uint64_t seed) {
  if (!decision.fn) throw PreconditionError("decision function is empty");
  const auto inputs = indices_of(scm, decision.inputs);
  const auto& a_name = scm.sensitive_name();
  const Action arm_a = make_action(scm, {{a_name, a}}, held);
  const Action arm_b = make_action(scm, {{a_name, b}}, held);

  CounterfactualGapReport rep;
  rep.a = a;
  rep.b = b;
  rep.mediators_held.assign(held.begin(), held.end());
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    const auto& attr = ds.sensitive();
    if (parse_level(attr.labels()[attr.code(r)], attr.name()) == a) rep.units.push_back(r);
  }
  const auto m = rep.units.size();
  rep.p_factual.resize(m);
  rep.p_counterfactual.resize(m);
  rep.unit_gaps.resize(m);
  std::vector<double> se(m);
  std::vector<char> exact(m, 1);
  std::vector<std::string> errors(m);
  detail::parallel_for(m, [&](std::size_t k) {
    const auto row = rep.units[k];
    try {
      Rng rng(derive_seed(seed, "unit/" + std::to_string(row)));
      const auto ab = abduct(scm, observe_row(scm, ds, row));
      const auto res = unit_gap(scm, decision, inputs, ab, arm_a, arm_b, mc_budget, rng);
      rep.p_factual[k] = res.p_a;
      rep.p_counterfactual[k] = res.p_b;
      se[k] = res.se;
      exact[k] = res.exact;
    } catch (const std::exception& e) {
      errors[k] = "row " + std::to_string(row + 1) + ": " + e.what();
    }
  }, 16);
  for (std::size_t k = 0; k < m; ++k)
    if (!errors[k].empty()) throw AbductionError(errors[k]);

  double sum_abs = 0.0, sum_signed = 0.0, sum_se2 = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double d = rep.p_factual[k] - rep.p_counterfactual[k];
    rep.unit_gaps[k] = std::abs(d);
    sum_abs += std::abs(d);
    sum_signed += d;
    sum_se2 += se[k] * se[k];
    rep.exact = rep.exact && exact[k];
  }
  if (m > 0) {
    const double dm = static_cast<double>(m);
    rep.cff_gap = sum_abs / dm;
    rep.ecff_gap = std::abs(sum_signed) / dm;
    rep.std_error = std::sqrt(sum_se2) / dm;
  }
  return rep;
}

}  // namespace

CounterfactualResult counterfactual(const Scm& scm, const CounterfactualQuery& query,
                                    std::size_t mc_budget, std::uint64_t seed,
                                    const std::vector<std::string>& nodes, bool keep_samples) {
  const auto ab = abduct(scm, observation_vector(scm, query.observed));
  const auto act = make_action(scm, query.intervention, query.mediators_held);
  CounterfactualResult res;
  res.nodes = nodes;
  if (res.nodes.empty())
    for (const auto& nd : scm.nodes()) res.nodes.push_back(nd.name);
  const auto outputs = indices_of(scm, res.nodes);
  const auto needs = compute_needs(scm, ab, act, outputs);
  Rng rng(seed);
  const auto worlds = make_worlds(ab, needs.noise, mc_budget, rng);
  res.exact = worlds.exact;
  res.worlds = worlds.u.size();
  res.means.assign(outputs.size(), 0.0);
  std::vector<double> fact, cf;
  for (std::size_t k = 0; k < worlds.u.size(); ++k) {
    evaluate_world(scm, ab, act, needs, worlds.u[k], fact, cf);
    std::vector<double> row(outputs.size());
    for (std::size_t j = 0; j < outputs.size(); ++j) {
      row[j] = cf[outputs[j]];
      res.means[j] += worlds.w[k] * row[j];
    }
    if (keep_samples) {
      res.samples.push_back(std::move(row));
      res.weights.push_back(worlds.w[k]);
    }
  }
  return res;
}

CounterfactualGapReport cff_gap(const Scm& scm, const ScmDecision& decision, const Dataset& ds,
                                double a, double b, std::size_t mc_budget, std::uint64_t seed) {
  return gap_report(scm, decision, ds, a, b, {}, mc_budget, seed);
}

CounterfactualGapReport ecff_gap(const Scm& scm, const ScmDecision& decision, const Dataset& ds,
                                 double a, double b, std::size_t mc_budget, std::uint64_t seed) {
  return gap_report(scm, decision, ds, a, b, {}, mc_budget, seed);
}

CounterfactualGapReport pcff_gap(const Scm& scm, const ScmDecision& decision, const Dataset& ds,
                                 double a, double b, const std::set<std::string>& fair_mediators,
                                 std::size_t mc_budget, std::uint64_t seed) {
  return gap_report(scm, decision, ds, a, b, fair_mediators, mc_budget, seed);
}

InterventionGap expectation_intervention_gap(const Scm& scm, const ScmDecision& decision, double a,
                                             double b, std::size_t mc_budget, std::uint64_t seed) {
  if (!decision.fn) throw PreconditionError("decision function is empty");
  const auto inputs = indices_of(scm, decision.inputs);
  const std::size_t m = std::max<std::size_t>(1, mc_budget);
  const auto noise = draw_noise(scm, m, seed);
  const auto va = propagate(intervene(scm, {{scm.sensitive_name(), a}}), noise);
  const auto vb = propagate(intervene(scm, {{scm.sensitive_name(), b}}), noise);
  InterventionGap g;
  g.draws = m;
  std::vector<double> buf(inputs.size());
  double sum_d = 0.0, sum_d2 = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < inputs.size(); ++j) buf[j] = va.at(r, inputs[j]);
    const double da = decision.fn(buf);
    for (std::size_t j = 0; j < inputs.size(); ++j) buf[j] = vb.at(r, inputs[j]);
    const double db = decision.fn(buf);
    g.p_a += da;
    g.p_b += db;
    sum_d += da - db;
    sum_d2 += (da - db) * (da - db);
  }
  const double dm = static_cast<double>(m);
  g.p_a /= dm;
  g.p_b /= dm;
  g.gap = std::abs(g.p_a - g.p_b);
  if (m > 1) g.std_error = std::sqrt(std::max(0.0, (sum_d2 - sum_d * sum_d / dm) / (dm - 1.0)) / dm);
  return g;
}

ConditionalInterventionGap intervention_fairness_at(const Scm& scm, const ScmDecision& decision,
                                                    const std::map<std::string, double>& x,
                                                    double a, double b) {
  if (!decision.fn) throw PreconditionError("decision function is empty");
  for (const auto& nd : scm.nodes())
    if (!nd.noise.finite_support())
      throw UnsupportedError("conditional intervention fairness needs finite-support noise; '" +
                             nd.name + "' is gaussian");
  const auto inputs = indices_of(scm, decision.inputs);
  std::vector<std::pair<std::size_t, double>> cond;
  for (const auto& [name, v] : x) cond.emplace_back(scm.require_index(name), v);

  // Every noise configuration with its prior weight.
  Abduction prior;
  prior.observed.assign(scm.size(), std::nullopt);
  for (const auto& nd : scm.nodes()) prior.noise.push_back(prior_posterior(nd.noise));
  double combos = 1.0;
  for (const auto& p : prior.noise) combos *= static_cast<double>(p.values.size());
  if (combos > static_cast<double>(kMaxEnumeration))
    throw UnsupportedError("too many noise configurations to enumerate");
  Rng unused(0);
  const auto worlds = make_worlds(prior, std::vector<bool>(scm.size(), true), 0, unused);

  auto arm = [&](double value) -> std::optional<double> {
    const auto model = intervene(scm, {{scm.sensitive_name(), value}});
    double mass = 0.0, accept = 0.0;
    std::vector<double> vals(scm.size()), pa, buf(inputs.size());
    for (std::size_t k = 0; k < worlds.u.size(); ++k) {
      for (std::size_t i = 0; i < scm.size(); ++i) {
        pa.clear();
        for (auto p : model.parent_indices(i)) pa.push_back(vals[p]);
        const auto& nd = model.node(i);
        vals[i] = evaluate_node(nd, pa, nd.noise.kind == NoiseSpec::Kind::point ? nd.noise.value
                                                                               : worlds.u[k][i]);
      }
      const bool match = std::all_of(cond.begin(), cond.end(),
                                     [&](const auto& c) { return close(vals[c.first], c.second); });
      if (!match) continue;
      for (std::size_t j = 0; j < inputs.size(); ++j) buf[j] = vals[inputs[j]];
      mass += worlds.w[k];
      accept += worlds.w[k] * decision.fn(buf);
    }
    if (mass <= 0.0) return std::nullopt;
    return accept / mass;
  };
  ConditionalInterventionGap g;
  g.p_a = arm(a);
  g.p_b = arm(b);
  if (g.p_a && g.p_b) g.gap = std::abs(*g.p_a - *g.p_b);
  return g;
}

}  // namespace fairaudit
