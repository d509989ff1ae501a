#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairaudit/core_data.hpp"

// Structural causal models with linear and threshold-of-linear assignments,
// ancestral sampling, interventions and abduction-action-prediction
// counterfactuals.

namespace fairaudit {

struct NoiseSpec {
  enum class Kind { gaussian, bernoulli, point };
  Kind kind = Kind::point;
  double mean = 0.0;
  double std = 1.0;
  double p = 0.5;
  double value = 0.0;

  static NoiseSpec gaussian(double mean, double std);
  static NoiseSpec bernoulli(double p);
  static NoiseSpec point(double value);
  bool finite_support() const noexcept { return kind != Kind::gaussian; }
};

// x = u                                       (exogenous)
// x = intercept + sum c_k pa_k + u            (linear)
// x = 1[intercept + sum c_k pa_k + u >= cutoff], or > when strict (threshold)
struct Assignment {
  enum class Kind { exogenous, linear, threshold };
  Kind kind = Kind::exogenous;
  double intercept = 0.0;
  std::vector<double> coefficients;  // aligned with Node::parents
  double cutoff = 0.0;
  bool strict = false;

  static Assignment exogenous();
  static Assignment linear(double intercept, std::vector<double> coefficients);
  static Assignment threshold(double intercept, std::vector<double> coefficients, double cutoff,
                              bool strict);
};

enum class NodeRole { sensitive, target, feature, latent };

const char* to_string(NodeRole role);
NodeRole parse_node_role(const std::string& text);

struct Node {
  std::string name;
  NodeRole role = NodeRole::feature;
  std::vector<std::string> parents;
  Assignment assignment;
  NoiseSpec noise;

  // Emits only 0/1: threshold nodes and exogenous Bernoulli or 0/1 point nodes.
  bool binary() const noexcept;
};

struct Dag {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> edges;  // parent -> child
};

class Scm {
 public:
  Scm() = default;
  // Nodes may come in any order; they are stored in a topological order that
  // keeps the given order among unconstrained nodes.
  explicit Scm(std::vector<Node> nodes);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  const Node& node(const std::string& name) const;
  std::optional<std::size_t> index_of(const std::string& name) const;
  std::size_t require_index(const std::string& name) const;
  const std::vector<std::size_t>& parent_indices(std::size_t i) const { return parents_[i]; }
  const std::vector<std::size_t>& child_indices(std::size_t i) const { return children_[i]; }

  std::size_t sensitive_index() const noexcept { return sensitive_; }
  const std::string& sensitive_name() const { return nodes_[sensitive_].name; }
  std::optional<std::size_t> target_index() const noexcept { return target_; }

  Dag dag() const;
  // Proper descendants, in topological order.
  std::vector<std::string> descendants(const std::string& name) const;
  std::vector<bool> descendant_mask(std::size_t i) const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::size_t sensitive_ = 0;
  std::optional<std::size_t> target_;
};

// Each intervened node becomes exogenous with a point mass at its value.
Scm intervene(const Scm& scm, const std::map<std::string, double>& values);

// Node value given parent values (in Node::parents order) and noise u.
double evaluate_node(const Node& node, std::span<const double> parents, double u);

// Row-major rows x scm.size() matrices.
struct NodeMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

// Exogenous draws for n units. Units are drawn in order, nodes in
// topological order within a unit; point noises consume no randomness.
NodeMatrix draw_noise(const Scm& scm, std::size_t n, std::uint64_t seed);
// Ancestral propagation. Point-noise nodes ignore the matrix, so draws of
// the original model can be pushed through an intervened copy.
NodeMatrix propagate(const Scm& scm, const NodeMatrix& noise);

struct SampleResult {
  Dataset data;
  NodeMatrix values;  // every node, latent ones included
};

// Features (role feature) in topological order, sensitive node as the
// sensitive attribute, target node as target. Binary nodes become
// categorical columns with levels "0", "1".
SampleResult sample_full(const Scm& scm, std::size_t n, std::uint64_t seed);
Dataset sample(const Scm& scm, std::size_t n, std::uint64_t seed);

// Dataset -> per-node observations for the nodes the dataset carries.
std::vector<std::optional<double>> observe_row(const Scm& scm, const Dataset& ds, std::size_t row);

struct CounterfactualQuery {
  std::map<std::string, double> observed;
  std::map<std::string, double> intervention;
  std::set<std::string> mediators_held;
};

struct Posterior {
  enum class Kind { point, discrete, truncated_gaussian, gaussian };
  Kind kind = Kind::point;
  std::vector<double> values;   // point: one entry; discrete: support
  std::vector<double> weights;  // discrete: normalized
  double mean = 0.0;
  double std = 1.0;
  double lower = 0.0;  // truncated_gaussian bounds on u
  double upper = 0.0;

  bool finite_support() const noexcept {
    return kind == Kind::point || kind == Kind::discrete;
  }
};

// Posterior of each node's noise given a (possibly partial) observation.
// An unobserved node is supported when nothing observed descends from it
// (its prior is kept) or when it is a Gaussian linear node whose children
// are all observed point-noise threshold nodes (truncated Gaussian).
struct Abduction {
  std::vector<std::optional<double>> observed;
  std::vector<Posterior> noise;
};

Abduction abduct(const Scm& scm, std::vector<std::optional<double>> observed);

struct CounterfactualResult {
  std::vector<std::string> nodes;
  std::vector<double> means;
  bool exact = false;
  std::size_t worlds = 0;
  // Per-world node values (aligned with `nodes`) and weights, on request.
  std::vector<double> weights;
  std::vector<std::vector<double>> samples;
};

// Means of the requested nodes (all nodes when empty) in the counterfactual
// world. Exact enumeration when every needed posterior has finite support,
// Monte Carlo with mc_budget draws otherwise.
CounterfactualResult counterfactual(const Scm& scm, const CounterfactualQuery& query,
                                    std::size_t mc_budget, std::uint64_t seed,
                                    const std::vector<std::string>& nodes = {},
                                    bool keep_samples = false);

// A decision rule over named nodes, returning P(Yhat = 1) in [0,1] (a 0/1
// decision for deterministic rules).
struct ScmDecision {
  std::vector<std::string> inputs;
  std::function<double(std::span<const double>)> fn;
};

inline constexpr std::size_t kDefaultMcBudget = 10000;

struct CounterfactualGapReport {
  double a = 0.0;
  double b = 0.0;
  std::vector<std::string> mediators_held;
  std::vector<std::size_t> units;        // dataset rows with A = a
  std::vector<double> p_factual;         // P(Yhat_{A<-a} = 1 | obs)
  std::vector<double> p_counterfactual;  // P(Yhat_{A<-b} = 1 | obs)
  std::vector<double> unit_gaps;
  double cff_gap = 0.0;   // mean of |p_a - p_b|
  double ecff_gap = 0.0;  // |mean p_a - mean p_b|
  double std_error = 0.0; // Monte Carlo standard error of cff_gap
  bool exact = true;
};

CounterfactualGapReport cff_gap(const Scm& scm, const ScmDecision& decision, const Dataset& ds,
                                double a, double b, std::size_t mc_budget, std::uint64_t seed);
CounterfactualGapReport ecff_gap(const Scm& scm, const ScmDecision& decision, const Dataset& ds,
                                 double a, double b, std::size_t mc_budget, std::uint64_t seed);
// Path-specific variant: the fair mediators keep their factual values.
// With all descendants of A held this is the direct-effect variant.
CounterfactualGapReport pcff_gap(const Scm& scm, const ScmDecision& decision, const Dataset& ds,
                                 double a, double b, const std::set<std::string>& fair_mediators,
                                 std::size_t mc_budget, std::uint64_t seed);

struct InterventionGap {
  double p_a = 0.0;
  double p_b = 0.0;
  double gap = 0.0;
  double std_error = 0.0;
  std::size_t draws = 0;
};

// |P(Yhat=1 | do(A=a)) - P(Yhat=1 | do(A=b))| with common random numbers.
InterventionGap expectation_intervention_gap(const Scm& scm, const ScmDecision& decision, double a,
                                             double b, std::size_t mc_budget, std::uint64_t seed);

struct ConditionalInterventionGap {
  std::optional<double> p_a;  // absent when X = x is impossible under do(A=a)
  std::optional<double> p_b;
  std::optional<double> gap;
};

// P(Yhat=1 | do(A=a), X=x) against do(A=b), by exact enumeration. Only for
// models whose noises all have finite support.
ConditionalInterventionGap intervention_fairness_at(const Scm& scm, const ScmDecision& decision,
                                                    const std::map<std::string, double>& x,
                                                    double a, double b);

}  // namespace fairaudit
