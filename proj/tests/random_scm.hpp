#pragma once

#include <map>
#include <string>
#include <vector>

#include "fairaudit/causal.hpp"
#include "fairaudit/random.hpp"

namespace testing {

// Binary sensitive root V0 followed by up to five linear-Gaussian nodes with
// random parents among earlier nodes.
inline fairaudit::Scm random_linear_gaussian_scm(fairaudit::Rng& rng, std::size_t max_nodes = 6) {
  using namespace fairaudit;
  std::size_t count = 2 + rng.uniform_index(max_nodes - 1);
  std::vector<Node> nodes;
  nodes.push_back({"V0", NodeRole::sensitive, {}, Assignment::exogenous(), NoiseSpec::bernoulli(0.5)});
  for (std::size_t i = 1; i < count; ++i) {
    std::vector<std::string> parents;
    std::vector<double> coef;
    for (std::size_t j = 0; j < i; ++j)
      if (rng.bernoulli(0.5)) {
        parents.push_back("V" + std::to_string(j));
        coef.push_back(rng.normal(0.0, 2.0));
      }
    std::string name = "V" + std::to_string(i);
    NoiseSpec noise = NoiseSpec::gaussian(rng.normal(), 0.2 + rng.uniform01() * 2.0);
    if (parents.empty())
      nodes.push_back({name, NodeRole::feature, {}, Assignment::exogenous(), noise});
    else
      nodes.push_back({name, NodeRole::feature, parents, Assignment::linear(rng.normal(), coef), noise});
  }
  return Scm(std::move(nodes));
}

// Full observation of row r of a sample.
inline std::map<std::string, double> observation(const fairaudit::Scm& scm,
                                                 const fairaudit::NodeMatrix& values, std::size_t r) {
  std::map<std::string, double> obs;
  for (std::size_t i = 0; i < scm.size(); ++i) obs[scm.node(i).name] = values.at(r, i);
  return obs;
}

}  // namespace testing
