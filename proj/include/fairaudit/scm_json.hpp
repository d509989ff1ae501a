#pragma once

#include <filesystem>
#include <string>

#include "fairaudit/causal.hpp"

// JSON form of a structural model:
//
// {"nodes": [
//   {"name": "A", "role": "sensitive", "parents": [],
//    "assignment": {"type": "exogenous"},
//    "noise": {"type": "bernoulli", "p": 0.5}},
//   {"name": "X", "role": "feature", "parents": ["A"],
//    "assignment": {"type": "linear", "intercept": 0, "coefficients": [1]},
//    "noise": {"type": "gaussian", "mean": 0, "std": 1}},
//   {"name": "Y", "role": "target", "parents": ["X"],
//    "assignment": {"type": "threshold", "intercept": 0, "coefficients": [1],
//                   "cutoff": 0.5, "strict": true},
//    "noise": {"type": "point", "value": 0}}]}
//
// Nodes are written in topological order. "role" defaults to "feature",
// "parents" to [], and "noise" to a point mass at 0.

namespace fairaudit {

Scm scm_from_json(const std::string& text);
std::string scm_to_json(const Scm& scm);
Scm load_scm(const std::filesystem::path& path);
void save_scm(const Scm& scm, const std::filesystem::path& path);

}  // namespace fairaudit
