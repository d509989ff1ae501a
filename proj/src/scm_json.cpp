#include "fairaudit/scm_json.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fairaudit/errors.hpp"

namespace fairaudit {
namespace {

using json = nlohmann::ordered_json;

NoiseSpec noise_from(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "gaussian") return NoiseSpec::gaussian(j.value("mean", 0.0), j.at("std").get<double>());
  if (type == "bernoulli") return NoiseSpec::bernoulli(j.at("p").get<double>());
  if (type == "point") return NoiseSpec::point(j.value("value", 0.0));
  throw SchemaError("unknown noise type '" + type + "'");
}

json noise_to(const NoiseSpec& n) {
  switch (n.kind) {
    case NoiseSpec::Kind::gaussian: return {{"type", "gaussian"}, {"mean", n.mean}, {"std", n.std}};
    case NoiseSpec::Kind::bernoulli: return {{"type", "bernoulli"}, {"p", n.p}};
    case NoiseSpec::Kind::point: break;
  }
  return {{"type", "point"}, {"value", n.value}};
}

Assignment assignment_from(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "exogenous") return Assignment::exogenous();
  auto coefficients = j.value("coefficients", std::vector<double>{});
  const double intercept = j.value("intercept", 0.0);
  if (type == "linear") return Assignment::linear(intercept, std::move(coefficients));
  if (type == "threshold")
    return Assignment::threshold(intercept, std::move(coefficients), j.at("cutoff").get<double>(),
                                 j.value("strict", false));
  throw SchemaError("unknown assignment type '" + type + "'");
}

json assignment_to(const Assignment& a) {
  switch (a.kind) {
    case Assignment::Kind::exogenous: return {{"type", "exogenous"}};
    case Assignment::Kind::linear:
      return {{"type", "linear"}, {"intercept", a.intercept}, {"coefficients", a.coefficients}};
    case Assignment::Kind::threshold: break;
  }
  return {{"type", "threshold"}, {"intercept", a.intercept}, {"coefficients", a.coefficients},
          {"cutoff", a.cutoff}, {"strict", a.strict}};
}

}  // namespace

Scm scm_from_json(const std::string& text) {
  try {
    const auto doc = json::parse(text);
    std::vector<Node> nodes;
    for (const auto& jn : doc.at("nodes")) {
      Node nd;
      nd.name = jn.at("name").get<std::string>();
      nd.role = parse_node_role(jn.value("role", std::string("feature")));
      nd.parents = jn.value("parents", std::vector<std::string>{});
      nd.assignment = assignment_from(jn.at("assignment"));
      nd.noise = jn.contains("noise") ? noise_from(jn.at("noise")) : NoiseSpec::point(0.0);
      nodes.push_back(std::move(nd));
    }
    return Scm(std::move(nodes));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("structural model JSON: ") + e.what());
  }
}

std::string scm_to_json(const Scm& scm) {
  json nodes = json::array();
  for (const auto& nd : scm.nodes()) {
    nodes.push_back({{"name", nd.name},
                     {"role", to_string(nd.role)},
                     {"parents", nd.parents},
                     {"assignment", assignment_to(nd.assignment)},
                     {"noise", noise_to(nd.noise)}});
  }
  return json{{"nodes", nodes}}.dump(2) + "\n";
}

Scm load_scm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open structural model '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return scm_from_json(ss.str());
}

void save_scm(const Scm& scm, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << scm_to_json(scm);
}

}  // namespace fairaudit
