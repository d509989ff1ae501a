#include "fairaudit/individual_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fairaudit/errors.hpp"
#include "fairaudit/random.hpp"
#include "parallel.hpp"

namespace fairaudit {

DistanceSpec DistanceSpec::parse(const std::string& text) {
  DistanceSpec spec;
  if (text == "standardized" || text == "euclidean_standardized") return spec;
  if (text == "raw" || text == "euclidean_raw") {
    spec.kind = DistanceKind::euclidean_raw;
    return spec;
  }
  const std::string prefix = "weighted:";
  if (text.rfind(prefix, 0) == 0) {
    spec.kind = DistanceKind::user_weighted;
    std::istringstream in(text.substr(prefix.size()));
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        spec.weights.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw DomainError("bad distance weight '" + item + "'");
      }
    }
    return spec;
  }
  throw DomainError("unknown distance '" + text + "' (standardized | raw | weighted:w1,w2,...)");
}

FeatureSpace::FeatureSpace(const Dataset& ds, const DistanceSpec& spec, bool include_sensitive)
    : rows_(ds.rows()) {
  struct Source {
    std::vector<std::vector<double>> columns;
  };
  std::vector<Source> sources;
  for (const auto& f : ds.features()) {
    Source s;
    if (f.is_categorical()) {
      for (std::size_t level = 0; level < f.level_count(); ++level) {
        std::vector<double> col(rows_);
        for (std::size_t r = 0; r < rows_; ++r) col[r] = f.code(r) == static_cast<int>(level) ? 1.0 : 0.0;
        s.columns.push_back(std::move(col));
      }
    } else {
      s.columns.push_back(f.values);
    }
    sources.push_back(std::move(s));
  }
  if (include_sensitive) {
    Source s;
    const auto& a = ds.sensitive();
    for (std::size_t g = 0; g < a.group_count(); ++g) {
      std::vector<double> col(rows_);
      for (std::size_t r = 0; r < rows_; ++r) col[r] = a.code(r) == static_cast<int>(g) ? 1.0 : 0.0;
      s.columns.push_back(std::move(col));
    }
    sources.push_back(std::move(s));
  }

  if (spec.kind == DistanceKind::user_weighted) {
    if (spec.weights.size() != sources.size())
      throw PreconditionError("distance weights: expected " + std::to_string(sources.size()) +
                              " entries, got " + std::to_string(spec.weights.size()));
    bool any_positive = false;
    for (double w : spec.weights) {
      if (!(w >= 0.0)) throw DomainError("distance weights must be non-negative");
      any_positive = any_positive || w > 0.0;
    }
    if (!any_positive) throw DomainError("at least one distance weight must be positive");
  }

  std::vector<std::vector<double>> columns;
  for (std::size_t k = 0; k < sources.size(); ++k) {
    for (auto& col : sources[k].columns) {
      if (spec.kind != DistanceKind::euclidean_raw && rows_ > 0) {
        const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(rows_);
        double ss = 0.0;
        for (double v : col) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(rows_));
        const double scale = sd > 0.0 ? sd : 1.0;
        for (double& v : col) v = (v - mean) / scale;
      }
      if (spec.kind == DistanceKind::user_weighted) {
        const double w = std::sqrt(spec.weights[k]);
        for (double& v : col) v *= w;
      }
      columns.push_back(std::move(col));
    }
  }
  dims_ = columns.size();
  coords_.resize(rows_ * dims_);
  for (std::size_t c = 0; c < dims_; ++c)
    for (std::size_t r = 0; r < rows_; ++r) coords_[r * dims_ + c] = columns[c][r];
}

double FeatureSpace::squared_distance(std::size_t i, std::size_t j) const {
  const double* a = coords_.data() + i * dims_;
  const double* b = coords_.data() + j * dims_;
  double s = 0.0;
  for (std::size_t c = 0; c < dims_; ++c) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return s;
}

double FeatureSpace::distance(std::size_t i, std::size_t j) const {
  return std::sqrt(squared_distance(i, j));
}

std::vector<std::size_t> nearest_neighbours(const FeatureSpace& space, std::size_t row, std::size_t k) {
  const auto n = space.rows();
  if (k < 1 || k > n - 1) throw PreconditionError("k must lie in 1..n-1");
  std::vector<double> d;
  d.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j)
    if (j != row) d.push_back(space.squared_distance(row, j));
  auto kth_it = d.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(d.begin(), kth_it, d.end());
  const double kth = *kth_it;
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n; ++j)
    if (j != row && space.squared_distance(row, j) <= kth) out.push_back(j);
  return out;
}

double consistency(const Dataset& ds, const PredictionSet& preds, std::size_t k,
                   const DistanceSpec& dist) {
  const auto& yhat = preds.require_decisions("consistency");
  const auto n = ds.rows();
  if (yhat.size() != n) throw DataError("decision vector length does not match dataset");
  if (n < 2 || k < 1 || k > n - 1) throw PreconditionError("consistency: k must lie in 1..n-1");
  const FeatureSpace space(ds, dist);
  std::vector<double> deviation(n);
  detail::parallel_for(n, [&](std::size_t i) {
    const auto nn = nearest_neighbours(space, i, k);
    double sum = 0.0;
    for (auto j : nn) sum += yhat[j];
    deviation[i] = std::abs(yhat[i] - sum / static_cast<double>(nn.size()));
  }, 64);
  double total = 0.0;
  for (double v : deviation) total += v;
  return 1.0 - total / static_cast<double>(n);
}

double similarity_weighted_disparity(const Dataset& ds, const PredictionSet& preds,
                                     const DistanceSpec& dist) {
  const auto& yhat = preds.require_decisions("similarity_weighted_disparity");
  const auto& a = ds.sensitive();
  if (a.group_count() != 2)
    throw PreconditionError("similarity_weighted_disparity needs a binary sensitive attribute");
  if (yhat.size() != ds.rows()) throw DataError("decision vector length does not match dataset");
  std::vector<std::size_t> ones, zeros;
  for (std::size_t i = 0; i < ds.rows(); ++i) (a.code(i) == 1 ? ones : zeros).push_back(i);
  if (ones.empty() || zeros.empty())
    throw PreconditionError("similarity_weighted_disparity: one sensitive group is empty");
  const FeatureSpace space(ds, dist);
  std::vector<double> row_sums(ones.size());
  detail::parallel_for(ones.size(), [&](std::size_t k) {
    const auto i = ones[k];
    double s = 0.0;
    for (auto j : zeros)
      if (yhat[i] != yhat[j]) s += std::exp(-space.distance(i, j));
    row_sums[k] = s;
  }, 64);
  double total = 0.0;
  for (double v : row_sums) total += v;
  return total / (static_cast<double>(ones.size()) * static_cast<double>(zeros.size()));
}

FlipReport flip_assessment(const Dataset& ds, const DecisionFunction& model,
                           const std::optional<std::vector<int>>& flip_map) {
  const auto& a = ds.sensitive();
  const auto g = a.group_count();
  std::vector<int> map;
  if (flip_map) {
    map = *flip_map;
  } else if (g == 2) {
    map = {1, 0};
  } else {
    throw PreconditionError("flip_assessment: a sensitive attribute with " + std::to_string(g) +
                            " groups needs an explicit flip permutation");
  }
  if (map.size() != g) throw PreconditionError("flip map must list one target group per group");
  std::vector<int> seen(g, 0);
  for (int v : map) {
    if (v < 0 || static_cast<std::size_t>(v) >= g || seen[v]++)
      throw PreconditionError("flip map is not a permutation of the group codes");
  }
  std::vector<int> flipped_codes(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) flipped_codes[i] = map[a.code(i)];

  FlipReport r;
  r.rows = ds.rows();
  r.groups = a.labels();
  r.original = model(ds);
  r.flipped = model(ds.with_sensitive(a.with_codes(std::move(flipped_codes))));
  if (r.original.size() != r.rows || r.flipped.size() != r.rows)
    throw DataError("decision function returned the wrong number of rows");
  std::vector<std::size_t> changes(g, 0), sizes(g, 0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < r.rows; ++i) {
    const bool changed = r.original[i] != r.flipped[i];
    total += changed;
    changes[a.code(i)] += changed;
    ++sizes[a.code(i)];
  }
  r.flip_rate = r.rows ? static_cast<double>(total) / static_cast<double>(r.rows) : 0.0;
  r.flip_consistency = 1.0 - r.flip_rate;
  for (std::size_t k = 0; k < g; ++k) {
    if (sizes[k])
      r.group_flip_rate.push_back(static_cast<double>(changes[k]) / static_cast<double>(sizes[k]));
    else
      r.group_flip_rate.push_back(std::nullopt);
  }
  return r;
}

LipschitzReport lipschitz_audit(const Dataset& ds, const PredictionSet& preds,
                                const DistanceSpec& dist, double lipschitz_constant,
                                std::size_t max_pairs, std::uint64_t seed) {
  if (!(lipschitz_constant > 0.0)) throw PreconditionError("Lipschitz constant must be positive");
  const auto n = ds.rows();
  if (n < 2) throw PreconditionError("lipschitz_audit needs at least two rows");
  std::vector<double> out;
  LipschitzReport r;
  r.lipschitz_constant = lipschitz_constant;
  if (preds.decisions) {
    if (preds.decisions->size() != n) throw DataError("decision vector length does not match dataset");
    out.assign(preds.decisions->begin(), preds.decisions->end());
  } else {
    out = preds.require_scores("lipschitz_audit");
    if (out.size() != n) throw DataError("score vector length does not match dataset");
    r.used_scores = true;
  }
  const FeatureSpace space(ds, dist, /*include_sensitive=*/true);

  auto visit = [&](std::size_t i, std::size_t j) {
    LipschitzPair p{std::min(i, j), std::max(i, j), space.distance(i, j), std::abs(out[i] - out[j])};
    ++r.pairs_examined;
    if (p.dist_x == 0.0) {
      if (p.dist_y > 0.0) {
        ++r.infinite_ratio_pairs;
        if (r.infinite_witnesses.size() < kLipschitzWitnesses) r.infinite_witnesses.push_back(p);
      }
      return;
    }
    ++r.pairs_positive_distance;
    const double ratio = p.ratio();
    r.empirical_constant = r.empirical_constant ? std::max(*r.empirical_constant, ratio) : ratio;
    if (p.dist_y >= lipschitz_constant * p.dist_x) {
      ++r.violations;
      r.worst.push_back(p);
      // Keep the list bounded: sort descending by ratio, ties by index.
      if (r.worst.size() > 4 * kLipschitzWitnesses) {
        std::stable_sort(r.worst.begin(), r.worst.end(),
                         [](const auto& x, const auto& y) { return x.ratio() > y.ratio(); });
        r.worst.resize(kLipschitzWitnesses);
      }
    }
  };

  const std::size_t all_pairs = n * (n - 1) / 2;
  if (max_pairs >= all_pairs) {
    r.exhaustive = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) visit(i, j);
  } else {
    Rng rng(seed);
    for (std::size_t k = 0; k < max_pairs; ++k) {
      const auto i = rng.uniform_index(n);
      auto j = rng.uniform_index(n - 1);
      if (j >= i) ++j;
      visit(i, j);
    }
  }
  if (r.pairs_positive_distance == 0)
    throw PreconditionError("lipschitz_audit: every examined pair has zero feature distance");
  std::stable_sort(r.worst.begin(), r.worst.end(),
                   [](const auto& x, const auto& y) { return x.ratio() > y.ratio(); });
  if (r.worst.size() > kLipschitzWitnesses) r.worst.resize(kLipschitzWitnesses);
  return r;
}

}  // namespace fairaudit
