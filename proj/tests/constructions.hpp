#pragma once

// Exact-count dataset constructions shared by the incompatibility suite and
// the acceptance harness.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fairaudit/group_metrics.hpp"
#include "fairaudit/incompatibility.hpp"
#include "fairaudit/random.hpp"
#include "helpers.hpp"

namespace construct {

using fairaudit::Dataset;
using fairaudit::PredictionSet;
using fairaudit::Rng;

struct Built {
  Dataset ds;
  PredictionSet preds;
  std::vector<double> base_rates;
};

struct Cell {
  std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
};

inline Built from_cells(const std::vector<Cell>& cells) {
  std::vector<int> a, y, d;
  std::vector<double> rates;
  for (std::size_t g = 0; g < cells.size(); ++g) {
    const auto& c = cells[g];
    auto push = [&](std::size_t count, int yy, int dd) {
      for (std::size_t i = 0; i < count; ++i) a.push_back(static_cast<int>(g)), y.push_back(yy), d.push_back(dd);
    };
    push(c.tp, 1, 1);
    push(c.fn, 1, 0);
    push(c.fp, 0, 1);
    push(c.tn, 0, 0);
    double n = static_cast<double>(c.tp + c.fn + c.fp + c.tn);
    rates.push_back(static_cast<double>(c.tp + c.fn) / n);
  }
  std::vector<std::string> labels;
  for (std::size_t g = 0; g < cells.size(); ++g) labels.push_back("g" + std::to_string(g));
  std::vector<double> x(a.size(), 0.0);
  Dataset ds({fairaudit::FeatureColumn::continuous("x", x)},
             fairaudit::SensitiveAttribute("A", a, labels), y);
  return {std::move(ds), testing::decisions(d), std::move(rates)};
}

// Groups sharing tpr = i/10 and fpr = j/10 exactly; positives and negatives
// per group are multiples of 10 so every count is an integer.
struct SeparationCase {
  double tpr, fpr;
  Built built;
};

inline SeparationCase exact_separation(Rng& rng, std::size_t groups = 2) {
  std::size_t ti = 1 + rng.uniform_index(9), fi = rng.uniform_index(10);
  if (fi == ti) fi = (fi + 1) % 10;
  std::vector<Cell> cells;
  for (std::size_t g = 0; g < groups; ++g) {
    std::size_t pos = 10 * (1 + rng.uniform_index(8)), neg = 10 * (1 + rng.uniform_index(8));
    Cell c;
    c.tp = pos * ti / 10;
    c.fn = pos - c.tp;
    c.fp = neg * fi / 10;
    c.tn = neg - c.fp;
    cells.push_back(c);
  }
  return {static_cast<double>(ti) / 10.0, static_cast<double>(fi) / 10.0, from_cells(cells)};
}

// Groups sharing ppv = i/10 and npv = j/10 exactly, ppv + npv != 1.
struct SufficiencyCase {
  double ppv, npv;
  Built built;
};

inline SufficiencyCase exact_sufficiency(Rng& rng, std::size_t groups = 2) {
  std::size_t pi = 1 + rng.uniform_index(9), ni = 1 + rng.uniform_index(9);
  if (pi + ni == 10) ni = ni == 9 ? 8 : ni + 1;
  std::vector<Cell> cells;
  for (std::size_t g = 0; g < groups; ++g) {
    std::size_t acc = 10 * (1 + rng.uniform_index(8)), rej = 10 * (1 + rng.uniform_index(8));
    Cell c;
    c.tp = acc * pi / 10;
    c.fp = acc - c.tp;
    c.tn = rej * ni / 10;
    c.fn = rej - c.tn;
    cells.push_back(c);
  }
  return {static_cast<double>(pi) / 10.0, static_cast<double>(ni) / 10.0, from_cells(cells)};
}

// A 200-row, two-group dataset with base-rate gap >= 0.1, accuracy in
// (0.6, 0.95) and at least one false positive. Even trials are exactly
// separated (sufficiency is then the criterion that has to break), odd
// trials are noisy copies of Y.
inline Built exclusion_candidate(Rng& rng, std::size_t trial) {
  for (;;) {
    Built b;
    if (trial % 2 == 0) {
      // 100 rows per group: pos_g in steps of 10, tpr/fpr in tenths.
      std::size_t ti = 6 + rng.uniform_index(4), fi = 1 + rng.uniform_index(3);
      std::vector<Cell> cells;
      for (int g = 0; g < 2; ++g) {
        std::size_t pos = 10 * (1 + rng.uniform_index(9));
        std::size_t neg = 100 - pos;
        Cell c;
        c.tp = pos * ti / 10;
        c.fn = pos - c.tp;
        c.fp = neg * fi / 10;
        c.tn = neg - c.fp;
        cells.push_back(c);
      }
      b = from_cells(cells);
    } else {
      std::vector<int> a(200), y(200), d(200);
      double p0 = 0.1 + 0.8 * rng.uniform01(), p1 = 0.1 + 0.8 * rng.uniform01();
      double err = 0.05 + 0.35 * rng.uniform01();
      for (std::size_t i = 0; i < 200; ++i) {
        a[i] = i < 100 ? 0 : 1;
        y[i] = rng.bernoulli(a[i] ? p1 : p0);
        d[i] = rng.bernoulli(err) ? 1 - y[i] : y[i];
      }
      b = {testing::make_dataset({std::vector<double>(200, 0.0)}, a, y), testing::decisions(d), {}};
    }
    const auto& y = *b.ds.target();
    const auto& d = *b.preds.decisions;
    std::size_t correct = 0, fp = 0, pos[2] = {0, 0}, cnt[2] = {0, 0};
    for (std::size_t i = 0; i < y.size(); ++i) {
      correct += y[i] == d[i];
      fp += y[i] == 0 && d[i] == 1;
      int g = b.ds.sensitive().code(i);
      ++cnt[g];
      pos[g] += static_cast<std::size_t>(y[i]);
    }
    double acc = static_cast<double>(correct) / static_cast<double>(y.size());
    if (cnt[0] == 0 || cnt[1] == 0) continue;
    double gap = std::abs(static_cast<double>(pos[0]) / static_cast<double>(cnt[0]) -
                          static_cast<double>(pos[1]) / static_cast<double>(cnt[1]));
    if (gap >= 0.1 && acc > 0.6 && acc < 0.95 && fp >= 1) return b;
  }
}

// Scores for the balance/calibration triple. Even trials are calibrated by
// construction (each score value v carries exactly v of its rows positive),
// odd trials are arbitrary scores in (0,1). Base rates differ between groups.
struct ScoreSet {
  Dataset ds;
  PredictionSet preds;
};

inline ScoreSet calibrated_balance_scores(Rng& rng, std::size_t trial) {
  static const double kValues[] = {0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85};
  for (;;) {
    std::vector<int> a, y;
    std::vector<double> s;
    if (trial % 2 == 0) {
      for (int g = 0; g < 2; ++g) {
        for (int v = 0; v < 8; ++v) {
          std::size_t blocks = rng.uniform_index(4);
          for (std::size_t b = 0; b < blocks * 20; ++b) {
            a.push_back(g);
            s.push_back(kValues[v]);
            y.push_back(static_cast<double>(b % 20) < kValues[v] * 20.0 - 0.5);
          }
        }
      }
    } else {
      std::size_t n = 50 + rng.uniform_index(150);
      double p[2] = {0.1 + 0.8 * rng.uniform01(), 0.1 + 0.8 * rng.uniform01()};
      for (std::size_t i = 0; i < n; ++i) {
        int g = static_cast<int>(i % 2);
        a.push_back(g);
        y.push_back(rng.bernoulli(p[g]));
        s.push_back(0.01 + 0.98 * rng.uniform01());
      }
    }
    std::size_t pos[2] = {0, 0}, cnt[2] = {0, 0};
    for (std::size_t i = 0; i < a.size(); ++i) ++cnt[a[i]], pos[a[i]] += static_cast<std::size_t>(y[i]);
    if (cnt[0] == 0 || cnt[1] == 0 || pos[0] == 0 || pos[1] == 0 || pos[0] == cnt[0] ||
        pos[1] == cnt[1])
      continue;
    if (pos[0] * cnt[1] == pos[1] * cnt[0]) continue;  // equal base rates
    std::size_t n = a.size();
    return {testing::make_dataset({std::vector<double>(n, 0.0)}, a, y), testing::scores(s)};
  }
}

// Largest of the balance gaps and the worst within-group calibration error
// (bins of width 0.1, every non-empty bin counted).
inline double calibration_balance_violation(const ScoreSet& set) {
  auto bp = fairaudit::balance_positive_class(set.ds, set.preds);
  auto bn = fairaudit::balance_negative_class(set.ds, set.preds);
  auto cal = fairaudit::calibration_within_groups(set.ds, set.preds, 10, 1);
  double v = 0.0;
  if (bp.gap) v = std::max(v, *bp.gap);
  if (bn.gap) v = std::max(v, *bn.gap);
  if (cal.max_error) v = std::max(v, *cal.max_error);
  return v;
}

// Scores for the post-processing bound: two groups of unequal size, scores
// shifted by group, labels drawn from the scores.
struct ScoredSample {
  Dataset ds;
  std::vector<double> scores;
};

inline ScoredSample dp_scores(Rng& rng, std::size_t n = 1000) {
  double share = 0.2 + 0.6 * rng.uniform01();
  double shift = rng.normal(0.0, 1.0);
  std::vector<int> a(n), y(n);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = i < 2 ? static_cast<int>(i) : rng.bernoulli(share);
    s[i] = 1.0 / (1.0 + std::exp(-rng.normal(a[i] ? shift : 0.0, 1.5)));
    y[i] = rng.bernoulli(s[i]);
  }
  return {testing::make_dataset({std::vector<double>(n, 0.0)}, a, y), std::move(s)};
}

// Largest pairwise acceptance-rate gap and 1 / smallest group size.
struct DpBound {
  double gap = 0.0;
  double bound = 0.0;
};

inline DpBound dp_bound_check(const Dataset& ds, const std::vector<double>& scores,
                              const fairaudit::ThresholdPolicy& policy) {
  auto out = fairaudit::apply_threshold(testing::scores(scores), policy, ds.sensitive());
  auto rep = fairaudit::demographic_parity(ds, out);
  auto sizes = ds.sensitive().group_sizes();
  return {*rep.gap, 1.0 / static_cast<double>(*std::min_element(sizes.begin(), sizes.end()))};
}

}  // namespace construct
