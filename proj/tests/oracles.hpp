#pragma once

// Independent brute-force reference implementations used by several suites.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace oracle {

// Entropy in nats by direct summation over cells.
inline double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0) h -= v * std::log(v);
  return h;
}

struct InfoValues {
  double ha, hb, mi, u;
};

// 2x2 table of counts; MI as sum p(a,b) log(p(a,b)/(p(a)p(b))).
inline InfoValues info_2x2(const std::uint64_t c[4]) {
  double n = static_cast<double>(c[0] + c[1] + c[2] + c[3]);
  double p[4];
  for (int i = 0; i < 4; ++i) p[i] = c[i] / n;
  double pa[2] = {p[0] + p[1], p[2] + p[3]};
  double pb[2] = {p[0] + p[2], p[1] + p[3]};
  InfoValues v{};
  v.ha = entropy({pa[0], pa[1]});
  v.hb = entropy({pb[0], pb[1]});
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double pab = p[a * 2 + b];
      if (pab > 0) v.mi += pab * std::log(pab / (pa[a] * pb[b]));
    }
  v.u = v.ha + v.hb > 0 ? 2.0 * v.mi / (v.ha + v.hb) : 0.0;
  return v;
}

// AUC by counting every (positive, negative) pair; ties count one half.
inline double auc_pairs(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      ++pairs;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

inline double sq_dist(const std::vector<std::vector<double>>& x, std::size_t i, std::size_t j) {
  double d = 0.0;
  for (const auto& col : x) d += (col[i] - col[j]) * (col[i] - col[j]);
  return d;
}

// Columns z-scored with the population standard deviation; constant columns
// only centred.
inline std::vector<std::vector<double>> standardize(std::vector<std::vector<double>> x) {
  for (auto& col : x) {
    double m = 0.0;
    for (double v : col) m += v;
    m /= static_cast<double>(col.size());
    double var = 0.0;
    for (double v : col) var += (v - m) * (v - m);
    double sd = std::sqrt(var / static_cast<double>(col.size()));
    for (double& v : col) v = sd > 0 ? (v - m) / sd : v - m;
  }
  return x;
}

// kNN consistency: neighbours are every other row whose distance does not
// exceed the k-th smallest distance to the row.
inline double consistency(const std::vector<std::vector<double>>& raw, const std::vector<int>& yhat,
                          std::size_t k) {
  auto x = standardize(raw);
  std::size_t n = yhat.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) d.push_back(sq_dist(x, i, j));
    std::vector<double> sorted = d;
    std::sort(sorted.begin(), sorted.end());
    double kth = sorted[std::min(k, sorted.size()) - 1];
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t j = 0, idx = 0; j < n; ++j) {
      if (j == i) continue;
      if (d[idx++] <= kth) {
        sum += yhat[j];
        ++cnt;
      }
    }
    total += std::abs(yhat[i] - sum / static_cast<double>(cnt));
  }
  return 1.0 - total / static_cast<double>(n);
}

// Similarity-weighted disparity by a double loop over (A=1, A=0) pairs.
inline double swd(const std::vector<std::vector<double>>& raw, const std::vector<int>& a,
                  const std::vector<int>& yhat) {
  auto x = standardize(raw);
  double sum = 0.0;
  std::size_t n1 = 0, n0 = 0;
  for (int v : a) (v == 1 ? n1 : n0)++;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != 1) continue;
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (a[j] != 0) continue;
      sum += std::exp(-std::sqrt(sq_dist(x, i, j))) * std::abs(yhat[i] - yhat[j]);
    }
  }
  return sum / (static_cast<double>(n1) * static_cast<double>(n0));
}

}  // namespace oracle
