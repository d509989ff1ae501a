#include "fairaudit/info_theory.hpp"

#include <algorithm>
#include <cmath>

#include "fairaudit/errors.hpp"

namespace fairaudit {

JointTable::JointTable(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), counts_(rows * cols, 0) {}

JointTable JointTable::from_pairs(std::span<const int> a, std::span<const int> b,
                                  std::size_t a_levels, std::size_t b_levels) {
  if (a.size() != b.size()) throw PreconditionError("paired vectors differ in length");
  for (int v : a) {
    if (v < 0) throw DomainError("codes must be non-negative");
    a_levels = std::max(a_levels, static_cast<std::size_t>(v) + 1);
  }
  for (int v : b) {
    if (v < 0) throw DomainError("codes must be non-negative");
    b_levels = std::max(b_levels, static_cast<std::size_t>(v) + 1);
  }
  JointTable t(a_levels, b_levels);
  for (std::size_t i = 0; i < a.size(); ++i) t.add(a[i], b[i]);
  return t;
}

JointTable JointTable::from_counts(std::size_t rows, std::size_t cols,
                                   std::span<const std::uint64_t> counts) {
  if (counts.size() != rows * cols) throw PreconditionError("count matrix has wrong size");
  JointTable t(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t.add(r, c, counts[r * cols + c]);
  return t;
}

void JointTable::add(std::size_t r, std::size_t c, std::uint64_t count) {
  counts_.at(r * cols_ + c) += count;
  total_ += count;
}

std::vector<std::uint64_t> JointTable::row_marginal() const {
  std::vector<std::uint64_t> m(rows_, 0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) m[r] += at(r, c);
  return m;
}

std::vector<std::uint64_t> JointTable::col_marginal() const {
  std::vector<std::uint64_t> m(cols_, 0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) m[c] += at(r, c);
  return m;
}

JointTable JointTable::transposed() const {
  JointTable t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t.add(c, r, at(r, c));
  return t;
}

double entropy(std::span<const std::uint64_t> counts) {
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  if (n == 0) throw PreconditionError("entropy of an empty sample");
  const double total = static_cast<double>(n);
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

double mutual_information(const JointTable& joint) {
  if (joint.total() == 0) throw PreconditionError("mutual information of an empty table");
  const double n = static_cast<double>(joint.total());
  const auto pr = joint.row_marginal();
  const auto pc = joint.col_marginal();
  double mi = 0.0;
  for (std::size_t r = 0; r < joint.rows(); ++r) {
    for (std::size_t c = 0; c < joint.cols(); ++c) {
      const auto k = joint.at(r, c);
      if (k == 0) continue;
      // log(p_rc / (p_r p_c)) with counts: log(k n / (n_r n_c)).
      const double kd = static_cast<double>(k);
      mi += kd / n * std::log(kd * n / (static_cast<double>(pr[r]) * static_cast<double>(pc[c])));
    }
  }
  return std::max(0.0, mi);
}

SymmetricUncertainty symmetric_uncertainty(const JointTable& joint) {
  const double ha = entropy(joint.row_marginal());
  const double hb = entropy(joint.col_marginal());
  if (ha + hb <= 0.0) return {0.0, true};
  const double u = 2.0 * mutual_information(joint) / (ha + hb);
  return {std::clamp(u, 0.0, 1.0), false};
}

double symmetric_uncertainty(std::span<const int> a, std::span<const int> b) {
  return symmetric_uncertainty(JointTable::from_pairs(a, b)).value;
}

}  // namespace fairaudit
