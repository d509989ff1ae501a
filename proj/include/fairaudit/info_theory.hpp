#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

// Plug-in entropy and mutual information for discrete variables, in nats.

namespace fairaudit {

// Empirical joint distribution of two coded variables.
class JointTable {
 public:
  JointTable(std::size_t rows, std::size_t cols);
  // Builds the table from paired codes; the extent of each axis is
  // max(code)+1 unless explicitly larger.
  static JointTable from_pairs(std::span<const int> a, std::span<const int> b,
                               std::size_t a_levels = 0, std::size_t b_levels = 0);
  // Row-major counts.
  static JointTable from_counts(std::size_t rows, std::size_t cols,
                                std::span<const std::uint64_t> counts);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t at(std::size_t r, std::size_t c) const { return counts_[r * cols_ + c]; }
  void add(std::size_t r, std::size_t c, std::uint64_t count = 1);

  std::vector<std::uint64_t> row_marginal() const;
  std::vector<std::uint64_t> col_marginal() const;
  JointTable transposed() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

double entropy(std::span<const std::uint64_t> counts);
double mutual_information(const JointTable& joint);

struct SymmetricUncertainty {
  double value = 0.0;
  // Both marginals are constant; value is reported as 0.
  bool degenerate = false;
};

// 2 MI / (H(A) + H(B)), in [0,1].
SymmetricUncertainty symmetric_uncertainty(const JointTable& joint);
double symmetric_uncertainty(std::span<const int> a, std::span<const int> b);

}  // namespace fairaudit
