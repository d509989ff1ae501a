#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fairaudit {

enum class FeatureKind { continuous, categorical };

const char* to_string(FeatureKind kind);

// One non-sensitive column. Categorical values are stored as dense integer
// codes (held as doubles so that a column can feed a design matrix directly)
// with `levels` mapping each code back to its original string.
struct FeatureColumn {
  std::string name;
  FeatureKind kind = FeatureKind::continuous;
  std::vector<double> values;
  std::vector<std::string> levels;

  std::size_t size() const noexcept { return values.size(); }
  bool is_categorical() const noexcept { return kind == FeatureKind::categorical; }
  int code(std::size_t row) const { return static_cast<int>(values[row]); }
  std::size_t level_count() const noexcept { return levels.size(); }

  static FeatureColumn continuous(std::string name, std::vector<double> values);
  // Codes must lie in 0..levels.size()-1.
  static FeatureColumn categorical(std::string name, std::vector<int> codes,
                                   std::vector<std::string> levels);
  // Codes strings in first-appearance order.
  static FeatureColumn from_strings(std::string name, std::span<const std::string> raw);
  std::vector<std::string> decode() const;
};

// Group membership for the protected characteristic. Attributes built from
// raw data have every code occupied; row subsets keep the parent label set,
// so a group may be empty after a split.
class SensitiveAttribute {
 public:
  SensitiveAttribute() = default;
  SensitiveAttribute(std::string name, std::vector<int> codes, std::vector<std::string> labels);

  // Codes strings in first-appearance order. Requires at least two groups
  // unless `values` is empty.
  static SensitiveAttribute from_strings(std::string name, std::span<const std::string> values);

  const std::string& name() const noexcept { return name_; }
  const std::vector<int>& codes() const noexcept { return codes_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  int code(std::size_t row) const { return codes_[row]; }
  std::size_t size() const noexcept { return codes_.size(); }
  std::size_t group_count() const noexcept { return labels_.size(); }
  std::optional<int> code_of(const std::string& label) const;
  std::vector<std::size_t> group_sizes() const;

  SensitiveAttribute subset(std::span<const std::size_t> rows) const;
  SensitiveAttribute with_codes(std::vector<int> codes) const;

 private:
  std::string name_;
  std::vector<int> codes_;
  std::vector<std::string> labels_;
};

// Aligned columns (X, A, optional Y).
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<FeatureColumn> features, SensitiveAttribute sensitive,
          std::optional<std::vector<int>> target, std::string target_name = "Y");

  std::size_t rows() const noexcept { return sensitive_.size(); }
  bool empty() const noexcept { return rows() == 0; }
  const std::vector<FeatureColumn>& features() const noexcept { return features_; }
  const SensitiveAttribute& sensitive() const noexcept { return sensitive_; }
  const std::optional<std::vector<int>>& target() const noexcept { return target_; }
  const std::string& target_name() const noexcept { return target_name_; }
  bool has_target() const noexcept { return target_.has_value(); }
  // Throws PreconditionError naming `purpose` when the target is absent.
  const std::vector<int>& require_target(const char* purpose) const;

  const FeatureColumn* find_feature(const std::string& name) const;
  const FeatureColumn& feature(const std::string& name) const;
  std::vector<std::string> feature_names() const;

  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset with_sensitive(SensitiveAttribute sensitive) const;
  Dataset with_features(std::vector<FeatureColumn> features) const;
  Dataset with_feature(FeatureColumn column) const;

 private:
  std::vector<FeatureColumn> features_;
  SensitiveAttribute sensitive_;
  std::optional<std::vector<int>> target_;
  std::string target_name_ = "Y";
};

// Model outputs aligned to a Dataset: binary decisions and/or scores in [0,1].
struct PredictionSet {
  std::optional<std::vector<int>> decisions;
  std::optional<std::vector<double>> scores;

  // Throws if neither part is present, lengths differ from n, or values are
  // outside their domains.
  void validate(std::size_t n) const;
  const std::vector<int>& require_decisions(const char* purpose) const;
  const std::vector<double>& require_scores(const char* purpose) const;
  PredictionSet subset(std::span<const std::size_t> rows) const;
};

// ---------------------------------------------------------------------------
// Ingestion

// Declarative column roles, read from a key = value file:
//
//   sensitive = sex
//   target = income
//   target_positive = >50K        # optional; else target cells must be 0/1
//   target_negative = <=50K       # optional; unseen values are errors
//   categorical = workclass, education
//   continuous = age, hours-per-week
//   ignore = fnlwgt
//   default_kind = infer          # infer | continuous | categorical | ignore
//   missing = ?, NA               # cell tokens treated as missing
struct Schema {
  std::string sensitive;
  std::optional<std::string> target;
  std::vector<std::string> target_positive;
  std::vector<std::string> target_negative;
  std::map<std::string, FeatureKind> kinds;
  std::vector<std::string> ignored;
  enum class Default { infer, continuous, categorical, ignore } default_kind = Default::infer;
  std::vector<std::string> missing_tokens{"", "?", "NA"};

  static Schema parse(const std::string& text);
  static Schema load(const std::filesystem::path& path);
};

// RFC-4180 reader: quoted fields, doubled quotes, CRLF. First row is the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column_index(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);
std::string csv_escape(const std::string& field);

Dataset dataset_from_table(const CsvTable& table, const Schema& schema);
Dataset load_csv(const std::filesystem::path& path, const Schema& schema);

// Reads prediction columns from the same CSV (decision cells 0/1, scores in [0,1]).
PredictionSet predictions_from_table(const CsvTable& table,
                                     const std::optional<std::string>& decision_column,
                                     const std::optional<std::string>& score_column);

// Writes features, sensitive attribute and target (in that column order
// unless `column_order` is given) using decoded categorical strings.
std::string dataset_to_csv(const Dataset& ds, const std::vector<std::string>& column_order = {});

// ---------------------------------------------------------------------------
// Transformations

// Composite attribute over the occupied cells of the cross product, coded in
// first-appearance order. Labels join component labels with '|'.
SensitiveAttribute intersect_sensitive(std::span<const SensitiveAttribute> attrs);

struct SplitResult {
  Dataset train;
  Dataset test;
  std::optional<PredictionSet> train_predictions;
  std::optional<PredictionSet> test_predictions;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

// train size = max(1, min(n-1, round(fraction*n))).
std::size_t split_train_size(std::size_t n, double fraction);
SplitResult split(const Dataset& ds, const std::optional<PredictionSet>& preds, double fraction,
                  std::uint64_t seed);

// Equal-frequency binning of a continuous column into at most `bins`
// categorical levels. Duplicate cut points collapse, so fewer bins may result.
FeatureColumn quantile_bins(const FeatureColumn& column, int bins = 4);

// Categorical codes of a feature or of the target, used as strata.
struct Strata {
  std::string name;
  std::vector<int> codes;
  std::vector<std::string> labels;
};

// Resolves `column` among categorical features or the target. Continuous
// features are rejected with a PreconditionError asking for quantile_bins.
Strata strata_for(const Dataset& ds, const std::string& column);

}  // namespace fairaudit
