#include "fairaudit/core_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "fairaudit/errors.hpp"
#include "fairaudit/random.hpp"

namespace fairaudit {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::optional<double> parse_double(const std::string& cell) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <typename T>
std::vector<T> gather(const std::vector<T>& values, std::span<const std::size_t> rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(values.at(r));
  return out;
}

}  // namespace

const char* to_string(FeatureKind kind) {
  return kind == FeatureKind::continuous ? "continuous" : "categorical";
}

// ---------------------------------------------------------------------------
// FeatureColumn

FeatureColumn FeatureColumn::continuous(std::string name, std::vector<double> values) {
  return FeatureColumn{std::move(name), FeatureKind::continuous, std::move(values), {}};
}

FeatureColumn FeatureColumn::categorical(std::string name, std::vector<int> codes,
                                         std::vector<std::string> levels) {
  FeatureColumn col{std::move(name), FeatureKind::categorical, {}, std::move(levels)};
  col.values.reserve(codes.size());
  for (int c : codes) {
    if (c < 0 || static_cast<std::size_t>(c) >= col.levels.size())
      throw DomainError("categorical code out of range in column '" + col.name + "'");
    col.values.push_back(c);
  }
  return col;
}

FeatureColumn FeatureColumn::from_strings(std::string name, std::span<const std::string> raw) {
  std::unordered_map<std::string, int> index;
  std::vector<std::string> levels;
  std::vector<int> codes;
  codes.reserve(raw.size());
  for (const auto& v : raw) {
    auto [it, inserted] = index.try_emplace(v, static_cast<int>(levels.size()));
    if (inserted) levels.push_back(v);
    codes.push_back(it->second);
  }
  return categorical(std::move(name), std::move(codes), std::move(levels));
}

std::vector<std::string> FeatureColumn::decode() const {
  std::vector<std::string> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (is_categorical()) {
      out.push_back(levels.at(code(i)));
    } else {
      std::ostringstream s;
      s.precision(17);
      s << values[i];
      out.push_back(s.str());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// SensitiveAttribute

SensitiveAttribute::SensitiveAttribute(std::string name, std::vector<int> codes,
                                       std::vector<std::string> labels)
    : name_(std::move(name)), codes_(std::move(codes)), labels_(std::move(labels)) {
  for (int c : codes_)
    if (c < 0 || static_cast<std::size_t>(c) >= labels_.size())
      throw DomainError("sensitive code out of range for '" + name_ + "'");
}

SensitiveAttribute SensitiveAttribute::from_strings(std::string name,
                                                    std::span<const std::string> values) {
  auto col = FeatureColumn::from_strings(name, values);
  if (!values.empty() && col.levels.size() < 2)
    throw DomainError("sensitive attribute '" + name + "' needs at least two groups");
  std::vector<int> codes(col.values.begin(), col.values.end());
  return SensitiveAttribute(std::move(name), std::move(codes), std::move(col.levels));
}

std::optional<int> SensitiveAttribute::code_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<int>(it - labels_.begin());
}

std::vector<std::size_t> SensitiveAttribute::group_sizes() const {
  std::vector<std::size_t> sizes(labels_.size(), 0);
  for (int c : codes_) ++sizes[c];
  return sizes;
}

SensitiveAttribute SensitiveAttribute::subset(std::span<const std::size_t> rows) const {
  return SensitiveAttribute(name_, gather(codes_, rows), labels_);
}

SensitiveAttribute SensitiveAttribute::with_codes(std::vector<int> codes) const {
  return SensitiveAttribute(name_, std::move(codes), labels_);
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::vector<FeatureColumn> features, SensitiveAttribute sensitive,
                 std::optional<std::vector<int>> target, std::string target_name)
    : features_(std::move(features)),
      sensitive_(std::move(sensitive)),
      target_(std::move(target)),
      target_name_(std::move(target_name)) {
  const auto n = sensitive_.size();
  for (const auto& f : features_) {
    if (f.size() != n)
      throw DataError("column '" + f.name + "' has " + std::to_string(f.size()) +
                      " rows, expected " + std::to_string(n));
    if (f.name == sensitive_.name())
      throw SchemaError("feature '" + f.name + "' duplicates the sensitive attribute");
  }
  if (target_) {
    if (target_->size() != n) throw DataError("target length does not match row count");
    for (int y : *target_)
      if (y != 0 && y != 1) throw DomainError("target values must be 0 or 1");
  }
}

const std::vector<int>& Dataset::require_target(const char* purpose) const {
  if (!target_)
    throw PreconditionError(std::string(purpose) + " requires a ground-truth target column");
  return *target_;
}

const FeatureColumn* Dataset::find_feature(const std::string& name) const {
  for (const auto& f : features_)
    if (f.name == name) return &f;
  return nullptr;
}

const FeatureColumn& Dataset::feature(const std::string& name) const {
  if (const auto* f = find_feature(name)) return *f;
  throw SchemaError("unknown column '" + name + "'");
}

std::vector<std::string> Dataset::feature_names() const {
  std::vector<std::string> names;
  for (const auto& f : features_) names.push_back(f.name);
  return names;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<FeatureColumn> cols;
  cols.reserve(features_.size());
  for (const auto& f : features_) cols.push_back({f.name, f.kind, gather(f.values, rows), f.levels});
  std::optional<std::vector<int>> y;
  if (target_) y = gather(*target_, rows);
  return Dataset(std::move(cols), sensitive_.subset(rows), std::move(y), target_name_);
}

Dataset Dataset::with_sensitive(SensitiveAttribute sensitive) const {
  return Dataset(features_, std::move(sensitive), target_, target_name_);
}

Dataset Dataset::with_features(std::vector<FeatureColumn> features) const {
  return Dataset(std::move(features), sensitive_, target_, target_name_);
}

Dataset Dataset::with_feature(FeatureColumn column) const {
  auto cols = features_;
  auto it = std::find_if(cols.begin(), cols.end(),
                         [&](const FeatureColumn& f) { return f.name == column.name; });
  if (it != cols.end())
    *it = std::move(column);
  else
    cols.push_back(std::move(column));
  return with_features(std::move(cols));
}

// ---------------------------------------------------------------------------
// PredictionSet

void PredictionSet::validate(std::size_t n) const {
  if (!decisions && !scores) throw PreconditionError("prediction set has neither decisions nor scores");
  if (decisions) {
    if (decisions->size() != n) throw DataError("decision vector length does not match dataset");
    for (int d : *decisions)
      if (d != 0 && d != 1) throw DomainError("decisions must be 0 or 1");
  }
  if (scores) {
    if (scores->size() != n) throw DataError("score vector length does not match dataset");
    for (double s : *scores)
      if (!(s >= 0.0 && s <= 1.0)) throw DomainError("scores must lie in [0,1]");
  }
}

const std::vector<int>& PredictionSet::require_decisions(const char* purpose) const {
  if (!decisions) throw PreconditionError(std::string(purpose) + " requires binary decisions");
  return *decisions;
}

const std::vector<double>& PredictionSet::require_scores(const char* purpose) const {
  if (!scores) throw PreconditionError(std::string(purpose) + " requires scores");
  return *scores;
}

PredictionSet PredictionSet::subset(std::span<const std::size_t> rows) const {
  PredictionSet out;
  if (decisions) out.decisions = gather(*decisions, rows);
  if (scores) out.scores = gather(*scores, rows);
  return out;
}

// ---------------------------------------------------------------------------
// Schema

Schema Schema::parse(const std::string& text) {
  Schema schema;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool saw_sensitive = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SchemaError("schema line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto value = trim(std::string_view(line).substr(eq + 1));
    if (key == "sensitive") {
      schema.sensitive = value;
      saw_sensitive = true;
    } else if (key == "target") {
      schema.target = value;
    } else if (key == "target_positive") {
      schema.target_positive = split_list(value);
    } else if (key == "target_negative") {
      schema.target_negative = split_list(value);
    } else if (key == "categorical" || key == "continuous") {
      const auto kind = key == "categorical" ? FeatureKind::categorical : FeatureKind::continuous;
      for (auto& c : split_list(value)) schema.kinds[c] = kind;
    } else if (key == "ignore") {
      for (auto& c : split_list(value)) schema.ignored.push_back(c);
    } else if (key == "default_kind") {
      if (value == "infer") schema.default_kind = Default::infer;
      else if (value == "continuous") schema.default_kind = Default::continuous;
      else if (value == "categorical") schema.default_kind = Default::categorical;
      else if (value == "ignore") schema.default_kind = Default::ignore;
      else throw SchemaError("schema: unknown default_kind '" + value + "'");
    } else if (key == "missing") {
      schema.missing_tokens = split_list(value);
      schema.missing_tokens.push_back("");
    } else {
      throw SchemaError("schema line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!saw_sensitive || schema.sensitive.empty())
    throw SchemaError("schema must name a sensitive column");
  return schema;
}

Schema Schema::load(const std::filesystem::path& path) { return parse(read_file(path)); }

// ---------------------------------------------------------------------------
// CSV

std::optional<std::size_t> CsvTable::column_index(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    // A lone empty field is a blank line.
    if (!(record.size() == 1 && record[0].empty() && !field_started)) records.push_back(std::move(record));
    record.clear();
    field_started = false;
  };
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", records.size());
  if (field_started || !field.empty() || !record.empty()) end_record();

  CsvTable table;
  if (records.empty()) throw ParseError("CSV has no header row", 0);
  table.header = std::move(records.front());
  for (auto& h : table.header) h = trim(h);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      throw ParseError("expected " + std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(records[r].size()),
                       r);
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

Dataset dataset_from_table(const CsvTable& table, const Schema& schema) {
  const auto n = table.rows.size();
  auto cell = [&](std::size_t row, std::size_t col) { return trim(table.rows[row][col]); };
  auto is_missing = [&](const std::string& v) {
    return std::find(schema.missing_tokens.begin(), schema.missing_tokens.end(), v) !=
           schema.missing_tokens.end();
  };
  auto column_cells = [&](std::size_t col) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
      auto v = cell(r, col);
      // Data rows are numbered from 1 after the header.
      if (is_missing(v))
        throw ParseError("missing value in column '" + table.header[col] + "'", r + 1);
      out.push_back(std::move(v));
    }
    return out;
  };

  for (const auto& [name, kind] : schema.kinds)
    if (!table.column_index(name)) throw SchemaError("schema names unknown column '" + name + "'");
  for (const auto& name : schema.ignored)
    if (!table.column_index(name)) throw SchemaError("schema names unknown column '" + name + "'");

  const auto sens_idx = table.column_index(schema.sensitive);
  if (!sens_idx) throw SchemaError("sensitive column '" + schema.sensitive + "' not in header");
  auto sensitive = SensitiveAttribute::from_strings(schema.sensitive, column_cells(*sens_idx));

  std::optional<std::vector<int>> target;
  std::optional<std::size_t> target_idx;
  if (schema.target) {
    target_idx = table.column_index(*schema.target);
    if (!target_idx) throw SchemaError("target column '" + *schema.target + "' not in header");
    std::vector<int> y;
    y.reserve(n);
    const auto cells = column_cells(*target_idx);
    const bool mapped = !schema.target_positive.empty();
    auto contains = [](const std::vector<std::string>& v, const std::string& s) {
      return std::find(v.begin(), v.end(), s) != v.end();
    };
    for (std::size_t r = 0; r < n; ++r) {
      const auto& v = cells[r];
      if (mapped) {
        if (contains(schema.target_positive, v)) {
          y.push_back(1);
        } else if (schema.target_negative.empty() || contains(schema.target_negative, v)) {
          y.push_back(0);
        } else {
          throw DomainError("unseen target value '" + v + "' at row " + std::to_string(r + 1));
        }
      } else if (v == "0" || v == "1") {
        y.push_back(v == "1" ? 1 : 0);
      } else {
        throw DomainError("target value '" + v + "' at row " + std::to_string(r + 1) +
                          " is not 0/1 and no target_positive mapping is given");
      }
    }
    target = std::move(y);
  }

  std::vector<FeatureColumn> features;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const auto& name = table.header[c];
    if (c == *sens_idx || (target_idx && c == *target_idx)) continue;
    if (std::find(schema.ignored.begin(), schema.ignored.end(), name) != schema.ignored.end())
      continue;
    std::optional<FeatureKind> kind;
    if (auto it = schema.kinds.find(name); it != schema.kinds.end()) {
      kind = it->second;
    } else {
      switch (schema.default_kind) {
        case Schema::Default::ignore: continue;
        case Schema::Default::continuous: kind = FeatureKind::continuous; break;
        case Schema::Default::categorical: kind = FeatureKind::categorical; break;
        case Schema::Default::infer: break;
      }
    }
    const auto cells = column_cells(c);
    if (!kind) {
      const bool numeric = std::all_of(cells.begin(), cells.end(),
                                       [](const std::string& v) { return parse_double(v).has_value(); });
      kind = numeric ? FeatureKind::continuous : FeatureKind::categorical;
    }
    if (*kind == FeatureKind::categorical) {
      features.push_back(FeatureColumn::from_strings(name, cells));
    } else {
      std::vector<double> values;
      values.reserve(n);
      for (std::size_t r = 0; r < n; ++r) {
        auto v = parse_double(cells[r]);
        if (!v) throw ParseError("non-numeric value '" + cells[r] + "' in continuous column '" + name + "'", r + 1);
        values.push_back(*v);
      }
      features.push_back(FeatureColumn::continuous(name, std::move(values)));
    }
  }
  return Dataset(std::move(features), std::move(sensitive), std::move(target),
                 schema.target.value_or("Y"));
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  return dataset_from_table(read_csv(path), schema);
}

PredictionSet predictions_from_table(const CsvTable& table,
                                     const std::optional<std::string>& decision_column,
                                     const std::optional<std::string>& score_column) {
  PredictionSet preds;
  auto column = [&](const std::string& name) {
    auto idx = table.column_index(name);
    if (!idx) throw SchemaError("prediction column '" + name + "' not in header");
    return *idx;
  };
  if (decision_column) {
    const auto c = column(*decision_column);
    std::vector<int> d;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto v = trim(table.rows[r][c]);
      if (v != "0" && v != "1") throw ParseError("decision cell '" + v + "' is not 0/1", r + 1);
      d.push_back(v == "1");
    }
    preds.decisions = std::move(d);
  }
  if (score_column) {
    const auto c = column(*score_column);
    std::vector<double> s;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto v = parse_double(trim(table.rows[r][c]));
      if (!v) throw ParseError("score cell is not numeric", r + 1);
      s.push_back(*v);
    }
    preds.scores = std::move(s);
  }
  preds.validate(table.rows.size());
  return preds;
}

std::string dataset_to_csv(const Dataset& ds, const std::vector<std::string>& column_order) {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> columns;
  for (const auto& f : ds.features()) {
    names.push_back(f.name);
    columns.push_back(f.decode());
  }
  {
    names.push_back(ds.sensitive().name());
    std::vector<std::string> a;
    for (int c : ds.sensitive().codes()) a.push_back(ds.sensitive().labels()[c]);
    columns.push_back(std::move(a));
  }
  if (ds.target()) {
    names.push_back(ds.target_name());
    std::vector<std::string> y;
    for (int v : *ds.target()) y.push_back(v ? "1" : "0");
    columns.push_back(std::move(y));
  }
  std::vector<std::size_t> order(names.size());
  std::iota(order.begin(), order.end(), 0);
  if (!column_order.empty()) {
    order.clear();
    for (const auto& want : column_order) {
      auto it = std::find(names.begin(), names.end(), want);
      if (it == names.end()) throw SchemaError("unknown output column '" + want + "'");
      order.push_back(static_cast<std::size_t>(it - names.begin()));
    }
  }
  std::string out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k) out += ',';
    out += csv_escape(names[order[k]]);
  }
  out += '\n';
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k) out += ',';
      out += csv_escape(columns[order[k]][r]);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transformations

SensitiveAttribute intersect_sensitive(std::span<const SensitiveAttribute> attrs) {
  if (attrs.empty()) throw PreconditionError("intersect_sensitive needs at least one attribute");
  const auto n = attrs.front().size();
  std::string name;
  for (const auto& a : attrs) {
    if (a.size() != n) throw PreconditionError("sensitive attributes differ in length");
    if (!name.empty()) name += '|';
    name += a.name();
  }
  std::map<std::vector<int>, int> cell_code;
  std::vector<std::string> labels;
  std::vector<int> codes;
  codes.reserve(n);
  std::vector<int> key(attrs.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < attrs.size(); ++k) key[k] = attrs[k].code(r);
    auto [it, inserted] = cell_code.try_emplace(key, static_cast<int>(labels.size()));
    if (inserted) {
      std::string label;
      for (std::size_t k = 0; k < attrs.size(); ++k) {
        if (k) label += '|';
        label += attrs[k].labels()[key[k]];
      }
      labels.push_back(std::move(label));
    }
    codes.push_back(it->second);
  }
  return SensitiveAttribute(std::move(name), std::move(codes), std::move(labels));
}

std::size_t split_train_size(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw PreconditionError("split fraction must lie in (0,1)");
  if (n < 2) throw PreconditionError("split needs at least two rows");
  const auto wanted = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::max<std::size_t>(1, std::min(n - 1, wanted));
}

SplitResult split(const Dataset& ds, const std::optional<PredictionSet>& preds, double fraction,
                  std::uint64_t seed) {
  const auto n = ds.rows();
  const auto n_train = split_train_size(n, fraction);
  if (preds) preds->validate(n);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);

  SplitResult out;
  out.train_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  out.train = ds.subset(out.train_rows);
  out.test = ds.subset(out.test_rows);
  if (preds) {
    out.train_predictions = preds->subset(out.train_rows);
    out.test_predictions = preds->subset(out.test_rows);
  }
  return out;
}

FeatureColumn quantile_bins(const FeatureColumn& column, int bins) {
  if (column.is_categorical()) return column;
  if (bins < 1) throw PreconditionError("quantile_bins needs at least one bin");
  std::vector<double> sorted = column.values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  if (!sorted.empty()) {
    for (int b = 1; b < bins; ++b) {
      // Lower empirical quantile at b/bins.
      const auto idx = static_cast<std::size_t>(
          std::ceil(static_cast<double>(b) * static_cast<double>(sorted.size()) / bins)) - 1;
      const double cut = sorted[std::min(idx, sorted.size() - 1)];
      if (cut < sorted.back() && (cuts.empty() || cut > cuts.back())) cuts.push_back(cut);
    }
  }
  std::vector<std::string> levels;
  for (std::size_t b = 0; b <= cuts.size(); ++b) {
    std::ostringstream s;
    s << "q" << (b + 1);
    if (b < cuts.size()) s << "(<=" << cuts[b] << ")";
    levels.push_back(s.str());
  }
  std::vector<int> codes;
  codes.reserve(column.size());
  for (double v : column.values)
    codes.push_back(static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), v) - cuts.begin()));
  return FeatureColumn::categorical(column.name, std::move(codes), std::move(levels));
}

Strata strata_for(const Dataset& ds, const std::string& column) {
  if (const auto* f = ds.find_feature(column)) {
    if (!f->is_categorical())
      throw PreconditionError("conditioning column '" + column +
                              "' is continuous; bin it first (quantile_bins)");
    return Strata{f->name, std::vector<int>(f->values.begin(), f->values.end()), f->levels};
  }
  if (ds.has_target() && column == ds.target_name())
    return Strata{column, *ds.target(), {"0", "1"}};
  throw SchemaError("unknown conditioning column '" + column + "'");
}

}  // namespace fairaudit
