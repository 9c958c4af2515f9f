#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rtdpa/matrix.hpp"

namespace rtdpa {

enum class ColumnKind { numeric, categorical, date, identifier };
enum class ColumnRole { feature, row_type, target, ignored };

std::string to_string(ColumnKind k);
std::string to_string(ColumnRole r);
ColumnKind column_kind_from_string(const std::string& s);
ColumnRole column_role_from_string(const std::string& s);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  ColumnRole role = ColumnRole::feature;
};

/// One table cell: missing, a number (dates are day counts since 1970-01-01),
/// or text.
class Cell {
 public:
  Cell() = default;
  static Cell missing() { return Cell(); }
  static Cell number(double v) {
    Cell c;
    c.state_ = State::number;
    c.num_ = v;
    return c;
  }
  static Cell text(std::string v) {
    Cell c;
    c.state_ = State::text;
    c.text_ = std::move(v);
    return c;
  }

  bool is_missing() const { return state_ == State::missing; }
  bool is_number() const { return state_ == State::number; }
  bool is_text() const { return state_ == State::text; }
  double as_number() const { return num_; }
  const std::string& as_text() const { return text_; }

 private:
  enum class State { missing, number, text };
  State state_ = State::missing;
  double num_ = 0.0;
  std::string text_;
};

/// Declarative column catalogue. Loaded from a JSON file; unknown keys are
/// rejected so typos fail loudly instead of silently defaulting.
struct Schema {
  std::vector<ColumnSpec> columns;
  std::vector<std::string> missing_sentinels = {"", "NA", "N/A", "NaN", "null", "NULL"};
  std::map<int, std::string> class_names;  // optional display names for target codes

  int column_index(const std::string& name) const;
  int row_type_index() const;
  int target_index() const;
  void validate() const;

  static Schema from_json(const nlohmann::json& j);
  static Schema from_file(const std::string& path);
  nlohmann::json to_json() const;
};

struct Dataset {
  Schema schema;
  std::vector<std::vector<Cell>> rows;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return schema.columns.size(); }
};

/// RFC-4180 CSV with a mandatory header matching the schema column names.
/// Empty strings and schema sentinels load as missing cells.
Dataset load_csv(const std::string& path, const Schema& schema);
Dataset parse_csv(const std::string& content, const Schema& schema, const std::string& origin);

/// Split one CSV record respecting quotes. Exposed for the CSV writer tests.
std::vector<std::string> split_csv_record(const std::string& line);
std::string csv_escape(const std::string& field);

/// Days since 1970-01-01 for an ISO "YYYY-MM-DD" date.
std::int64_t days_from_civil(int year, unsigned month, unsigned day);

struct ClassLabel {
  int code = 0;  // contiguous 1..K after any merge policy
  std::string name;
};

struct LabelPolicy {
  std::vector<std::pair<int, int>> merges;  // (source, destination), original codes
  std::size_t min_class_count = 5;
};

/// Original target code -> current code, recorded so reports can decode
/// merged classes.
struct CodeMap {
  std::map<int, int> to_current;
  int translate(int original) const;
};

/// Per-row-type view: targets always present; the feature matrix is filled in
/// once a preprocessor has run.
struct TypedPartition {
  std::string row_type;
  Matrix features;  // n_r x m_r, empty until preprocessing
  std::vector<int> targets;
  std::vector<std::string> feature_names;
  std::vector<ClassLabel> labels;  // current universe, ascending code
  CodeMap code_map;

  std::map<int, std::size_t> class_counts() const;
  std::string class_name(int code) const;
};

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  bool stratified = true;
};

/// Partitions preserve source row order; their union is the input and they
/// are disjoint. A missing row-type cell is a hard error (routing would be
/// undefined), reported with its row index.
std::map<std::string, Dataset> partition_by_row_type(const Dataset& d);

/// Extract targets and the label universe from a (per-type) dataset.
TypedPartition make_typed_partition(const Dataset& per_type, const std::string& row_type);

/// Execute merges whose source class fell under min_class_count, then
/// re-index codes contiguously. Idempotent: already-merged sources resolve to
/// their destination and are skipped.
TypedPartition apply_label_policy(const TypedPartition& p, const LabelPolicy& policy);

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split_indices(const std::vector<int>& y, const SplitSpec& s);

std::pair<TypedPartition, TypedPartition> stratified_split(const TypedPartition& p,
                                                           const SplitSpec& s);

Dataset take_rows(const Dataset& d, std::span<const std::size_t> indices);

}  // namespace rtdpa
