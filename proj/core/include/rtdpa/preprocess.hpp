#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rtdpa/dataset.hpp"
#include "rtdpa/matrix.hpp"

namespace rtdpa {

struct MissingColumnStat {
  std::string column;
  std::size_t total_missing = 0;
  double pct_missing = 0.0;  // in [0, 100]
};

/// Per-column missing-value counts, kept in schema column order. The text
/// rendering sorts by pct descending (stable by column order) so fully
/// missing columns surface at the top.
struct MissingReport {
  std::vector<MissingColumnStat> per_column;
  std::size_t n_rows = 0;

  std::string to_text(bool only_missing = true) const;
  nlohmann::json to_json() const;
};

MissingReport missing_value_report(const Dataset& d);

enum class NumericImpute { median, mean };

struct PreprocessPlan {
  double drop_missing_threshold_pct = 70.0;  // strict: drop when pct > threshold
  std::vector<std::string> drop_columns;     // inapplicable for this row type
  NumericImpute numeric_impute = NumericImpute::median;
  std::size_t max_cardinality = 64;
  bool standardize = true;
  bool winsorize = false;
  double winsor_lower_pct = 1.0;
  double winsor_upper_pct = 99.0;

  static PreprocessPlan from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

Dataset drop_high_missing(const Dataset& d, const PreprocessPlan& plan,
                          std::vector<std::string>* dropped = nullptr);
Dataset drop_inapplicable(const Dataset& d, const std::string& row_type,
                          const std::vector<std::string>& drop_columns);

/// Learned per-type transform: imputation fills, frozen one-hot vocabularies,
/// winsor bounds and z-score parameters. Transform output is fully numeric
/// with no missing and no non-finite values.
class FittedPreprocessor {
 public:
  struct ColumnTransform {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    // numeric / date
    double fill = 0.0;
    double mean = 0.0;
    double stddev = 1.0;
    double clip_lo = 0.0, clip_hi = 0.0;
    bool clip = false;
    // categorical
    std::string mode_fill;
    std::vector<std::string> vocabulary;  // sorted, frozen at fit time
  };

  std::vector<ColumnTransform> transforms;
  std::vector<std::string> kept_columns;
  std::vector<std::string> dropped_constant;
  std::vector<std::string> feature_names;  // output features, in column order

  Matrix transform(const Dataset& d) const;

  nlohmann::json to_json() const;
  static FittedPreprocessor from_json(const nlohmann::json& j);
};

FittedPreprocessor fit_preprocessor(const Dataset& d, const PreprocessPlan& plan);

}  // namespace rtdpa
