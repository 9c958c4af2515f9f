#include "rtdpa/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "rtdpa/errors.hpp"

namespace rtdpa {

MissingReport missing_value_report(const Dataset& d) {
  MissingReport r;
  r.n_rows = d.n_rows();
  r.per_column.reserve(d.n_cols());
  for (std::size_t c = 0; c < d.n_cols(); ++c) {
    MissingColumnStat stat;
    stat.column = d.schema.columns[c].name;
    for (const auto& row : d.rows)
      if (row[c].is_missing()) ++stat.total_missing;
    stat.pct_missing = r.n_rows == 0
                           ? 0.0
                           : 100.0 * static_cast<double>(stat.total_missing) /
                                 static_cast<double>(r.n_rows);
    r.per_column.push_back(std::move(stat));
  }
  return r;
}

std::string MissingReport::to_text(bool only_missing) const {
  // Sort by pct descending; std::stable_sort keeps schema column order on ties.
  std::vector<const MissingColumnStat*> order;
  for (const auto& s : per_column)
    if (!only_missing || s.total_missing > 0) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto* a, const auto* b) { return a->pct_missing > b->pct_missing; });

  std::size_t name_w = std::string("Variable").size();
  for (const auto* s : order) name_w = std::max(name_w, s->column.size());

  std::ostringstream out;
  char buf[64];
  out << "Variable";
  out << std::string(name_w - 8, ' ') << "  Total Missing  % Missing\n";
  for (const auto* s : order) {
    out << s->column << std::string(name_w - s->column.size(), ' ');
    std::snprintf(buf, sizeof(buf), "  %13zu  %9.1f\n", s->total_missing, s->pct_missing);
    out << buf;
  }
  return out.str();
}

nlohmann::json MissingReport::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& s : per_column)
    cols.push_back({{"column", s.column},
                    {"total_missing", s.total_missing},
                    {"pct_missing", s.pct_missing}});
  return {{"n_rows", n_rows}, {"columns", cols}};
}

PreprocessPlan PreprocessPlan::from_json(const nlohmann::json& j) {
  static const std::set<std::string> allowed = {
      "drop_missing_threshold_pct", "drop_columns", "imputation",
      "max_cardinality",            "standardize",  "winsorize"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw InputError("preprocess plan: unknown key '" + it.key() + "'");
  PreprocessPlan p;
  p.drop_missing_threshold_pct = j.value("drop_missing_threshold_pct", 70.0);
  if (!(p.drop_missing_threshold_pct > 0.0 && p.drop_missing_threshold_pct <= 100.0))
    throw InputError("drop_missing_threshold_pct must be in (0,100]");
  if (j.contains("drop_columns"))
    p.drop_columns = j["drop_columns"].get<std::vector<std::string>>();
  if (j.contains("imputation")) {
    const auto& imp = j["imputation"];
    static const std::set<std::string> imp_keys = {"numeric", "categorical"};
    for (auto it = imp.begin(); it != imp.end(); ++it)
      if (!imp_keys.count(it.key()))
        throw InputError("preprocess plan imputation: unknown key '" + it.key() + "'");
    const std::string num = imp.value("numeric", "median");
    if (num == "median") p.numeric_impute = NumericImpute::median;
    else if (num == "mean") p.numeric_impute = NumericImpute::mean;
    else throw InputError("imputation.numeric must be 'median' or 'mean'");
    if (imp.contains("categorical") && imp["categorical"].get<std::string>() != "mode")
      throw InputError("imputation.categorical supports only 'mode'");
  }
  p.max_cardinality = j.value("max_cardinality", std::size_t{64});
  if (p.max_cardinality < 2) throw InputError("max_cardinality must be >= 2");
  p.standardize = j.value("standardize", true);
  if (j.contains("winsorize")) {
    const auto& w = j["winsorize"];
    static const std::set<std::string> w_keys = {"lower_pct", "upper_pct"};
    for (auto it = w.begin(); it != w.end(); ++it)
      if (!w_keys.count(it.key()))
        throw InputError("preprocess plan winsorize: unknown key '" + it.key() + "'");
    p.winsorize = true;
    p.winsor_lower_pct = w.value("lower_pct", 1.0);
    p.winsor_upper_pct = w.value("upper_pct", 99.0);
    if (!(p.winsor_lower_pct >= 0 && p.winsor_upper_pct <= 100 &&
          p.winsor_lower_pct < p.winsor_upper_pct))
      throw InputError("winsorize percentiles must satisfy 0 <= lower < upper <= 100");
  }
  return p;
}

nlohmann::json PreprocessPlan::to_json() const {
  nlohmann::json j{
      {"drop_missing_threshold_pct", drop_missing_threshold_pct},
      {"drop_columns", drop_columns},
      {"imputation",
       {{"numeric", numeric_impute == NumericImpute::median ? "median" : "mean"},
        {"categorical", "mode"}}},
      {"max_cardinality", max_cardinality},
      {"standardize", standardize}};
  if (winsorize)
    j["winsorize"] = {{"lower_pct", winsor_lower_pct}, {"upper_pct", winsor_upper_pct}};
  return j;
}

namespace {

Dataset drop_columns_by_index(const Dataset& d, const std::set<std::size_t>& drop) {
  Dataset out;
  out.schema = d.schema;
  out.schema.columns.clear();
  for (std::size_t c = 0; c < d.n_cols(); ++c)
    if (!drop.count(c)) out.schema.columns.push_back(d.schema.columns[c]);
  out.rows.reserve(d.rows.size());
  for (const auto& row : d.rows) {
    std::vector<Cell> r;
    r.reserve(out.schema.columns.size());
    for (std::size_t c = 0; c < row.size(); ++c)
      if (!drop.count(c)) r.push_back(row[c]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace

Dataset drop_high_missing(const Dataset& d, const PreprocessPlan& plan,
                          std::vector<std::string>* dropped) {
  const auto report = missing_value_report(d);
  std::set<std::size_t> drop;
  std::size_t feature_count = 0;
  for (std::size_t c = 0; c < d.n_cols(); ++c) {
    if (d.schema.columns[c].role != ColumnRole::feature) continue;
    ++feature_count;
    if (report.per_column[c].pct_missing > plan.drop_missing_threshold_pct) {
      drop.insert(c);
      if (dropped) dropped->push_back(d.schema.columns[c].name);
    }
  }
  if (feature_count > 0 && drop.size() == feature_count)
    throw InputError("drop_high_missing would remove every feature column");
  return drop_columns_by_index(d, drop);
}

Dataset drop_inapplicable(const Dataset& d, const std::string& row_type,
                          const std::vector<std::string>& drop_columns) {
  std::set<std::size_t> drop;
  for (const auto& name : drop_columns) {
    const int ix = d.schema.column_index(name);
    if (ix < 0)
      throw InputError("drop_inapplicable for row type '" + row_type +
                       "': unknown column '" + name + "'");
    drop.insert(static_cast<std::size_t>(ix));
  }
  return drop_columns_by_index(d, drop);
}

namespace {

double quantile_nearest(std::vector<double> values, double pct) {
  std::sort(values.begin(), values.end());
  const double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
  const std::size_t ix = static_cast<std::size_t>(std::llround(rank));
  return values[std::min(ix, values.size() - 1)];
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

FittedPreprocessor fit_preprocessor(const Dataset& d, const PreprocessPlan& plan) {
  FittedPreprocessor fp;
  bool any_feature = false;
  for (std::size_t c = 0; c < d.n_cols(); ++c) {
    const ColumnSpec& col = d.schema.columns[c];
    if (col.role != ColumnRole::feature || col.kind == ColumnKind::identifier) continue;
    any_feature = true;

    FittedPreprocessor::ColumnTransform t;
    t.name = col.name;
    t.kind = col.kind;

    if (col.kind == ColumnKind::categorical) {
      std::map<std::string, std::size_t> counts;
      for (const auto& row : d.rows)
        if (!row[c].is_missing()) ++counts[row[c].as_text()];
      if (counts.empty()) {
        fp.dropped_constant.push_back(col.name);
        continue;
      }
      if (counts.size() > plan.max_cardinality)
        throw InputError("column '" + col.name + "' has cardinality " +
                         std::to_string(counts.size()) + " > max_cardinality " +
                         std::to_string(plan.max_cardinality));
      // Mode fill; ties resolved to the lexicographically smallest value,
      // which the map order already provides.
      std::size_t best = 0;
      for (const auto& [value, n] : counts) {
        if (n > best) {
          best = n;
          t.mode_fill = value;
        }
      }
      for (const auto& [value, n] : counts) {
        (void)n;
        t.vocabulary.push_back(value);
      }
    } else {
      std::vector<double> values;
      for (const auto& row : d.rows)
        if (!row[c].is_missing()) values.push_back(row[c].as_number());
      if (values.empty()) {
        fp.dropped_constant.push_back(col.name);
        continue;
      }
      t.fill = plan.numeric_impute == NumericImpute::median
                   ? median_of(values)
                   : std::accumulate(values.begin(), values.end(), 0.0) /
                         static_cast<double>(values.size());
      if (plan.winsorize) {
        t.clip = true;
        t.clip_lo = quantile_nearest(values, plan.winsor_lower_pct);
        t.clip_hi = quantile_nearest(values, plan.winsor_upper_pct);
      }
      // Distribution parameters over the imputed (and clipped) training column.
      double sum = 0.0, sumsq = 0.0;
      for (const auto& row : d.rows) {
        double v = row[c].is_missing() ? t.fill : row[c].as_number();
        if (t.clip) v = std::clamp(v, t.clip_lo, t.clip_hi);
        sum += v;
        sumsq += v * v;
      }
      const double n = static_cast<double>(d.n_rows());
      t.mean = sum / n;
      const double var = std::max(0.0, sumsq / n - t.mean * t.mean);
      t.stddev = std::sqrt(var);
      if (plan.standardize) {
        if (t.stddev <= 1e-12) {
          fp.dropped_constant.push_back(col.name);
          continue;
        }
      } else {
        t.mean = 0.0;
        t.stddev = 1.0;
      }
    }
    fp.kept_columns.push_back(col.name);
    if (col.kind == ColumnKind::categorical)
      for (const auto& v : t.vocabulary) fp.feature_names.push_back(col.name + "=" + v);
    else
      fp.feature_names.push_back(col.name);
    fp.transforms.push_back(std::move(t));
  }
  if (!any_feature || fp.transforms.empty())
    throw InputError("fit_preprocessor: no usable feature columns");
  return fp;
}

Matrix FittedPreprocessor::transform(const Dataset& d) const {
  std::vector<std::size_t> col_ix(transforms.size());
  for (std::size_t k = 0; k < transforms.size(); ++k) {
    const int ix = d.schema.column_index(transforms[k].name);
    if (ix < 0)
      throw InputError("transform: dataset lacks column '" + transforms[k].name + "'");
    const ColumnSpec& col = d.schema.columns[static_cast<std::size_t>(ix)];
    const bool numeric_like =
        col.kind == ColumnKind::numeric || col.kind == ColumnKind::date;
    const bool want_numeric = transforms[k].kind != ColumnKind::categorical;
    if (numeric_like != want_numeric)
      throw InputError("transform: column '" + transforms[k].name +
                       "' kind does not match the fitted schema");
    col_ix[k] = static_cast<std::size_t>(ix);
  }

  Matrix out(d.n_rows(), feature_names.size());
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    std::size_t j = 0;
    for (std::size_t k = 0; k < transforms.size(); ++k) {
      const auto& t = transforms[k];
      const Cell& cell = d.rows[i][col_ix[k]];
      if (t.kind == ColumnKind::categorical) {
        const std::string& v = cell.is_missing() ? t.mode_fill : cell.as_text();
        auto it = std::lower_bound(t.vocabulary.begin(), t.vocabulary.end(), v);
        // Unseen categories leave the whole indicator block at zero.
        if (it != t.vocabulary.end() && *it == v)
          out(i, j + static_cast<std::size_t>(it - t.vocabulary.begin())) = 1.0;
        j += t.vocabulary.size();
      } else {
        double v = cell.is_missing() ? t.fill : cell.as_number();
        if (t.clip) v = std::clamp(v, t.clip_lo, t.clip_hi);
        out(i, j) = (v - t.mean) / t.stddev;
        ++j;
      }
    }
  }
  return out;
}

nlohmann::json FittedPreprocessor::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& t : transforms) {
    nlohmann::json jt{{"name", t.name}, {"kind", to_string(t.kind)}};
    if (t.kind == ColumnKind::categorical) {
      jt["mode_fill"] = t.mode_fill;
      jt["vocabulary"] = t.vocabulary;
    } else {
      jt["fill"] = t.fill;
      jt["mean"] = t.mean;
      jt["stddev"] = t.stddev;
      if (t.clip) jt["clip"] = {{"lo", t.clip_lo}, {"hi", t.clip_hi}};
    }
    cols.push_back(std::move(jt));
  }
  return {{"transforms", cols},
          {"kept_columns", kept_columns},
          {"dropped_constant", dropped_constant},
          {"feature_names", feature_names}};
}

FittedPreprocessor FittedPreprocessor::from_json(const nlohmann::json& j) {
  FittedPreprocessor fp;
  fp.kept_columns = j.at("kept_columns").get<std::vector<std::string>>();
  fp.dropped_constant = j.at("dropped_constant").get<std::vector<std::string>>();
  fp.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  for (const auto& jt : j.at("transforms")) {
    ColumnTransform t;
    t.name = jt.at("name").get<std::string>();
    t.kind = column_kind_from_string(jt.at("kind").get<std::string>());
    if (t.kind == ColumnKind::categorical) {
      t.mode_fill = jt.at("mode_fill").get<std::string>();
      t.vocabulary = jt.at("vocabulary").get<std::vector<std::string>>();
    } else {
      t.fill = jt.at("fill").get<double>();
      t.mean = jt.at("mean").get<double>();
      t.stddev = jt.at("stddev").get<double>();
      if (jt.contains("clip")) {
        t.clip = true;
        t.clip_lo = jt["clip"].at("lo").get<double>();
        t.clip_hi = jt["clip"].at("hi").get<double>();
      }
    }
    fp.transforms.push_back(std::move(t));
  }
  return fp;
}

}  // namespace rtdpa
