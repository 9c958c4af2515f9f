#include "rtdpa/framework.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "rtdpa/errors.hpp"
#include "rtdpa/rng.hpp"

namespace rtdpa {

namespace {

const std::set<std::string> kSeededFamilies = {"svm", "mlp", "decision_tree",
                                               "random_forest", "extra_trees"};

PcaSelectPolicy pca_policy_from_json(const nlohmann::json& j) {
  static const std::set<std::string> allowed = {"cumulative_threshold", "fixed_count"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw InputError("pca policy: unknown key '" + it.key() + "'");
  PcaSelectPolicy p;
  if (j.contains("cumulative_threshold"))
    p.cumulative_threshold = j["cumulative_threshold"].get<double>();
  if (j.contains("fixed_count")) p.fixed_count = j["fixed_count"].get<std::size_t>();
  if (p.cumulative_threshold.has_value() == p.fixed_count.has_value())
    throw InputError("pca policy: give exactly one of cumulative_threshold or fixed_count");
  return p;
}

nlohmann::json pca_policy_to_json(const PcaSelectPolicy& p) {
  nlohmann::json j;
  if (p.cumulative_threshold) j["cumulative_threshold"] = *p.cumulative_threshold;
  if (p.fixed_count) j["fixed_count"] = *p.fixed_count;
  return j;
}

AugmentSpec augment_from_json(const nlohmann::json& j) {
  static const std::set<std::string> allowed = {"variant", "k_neighbors", "enn_k", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw InputError("augment: unknown key '" + it.key() + "'");
  AugmentSpec s;
  s.variant = AugmentSpec::variant_from_string(j.value("variant", "none"));
  s.k_neighbors = j.value("k_neighbors", std::size_t{5});
  s.enn_k = j.value("enn_k", std::size_t{3});
  s.seed = j.value("seed", std::uint64_t{0});
  if (s.k_neighbors < 1) throw InputError("augment: k_neighbors must be >= 1");
  return s;
}

nlohmann::json augment_to_json(const AugmentSpec& s) {
  return {{"variant", AugmentSpec::to_string(s.variant)},
          {"k_neighbors", s.k_neighbors},
          {"enn_k", s.enn_k}};
}

ModelConfig model_from_json(const nlohmann::json& j) {
  static const std::set<std::string> allowed = {"family", "params"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw InputError("model: unknown key '" + it.key() + "'");
  ModelConfig m;
  if (!j.contains("family")) throw InputError("model: 'family' is required");
  m.family = j["family"].get<std::string>();
  m.params = j.value("params", nlohmann::json::object());
  make_classifier(m.family, m.params);  // validates family and parameter keys
  return m;
}

// Field-level fallback: any of preprocess/pca/augment/model a section omits
// comes from the default section.
RowTypeConfig row_type_config_from_json(const nlohmann::json& section,
                                        const RowTypeConfig& fallback) {
  static const std::set<std::string> allowed = {"preprocess", "pca", "augment", "model"};
  for (auto it = section.begin(); it != section.end(); ++it)
    if (!allowed.count(it.key()))
      throw InputError("row type config: unknown key '" + it.key() + "'");

  RowTypeConfig out = fallback;
  if (section.contains("preprocess"))
    out.preprocess = PreprocessPlan::from_json(section["preprocess"]);
  if (section.contains("pca")) {
    out.pca = section["pca"].is_null()
                  ? std::nullopt
                  : std::make_optional(pca_policy_from_json(section["pca"]));
  }
  if (section.contains("augment")) out.augment = augment_from_json(section["augment"]);
  if (section.contains("model")) out.model = model_from_json(section["model"]);
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> allowed = {"seed", "split", "label_policy",
                                                "augment_space", "row_types"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw InputError("pipeline config: unknown key '" + it.key() + "'");

  PipelineConfig c;
  c.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("split")) {
    const auto& js = j["split"];
    static const std::set<std::string> split_keys = {"test_fraction", "stratified"};
    for (auto it = js.begin(); it != js.end(); ++it)
      if (!split_keys.count(it.key()))
        throw InputError("split: unknown key '" + it.key() + "'");
    c.split.test_fraction = js.value("test_fraction", 0.2);
    c.split.stratified = js.value("stratified", true);
    if (!(c.split.test_fraction > 0 && c.split.test_fraction < 1))
      throw InputError("split.test_fraction must be in (0,1)");
  }
  if (j.contains("label_policy")) {
    const auto& jp = j["label_policy"];
    static const std::set<std::string> lp_keys = {"min_class_count", "merges"};
    for (auto it = jp.begin(); it != jp.end(); ++it)
      if (!lp_keys.count(it.key()))
        throw InputError("label_policy: unknown key '" + it.key() + "'");
    c.label_policy.min_class_count = jp.value("min_class_count", std::size_t{5});
    if (jp.contains("merges")) {
      for (const auto& jm : jp["merges"]) {
        static const std::set<std::string> m_keys = {"from", "to"};
        for (auto it = jm.begin(); it != jm.end(); ++it)
          if (!m_keys.count(it.key()))
            throw InputError("label_policy merge: unknown key '" + it.key() + "'");
        c.label_policy.merges.emplace_back(jm.at("from").get<int>(), jm.at("to").get<int>());
      }
      // Reject cycles: repeatedly translating any source must terminate.
      std::map<int, int> step;
      for (const auto& [s, d] : c.label_policy.merges) step[s] = d;
      for (const auto& [s, d] : c.label_policy.merges) {
        (void)d;
        int cur = s;
        for (std::size_t hops = 0; step.count(cur); ++hops) {
          cur = step[cur];
          if (hops > c.label_policy.merges.size())
            throw InputError("label_policy: merge graph has a cycle involving code " +
                             std::to_string(s));
        }
      }
    }
  }
  if (j.contains("augment_space")) {
    const std::string s = j["augment_space"].get<std::string>();
    if (s == "pca") c.augment_space = AugmentSpace::pca;
    else if (s == "pre_pca") c.augment_space = AugmentSpace::pre_pca;
    else throw InputError("augment_space must be 'pca' or 'pre_pca'");
  }

  if (!j.contains("row_types") || !j["row_types"].contains("default"))
    throw InputError("pipeline config: row_types.default section is required");
  const auto& types = j["row_types"];
  RowTypeConfig base;  // built-in defaults
  c.defaults = row_type_config_from_json(types["default"], base);
  for (auto it = types.begin(); it != types.end(); ++it) {
    if (it.key() == "default") continue;
    row_type_config_from_json(it.value(), c.defaults);  // validate eagerly
    c.per_type_raw[it.key()] = it.value();
  }
  return c;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open pipeline config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("pipeline config '" + path + "': " + e.what());
  }
  return from_json(j);
}

RowTypeConfig PipelineConfig::resolve(const std::string& row_type) const {
  auto it = per_type_raw.find(row_type);
  if (it == per_type_raw.end()) return defaults;
  return row_type_config_from_json(it->second, defaults);
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json merges = nlohmann::json::array();
  for (const auto& [s, d] : label_policy.merges)
    merges.push_back({{"from", s}, {"to", d}});
  nlohmann::json def{{"preprocess", defaults.preprocess.to_json()},
                     {"augment", augment_to_json(defaults.augment)},
                     {"model", {{"family", defaults.model.family},
                                {"params", defaults.model.params}}}};
  if (defaults.pca) def["pca"] = pca_policy_to_json(*defaults.pca);
  nlohmann::json types{{"default", def}};
  for (const auto& [name, raw] : per_type_raw) types[name] = raw;
  return {{"seed", seed},
          {"split", {{"test_fraction", split.test_fraction},
                     {"stratified", split.stratified}}},
          {"label_policy", {{"min_class_count", label_policy.min_class_count},
                            {"merges", merges}}},
          {"augment_space", augment_space == AugmentSpace::pca ? "pca" : "pre_pca"},
          {"row_types", types}};
}

std::string PipelineConfig::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json().dump())));
  return buf;
}

Matrix TypeEntry::transform(const Dataset& rows) const {
  Matrix x = preprocessor.transform(rows);
  if (pca) return project(*pca, x);
  return x;
}

namespace {

struct EvalNumbers {
  double accuracy = 0.0;
  PrfResult prf;
  double auc = 0.0;
  double kappa = 0.0;
};

EvalNumbers evaluate_xy(const Classifier& model, const Matrix& x, const std::vector<int>& y,
                        std::vector<std::string>* warnings, const std::string& tag) {
  EvalNumbers out;
  const auto pred = model.predict(x);
  const Matrix proba = model.predict_proba(x);
  const auto cm = confusion_matrix(y, pred, model.classes());
  out.accuracy = accuracy(cm);
  out.prf = precision_recall_f1_macro(cm);
  out.kappa = cohens_kappa(cm);
  try {
    const auto auc = roc_auc_ovr_macro(y, proba, model.classes());
    out.auc = auc.auc;
    if (warnings && !auc.skipped_classes.empty()) {
      std::string msg = tag + ": ROC AUC skipped class(es)";
      for (int c : auc.skipped_classes) msg += " " + std::to_string(c);
      warnings->push_back(msg);
    }
  } catch (const InputError& e) {
    out.auc = 0.0;
    if (warnings) warnings->push_back(tag + ": ROC AUC unavailable: " + e.what());
  }
  return out;
}

std::string now_iso8601() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::tm tm_utc;
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace

TrainOutcome train_all(const Dataset& d, const PipelineConfig& config) {
  TrainOutcome outcome;
  outcome.model.config_fingerprint = config.fingerprint();
  outcome.model.created_at = now_iso8601();

  const auto partitions = partition_by_row_type(d);
  for (const auto& [row_type, part_ds] : partitions) {
    try {
      const std::uint64_t type_seed = derive_seed(config.seed, row_type);
      const RowTypeConfig cfg = config.resolve(row_type);

      TypedPartition tp = make_typed_partition(part_ds, row_type);
      tp = apply_label_policy(tp, config.label_policy);

      SplitSpec split = config.split;
      split.seed = type_seed;
      const auto [train_idx, test_idx] = stratified_split_indices(tp.targets, split);
      const Dataset train_ds = take_rows(part_ds, train_idx);
      const Dataset test_ds = take_rows(part_ds, test_idx);
      std::vector<int> y_train, y_test;
      for (std::size_t i : train_idx) y_train.push_back(tp.targets[i]);
      for (std::size_t i : test_idx) y_test.push_back(tp.targets[i]);

      // All statistics below come from the training split only. Inapplicable
      // columns go first, then the missing-value threshold prunes the rest.
      std::vector<std::string> dropped_high;
      Dataset fitted_view =
          drop_inapplicable(train_ds, row_type, cfg.preprocess.drop_columns);
      fitted_view = drop_high_missing(fitted_view, cfg.preprocess, &dropped_high);
      FittedPreprocessor fp = fit_preprocessor(fitted_view, cfg.preprocess);

      Matrix x_train = fp.transform(train_ds);
      Matrix x_test = fp.transform(test_ds);

      std::optional<PcaModel> pca_model;
      AugmentSpec augment_spec = cfg.augment;
      augment_spec.seed = derive_seed(type_seed, "augment");

      Matrix x_fit = x_train;
      std::vector<int> y_fit = y_train;
      if (config.augment_space == PipelineConfig::AugmentSpace::pre_pca) {
        auto aug = augment(x_train, y_train, augment_spec);
        for (auto& w : aug.warnings) outcome.warnings.push_back(row_type + ": " + w);
        if (cfg.pca) {
          pca_model = select_components(fit_pca(aug.x), *cfg.pca);
          x_fit = project(*pca_model, aug.x);
          x_train = project(*pca_model, x_train);
          x_test = project(*pca_model, x_test);
        } else {
          x_fit = std::move(aug.x);
        }
        y_fit = std::move(aug.y);
      } else {
        if (cfg.pca) {
          pca_model = select_components(fit_pca(x_train), *cfg.pca);
          x_train = project(*pca_model, x_train);
          x_test = project(*pca_model, x_test);
        }
        auto aug = augment(x_train, y_train, augment_spec);
        for (auto& w : aug.warnings) outcome.warnings.push_back(row_type + ": " + w);
        x_fit = std::move(aug.x);
        y_fit = std::move(aug.y);
      }

      ModelConfig mc = cfg.model;
      if (kSeededFamilies.count(mc.family) && !mc.params.contains("seed"))
        mc.params["seed"] = derive_seed(type_seed, "model");
      auto model = make_classifier(mc.family, mc.params);

      const auto t0 = std::chrono::steady_clock::now();
      model->train(x_fit, y_fit);
      const auto t1 = std::chrono::steady_clock::now();
      const double train_seconds =
          std::chrono::duration_cast<std::chrono::duration<double>>(t1 - t0).count();

      // Guard: a singleton class can land entirely in the test split and be
      // unknown to the model; such rows are excluded from evaluation.
      {
        std::set<int> known(model->classes().begin(), model->classes().end());
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < y_test.size(); ++i)
          if (known.count(y_test[i])) keep.push_back(i);
        if (keep.size() != y_test.size()) {
          outcome.warnings.push_back(row_type + ": " +
                                     std::to_string(y_test.size() - keep.size()) +
                                     " test row(s) with classes unseen in training skipped");
          x_test = x_test.take_rows(keep);
          std::vector<int> y2;
          for (std::size_t i : keep) y2.push_back(y_test[i]);
          y_test = std::move(y2);
        }
      }

      const auto train_eval =
          evaluate_xy(*model, x_train, y_train, &outcome.warnings, row_type + "/train");
      const auto test_eval =
          evaluate_xy(*model, x_test, y_test, &outcome.warnings, row_type + "/test");

      MetricsReport report;
      report.classifier = classifier_display_name(mc.family);
      report.row_type = row_type;
      report.train_accuracy = train_eval.accuracy;
      report.test_accuracy = test_eval.accuracy;
      report.precision = test_eval.prf.precision;
      report.recall = test_eval.prf.recall;
      report.f1 = test_eval.prf.f1;
      report.roc_auc = test_eval.auc;
      report.cohens_kappa = test_eval.kappa;
      report.running_time_seconds = train_seconds;

      TypeEntry entry;
      entry.row_type = row_type;
      entry.preprocessor = std::move(fp);
      entry.pca = std::move(pca_model);
      entry.model = std::move(model);
      entry.labels = tp.labels;
      entry.code_map = tp.code_map;
      entry.train_report = report;
      outcome.model.registry.emplace(row_type, std::move(entry));
      outcome.reports.push_back(std::move(report));
    } catch (const std::exception& e) {
      outcome.per_type_errors[row_type] = e.what();
    }
  }
  if (outcome.model.registry.empty())
    throw InputError("train_all: no row type trained successfully" +
                     (outcome.per_type_errors.empty()
                          ? std::string()
                          : "; first error: " + outcome.per_type_errors.begin()->second));
  return outcome;
}

std::vector<RoutedPrediction> route_predict(const RtdpaModel& m, const Dataset& rows,
                                            const RoutePolicy& policy) {
  const int rt_ix = rows.schema.row_type_index();
  if (rt_ix < 0) throw InputError("route_predict: data has no row_type column");

  std::vector<RoutedPrediction> out(rows.n_rows());
  std::map<std::string, std::vector<std::size_t>> by_type;
  for (std::size_t i = 0; i < rows.n_rows(); ++i) {
    const Cell& cell = rows.rows[i][static_cast<std::size_t>(rt_ix)];
    if (cell.is_missing())
      throw InputError("route_predict: row " + std::to_string(i + 1) +
                       " has a missing row type");
    const std::string type =
        cell.is_text() ? cell.as_text() : std::to_string(cell.as_number());
    out[i].row = i;
    out[i].row_type = type;
    by_type[type].push_back(i);
  }

  for (const auto& [type, indices] : by_type) {
    auto entry_it = m.registry.find(type);
    if (entry_it == m.registry.end()) {
      if (!policy.skip_unknown)
        throw InputError("route_predict: no model registered for row type '" + type + "'");
      continue;  // rows stay unrouted
    }
    const TypeEntry& entry = entry_it->second;
    const Dataset subset = take_rows(rows, indices);
    const Matrix x = entry.transform(subset);
    const Matrix proba = entry.model->predict_proba(x);
    const auto pred = entry.model->predict(x);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      RoutedPrediction& rp = out[indices[k]];
      rp.routed = true;
      rp.code = pred[k];
      for (const auto& label : entry.labels) {
        if (label.code == rp.code) rp.class_name = label.name;
      }
      const auto& classes = entry.model->classes();
      for (std::size_t c = 0; c < classes.size(); ++c) {
        std::string name = std::to_string(classes[c]);
        for (const auto& label : entry.labels)
          if (label.code == classes[c]) name = label.name;
        rp.scores[name] = proba(k, c);
      }
    }
  }
  return out;
}

namespace {

double metric_by_name(const std::string& name, const EvalNumbers& e) {
  if (name == "accuracy") return e.accuracy;
  if (name == "precision") return e.prf.precision;
  if (name == "recall") return e.prf.recall;
  if (name == "f1") return e.prf.f1;
  if (name == "kappa") return e.kappa;
  if (name == "auc") return e.auc;
  throw InputError("unknown selection metric '" + name + "'");
}

}  // namespace

GridResult grid_search(const TypedPartition& train, const std::string& family,
                       const TuningSpec& spec, std::uint64_t seed) {
  if (spec.grid.empty()) throw InputError("grid_search: empty grid");
  if (spec.cv_folds < 2) throw InputError("grid_search: cv_folds must be >= 2");
  if (train.features.empty())
    throw InputError("grid_search: partition has no feature matrix");
  metric_by_name(spec.metric, EvalNumbers{});  // validate the metric name

  // Stratified fold assignment: shuffle within class, then round-robin.
  const std::size_t n = train.targets.size();
  std::vector<std::size_t> fold(n);
  {
    Rng rng(derive_seed(seed, "cv-folds"));
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[train.targets[i]].push_back(i);
    for (auto& [cls, idx] : by_class) {
      (void)cls;
      rng.shuffle(idx);
      for (std::size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = i % spec.cv_folds;
    }
  }

  // Cartesian product in canonical order: axes sorted by name (std::map),
  // values in listed order.
  std::vector<std::string> axis_names;
  for (const auto& [name, values] : spec.grid) {
    if (values.empty()) throw InputError("grid_search: axis '" + name + "' has no values");
    axis_names.push_back(name);
  }
  std::vector<std::size_t> cursor(axis_names.size(), 0);
  GridResult result;
  bool done = false;
  while (!done) {
    nlohmann::json params = nlohmann::json::object();
    for (std::size_t a = 0; a < axis_names.size(); ++a)
      params[axis_names[a]] = spec.grid.at(axis_names[a])[cursor[a]];

    GridResult::Row row;
    row.params = params;
    for (std::size_t f = 0; f < spec.cv_folds; ++f) {
      std::vector<std::size_t> tr, va;
      for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? va : tr).push_back(i);
      if (va.empty() || tr.empty()) {
        result.warnings.push_back("fold " + std::to_string(f) + " is empty; skipped");
        continue;
      }
      Matrix x_tr = train.features.take_rows(tr);
      Matrix x_va = train.features.take_rows(va);
      std::vector<int> y_tr, y_va;
      for (std::size_t i : tr) y_tr.push_back(train.targets[i]);
      for (std::size_t i : va) y_va.push_back(train.targets[i]);

      auto model = make_classifier(family, params);
      model->train(x_tr, y_tr);
      // Degenerate folds can hold classes the fold's model never saw.
      {
        std::set<int> known(model->classes().begin(), model->classes().end());
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < y_va.size(); ++i)
          if (known.count(y_va[i])) keep.push_back(i);
        if (keep.size() != y_va.size()) {
          result.warnings.push_back("fold " + std::to_string(f) +
                                    ": validation rows with unseen classes skipped");
          x_va = x_va.take_rows(keep);
          std::vector<int> y2;
          for (std::size_t i : keep) y2.push_back(y_va[i]);
          y_va = std::move(y2);
        }
      }
      const auto eval = evaluate_xy(*model, x_va, y_va, &result.warnings,
                                    "fold " + std::to_string(f));
      row.fold_metrics.push_back(metric_by_name(spec.metric, eval));
    }
    if (row.fold_metrics.empty())
      throw InputError("grid_search: every fold was degenerate");
    row.mean_metric = std::accumulate(row.fold_metrics.begin(), row.fold_metrics.end(), 0.0) /
                      static_cast<double>(row.fold_metrics.size());
    result.table.push_back(std::move(row));

    // advance cursor
    done = true;
    for (std::size_t a = axis_names.size(); a-- > 0;) {
      if (++cursor[a] < spec.grid.at(axis_names[a]).size()) {
        done = false;
        break;
      }
      cursor[a] = 0;
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.table.size(); ++i)
    if (result.table[i].mean_metric > result.table[best].mean_metric) best = i;
  result.best_params = result.table[best].params;
  return result;
}

// ---------------------------------------------------------------------------
// Persistence.
// ---------------------------------------------------------------------------

std::string serialize_model(const RtdpaModel& m) {
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [type, entry] : m.registry) {
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& l : entry.labels) labels.push_back({{"code", l.code}, {"name", l.name}});
    nlohmann::json code_map = nlohmann::json::object();
    for (const auto& [orig, cur] : entry.code_map.to_current)
      code_map[std::to_string(orig)] = cur;
    nlohmann::json je{{"preprocessor", entry.preprocessor.to_json()},
                      {"model", {{"family", entry.model->family()},
                                 {"state", entry.model->save_state()}}},
                      {"labels", labels},
                      {"code_map", code_map},
                      {"train_report", entry.train_report.to_json()}};
    if (entry.pca) je["pca"] = entry.pca->to_json();
    entries[type] = std::move(je);
  }
  const nlohmann::json payload{{"config_fingerprint", m.config_fingerprint},
                               {"created_at", m.created_at},
                               {"entries", entries}};
  const std::string body = payload.dump();
  char checksum[17];
  std::snprintf(checksum, sizeof(checksum), "%016llx",
                static_cast<unsigned long long>(fnv1a64(body)));
  std::ostringstream out;
  out << "RTDPA\n" << "version " << kModelSchemaVersion << "\n"
      << "checksum " << checksum << "\n" << body;
  return out.str();
}

RtdpaModel deserialize_model(const std::string& bytes, const std::string& origin) {
  std::istringstream in(bytes);
  std::string magic;
  if (!std::getline(in, magic) || magic != "RTDPA")
    throw InputError(origin + ": not an RTDPA model file (bad magic)");
  std::string line, word;
  int version = -1;
  if (!std::getline(in, line))
    throw InputError(origin + ": truncated model file (missing version)");
  {
    std::istringstream ls(line);
    ls >> word >> version;
    if (word != "version" || version < 0)
      throw InputError(origin + ": malformed version line '" + line + "'");
  }
  if (version != kModelSchemaVersion)
    throw InputError(origin + ": model schema_version " + std::to_string(version) +
                     " unsupported (this build reads version " +
                     std::to_string(kModelSchemaVersion) + ")");
  std::string checksum;
  if (!std::getline(in, line))
    throw InputError(origin + ": truncated model file (missing checksum)");
  {
    std::istringstream ls(line);
    ls >> word >> checksum;
    if (word != "checksum" || checksum.size() != 16)
      throw InputError(origin + ": malformed checksum line '" + line + "'");
  }
  std::string body(std::istreambuf_iterator<char>(in), {});
  char expected[17];
  std::snprintf(expected, sizeof(expected), "%016llx",
                static_cast<unsigned long long>(fnv1a64(body)));
  if (checksum != expected)
    throw InputError(origin + ": checksum mismatch (file corrupted?)");

  nlohmann::json payload;
  try {
    payload = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(origin + ": model payload is not valid JSON: " + e.what());
  }

  RtdpaModel m;
  m.config_fingerprint = payload.at("config_fingerprint").get<std::string>();
  m.created_at = payload.at("created_at").get<std::string>();
  for (auto it = payload.at("entries").begin(); it != payload.at("entries").end(); ++it) {
    TypeEntry entry;
    entry.row_type = it.key();
    const auto& je = it.value();
    entry.preprocessor = FittedPreprocessor::from_json(je.at("preprocessor"));
    if (je.contains("pca")) entry.pca = PcaModel::from_json(je["pca"]);
    entry.model = make_classifier(je.at("model").at("family").get<std::string>(),
                                  nlohmann::json::object());
    entry.model->load_state(je.at("model").at("state"));
    for (const auto& jl : je.at("labels"))
      entry.labels.push_back({jl.at("code").get<int>(), jl.at("name").get<std::string>()});
    for (auto cm = je.at("code_map").begin(); cm != je.at("code_map").end(); ++cm)
      entry.code_map.to_current[std::stoi(cm.key())] = cm.value().get<int>();
    entry.train_report = MetricsReport::from_json(je.at("train_report"));
    m.registry.emplace(it.key(), std::move(entry));
  }
  return m;
}

void save_model(const RtdpaModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write model file '" + path + "'");
  out << serialize_model(m);
  if (!out) throw InputError("failed writing model file '" + path + "'");
}

RtdpaModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str(), path);
}

// ---------------------------------------------------------------------------
// Monitoring.
// ---------------------------------------------------------------------------

MonitorBaseline MonitorBaseline::from_model(const RtdpaModel& m, double default_threshold) {
  MonitorBaseline b;
  for (const auto& [type, entry] : m.registry) b.per_type[type] = entry.train_report;
  for (const char* name : {"accuracy", "precision", "recall", "f1", "roc_auc", "kappa"})
    b.thresholds[name] = default_threshold;
  return b;
}

MetricsReport evaluate_entry(const TypeEntry& entry, const Dataset& per_type_rows,
                             std::vector<std::string>* warnings) {
  TypedPartition tp = make_typed_partition(per_type_rows, entry.row_type);
  std::vector<int> y(tp.targets.size());
  for (std::size_t i = 0; i < tp.targets.size(); ++i)
    y[i] = entry.code_map.translate(tp.targets[i]);

  Matrix x = entry.transform(per_type_rows);
  {
    std::set<int> known(entry.model->classes().begin(), entry.model->classes().end());
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (known.count(y[i])) keep.push_back(i);
    if (keep.size() != y.size()) {
      if (warnings)
        warnings->push_back(entry.row_type + ": " + std::to_string(y.size() - keep.size()) +
                            " row(s) with unknown classes skipped");
      x = x.take_rows(keep);
      std::vector<int> y2;
      for (std::size_t i : keep) y2.push_back(y[i]);
      y = std::move(y2);
    }
  }
  if (y.empty()) throw InputError(entry.row_type + ": no evaluable rows");

  const auto eval = evaluate_xy(*entry.model, x, y, warnings, entry.row_type);
  MetricsReport report;
  report.classifier = entry.train_report.classifier;
  report.row_type = entry.row_type;
  report.train_accuracy = entry.train_report.train_accuracy;
  report.test_accuracy = eval.accuracy;
  report.precision = eval.prf.precision;
  report.recall = eval.prf.recall;
  report.f1 = eval.prf.f1;
  report.roc_auc = eval.auc;
  report.cohens_kappa = eval.kappa;
  report.running_time_seconds = 0.0;
  return report;
}

DriftReport monitor(const RtdpaModel& m, const MonitorBaseline& baseline,
                    const Dataset& fresh) {
  for (const auto& [metric, threshold] : baseline.thresholds)
    if (threshold < 0)
      throw InputError("monitor: threshold for '" + metric + "' must be >= 0");
  const auto partitions = partition_by_row_type(fresh);
  DriftReport report;
  for (const auto& [type, entry] : m.registry) {
    DriftReport::Entry e;
    e.row_type = type;
    auto part = partitions.find(type);
    if (part == partitions.end() || part->second.n_rows() == 0) {
      e.status = "no data";
      report.entries.push_back(std::move(e));
      continue;
    }
    const MetricsReport fresh_report = evaluate_entry(entry, part->second);
    e.fresh = fresh_report;

    auto base_it = baseline.per_type.find(type);
    if (base_it != baseline.per_type.end()) {
      const MetricsReport& base = base_it->second;
      struct Item {
        const char* name;
        double fresh;
        double base;
      };
      const Item items[] = {
          {"accuracy", fresh_report.test_accuracy, base.test_accuracy},
          {"precision", fresh_report.precision, base.precision},
          {"recall", fresh_report.recall, base.recall},
          {"f1", fresh_report.f1, base.f1},
          {"roc_auc", fresh_report.roc_auc, base.roc_auc},
          {"kappa", fresh_report.cohens_kappa, base.cohens_kappa},
      };
      for (const auto& item : items) {
        auto th = baseline.thresholds.find(item.name);
        if (th == baseline.thresholds.end()) continue;
        if (item.fresh < item.base - th->second) {
          char buf[128];
          std::snprintf(buf, sizeof(buf), "%s dropped %.4f -> %.4f (threshold %.4f)",
                        item.name, item.base, item.fresh, th->second);
          e.flags.push_back(buf);
        }
      }
    }
    e.status = e.flags.empty() ? "ok" : "flagged";
    report.entries.push_back(std::move(e));
  }
  return report;
}

std::string DriftReport::to_text() const {
  std::ostringstream out;
  for (const auto& e : entries) {
    out << e.row_type << ": " << e.status << "\n";
    for (const auto& f : e.flags) out << "  " << f << "\n";
  }
  return out.str();
}

nlohmann::json DriftReport::to_json() const {
  nlohmann::json je = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json j{{"row_type", e.row_type}, {"status", e.status}, {"flags", e.flags}};
    if (e.fresh) j["fresh"] = e.fresh->to_json();
    je.push_back(std::move(j));
  }
  return {{"entries", je}};
}

}  // namespace rtdpa
