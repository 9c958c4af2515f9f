#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtdpa/augment.hpp"
#include "rtdpa/classifier.hpp"
#include "rtdpa/dataset.hpp"
#include "rtdpa/metrics.hpp"
#include "rtdpa/pca.hpp"
#include "rtdpa/preprocess.hpp"

namespace rtdpa {

struct ModelConfig {
  std::string family = "decision_tree";
  nlohmann::json params = nlohmann::json::object();
};

struct RowTypeConfig {
  PreprocessPlan preprocess;
  std::optional<PcaSelectPolicy> pca;  // nullopt = PCA off
  AugmentSpec augment;
  ModelConfig model;
};

/// Whole-pipeline configuration: one JSON document with a "row_types" map
/// whose "default" section backs any field a per-type section omits.
struct PipelineConfig {
  std::uint64_t seed = 0;
  SplitSpec split;
  LabelPolicy label_policy;
  enum class AugmentSpace { pca, pre_pca } augment_space = AugmentSpace::pca;
  RowTypeConfig defaults;
  std::map<std::string, nlohmann::json> per_type_raw;

  RowTypeConfig resolve(const std::string& row_type) const;
  std::string fingerprint() const;

  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
};

/// Everything one row type needs to predict on its own: preprocessor, PCA,
/// model, label decoding, plus the training-time report.
struct TypeEntry {
  std::string row_type;
  FittedPreprocessor preprocessor;
  std::optional<PcaModel> pca;
  std::unique_ptr<Classifier> model;
  std::vector<ClassLabel> labels;
  CodeMap code_map;
  MetricsReport train_report;

  Matrix transform(const Dataset& rows) const;  // preprocess then project
};

struct RtdpaModel {
  std::map<std::string, TypeEntry> registry;
  std::string config_fingerprint;
  std::string created_at;
};

struct TrainOutcome {
  RtdpaModel model;
  std::vector<MetricsReport> reports;  // one per successful row type
  std::vector<std::string> warnings;
  std::map<std::string, std::string> per_type_errors;
};

TrainOutcome train_all(const Dataset& d, const PipelineConfig& config);

struct RoutePolicy {
  bool skip_unknown = false;  // otherwise unknown row types fail the call
};

struct RoutedPrediction {
  std::size_t row = 0;
  std::string row_type;
  bool routed = false;
  int code = 0;
  std::string class_name;
  std::map<std::string, double> scores;  // class name -> probability
};

std::vector<RoutedPrediction> route_predict(const RtdpaModel& m, const Dataset& rows,
                                            const RoutePolicy& policy = {});

// ---------------------------------------------------------------------------
// Hyperparameter grid search (stratified k-fold CV on training data only).
// ---------------------------------------------------------------------------

struct TuningSpec {
  std::map<std::string, std::vector<nlohmann::json>> grid;
  std::size_t cv_folds = 5;
  std::string metric = "f1";  // accuracy | precision | recall | f1 | kappa | auc
};

struct GridResult {
  nlohmann::json best_params;
  struct Row {
    nlohmann::json params;
    double mean_metric = 0.0;
    std::vector<double> fold_metrics;
  };
  std::vector<Row> table;
  std::vector<std::string> warnings;
};

GridResult grid_search(const TypedPartition& train, const std::string& family,
                       const TuningSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Persistence: single-file container, magic "RTDPA", schema_version, checksum.
// ---------------------------------------------------------------------------

inline constexpr int kModelSchemaVersion = 1;

void save_model(const RtdpaModel& m, const std::string& path);
RtdpaModel load_model(const std::string& path);
std::string serialize_model(const RtdpaModel& m);
RtdpaModel deserialize_model(const std::string& bytes, const std::string& origin);

// ---------------------------------------------------------------------------
// Monitoring: flag per-type metric drops against a stored baseline.
// ---------------------------------------------------------------------------

struct MonitorBaseline {
  std::map<std::string, MetricsReport> per_type;
  std::map<std::string, double> thresholds;  // metric name -> allowed drop

  static MonitorBaseline from_model(const RtdpaModel& m, double default_threshold = 0.05);
};

struct DriftReport {
  struct Entry {
    std::string row_type;
    std::string status;  // "ok" | "flagged" | "no data"
    std::vector<std::string> flags;
    std::optional<MetricsReport> fresh;
  };
  std::vector<Entry> entries;

  std::string to_text() const;
  nlohmann::json to_json() const;
};

/// Never retrains; it only measures and flags.
DriftReport monitor(const RtdpaModel& m, const MonitorBaseline& baseline,
                    const Dataset& fresh);

/// Evaluate one registry entry on labeled per-type rows (test-side metrics).
MetricsReport evaluate_entry(const TypeEntry& entry, const Dataset& per_type_rows,
                             std::vector<std::string>* warnings = nullptr);

}  // namespace rtdpa
