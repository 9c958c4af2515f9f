#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rtdpa/matrix.hpp"

namespace rtdpa {

/// Rows are true classes, columns predicted classes, in `classes` order.
struct ConfusionMatrix {
  std::vector<int> classes;
  Matrix counts;

  double at(std::size_t i, std::size_t j) const { return counts(i, j); }
  double total() const;
};

ConfusionMatrix confusion_matrix(const std::vector<int>& y_true,
                                 const std::vector<int>& y_pred,
                                 const std::vector<int>& classes);

double accuracy(const ConfusionMatrix& cm);

struct PrfResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Classes whose precision or recall hit the 0/0 convention (defined as 0).
  std::vector<int> undefined_precision;
  std::vector<int> undefined_recall;
};

PrfResult precision_recall_f1_macro(const ConfusionMatrix& cm);

struct AucResult {
  double auc = 0.0;
  std::vector<int> skipped_classes;  // no positives or no negatives
};

/// One-vs-rest macro ROC AUC from an n x K probability matrix via the rank
/// statistic with tie correction. Rows must sum to 1 within 1e-6.
AucResult roc_auc_ovr_macro(const std::vector<int>& y_true, const Matrix& scores,
                            const std::vector<int>& classes);

/// Binary AUC of `score` for `positive` labels, rank statistic with average
/// ranks on ties. Shared by the OvR wrapper and exposed for direct use.
double binary_auc(const std::vector<double>& score, const std::vector<bool>& positive);

double cohens_kappa(const ConfusionMatrix& cm);

/// One row of the Table-3-shaped performance report.
struct MetricsReport {
  std::string classifier;
  std::string row_type;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double roc_auc = 0.0;
  double cohens_kappa = 0.0;
  double running_time_seconds = 0.0;

  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& j);
};

/// Aligned text table in the paper's column order:
/// Classifier | Train Accuracy | Test Accuracy | Precision | Recall |
/// F1-Score | ROC AUC | Cohen's Kappa | Running Time
std::string render_report_table(const std::string& title,
                                const std::vector<MetricsReport>& rows,
                                bool include_time = true);

/// "Best estimator based on <Metric>: <Classifier> (<Metric>: <value>)"
/// lines, one per metric column.
std::vector<std::string> best_estimator_lines(const std::vector<MetricsReport>& rows,
                                              bool include_time = true);

}  // namespace rtdpa
