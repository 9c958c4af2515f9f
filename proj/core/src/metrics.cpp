#include "rtdpa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "rtdpa/errors.hpp"

namespace rtdpa {

double ConfusionMatrix::total() const {
  double t = 0.0;
  for (std::size_t i = 0; i < counts.rows(); ++i)
    for (std::size_t j = 0; j < counts.cols(); ++j) t += counts(i, j);
  return t;
}

ConfusionMatrix confusion_matrix(const std::vector<int>& y_true,
                                 const std::vector<int>& y_pred,
                                 const std::vector<int>& classes) {
  if (y_true.size() != y_pred.size())
    throw std::invalid_argument("confusion_matrix: length mismatch");
  std::map<int, std::size_t> index;
  for (std::size_t k = 0; k < classes.size(); ++k) index[classes[k]] = k;

  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts = Matrix(classes.size(), classes.size());
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    auto ti = index.find(y_true[i]);
    auto pi = index.find(y_pred[i]);
    if (ti == index.end())
      throw InputError("confusion_matrix: unknown true label " + std::to_string(y_true[i]));
    if (pi == index.end())
      throw InputError("confusion_matrix: unknown predicted label " +
                       std::to_string(y_pred[i]));
    cm.counts(ti->second, pi->second) += 1.0;
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  const double total = cm.total();
  if (total <= 0) throw InputError("accuracy: empty confusion matrix");
  double trace = 0.0;
  for (std::size_t i = 0; i < cm.counts.rows(); ++i) trace += cm.counts(i, i);
  return trace / total;
}

PrfResult precision_recall_f1_macro(const ConfusionMatrix& cm) {
  const std::size_t k = cm.classes.size();
  if (cm.total() <= 0) throw InputError("precision_recall_f1: empty confusion matrix");
  PrfResult r;
  double sp = 0.0, sr = 0.0, sf = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double tp = cm.counts(c, c);
    double fp = 0.0, fn = 0.0;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += cm.counts(o, c);
      fn += cm.counts(c, o);
    }
    double prec;
    if (tp + fp > 0) {
      prec = tp / (tp + fp);
    } else {
      prec = 0.0;
      r.undefined_precision.push_back(cm.classes[c]);
    }
    double rec;
    if (tp + fn > 0) {
      rec = tp / (tp + fn);
    } else {
      rec = 0.0;
      r.undefined_recall.push_back(cm.classes[c]);
    }
    const double f1 = (prec + rec) > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    sp += prec;
    sr += rec;
    sf += f1;
  }
  r.precision = sp / static_cast<double>(k);
  r.recall = sr / static_cast<double>(k);
  r.f1 = sf / static_cast<double>(k);
  return r;
}

double binary_auc(const std::vector<double>& score, const std::vector<bool>& positive) {
  const std::size_t n = score.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });

  // Sum of positive ranks with average ranks over tied scores; doubled to
  // stay integral so the result exactly matches concordant-pair counting.
  double twice_pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && score[order[j]] == score[order[i]]) ++j;
    const double twice_avg_rank = static_cast<double>(i + 1 + j);  // 2 * (lo + hi) / 2
    for (std::size_t t = i; t < j; ++t)
      if (positive[order[t]]) {
        twice_pos_rank_sum += twice_avg_rank;
        ++n_pos;
      }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("binary_auc: needs positives and negatives");
  const double np = static_cast<double>(n_pos);
  return (twice_pos_rank_sum - np * (np + 1.0)) /
         (2.0 * np * static_cast<double>(n_neg));
}

AucResult roc_auc_ovr_macro(const std::vector<int>& y_true, const Matrix& scores,
                            const std::vector<int>& classes) {
  if (y_true.size() != scores.rows())
    throw std::invalid_argument("roc_auc: row count mismatch");
  if (classes.size() != scores.cols())
    throw std::invalid_argument("roc_auc: class count mismatch");
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < scores.cols(); ++j) s += scores(i, j);
    if (std::abs(s - 1.0) > 1e-6)
      throw InputError("roc_auc: score row " + std::to_string(i) + " sums to " +
                       std::to_string(s) + ", not 1");
  }

  AucResult result;
  double sum = 0.0;
  std::size_t scored = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::vector<double> col(scores.rows());
    std::vector<bool> pos(scores.rows());
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < scores.rows(); ++i) {
      col[i] = scores(i, c);
      pos[i] = y_true[i] == classes[c];
      if (pos[i]) ++n_pos;
    }
    if (n_pos == 0 || n_pos == scores.rows()) {
      result.skipped_classes.push_back(classes[c]);
      continue;
    }
    sum += binary_auc(col, pos);
    ++scored;
  }
  if (scored == 0) throw InputError("roc_auc: no class has both positives and negatives");
  result.auc = sum / static_cast<double>(scored);
  return result;
}

double cohens_kappa(const ConfusionMatrix& cm) {
  const double total = cm.total();
  if (total <= 0) throw InputError("cohens_kappa: empty confusion matrix");
  double trace = 0.0;
  for (std::size_t i = 0; i < cm.counts.rows(); ++i) trace += cm.counts(i, i);
  const double po = trace / total;
  double pe = 0.0;
  for (std::size_t c = 0; c < cm.counts.rows(); ++c) {
    double row = 0.0, col = 0.0;
    for (std::size_t o = 0; o < cm.counts.cols(); ++o) {
      row += cm.counts(c, o);
      col += cm.counts(o, c);
    }
    pe += row * col / (total * total);
  }
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

nlohmann::json MetricsReport::to_json() const {
  return {{"classifier", classifier},
          {"row_type", row_type},
          {"train_accuracy", train_accuracy},
          {"test_accuracy", test_accuracy},
          {"precision", precision},
          {"recall", recall},
          {"f1", f1},
          {"roc_auc", roc_auc},
          {"cohens_kappa", cohens_kappa},
          {"running_time_seconds", running_time_seconds}};
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.classifier = j.at("classifier").get<std::string>();
  r.row_type = j.at("row_type").get<std::string>();
  r.train_accuracy = j.at("train_accuracy").get<double>();
  r.test_accuracy = j.at("test_accuracy").get<double>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1").get<double>();
  r.roc_auc = j.at("roc_auc").get<double>();
  r.cohens_kappa = j.at("cohens_kappa").get<double>();
  r.running_time_seconds = j.at("running_time_seconds").get<double>();
  return r;
}

namespace {

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

std::string render_report_table(const std::string& title,
                                const std::vector<MetricsReport>& rows, bool include_time) {
  static const char* headers[] = {"Classifier", "Train Accuracy", "Test Accuracy",
                                  "Precision",  "Recall",         "F1-Score",
                                  "ROC AUC",    "Cohen's Kappa",  "Running Time"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({r.classifier, fmt4(r.train_accuracy), fmt4(r.test_accuracy),
                     fmt4(r.precision), fmt4(r.recall), fmt4(r.f1), fmt4(r.roc_auc),
                     fmt4(r.cohens_kappa),
                     include_time ? fmt4(r.running_time_seconds) : std::string("-")});
  }
  std::vector<std::size_t> width(9);
  for (std::size_t c = 0; c < 9; ++c) {
    width[c] = std::string(headers[c]).size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  if (!title.empty()) out << title << "\n";
  auto pad = [](const std::string& s, std::size_t w) {
    return s + std::string(w - s.size(), ' ');
  };
  for (std::size_t c = 0; c < 9; ++c) out << (c ? "  " : "") << pad(headers[c], width[c]);
  out << "\n";
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < 9; ++c) out << (c ? "  " : "") << pad(row[c], width[c]);
    out << "\n";
  }
  return out.str();
}

std::vector<std::string> best_estimator_lines(const std::vector<MetricsReport>& rows,
                                              bool include_time) {
  std::vector<std::string> lines;
  if (rows.empty()) return lines;
  struct Item {
    const char* name;
    double (*get)(const MetricsReport&);
    bool higher_better;
  };
  static const Item items[] = {
      {"Train Accuracy", [](const MetricsReport& r) { return r.train_accuracy; }, true},
      {"Test Accuracy", [](const MetricsReport& r) { return r.test_accuracy; }, true},
      {"Precision", [](const MetricsReport& r) { return r.precision; }, true},
      {"Recall", [](const MetricsReport& r) { return r.recall; }, true},
      {"F1 Score", [](const MetricsReport& r) { return r.f1; }, true},
      {"ROC AUC", [](const MetricsReport& r) { return r.roc_auc; }, true},
      {"Cohen's Kappa", [](const MetricsReport& r) { return r.cohens_kappa; }, true},
      {"Running Time", [](const MetricsReport& r) { return r.running_time_seconds; }, false},
  };
  for (const auto& item : items) {
    if (!include_time && !item.higher_better) continue;
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double v = item.get(rows[i]);
      const double b = item.get(rows[best]);
      if (item.higher_better ? v > b : v < b) best = i;
    }
    std::ostringstream line;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", item.get(rows[best]));
    line << "Best estimator based on " << item.name << ": " << rows[best].classifier << " ("
         << item.name << ": " << buf << ")";
    lines.push_back(line.str());
  }
  return lines;
}

}  // namespace rtdpa
