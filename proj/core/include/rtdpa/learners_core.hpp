#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtdpa/classifier.hpp"
#include "rtdpa/matrix.hpp"

namespace rtdpa {

// ---------------------------------------------------------------------------
// Multinomial softmax logistic regression, full-batch gradient descent on
// L2-regularized cross-entropy.
// ---------------------------------------------------------------------------

struct SoftmaxConfig {
  double lr = 0.5;
  std::size_t epochs = 300;
  double l2 = 1e-4;
};

/// Mean cross-entropy loss (plus L2 on non-bias weights) and its gradient.
/// theta is K x (m+1) with the bias in the last column; y holds class ids
/// 0..K-1. Exposed so tests can run finite-difference checks on it.
double softmax_loss_and_grad(const Matrix& theta, const Matrix& x,
                             const std::vector<std::size_t>& y, double l2, Matrix* grad);

/// Row-wise softmax of x*theta^T with max-subtraction for stability.
Matrix softmax_scores(const Matrix& theta, const Matrix& x);

class SoftmaxRegression final : public Classifier {
 public:
  explicit SoftmaxRegression(SoftmaxConfig config = {}) : config_(config) {}

  std::string family() const override { return "softmax_regression"; }
  void train(const Matrix& x, const std::vector<int>& y) override;
  Matrix predict_proba(const Matrix& x) const override;
  const std::vector<int>& classes() const override { return classes_; }
  nlohmann::json save_state() const override;
  void load_state(const nlohmann::json& state) override;

  const Matrix& theta() const { return theta_; }
  const std::vector<double>& loss_trace() const { return loss_trace_; }

 private:
  SoftmaxConfig config_;
  std::vector<int> classes_;
  Matrix theta_;  // K x (m+1), bias last
  std::vector<double> loss_trace_;
};

// ---------------------------------------------------------------------------
// Gaussian naive Bayes with a variance floor.
// ---------------------------------------------------------------------------

class GaussianNb final : public Classifier {
 public:
  explicit GaussianNb(double var_floor_rel = 1e-9) : var_floor_rel_(var_floor_rel) {}

  std::string family() const override { return "gaussian_nb"; }
  void train(const Matrix& x, const std::vector<int>& y) override;
  Matrix predict_proba(const Matrix& x) const override;
  const std::vector<int>& classes() const override { return classes_; }
  nlohmann::json save_state() const override;
  void load_state(const nlohmann::json& state) override;

  /// log P(C_k) + sum_j log N(x_j; mu_kj, var_kj) for one sample.
  double log_posterior(std::span<const double> x, std::size_t class_ix) const;
  const std::vector<double>& priors() const { return priors_; }

 private:
  double var_floor_rel_;
  std::vector<int> classes_;
  std::vector<double> priors_;
  Matrix means_;      // K x m
  Matrix variances_;  // K x m, floored
};

// ---------------------------------------------------------------------------
// Kernel SVM trained with SMO, multiclass one-vs-rest.
// ---------------------------------------------------------------------------

struct KernelSpec {
  enum class Kind { linear, polynomial, rbf, sigmoid, laplacian, exponential };
  Kind kind = Kind::rbf;
  double sigma = 1.0;  // width for rbf / laplacian / exponential
  double c = 0.0;      // additive constant for polynomial / sigmoid
  double alpha = 1.0;  // slope for sigmoid
  int degree = 3;      // polynomial degree

  static Kind kind_from_string(const std::string& s);
  static std::string to_string(Kind k);
  nlohmann::json to_json() const;
  static KernelSpec from_json(const nlohmann::json& j);
};

double kernel_eval(const KernelSpec& spec, std::span<const double> a, std::span<const double> b);

struct SvmConfig {
  KernelSpec kernel;
  double C = 1.0;
  double tol = 1e-3;
  std::size_t max_passes = 200;  // examine-all sweeps before giving up
  std::uint64_t seed = 0;
};

/// One-vs-rest subproblem after training: support vectors, dual coefficients
/// alpha_i * y_i and bias. `alphas`/`labels_pm` keep the full dual solution
/// for feasibility diagnostics; they are not serialized.
struct BinarySvm {
  Matrix support_points;
  std::vector<double> dual_coef;
  double bias = 0.0;
  bool converged = true;
  std::vector<double> alphas;     // full training-set duals
  std::vector<double> labels_pm;  // +-1 labels of the subproblem

  double decision(std::span<const double> x, const KernelSpec& kernel) const;
};

BinarySvm train_binary_svm(const Matrix& x, const std::vector<double>& y_pm,
                           const SvmConfig& config);

class SvmClassifier final : public Classifier {
 public:
  explicit SvmClassifier(SvmConfig config = {}) : config_(config) {}

  std::string family() const override { return "svm"; }
  void train(const Matrix& x, const std::vector<int>& y) override;
  Matrix predict_proba(const Matrix& x) const override;
  const std::vector<int>& classes() const override { return classes_; }
  nlohmann::json save_state() const override;
  void load_state(const nlohmann::json& state) override;

  /// Per-class OvR decision values, one column per class.
  Matrix decision_scores(const Matrix& x) const;
  const std::vector<BinarySvm>& machines() const { return machines_; }
  const SvmConfig& config() const { return config_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  SvmConfig config_;
  std::vector<int> classes_;
  std::vector<BinarySvm> machines_;
  std::vector<std::string> warnings_;
};

// ---------------------------------------------------------------------------
// One-hidden-layer network, K softmax outputs, full-batch backprop.
// ---------------------------------------------------------------------------

struct MlpConfig {
  std::size_t hidden_units = 16;
  double lr = 0.5;
  std::size_t epochs = 400;
  std::uint64_t seed = 0;
  enum class Activation { tanh_act, logistic } activation = Activation::tanh_act;
};

struct MlpShape {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::size_t outputs = 0;
  MlpConfig::Activation activation = MlpConfig::Activation::tanh_act;

  std::size_t param_count() const {
    return inputs * hidden + hidden + hidden * outputs + outputs;
  }
};

/// Mean cross-entropy over a flat parameter vector
/// [W1 (in*h) | b1 (h) | W2 (h*K) | b2 (K)]. Gradient written to grad_out
/// when non-null. Exposed for finite-difference tests.
double mlp_loss_and_grad(std::span<const double> params, const Matrix& x,
                         const std::vector<std::size_t>& y, const MlpShape& shape,
                         std::vector<double>* grad_out);

Matrix mlp_forward(std::span<const double> params, const Matrix& x, const MlpShape& shape);

class MlpClassifier final : public Classifier {
 public:
  explicit MlpClassifier(MlpConfig config = {}) : config_(config) {}

  std::string family() const override { return "mlp"; }
  void train(const Matrix& x, const std::vector<int>& y) override;
  Matrix predict_proba(const Matrix& x) const override;
  const std::vector<int>& classes() const override { return classes_; }
  nlohmann::json save_state() const override;
  void load_state(const nlohmann::json& state) override;

  const std::vector<double>& params() const { return params_; }
  const std::vector<double>& loss_trace() const { return loss_trace_; }

 private:
  MlpConfig config_;
  MlpShape shape_;
  std::vector<int> classes_;
  std::vector<double> params_;
  std::vector<double> loss_trace_;
};

// ---------------------------------------------------------------------------
// k-nearest neighbours. Distance ties break by ascending training index,
// vote ties by smallest class code.
// ---------------------------------------------------------------------------

class KnnClassifier final : public Classifier {
 public:
  explicit KnnClassifier(std::size_t k = 5) : k_(k) {}

  std::string family() const override { return "knn"; }
  void train(const Matrix& x, const std::vector<int>& y) override;
  Matrix predict_proba(const Matrix& x) const override;
  const std::vector<int>& classes() const override { return classes_; }
  nlohmann::json save_state() const override;
  void load_state(const nlohmann::json& state) override;

  std::size_t k() const { return k_; }

 private:
  std::size_t k_;
  std::vector<int> classes_;
  Matrix train_x_;
  std::vector<int> train_y_;
};

}  // namespace rtdpa
