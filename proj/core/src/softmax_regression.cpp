#include <algorithm>
#include <cmath>

#include "rtdpa/errors.hpp"
#include "rtdpa/learners_core.hpp"

namespace rtdpa {

Matrix softmax_scores(const Matrix& theta, const Matrix& x) {
  const std::size_t n = x.rows(), m = x.cols(), k = theta.rows();
  if (theta.cols() != m + 1)
    throw InputError("softmax: model expects " + std::to_string(theta.cols() - 1) +
                     " features, got " + std::to_string(m));
  Matrix p(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -1e300;
    for (std::size_t c = 0; c < k; ++c) {
      double z = theta(c, m);  // bias
      for (std::size_t j = 0; j < m; ++j) z += theta(c, j) * x(i, j);
      p(i, c) = z;
      mx = std::max(mx, z);
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      p(i, c) = std::exp(p(i, c) - mx);
      sum += p(i, c);
    }
    for (std::size_t c = 0; c < k; ++c) p(i, c) /= sum;
  }
  return p;
}

double softmax_loss_and_grad(const Matrix& theta, const Matrix& x,
                             const std::vector<std::size_t>& y, double l2, Matrix* grad) {
  const std::size_t n = x.rows(), m = x.cols(), k = theta.rows();
  Matrix p = softmax_scores(theta, x);

  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    loss -= std::log(std::max(p(i, y[i]), 1e-300));
  loss /= static_cast<double>(n);
  // L2 penalty on weights, not on the bias column.
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < m; ++j) loss += 0.5 * l2 * theta(c, j) * theta(c, j);

  if (grad) {
    *grad = Matrix(k, m + 1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) {
        const double diff = p(i, c) - (y[i] == c ? 1.0 : 0.0);
        for (std::size_t j = 0; j < m; ++j) (*grad)(c, j) += diff * x(i, j);
        (*grad)(c, m) += diff;
      }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t j = 0; j < m; ++j)
        (*grad)(c, j) = (*grad)(c, j) * inv_n + l2 * theta(c, j);
      (*grad)(c, m) *= inv_n;
    }
  }
  return loss;
}

void SoftmaxRegression::train(const Matrix& x, const std::vector<int>& y) {
  classes_ = sorted_classes(y);
  const std::size_t k = classes_.size();
  if (x.rows() < k) throw InputError("softmax: fewer samples than classes");
  if (!x.all_finite()) throw InputError("softmax: non-finite feature values");
  const auto ids = class_ids(y, classes_);

  theta_ = Matrix(k, x.cols() + 1);
  loss_trace_.clear();
  loss_trace_.reserve(config_.epochs);
  Matrix grad;
  for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
    const double loss = softmax_loss_and_grad(theta_, x, ids, config_.l2, &grad);
    if (!std::isfinite(loss))
      throw InputError("softmax: loss diverged at epoch " + std::to_string(epoch) +
                       " (learning rate too large)");
    loss_trace_.push_back(loss);
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t j = 0; j < theta_.cols(); ++j)
        theta_(c, j) -= config_.lr * grad(c, j);
  }
}

Matrix SoftmaxRegression::predict_proba(const Matrix& x) const {
  return softmax_scores(theta_, x);
}

nlohmann::json SoftmaxRegression::save_state() const {
  return {{"classes", classes_},
          {"rows", theta_.rows()},
          {"cols", theta_.cols()},
          {"theta", theta_.storage()},
          {"lr", config_.lr},
          {"epochs", config_.epochs},
          {"l2", config_.l2}};
}

void SoftmaxRegression::load_state(const nlohmann::json& state) {
  classes_ = state.at("classes").get<std::vector<int>>();
  config_.lr = state.at("lr").get<double>();
  config_.epochs = state.at("epochs").get<std::size_t>();
  config_.l2 = state.at("l2").get<double>();
  const auto rows = state.at("rows").get<std::size_t>();
  const auto cols = state.at("cols").get<std::size_t>();
  const auto flat = state.at("theta").get<std::vector<double>>();
  theta_ = Matrix(rows, cols);
  for (std::size_t i = 0; i < flat.size(); ++i) theta_(i / cols, i % cols) = flat[i];
}

}  // namespace rtdpa
