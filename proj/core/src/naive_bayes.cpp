#include <algorithm>
#include <cmath>

#include "rtdpa/errors.hpp"
#include "rtdpa/learners_core.hpp"

namespace rtdpa {

void GaussianNb::train(const Matrix& x, const std::vector<int>& y) {
  classes_ = sorted_classes(y);
  const std::size_t k = classes_.size(), m = x.cols(), n = x.rows();
  const auto ids = class_ids(y, classes_);

  std::vector<double> count(k, 0.0);
  means_ = Matrix(k, m);
  variances_ = Matrix(k, m);
  for (std::size_t i = 0; i < n; ++i) {
    count[ids[i]] += 1.0;
    for (std::size_t j = 0; j < m; ++j) means_(ids[i], j) += x(i, j);
  }
  priors_.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    priors_[c] = count[c] / static_cast<double>(n);
    for (std::size_t j = 0; j < m; ++j) means_(c, j) /= count[c];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double d = x(i, j) - means_(ids[i], j);
      variances_(ids[i], j) += d * d;
    }

  // Floor relative to the largest global feature variance; one-hot blocks
  // routinely produce zero-variance class/feature cells.
  double max_var = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x(i, j) - mean;
      var += d * d;
    }
    max_var = std::max(max_var, var / static_cast<double>(n));
  }
  const double floor = std::max(var_floor_rel_ * max_var, 1e-12);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < m; ++j)
      variances_(c, j) = std::max(variances_(c, j) / count[c], floor);
}

double GaussianNb::log_posterior(std::span<const double> x, std::size_t class_ix) const {
  static constexpr double log_2pi = 1.8378770664093454835606594728112;
  double lp = std::log(priors_[class_ix]);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double var = variances_(class_ix, j);
    const double d = x[j] - means_(class_ix, j);
    lp -= 0.5 * (log_2pi + std::log(var) + d * d / var);
  }
  return lp;
}

Matrix GaussianNb::predict_proba(const Matrix& x) const {
  if (x.cols() != means_.cols())
    throw InputError("gaussian_nb: feature count mismatch");
  const std::size_t k = classes_.size();
  Matrix p(x.rows(), k);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double mx = -1e300;
    for (std::size_t c = 0; c < k; ++c) {
      p(i, c) = log_posterior(x.row(i), c);
      mx = std::max(mx, p(i, c));
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

nlohmann::json GaussianNb::save_state() const {
  return {{"classes", classes_},
          {"priors", priors_},
          {"n_features", means_.cols()},
          {"means", means_.storage()},
          {"variances", variances_.storage()},
          {"var_floor_rel", var_floor_rel_}};
}

void GaussianNb::load_state(const nlohmann::json& state) {
  classes_ = state.at("classes").get<std::vector<int>>();
  priors_ = state.at("priors").get<std::vector<double>>();
  var_floor_rel_ = state.at("var_floor_rel").get<double>();
  const auto m = state.at("n_features").get<std::size_t>();
  const auto mean_flat = state.at("means").get<std::vector<double>>();
  const auto var_flat = state.at("variances").get<std::vector<double>>();
  means_ = Matrix(classes_.size(), m);
  variances_ = Matrix(classes_.size(), m);
  for (std::size_t i = 0; i < mean_flat.size(); ++i) {
    means_(i / m, i % m) = mean_flat[i];
    variances_(i / m, i % m) = var_flat[i];
  }
}

}  // namespace rtdpa
