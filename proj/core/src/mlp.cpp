#include <algorithm>
#include <cmath>

#include "rtdpa/errors.hpp"
#include "rtdpa/learners_core.hpp"
#include "rtdpa/rng.hpp"

namespace rtdpa {

namespace {

inline double activate(double z, MlpConfig::Activation a) {
  return a == MlpConfig::Activation::tanh_act ? std::tanh(z) : 1.0 / (1.0 + std::exp(-z));
}

inline double activate_grad(double h, MlpConfig::Activation a) {
  // Derivative expressed through the activation value itself.
  return a == MlpConfig::Activation::tanh_act ? 1.0 - h * h : h * (1.0 - h);
}

}  // namespace

Matrix mlp_forward(std::span<const double> params, const Matrix& x, const MlpShape& shape) {
  const std::size_t n = x.rows();
  const double* w1 = params.data();
  const double* b1 = w1 + shape.inputs * shape.hidden;
  const double* w2 = b1 + shape.hidden;
  const double* b2 = w2 + shape.hidden * shape.outputs;

  Matrix probs(n, shape.outputs);
  std::vector<double> hidden(shape.hidden);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t h = 0; h < shape.hidden; ++h) {
      double z = b1[h];
      for (std::size_t j = 0; j < shape.inputs; ++j)
        z += w1[j * shape.hidden + h] * x(i, j);
      hidden[h] = activate(z, shape.activation);
    }
    double mx = -1e300;
    for (std::size_t o = 0; o < shape.outputs; ++o) {
      double z = b2[o];
      for (std::size_t h = 0; h < shape.hidden; ++h)
        z += w2[h * shape.outputs + o] * hidden[h];
      probs(i, o) = z;
      mx = std::max(mx, z);
    }
    double sum = 0.0;
    for (std::size_t o = 0; o < shape.outputs; ++o) {
      probs(i, o) = std::exp(probs(i, o) - mx);
      sum += probs(i, o);
    }
    for (std::size_t o = 0; o < shape.outputs; ++o) probs(i, o) /= sum;
  }
  return probs;
}

double mlp_loss_and_grad(std::span<const double> params, const Matrix& x,
                         const std::vector<std::size_t>& y, const MlpShape& shape,
                         std::vector<double>* grad_out) {
  const std::size_t n = x.rows();
  const double* w1 = params.data();
  const double* b1 = w1 + shape.inputs * shape.hidden;
  const double* w2 = b1 + shape.hidden;
  const double* b2 = w2 + shape.hidden * shape.outputs;

  double* g1 = nullptr;
  double* gb1 = nullptr;
  double* g2 = nullptr;
  double* gb2 = nullptr;
  if (grad_out) {
    grad_out->assign(shape.param_count(), 0.0);
    g1 = grad_out->data();
    gb1 = g1 + shape.inputs * shape.hidden;
    g2 = gb1 + shape.hidden;
    gb2 = g2 + shape.hidden * shape.outputs;
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  std::vector<double> hidden(shape.hidden), probs(shape.outputs), dh(shape.hidden);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t h = 0; h < shape.hidden; ++h) {
      double z = b1[h];
      for (std::size_t j = 0; j < shape.inputs; ++j)
        z += w1[j * shape.hidden + h] * x(i, j);
      hidden[h] = activate(z, shape.activation);
    }
    double mx = -1e300;
    for (std::size_t o = 0; o < shape.outputs; ++o) {
      double z = b2[o];
      for (std::size_t h = 0; h < shape.hidden; ++h)
        z += w2[h * shape.outputs + o] * hidden[h];
      probs[o] = z;
      mx = std::max(mx, z);
    }
    double sum = 0.0;
    for (std::size_t o = 0; o < shape.outputs; ++o) {
      probs[o] = std::exp(probs[o] - mx);
      sum += probs[o];
    }
    for (std::size_t o = 0; o < shape.outputs; ++o) probs[o] /= sum;
    loss -= std::log(std::max(probs[y[i]], 1e-300)) * inv_n;

    if (!grad_out) continue;
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t o = 0; o < shape.outputs; ++o) {
      const double delta = (probs[o] - (y[i] == o ? 1.0 : 0.0)) * inv_n;
      gb2[o] += delta;
      for (std::size_t h = 0; h < shape.hidden; ++h) {
        g2[h * shape.outputs + o] += delta * hidden[h];
        dh[h] += delta * w2[h * shape.outputs + o];
      }
    }
    for (std::size_t h = 0; h < shape.hidden; ++h) {
      const double dz = dh[h] * activate_grad(hidden[h], shape.activation);
      gb1[h] += dz;
      for (std::size_t j = 0; j < shape.inputs; ++j)
        g1[j * shape.hidden + h] += dz * x(i, j);
    }
  }
  return loss;
}

void MlpClassifier::train(const Matrix& x, const std::vector<int>& y) {
  if (config_.hidden_units < 1) throw InputError("mlp: hidden_units must be >= 1");
  classes_ = sorted_classes(y);
  const auto ids = class_ids(y, classes_);
  shape_ = {x.cols(), config_.hidden_units, classes_.size(), config_.activation};

  Rng rng(derive_seed(config_.seed, "mlp-init"));
  params_.resize(shape_.param_count());
  for (double& p : params_) p = rng.uniform(-0.5, 0.5);

  loss_trace_.clear();
  loss_trace_.reserve(config_.epochs);
  std::vector<double> grad;
  for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
    const double loss = mlp_loss_and_grad(params_, x, ids, shape_, &grad);
    if (!std::isfinite(loss))
      throw InputError("mlp: loss diverged at epoch " + std::to_string(epoch));
    loss_trace_.push_back(loss);
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i] -= config_.lr * grad[i];
  }
}

Matrix MlpClassifier::predict_proba(const Matrix& x) const {
  if (x.cols() != shape_.inputs) throw InputError("mlp: feature count mismatch");
  return mlp_forward(params_, x, shape_);
}

nlohmann::json MlpClassifier::save_state() const {
  return {{"classes", classes_},
          {"inputs", shape_.inputs},
          {"hidden", shape_.hidden},
          {"outputs", shape_.outputs},
          {"activation",
           shape_.activation == MlpConfig::Activation::tanh_act ? "tanh" : "logistic"},
          {"params", params_},
          {"lr", config_.lr},
          {"epochs", config_.epochs},
          {"seed", config_.seed}};
}

void MlpClassifier::load_state(const nlohmann::json& state) {
  classes_ = state.at("classes").get<std::vector<int>>();
  shape_.inputs = state.at("inputs").get<std::size_t>();
  shape_.hidden = state.at("hidden").get<std::size_t>();
  shape_.outputs = state.at("outputs").get<std::size_t>();
  shape_.activation = state.at("activation").get<std::string>() == "tanh"
                          ? MlpConfig::Activation::tanh_act
                          : MlpConfig::Activation::logistic;
  params_ = state.at("params").get<std::vector<double>>();
  config_.lr = state.at("lr").get<double>();
  config_.epochs = state.at("epochs").get<std::size_t>();
  config_.seed = state.at("seed").get<std::uint64_t>();
  config_.hidden_units = shape_.hidden;
  config_.activation = shape_.activation;
}

}  // namespace rtdpa
