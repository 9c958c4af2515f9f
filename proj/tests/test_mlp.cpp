#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "rtdpa/errors.hpp"
#include "rtdpa/learners_core.hpp"

using namespace rtdpa;
using namespace testing_helpers;

TEST_SUITE_BEGIN("mlp");

TEST_CASE("all-zero parameters output the uniform distribution") {
  const MlpShape shape{3, 5, 4, MlpConfig::Activation::tanh_act};
  const std::vector<double> params(shape.param_count(), 0.0);
  const Matrix x = random_matrix(6, 3, 2);
  const Matrix p = mlp_forward(params, x, shape);
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t c = 0; c < 4; ++c) CHECK(p(i, c) == doctest::Approx(0.25));
}

TEST_CASE("backprop gradient matches central finite differences") {
  for (auto activation : {MlpConfig::Activation::tanh_act, MlpConfig::Activation::logistic}) {
    Rng rng(17 + static_cast<int>(activation));
    const MlpShape shape{3, 4, 2, activation};
    const Matrix x = random_matrix(6, 3, 88 + static_cast<int>(activation));
    std::vector<std::size_t> y(6);
    for (auto& v : y) v = rng.below(2);
    std::vector<double> params(shape.param_count());
    for (auto& p : params) p = rng.uniform(-0.5, 0.5);

    std::vector<double> analytic;
    mlp_loss_and_grad(params, x, y, shape, &analytic);
    auto loss_at = [&](const std::vector<double>& q) {
      return mlp_loss_and_grad(q, x, y, shape, nullptr);
    };
    const auto numeric = oracle::central_differences(loss_at, params, 1e-5);
    CHECK(oracle::max_relative_error(analytic, numeric) < 1e-4);
  }
}

TEST_CASE("xor becomes learnable with 4 tanh hidden units") {
  const Matrix x = xor_points();
  const std::vector<int> y = xor_labels();
  bool solved = false;
  for (std::uint64_t seed = 0; seed < 5 && !solved; ++seed) {
    MlpConfig config;
    config.hidden_units = 4;
    config.lr = 0.8;
    config.epochs = 3000;
    config.seed = seed;
    MlpClassifier model(config);
    model.train(x, y);
    solved = model.predict(x) == y;
  }
  CHECK(solved);
}

TEST_CASE("training is deterministic for a fixed seed") {
  Matrix x;
  std::vector<int> y;
  two_blobs(20, 4.0, 5, x, y);
  MlpConfig config;
  config.hidden_units = 6;
  config.epochs = 50;
  config.seed = 12;
  MlpClassifier a(config), b(config);
  a.train(x, y);
  b.train(x, y);
  CHECK(a.params() == b.params());
}

TEST_CASE("probability rows sum to one and state round-trips") {
  Matrix x;
  std::vector<int> y;
  two_blobs(15, 4.0, 6, x, y);
  MlpConfig config;
  config.hidden_units = 5;
  config.epochs = 100;
  MlpClassifier model(config);
  model.train(x, y);

  const Matrix p = model.predict_proba(x);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < p.cols(); ++c) s += p(i, c);
    CHECK(std::abs(s - 1.0) < 1e-9);
  }

  MlpClassifier restored;
  restored.load_state(model.save_state());
  const Matrix p2 = restored.predict_proba(x);
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t c = 0; c < p.cols(); ++c) CHECK(p(i, c) == p2(i, c));
}

TEST_CASE("loss trace is recorded and the final loss beats the initial") {
  Matrix x;
  std::vector<int> y;
  two_blobs(25, 5.0, 91, x, y);
  MlpConfig config;
  config.hidden_units = 8;
  config.epochs = 200;
  MlpClassifier model(config);
  model.train(x, y);
  const auto& trace = model.loss_trace();
  REQUIRE(trace.size() == config.epochs);
  CHECK(trace.back() < trace.front());
}

TEST_SUITE_END();
