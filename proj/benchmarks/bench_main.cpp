#include <benchmark/benchmark.h>

#include "rtdpa/augment.hpp"
#include "rtdpa/learners_core.hpp"
#include "rtdpa/learners_tree.hpp"
#include "rtdpa/pca.hpp"
#include "rtdpa/rng.hpp"

namespace {

using namespace rtdpa;

// Imbalanced 4-class blobs along one axis, the shape the pipeline sees.
void blob_data(std::size_t n, std::size_t m, Matrix& x, std::vector<int>& y,
               std::uint64_t seed = 1) {
  Rng rng(seed);
  x = Matrix(n, m);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = rng.below(100) < 70 ? 0 : 1 + rng.below(3);
    for (std::size_t j = 0; j < m; ++j) x(i, j) = rng.normal();
    x(i, 0) += static_cast<double>(cls) * 3.0;
    y[i] = static_cast<int>(cls + 1);
  }
}

void bm_decision_tree_train(benchmark::State& state) {
  Matrix x;
  std::vector<int> y;
  blob_data(static_cast<std::size_t>(state.range(0)), 8, x, y);
  TreeConfig config;
  config.max_depth = 8;
  for (auto _ : state) {
    auto tree = build_tree(x, y, config, 7);
    benchmark::DoNotOptimize(tree.nodes.size());
  }
}
BENCHMARK(bm_decision_tree_train)->Arg(1000)->Arg(4000)->Arg(16000);

void bm_random_forest_train(benchmark::State& state) {
  Matrix x;
  std::vector<int> y;
  blob_data(2000, 8, x, y);
  ForestConfig config;
  config.n_trees = static_cast<std::size_t>(state.range(0));
  config.tree.max_depth = 10;
  for (auto _ : state) {
    auto forest = train_random_forest(x, y, config, 7);
    benchmark::DoNotOptimize(forest.trees.size());
  }
}
BENCHMARK(bm_random_forest_train)->Arg(10)->Arg(30);

void bm_gradient_boosting_train(benchmark::State& state) {
  Matrix x;
  std::vector<int> y;
  blob_data(2000, 8, x, y);
  GradientBoostingConfig config;
  config.n_rounds = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    GradientBoostingClassifier model(config);
    model.train(x, y);
    benchmark::DoNotOptimize(model.stages().size());
  }
}
BENCHMARK(bm_gradient_boosting_train)->Arg(10)->Arg(30);

void bm_smote(benchmark::State& state) {
  Matrix x;
  std::vector<int> y;
  blob_data(static_cast<std::size_t>(state.range(0)), 8, x, y);
  AugmentSpec spec;
  spec.variant = AugmentSpec::Variant::smote;
  for (auto _ : state) {
    auto r = smote(x, y, spec);
    benchmark::DoNotOptimize(r.x.rows());
  }
}
BENCHMARK(bm_smote)->Arg(1000)->Arg(4000);

void bm_smote_enn(benchmark::State& state) {
  Matrix x;
  std::vector<int> y;
  blob_data(static_cast<std::size_t>(state.range(0)), 6, x, y);
  AugmentSpec spec;
  spec.variant = AugmentSpec::Variant::smote_enn;
  for (auto _ : state) {
    auto r = smote_enn(x, y, spec);
    benchmark::DoNotOptimize(r.x.rows());
  }
}
BENCHMARK(bm_smote_enn)->Arg(500)->Arg(1000);

void bm_pca_fit(benchmark::State& state) {
  Matrix x;
  std::vector<int> y;
  blob_data(2000, static_cast<std::size_t>(state.range(0)), x, y);
  for (auto _ : state) {
    auto model = fit_pca(x);
    benchmark::DoNotOptimize(model.eigenvalues.size());
  }
}
BENCHMARK(bm_pca_fit)->Arg(8)->Arg(32)->Arg(64);

void bm_svm_rbf_train(benchmark::State& state) {
  Matrix x;
  std::vector<int> y;
  blob_data(static_cast<std::size_t>(state.range(0)), 6, x, y);
  SvmConfig config;
  config.kernel.kind = KernelSpec::Kind::rbf;
  config.kernel.sigma = 1.2;
  config.C = 10.0;
  config.max_passes = 20;
  for (auto _ : state) {
    SvmClassifier model(config);
    model.train(x, y);
    benchmark::DoNotOptimize(model.machines().size());
  }
}
BENCHMARK(bm_svm_rbf_train)->Arg(500)->Arg(1500);

void bm_knn_predict(benchmark::State& state) {
  Matrix x;
  std::vector<int> y;
  blob_data(static_cast<std::size_t>(state.range(0)), 8, x, y);
  KnnClassifier model(5);
  model.train(x, y);
  Matrix probe;
  std::vector<int> ignore;
  blob_data(200, 8, probe, ignore, 2);
  for (auto _ : state) {
    auto pred = model.predict(probe);
    benchmark::DoNotOptimize(pred.size());
  }
}
BENCHMARK(bm_knn_predict)->Arg(2000)->Arg(8000);

}  // namespace

BENCHMARK_MAIN();
