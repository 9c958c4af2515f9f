#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "oracles.hpp"
#include "rtdpa/errors.hpp"
#include "rtdpa/learners_tree.hpp"

using namespace rtdpa;
using namespace testing_helpers;

TEST_SUITE_BEGIN("trees");

TEST_CASE("impurity formulas") {
  SUBCASE("pure node is 0 under both criteria") {
    const std::vector<double> counts{7, 0, 0};
    CHECK(impurity(counts, SplitCriterion::gini) == 0.0);
    CHECK(impurity(counts, SplitCriterion::entropy) == 0.0);
  }
  SUBCASE("50/50 gives gini 0.5 and entropy 1") {
    const std::vector<double> counts{5, 5};
    CHECK(impurity(counts, SplitCriterion::gini) == doctest::Approx(0.5));
    CHECK(impurity(counts, SplitCriterion::entropy) == doctest::Approx(1.0));
  }
  SUBCASE("counts (2,1,1) give gini 0.625") {
    // 1 - (0.25 + 0.0625 + 0.0625)
    const std::vector<double> counts{2, 1, 1};
    CHECK(impurity(counts, SplitCriterion::gini) == doctest::Approx(0.625).epsilon(1e-12));
  }
}

TEST_CASE("best_split on the canonical 1D example") {
  // [1,2,8,9] labels [A,A,B,B]: threshold 5 = midpoint of 2 and 8, gain =
  // parent gini (children pure).
  const Matrix x = Matrix::from_rows({{1}, {2}, {8}, {9}});
  const std::vector<std::size_t> y{0, 0, 1, 1};
  std::vector<std::size_t> samples{0, 1, 2, 3};
  TreeConfig config;
  Rng rng(1);
  const auto split = best_split(x, y, samples, {}, config, 2, &rng);
  REQUIRE(split.has_value());
  CHECK(split->feature == 0);
  CHECK(split->threshold == doctest::Approx(5.0));
  CHECK(split->gain == doctest::Approx(0.5).epsilon(1e-12));

  SUBCASE("constant features yield no split") {
    const Matrix flat = Matrix::from_rows({{3}, {3}, {3}});
    const std::vector<std::size_t> yy{0, 1, 0};
    std::vector<std::size_t> s{0, 1, 2};
    CHECK(!best_split(flat, yy, s, {}, config, 2, &rng).has_value());
  }
  SUBCASE("pure nodes yield no split") {
    const std::vector<std::size_t> pure{0, 0, 0, 0};
    CHECK(!best_split(x, pure, samples, {}, config, 2, &rng).has_value());
  }
}

TEST_CASE("best_split equals the exhaustive oracle on random instances") {
  Rng rng(4096);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 5 + rng.below(46);   // <= 50
    const std::size_t m = 1 + rng.below(3);    // <= 3
    Matrix x(n, m);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j)
        x(i, j) = static_cast<double>(rng.below(12));  // repeated values likely
      y[i] = static_cast<int>(1 + rng.below(3));
    }
    const auto expected = oracle::exhaustive_best_split(x, y);

    std::vector<int> classes = y;
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    std::vector<std::size_t> ids(n);
    for (std::size_t i = 0; i < n; ++i)
      ids[i] = static_cast<std::size_t>(
          std::lower_bound(classes.begin(), classes.end(), y[i]) - classes.begin());
    std::vector<std::size_t> samples(n);
    for (std::size_t i = 0; i < n; ++i) samples[i] = i;
    TreeConfig config;
    Rng tree_rng(trial);
    const auto got = best_split(x, ids, samples, {}, config, classes.size(), &tree_rng);

    REQUIRE(got.has_value() == expected.has_value());
    if (expected) {
      CHECK(got->feature == expected->feature);
      CHECK(got->threshold == doctest::Approx(expected->threshold).epsilon(1e-12));
      CHECK(std::abs(got->gain - expected->gain) <= 1e-12);
    }
  }
}

TEST_CASE("tree building and prediction") {
  SUBCASE("pure input gives a single leaf answering everywhere") {
    const Matrix x = Matrix::from_rows({{0}, {5}, {9}});
    const auto tree = build_tree(x, {2, 2, 2}, TreeConfig{}, 0);
    CHECK(tree.nodes.size() == 1);
    const Matrix probe = Matrix::from_rows({{-10}, {100}});
    for (int label : tree.predict(probe)) CHECK(label == 2);
  }
  SUBCASE("unlimited depth memorizes distinct points") {
    Rng rng(5150);
    Matrix x(40, 2);
    std::vector<int> y(40);
    for (std::size_t i = 0; i < 40; ++i) {
      x(i, 0) = rng.normal();
      x(i, 1) = rng.normal();
      y[i] = static_cast<int>(1 + rng.below(4));
    }
    const auto tree = build_tree(x, y, TreeConfig{}, 0);
    CHECK(tree.predict(x) == y);
  }
  SUBCASE("depth-1 stump nails the 1D example") {
    const Matrix x = Matrix::from_rows({{1}, {2}, {8}, {9}});
    const std::vector<int> y{1, 1, 2, 2};
    TreeConfig config;
    config.max_depth = 1;
    const auto stump = build_tree(x, y, config, 0);
    CHECK(stump.predict(x) == y);
    CHECK(stump.depth == 1);
  }
  SUBCASE("every finite input reaches a leaf") {
    Rng rng(31337);
    Matrix x(60, 3);
    std::vector<int> y(60);
    for (std::size_t i = 0; i < 60; ++i) {
      for (std::size_t j = 0; j < 3; ++j) x(i, j) = rng.normal();
      y[i] = static_cast<int>(1 + rng.below(3));
    }
    const auto tree = build_tree(x, y, TreeConfig{}, 0);
    const Matrix probe = random_matrix(100, 3, 5);
    const auto pred = tree.predict(probe);  // would throw on fall-through
    CHECK(pred.size() == 100);
    for (int label : pred) CHECK((label >= 1 && label <= 3));
  }
  SUBCASE("leaf distributions sum to the leaf sample count") {
    const Matrix x = Matrix::from_rows({{1}, {2}, {8}, {9}, {8.5}});
    const std::vector<int> y{1, 1, 2, 2, 1};
    const auto tree = build_tree(x, y, TreeConfig{}, 0);
    double leaf_total = 0.0;
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf) continue;
      for (double c : node.counts) leaf_total += c;
    }
    CHECK(leaf_total == doctest::Approx(5.0));
  }
}

TEST_CASE("tree text and graph exports name features") {
  const Matrix x = Matrix::from_rows({{1, 0}, {2, 0}, {8, 0}, {9, 0}});
  const std::vector<int> y{1, 1, 2, 2};
  const auto tree = build_tree(x, y, TreeConfig{}, 0);
  const std::string text = tree.to_text({"amount", "age"});
  CHECK(text.find("amount") != std::string::npos);
  CHECK(text.find("leaf") != std::string::npos);
  const std::string graph = tree.to_graph({"amount", "age"});
  CHECK(graph.find("node 0 split amount") != std::string::npos);
  CHECK(graph.find("edge 0") != std::string::npos);
}

TEST_CASE("majority vote") {
  CHECK(majority_vote({1, 2, 1}) == 1);
  CHECK(majority_vote({3, 3, 3}) == 3);
  CHECK(majority_vote({1, 2}) == 1);  // tie -> smallest code
  CHECK_THROWS(majority_vote({}));
}

TEST_CASE("random forest") {
  Matrix x;
  std::vector<int> y;
  two_blobs(40, 5.0, 1234, x, y);

  SUBCASE("n_trees=1, no bootstrap, full features equals a single tree") {
    ForestConfig config;
    config.n_trees = 1;
    config.bootstrap = false;
    config.sqrt_features = false;
    const ForestModel forest = train_random_forest(x, y, config, 9);
    const auto solo = build_tree(x, y, config.tree, derive_seed(9, std::uint64_t{0}));
    CHECK(forest.trees[0].predict(x) == solo.predict(x));
  }
  SUBCASE("bootstrap draws about 63.2% unique rows") {
    // 1 - 1/e Monte Carlo over seeds, tolerance 0.03
    ForestConfig config;
    config.n_trees = 60;
    const ForestModel forest = train_random_forest(x, y, config, 77);
    double unique_fraction = 0.0;
    for (const auto& oob : forest.oob_indices)
      unique_fraction +=
          1.0 - static_cast<double>(oob.size()) / static_cast<double>(x.rows());
    unique_fraction /= static_cast<double>(forest.trees.size());
    CHECK(std::abs(unique_fraction - 0.632) < 0.03);
  }
  SUBCASE("forest beats a stump on striped data") {
    // class pattern along one axis that a single stump cannot capture
    Matrix sx(90, 2);
    std::vector<int> sy(90);
    Rng rng(2);
    for (std::size_t i = 0; i < 90; ++i) {
      sx(i, 0) = static_cast<double>(i % 9);
      sx(i, 1) = rng.normal();
      sy[i] = (i % 9) < 3 ? 1 : ((i % 9) < 6 ? 2 : 1);
    }
    TreeConfig stump_config;
    stump_config.max_depth = 1;
    const auto stump = build_tree(sx, sy, stump_config, 0);
    std::size_t stump_correct = 0;
    const auto stump_pred = stump.predict(sx);
    for (std::size_t i = 0; i < sy.size(); ++i) stump_correct += stump_pred[i] == sy[i];

    ForestConfig config;
    config.n_trees = 30;
    ForestClassifier forest("random_forest", config, 5);
    forest.train(sx, sy);
    std::size_t forest_correct = 0;
    const auto forest_pred = forest.predict(sx);
    for (std::size_t i = 0; i < sy.size(); ++i) forest_correct += forest_pred[i] == sy[i];
    CHECK(forest_correct >= stump_correct);
  }
  SUBCASE("prediction is invariant to tree order") {
    ForestConfig config;
    config.n_trees = 15;
    ForestClassifier forest("random_forest", config, 3);
    forest.train(x, y);
    const auto before = forest.predict(x);

    nlohmann::json state = forest.save_state();
    std::reverse(state["trees"].begin(), state["trees"].end());
    std::reverse(state["seeds"].begin(), state["seeds"].end());
    ForestClassifier shuffled("random_forest", config, 3);
    shuffled.load_state(state);
    CHECK(shuffled.predict(x) == before);
  }
  SUBCASE("deterministic replay under a fixed seed") {
    ForestConfig config;
    config.n_trees = 10;
    ForestClassifier a("random_forest", config, 11), b("random_forest", config, 11);
    a.train(x, y);
    b.train(x, y);
    CHECK(a.predict(x) == b.predict(x));
    const Matrix pa = a.predict_proba(x), pb = b.predict_proba(x);
    for (std::size_t i = 0; i < pa.rows(); ++i)
      for (std::size_t c = 0; c < pa.cols(); ++c) CHECK(pa(i, c) == pb(i, c));
  }
}

TEST_CASE("extra trees") {
  Matrix x;
  std::vector<int> y;
  two_blobs(30, 6.0, 55, x, y);

  SUBCASE("random thresholds differ across seeds") {
    ForestConfig config;
    config.n_trees = 1;
    const ForestModel a = train_extra_trees(x, y, config, 1);
    const ForestModel b = train_extra_trees(x, y, config, 2);
    bool identical = a.trees[0].nodes.size() == b.trees[0].nodes.size();
    if (identical) {
      for (std::size_t i = 0; i < a.trees[0].nodes.size(); ++i) {
        const auto& na = a.trees[0].nodes[i];
        const auto& nb = b.trees[0].nodes[i];
        if (na.is_leaf != nb.is_leaf || (!na.is_leaf && na.threshold != nb.threshold))
          identical = false;
      }
    }
    CHECK(!identical);
  }
  SUBCASE("pure clusters are fit perfectly") {
    ForestConfig config;
    config.n_trees = 20;
    ForestClassifier model("extra_trees", config, 4);
    model.train(x, y);
    CHECK(model.predict(x) == y);
  }
  SUBCASE("no bootstrap by default") {
    ForestConfig config;
    config.n_trees = 3;
    const ForestModel model = train_extra_trees(x, y, config, 8);
    CHECK(!model.bootstrap);
    for (const auto& oob : model.oob_indices) CHECK(oob.empty());
  }
  SUBCASE("fixed seed replays deterministically") {
    ForestConfig config;
    config.n_trees = 1;
    const ForestModel a = train_extra_trees(x, y, config, 21);
    const ForestModel b = train_extra_trees(x, y, config, 21);
    REQUIRE(a.trees[0].nodes.size() == b.trees[0].nodes.size());
    for (std::size_t i = 0; i < a.trees[0].nodes.size(); ++i)
      if (!a.trees[0].nodes[i].is_leaf)
        CHECK(a.trees[0].nodes[i].threshold == b.trees[0].nodes[i].threshold);
  }
}

TEST_SUITE_END();
