#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtdpa/classifier.hpp"
#include "rtdpa/matrix.hpp"
#include "rtdpa/rng.hpp"

namespace rtdpa {

// ---------------------------------------------------------------------------
// CART classification tree.
// ---------------------------------------------------------------------------

enum class SplitCriterion { gini, entropy };
enum class SplitMode { best, random };

struct TreeConfig {
  SplitCriterion criterion = SplitCriterion::gini;
  std::size_t max_depth = 64;
  std::size_t min_samples_split = 2;
  double feature_subsample = 1.0;  // fraction of features considered per node
  SplitMode split_mode = SplitMode::best;
};

/// gini = 1 - sum p^2; entropy = -sum p log2 p (0 log 0 = 0). counts may be
/// weighted.
double impurity(std::span<const double> class_counts, SplitCriterion criterion);

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;  // impurity decrease, weighted by child shares
};

/// Best axis-aligned split over the node samples. Candidate thresholds are
/// midpoints of adjacent distinct sorted values (best mode) or one uniform
/// draw per feature (random mode). Ties break on (feature, threshold); a
/// gain <= 1e-12 yields nullopt. `y` holds class ids 0..n_classes-1.
std::optional<SplitCandidate> best_split(const Matrix& x, const std::vector<std::size_t>& y,
                                         std::span<const std::size_t> samples,
                                         std::span<const double> weights,
                                         const TreeConfig& config, std::size_t n_classes,
                                         Rng* rng);

struct TreeNode {
  bool is_leaf = true;
  std::size_t feature = 0;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<double> counts;  // leaf class distribution (sums to node weight)
  std::size_t predicted = 0;   // leaf class id
};

class DecisionTreeModel {
 public:
  TreeConfig config;
  std::vector<int> classes;
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t depth = 0;

  std::size_t leaf_for(std::span<const double> x) const;
  std::vector<int> predict(const Matrix& x) const;
  Matrix predict_proba(const Matrix& x) const;  // leaf distributions, normalized

  std::string to_text(const std::vector<std::string>& feature_names = {}) const;
  std::string to_graph(const std::vector<std::string>& feature_names = {}) const;

  nlohmann::json to_json() const;
  static DecisionTreeModel from_json(const nlohmann::json& j);
};

/// Recursive partitioning until depth/min-samples/purity/no-gain stops.
/// Optional per-sample weights drive boosted fits; empty means uniform.
DecisionTreeModel build_tree(const Matrix& x, const std::vector<int>& y,
                             const TreeConfig& config, std::uint64_t seed,
                             std::span<const double> weights = {});

class DecisionTreeClassifier final : public Classifier {
 public:
  explicit DecisionTreeClassifier(TreeConfig config = {}, std::uint64_t seed = 0)
      : config_(config), seed_(seed) {}

  std::string family() const override { return "decision_tree"; }
  void train(const Matrix& x, const std::vector<int>& y) override;
  Matrix predict_proba(const Matrix& x) const override;
  const std::vector<int>& classes() const override { return model_.classes; }
  nlohmann::json save_state() const override;
  void load_state(const nlohmann::json& state) override;

  const DecisionTreeModel& model() const { return model_; }

 private:
  TreeConfig config_;
  std::uint64_t seed_;
  DecisionTreeModel model_;
};

// ---------------------------------------------------------------------------
// Bagged ensembles: random forest and extra trees.
// ---------------------------------------------------------------------------

struct ForestConfig {
  std::size_t n_trees = 100;
  TreeConfig tree;
  // nullopt picks the family default: bootstrap for random forest, the full
  // sample for extra trees.
  std::optional<bool> bootstrap;
  bool sqrt_features = true;  // per-node feature subsample = sqrt(m)/m
};

struct ForestModel {
  std::vector<DecisionTreeModel> trees;
  std::vector<int> classes;
  bool bootstrap = true;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<std::size_t>> oob_indices;  // per tree, not serialized
};

/// Most frequent label; ties resolve to the smallest class code.
int majority_vote(const std::vector<int>& predictions);

ForestModel train_random_forest(const Matrix& x, const std::vector<int>& y,
                                const ForestConfig& config, std::uint64_t seed);
/// Extra trees: full sample (no bootstrap by default), all features,
/// uniform-random thresholds.
ForestModel train_extra_trees(const Matrix& x, const std::vector<int>& y,
                              const ForestConfig& config, std::uint64_t seed);

class ForestClassifier final : public Classifier {
 public:
  ForestClassifier(std::string family, ForestConfig config, std::uint64_t seed)
      : family_(std::move(family)), config_(config), seed_(seed) {}

  std::string family() const override { return family_; }
  void train(const Matrix& x, const std::vector<int>& y) override;
  Matrix predict_proba(const Matrix& x) const override;  // vote shares
  std::vector<int> predict(const Matrix& x) const override;  // majority vote
  const std::vector<int>& classes() const override { return model_.classes; }
  nlohmann::json save_state() const override;
  void load_state(const nlohmann::json& state) override;

  const ForestModel& model() const { return model_; }

 private:
  std::string family_;  // "random_forest" or "extra_trees"
  ForestConfig config_;
  std::uint64_t seed_;
  ForestModel model_;
};

// ---------------------------------------------------------------------------
// AdaBoost (SAMME).
// ---------------------------------------------------------------------------

struct AdaBoostConfig {
  std::size_t n_rounds = 50;
  std::size_t stump_depth = 1;
};

/// ln((1-eps)/eps) + ln(K-1), the SAMME stage weight.
double samme_alpha(double eps, std::size_t n_classes);

class AdaBoostClassifier final : public Classifier {
 public:
  explicit AdaBoostClassifier(AdaBoostConfig config = {}) : config_(config) {}

  std::string family() const override { return "adaboost"; }
  void train(const Matrix& x, const std::vector<int>& y) override;
  Matrix predict_proba(const Matrix& x) const override;  // alpha-vote shares
  const std::vector<int>& classes() const override { return classes_; }
  nlohmann::json save_state() const override;
  void load_state(const nlohmann::json& state) override;

  const std::vector<DecisionTreeModel>& learners() const { return learners_; }
  const std::vector<double>& alphas() const { return alphas_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  /// Sample-weight vector after each round, recorded for invariant tests.
  const std::vector<double>& weight_sums() const { return weight_sums_; }

 private:
  AdaBoostConfig config_;
  std::vector<int> classes_;
  std::vector<DecisionTreeModel> learners_;
  std::vector<double> alphas_;
  std::vector<double> weight_sums_;
  std::vector<std::string> warnings_;
};

// ---------------------------------------------------------------------------
// Gradient boosting on multinomial deviance; level-wise or leaf-wise trees.
// ---------------------------------------------------------------------------

enum class TreeGrowth { level_wise, leaf_wise };

struct GradientBoostingConfig {
  std::size_t n_rounds = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;       // level-wise depth limit
  std::size_t max_leaves = 8;      // leaf-wise leaf budget
  TreeGrowth growth = TreeGrowth::level_wise;
  std::size_t min_samples_split = 2;
};

/// Regression tree fit to (residual, hessian) pairs with Newton leaf values.
struct RegressionTree {
  struct Node {
    bool is_leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  double predict_one(std::span<const double> x) const;
  nlohmann::json to_json() const;
  static RegressionTree from_json(const nlohmann::json& j);
};

RegressionTree fit_regression_tree(const Matrix& x, std::span<const double> residual,
                                   std::span<const double> hessian,
                                   const GradientBoostingConfig& config,
                                   double leaf_scale, std::size_t* floored_leaves = nullptr);

class GradientBoostingClassifier final : public Classifier {
 public:
  explicit GradientBoostingClassifier(GradientBoostingConfig config = {})
      : config_(config) {}

  std::string family() const override { return "gradient_boosting"; }
  void train(const Matrix& x, const std::vector<int>& y) override;
  Matrix predict_proba(const Matrix& x) const override;
  const std::vector<int>& classes() const override { return classes_; }
  nlohmann::json save_state() const override;
  void load_state(const nlohmann::json& state) override;

  /// Raw additive scores: init log-odds + lr * stage sums.
  Matrix raw_scores(const Matrix& x) const;
  /// Mean multinomial deviance after init and after each round.
  const std::vector<double>& deviance_trace() const { return deviance_trace_; }
  const std::vector<RegressionTree>& stages() const { return stages_; }
  const GradientBoostingConfig& config() const { return config_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  GradientBoostingConfig config_;
  std::vector<int> classes_;
  std::vector<double> init_log_odds_;
  std::vector<RegressionTree> stages_;  // round-major, class-minor: rounds * K
  std::vector<double> deviance_trace_;
  std::vector<std::string> warnings_;
};

}  // namespace rtdpa
