#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "rtdpa/errors.hpp"
#include "rtdpa/learners_tree.hpp"

namespace rtdpa {

double samme_alpha(double eps, std::size_t n_classes) {
  const double e = std::clamp(eps, 1e-10, 1.0 - 1e-10);
  return std::log((1.0 - e) / e) + std::log(static_cast<double>(n_classes) - 1.0);
}

void AdaBoostClassifier::train(const Matrix& x, const std::vector<int>& y) {
  classes_ = sorted_classes(y);
  const std::size_t k = classes_.size();
  if (k < 2) throw InputError("adaboost: needs at least 2 classes");
  const std::size_t n = x.rows();

  learners_.clear();
  alphas_.clear();
  warnings_.clear();
  weight_sums_.clear();

  TreeConfig stump;
  stump.max_depth = config_.stump_depth;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  const double chance = 1.0 - 1.0 / static_cast<double>(k);

  for (std::size_t round = 0; round < config_.n_rounds; ++round) {
    DecisionTreeModel learner = build_tree(x, y, stump, round, w);
    const auto pred = learner.predict(x);
    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (pred[i] != y[i]) eps += w[i];

    if (eps >= chance) {
      // No better than chance: keep a degenerate single-learner model only
      // when nothing has been accepted yet.
      if (learners_.empty()) {
        learners_.push_back(std::move(learner));
        alphas_.push_back(1.0);
        weight_sums_.push_back(std::accumulate(w.begin(), w.end(), 0.0));
        warnings_.push_back("adaboost: first learner no better than chance (eps=" +
                            std::to_string(eps) + "); single-learner model");
      }
      break;
    }

    const double alpha = samme_alpha(eps, k);
    learners_.push_back(std::move(learner));
    alphas_.push_back(alpha);

    if (eps <= 0.0) {
      weight_sums_.push_back(std::accumulate(w.begin(), w.end(), 0.0));
      break;  // perfect learner, nothing left to reweight
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pred[i] != y[i]) w[i] *= std::exp(alpha);
      total += w[i];
    }
    for (double& wi : w) wi /= total;
    weight_sums_.push_back(std::accumulate(w.begin(), w.end(), 0.0));
  }
}

Matrix AdaBoostClassifier::predict_proba(const Matrix& x) const {
  if (learners_.empty()) throw InputError("adaboost: model not trained");
  std::map<int, std::size_t> class_ix;
  for (std::size_t c = 0; c < classes_.size(); ++c) class_ix[classes_[c]] = c;

  Matrix score(x.rows(), classes_.size());
  double alpha_total = 0.0;
  for (std::size_t t = 0; t < learners_.size(); ++t) {
    const auto pred = learners_[t].predict(x);
    for (std::size_t i = 0; i < pred.size(); ++i)
      score(i, class_ix.at(pred[i])) += alphas_[t];
    alpha_total += alphas_[t];
  }
  for (std::size_t i = 0; i < score.rows(); ++i) {
    if (alpha_total > 0) {
      for (std::size_t c = 0; c < score.cols(); ++c) score(i, c) /= alpha_total;
    } else {
      for (std::size_t c = 0; c < score.cols(); ++c)
        score(i, c) = 1.0 / static_cast<double>(score.cols());
    }
  }
  return score;
}

nlohmann::json AdaBoostClassifier::save_state() const {
  nlohmann::json jl = nlohmann::json::array();
  for (const auto& l : learners_) jl.push_back(l.to_json());
  return {{"classes", classes_},
          {"learners", jl},
          {"alphas", alphas_},
          {"n_rounds", config_.n_rounds},
          {"stump_depth", config_.stump_depth}};
}

void AdaBoostClassifier::load_state(const nlohmann::json& state) {
  classes_ = state.at("classes").get<std::vector<int>>();
  alphas_ = state.at("alphas").get<std::vector<double>>();
  config_.n_rounds = state.at("n_rounds").get<std::size_t>();
  config_.stump_depth = state.at("stump_depth").get<std::size_t>();
  learners_.clear();
  for (const auto& jl : state.at("learners"))
    learners_.push_back(DecisionTreeModel::from_json(jl));
}

// ---------------------------------------------------------------------------
// Regression tree on (residual, hessian) with Newton leaf values.
// ---------------------------------------------------------------------------

namespace {

constexpr double kHessianFloor = 1e-10;
constexpr double kMinGain = 1e-12;

struct RegSplit {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

// Squared-error reduction: sum_L r^2-fit improvement of splitting `samples`.
std::optional<RegSplit> best_regression_split(const Matrix& x,
                                              std::span<const double> residual,
                                              const std::vector<std::size_t>& samples,
                                              std::size_t min_samples_split) {
  if (samples.size() < min_samples_split || samples.size() < 2) return std::nullopt;
  double g_total = 0.0;
  for (std::size_t i : samples) g_total += residual[i];
  const double n_total = static_cast<double>(samples.size());
  const double parent_score = g_total * g_total / n_total;

  std::optional<RegSplit> best;
  std::vector<std::pair<double, double>> column(samples.size());  // (value, residual)
  for (std::size_t f = 0; f < x.cols(); ++f) {
    for (std::size_t i = 0; i < samples.size(); ++i)
      column[i] = {x(samples[i], f), residual[samples[i]]};
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (column.front().first == column.back().first) continue;

    double g_left = 0.0;
    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      g_left += column[i].second;
      if (column[i].first == column[i + 1].first) continue;
      const double t = 0.5 * (column[i].first + column[i + 1].first);
      if (!(t > column[i].first)) continue;
      const double nl = static_cast<double>(i + 1);
      const double nr = n_total - nl;
      const double g_right = g_total - g_left;
      const double gain =
          g_left * g_left / nl + g_right * g_right / nr - parent_score;
      if (gain > kMinGain && (!best || gain > best->gain))
        best = RegSplit{f, t, gain};
    }
  }
  return best;
}

double newton_leaf_value(std::span<const double> residual, std::span<const double> hessian,
                         const std::vector<std::size_t>& samples, double leaf_scale,
                         std::size_t* floored) {
  double g = 0.0, h = 0.0;
  for (std::size_t i : samples) {
    g += residual[i];
    h += hessian[i];
  }
  if (h < kHessianFloor) {
    if (floored) ++(*floored);
    h = kHessianFloor;
  }
  return leaf_scale * g / h;
}

struct OpenLeaf {
  std::size_t node_ix;
  std::vector<std::size_t> samples;
  std::size_t depth;
  std::optional<RegSplit> split;
};

}  // namespace

RegressionTree fit_regression_tree(const Matrix& x, std::span<const double> residual,
                                   std::span<const double> hessian,
                                   const GradientBoostingConfig& config, double leaf_scale,
                                   std::size_t* floored_leaves) {
  RegressionTree tree;
  std::vector<std::size_t> root(x.rows());
  std::iota(root.begin(), root.end(), std::size_t{0});

  if (config.growth == TreeGrowth::level_wise) {
    // Depth-limited recursion.
    auto build = [&](auto&& self, std::vector<std::size_t>& samples,
                     std::size_t depth) -> std::int32_t {
      std::optional<RegSplit> split;
      if (depth < config.max_depth)
        split = best_regression_split(x, residual, samples, config.min_samples_split);
      const auto ix = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      if (!split) {
        tree.nodes.back().value =
            newton_leaf_value(residual, hessian, samples, leaf_scale, floored_leaves);
        return ix;
      }
      std::vector<std::size_t> left, right;
      for (std::size_t i : samples)
        (x(i, split->feature) <= split->threshold ? left : right).push_back(i);
      samples.clear();
      samples.shrink_to_fit();
      const std::int32_t li = self(self, left, depth + 1);
      const std::int32_t ri = self(self, right, depth + 1);
      auto& node = tree.nodes[static_cast<std::size_t>(ix)];
      node.is_leaf = false;
      node.feature = split->feature;
      node.threshold = split->threshold;
      node.left = li;
      node.right = ri;
      return ix;
    };
    build(build, root, 0);
    return tree;
  }

  // Leaf-wise: repeatedly split the open leaf with the largest loss reduction
  // until the leaf budget is exhausted or no split gains.
  std::vector<OpenLeaf> open;
  tree.nodes.emplace_back();
  open.push_back({0, std::move(root), 0, std::nullopt});
  open.back().split =
      best_regression_split(x, residual, open.back().samples, config.min_samples_split);
  std::size_t n_leaves = 1;
  while (n_leaves < config.max_leaves) {
    std::ptrdiff_t pick = -1;
    for (std::size_t i = 0; i < open.size(); ++i) {
      if (!open[i].split) continue;
      if (pick < 0 || open[i].split->gain > open[static_cast<std::size_t>(pick)].split->gain)
        pick = static_cast<std::ptrdiff_t>(i);
    }
    if (pick < 0) break;
    OpenLeaf leaf = std::move(open[static_cast<std::size_t>(pick)]);
    open.erase(open.begin() + pick);

    std::vector<std::size_t> left, right;
    for (std::size_t i : leaf.samples)
      (x(i, leaf.split->feature) <= leaf.split->threshold ? left : right).push_back(i);

    const auto li = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    const auto ri = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    auto& node = tree.nodes[leaf.node_ix];
    node.is_leaf = false;
    node.feature = leaf.split->feature;
    node.threshold = leaf.split->threshold;
    node.left = li;
    node.right = ri;

    auto ls = best_regression_split(x, residual, left, config.min_samples_split);
    auto rs = best_regression_split(x, residual, right, config.min_samples_split);
    open.push_back({static_cast<std::size_t>(li), std::move(left), leaf.depth + 1, ls});
    open.push_back({static_cast<std::size_t>(ri), std::move(right), leaf.depth + 1, rs});
    ++n_leaves;
  }
  for (auto& leaf : open)
    tree.nodes[leaf.node_ix].value =
        newton_leaf_value(residual, hessian, leaf.samples, leaf_scale, floored_leaves);
  return tree;
}

double RegressionTree::predict_one(std::span<const double> x) const {
  std::size_t ix = 0;
  while (!nodes[ix].is_leaf) {
    const Node& n = nodes[ix];
    ix = static_cast<std::size_t>(x[n.feature] <= n.threshold ? n.left : n.right);
  }
  return nodes[ix].value;
}

nlohmann::json RegressionTree::to_json() const {
  nlohmann::json jn = nlohmann::json::array();
  for (const auto& n : nodes) {
    if (n.is_leaf)
      jn.push_back({{"value", n.value}});
    else
      jn.push_back({{"feature", n.feature},
                    {"threshold", n.threshold},
                    {"left", n.left},
                    {"right", n.right}});
  }
  return jn;
}

RegressionTree RegressionTree::from_json(const nlohmann::json& j) {
  RegressionTree t;
  for (const auto& jn : j) {
    Node n;
    if (jn.contains("value")) {
      n.is_leaf = true;
      n.value = jn.at("value").get<double>();
    } else {
      n.is_leaf = false;
      n.feature = jn.at("feature").get<std::size_t>();
      n.threshold = jn.at("threshold").get<double>();
      n.left = jn.at("left").get<std::int32_t>();
      n.right = jn.at("right").get<std::int32_t>();
    }
    t.nodes.push_back(n);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Gradient boosting classifier.
// ---------------------------------------------------------------------------

namespace {

void softmax_rows(Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double mx = -1e300;
    for (std::size_t c = 0; c < m.cols(); ++c) mx = std::max(mx, m(i, c));
    double sum = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      m(i, c) = std::exp(m(i, c) - mx);
      sum += m(i, c);
    }
    for (std::size_t c = 0; c < m.cols(); ++c) m(i, c) /= sum;
  }
}

double mean_deviance(const Matrix& f, const std::vector<std::size_t>& y) {
  Matrix p = f;
  softmax_rows(p);
  double loss = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i)
    loss -= std::log(std::max(p(i, y[i]), 1e-300));
  return loss / static_cast<double>(p.rows());
}

}  // namespace

void GradientBoostingClassifier::train(const Matrix& x, const std::vector<int>& y) {
  classes_ = sorted_classes(y);
  const std::size_t k = classes_.size();
  if (k < 2) throw InputError("gradient_boosting: needs at least 2 classes");
  const auto ids = class_ids(y, classes_);
  const std::size_t n = x.rows();

  stages_.clear();
  deviance_trace_.clear();
  warnings_.clear();

  init_log_odds_.assign(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) init_log_odds_[ids[i]] += 1.0;
  for (std::size_t c = 0; c < k; ++c)
    init_log_odds_[c] =
        std::log(std::max(init_log_odds_[c] / static_cast<double>(n), 1e-12));

  Matrix f(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) f(i, c) = init_log_odds_[c];
  deviance_trace_.push_back(mean_deviance(f, ids));

  const double leaf_scale = (static_cast<double>(k) - 1.0) / static_cast<double>(k);
  std::vector<double> residual(n), hessian(n);
  std::size_t floored = 0;
  for (std::size_t round = 0; round < config_.n_rounds; ++round) {
    Matrix p = f;
    softmax_rows(p);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        const double pic = p(i, c);
        residual[i] = (ids[i] == c ? 1.0 : 0.0) - pic;
        hessian[i] = pic * (1.0 - pic);
      }
      RegressionTree tree =
          fit_regression_tree(x, residual, hessian, config_, leaf_scale, &floored);
      for (std::size_t i = 0; i < n; ++i)
        f(i, c) += config_.learning_rate * tree.predict_one(x.row(i));
      stages_.push_back(std::move(tree));
    }
    deviance_trace_.push_back(mean_deviance(f, ids));
  }
  if (floored > 0)
    warnings_.push_back("gradient_boosting: " + std::to_string(floored) +
                        " leaf value(s) hit the hessian floor");
}

Matrix GradientBoostingClassifier::raw_scores(const Matrix& x) const {
  const std::size_t k = classes_.size();
  Matrix f(x.rows(), k);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t c = 0; c < k; ++c) f(i, c) = init_log_odds_[c];
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    const std::size_t c = s % k;
    for (std::size_t i = 0; i < x.rows(); ++i)
      f(i, c) += config_.learning_rate * stages_[s].predict_one(x.row(i));
  }
  return f;
}

Matrix GradientBoostingClassifier::predict_proba(const Matrix& x) const {
  Matrix f = raw_scores(x);
  softmax_rows(f);
  return f;
}

nlohmann::json GradientBoostingClassifier::save_state() const {
  nlohmann::json js = nlohmann::json::array();
  for (const auto& s : stages_) js.push_back(s.to_json());
  return {{"classes", classes_},
          {"init_log_odds", init_log_odds_},
          {"stages", js},
          {"n_rounds", config_.n_rounds},
          {"learning_rate", config_.learning_rate},
          {"max_depth", config_.max_depth},
          {"max_leaves", config_.max_leaves},
          {"growth", config_.growth == TreeGrowth::level_wise ? "level_wise" : "leaf_wise"},
          {"min_samples_split", config_.min_samples_split}};
}

void GradientBoostingClassifier::load_state(const nlohmann::json& state) {
  classes_ = state.at("classes").get<std::vector<int>>();
  init_log_odds_ = state.at("init_log_odds").get<std::vector<double>>();
  config_.n_rounds = state.at("n_rounds").get<std::size_t>();
  config_.learning_rate = state.at("learning_rate").get<double>();
  config_.max_depth = state.at("max_depth").get<std::size_t>();
  config_.max_leaves = state.at("max_leaves").get<std::size_t>();
  config_.growth = state.at("growth").get<std::string>() == "leaf_wise"
                       ? TreeGrowth::leaf_wise
                       : TreeGrowth::level_wise;
  config_.min_samples_split = state.at("min_samples_split").get<std::size_t>();
  stages_.clear();
  for (const auto& js : state.at("stages"))
    stages_.push_back(RegressionTree::from_json(js));
}

}  // namespace rtdpa
