#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "rtdpa/errors.hpp"
#include "rtdpa/learners_tree.hpp"

namespace rtdpa {

int majority_vote(const std::vector<int>& predictions) {
  if (predictions.empty()) throw std::invalid_argument("majority_vote: no predictions");
  std::map<int, std::size_t> votes;
  for (int p : predictions) ++votes[p];
  int winner = 0;
  std::size_t best = 0;
  for (const auto& [cls, n] : votes) {  // ascending code keeps ties at the smallest
    if (n > best) {
      best = n;
      winner = cls;
    }
  }
  return winner;
}

namespace {

ForestModel train_forest_impl(const Matrix& x, const std::vector<int>& y,
                              const ForestConfig& config, std::uint64_t seed,
                              bool default_bootstrap) {
  if (config.n_trees < 1) throw InputError("forest: n_trees must be >= 1");
  ForestModel model;
  model.bootstrap = config.bootstrap.value_or(default_bootstrap);
  std::vector<int> classes = y;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  model.classes = classes;

  TreeConfig tree_config = config.tree;
  if (config.sqrt_features && x.cols() > 1)
    tree_config.feature_subsample =
        std::sqrt(static_cast<double>(x.cols())) / static_cast<double>(x.cols());

  for (std::size_t t = 0; t < config.n_trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(seed, t);
    model.seeds.push_back(tree_seed);
    if (model.bootstrap) {
      Rng rng(derive_seed(tree_seed, "bootstrap"));
      std::vector<std::size_t> sample(x.rows());
      std::set<std::size_t> seen;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        sample[i] = rng.below(x.rows());
        seen.insert(sample[i]);
      }
      std::vector<std::size_t> oob;
      for (std::size_t i = 0; i < x.rows(); ++i)
        if (!seen.count(i)) oob.push_back(i);
      model.oob_indices.push_back(std::move(oob));

      Matrix bx = x.take_rows(sample);
      std::vector<int> by(sample.size());
      for (std::size_t i = 0; i < sample.size(); ++i) by[i] = y[sample[i]];
      model.trees.push_back(build_tree(bx, by, tree_config, tree_seed));
    } else {
      model.oob_indices.emplace_back();
      model.trees.push_back(build_tree(x, y, tree_config, tree_seed));
    }
    // A bootstrap draw can miss whole classes; align the tree's local class
    // list with the forest's by re-mapping is unnecessary because trees store
    // actual class codes.
  }
  return model;
}

}  // namespace

ForestModel train_random_forest(const Matrix& x, const std::vector<int>& y,
                                const ForestConfig& config, std::uint64_t seed) {
  return train_forest_impl(x, y, config, seed, true);
}

ForestModel train_extra_trees(const Matrix& x, const std::vector<int>& y,
                              const ForestConfig& config, std::uint64_t seed) {
  ForestConfig et = config;
  et.tree.split_mode = SplitMode::random;
  et.tree.feature_subsample = 1.0;  // all features, randomized thresholds
  et.sqrt_features = false;
  return train_forest_impl(x, y, et, seed, false);
}

void ForestClassifier::train(const Matrix& x, const std::vector<int>& y) {
  model_ = family_ == "extra_trees" ? train_extra_trees(x, y, config_, seed_)
                                    : train_random_forest(x, y, config_, seed_);
}

Matrix ForestClassifier::predict_proba(const Matrix& x) const {
  // Vote shares: argmax with smallest-code ties equals majority_vote.
  std::map<int, std::size_t> class_ix;
  for (std::size_t c = 0; c < model_.classes.size(); ++c) class_ix[model_.classes[c]] = c;
  Matrix probs(x.rows(), model_.classes.size());
  for (const auto& tree : model_.trees) {
    const auto preds = tree.predict(x);
    for (std::size_t i = 0; i < preds.size(); ++i) probs(i, class_ix.at(preds[i])) += 1.0;
  }
  const double n = static_cast<double>(model_.trees.size());
  for (std::size_t i = 0; i < probs.rows(); ++i)
    for (std::size_t c = 0; c < probs.cols(); ++c) probs(i, c) /= n;
  return probs;
}

std::vector<int> ForestClassifier::predict(const Matrix& x) const {
  std::vector<std::vector<int>> per_tree;
  per_tree.reserve(model_.trees.size());
  for (const auto& tree : model_.trees) per_tree.push_back(tree.predict(x));
  std::vector<int> out(x.rows());
  std::vector<int> votes(model_.trees.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t t = 0; t < per_tree.size(); ++t) votes[t] = per_tree[t][i];
    out[i] = majority_vote(votes);
  }
  return out;
}

nlohmann::json ForestClassifier::save_state() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : model_.trees) trees.push_back(t.to_json());
  return {{"classes", model_.classes},
          {"bootstrap", model_.bootstrap},
          {"seeds", model_.seeds},
          {"trees", trees},
          {"family", family_}};
}

void ForestClassifier::load_state(const nlohmann::json& state) {
  family_ = state.at("family").get<std::string>();
  model_.classes = state.at("classes").get<std::vector<int>>();
  model_.bootstrap = state.at("bootstrap").get<bool>();
  model_.seeds = state.at("seeds").get<std::vector<std::uint64_t>>();
  model_.trees.clear();
  for (const auto& jt : state.at("trees"))
    model_.trees.push_back(DecisionTreeModel::from_json(jt));
}

}  // namespace rtdpa
