#include "rtdpa/classifier.hpp"

#include <algorithm>
#include <set>

#include "rtdpa/errors.hpp"
#include "rtdpa/learners_core.hpp"
#include "rtdpa/learners_tree.hpp"

namespace rtdpa {

std::vector<int> Classifier::predict(const Matrix& x) const {
  const Matrix probs = predict_proba(x);
  const auto& cls = classes();
  std::vector<int> out(x.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < probs.cols(); ++c)
      if (probs(i, c) > probs(i, best)) best = c;  // ties keep the smallest code
    out[i] = cls[best];
  }
  return out;
}

std::vector<int> Classifier::sorted_classes(const std::vector<int>& y) {
  if (y.empty()) throw InputError("train: empty label vector");
  std::vector<int> classes = y;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

std::vector<std::size_t> Classifier::class_ids(const std::vector<int>& y,
                                               const std::vector<int>& classes) {
  std::vector<std::size_t> ids(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    ids[i] = static_cast<std::size_t>(
        std::lower_bound(classes.begin(), classes.end(), y[i]) - classes.begin());
  return ids;
}

namespace {

void reject_unknown_keys(const nlohmann::json& params, const std::set<std::string>& allowed,
                         const std::string& family) {
  if (params.is_null()) return;
  for (auto it = params.begin(); it != params.end(); ++it)
    if (!allowed.count(it.key()))
      throw InputError("classifier '" + family + "': unknown parameter '" + it.key() + "'");
}

TreeConfig tree_config_from(const nlohmann::json& p) {
  TreeConfig c;
  const std::string crit = p.value("criterion", "gini");
  if (crit == "gini") c.criterion = SplitCriterion::gini;
  else if (crit == "entropy") c.criterion = SplitCriterion::entropy;
  else throw InputError("criterion must be 'gini' or 'entropy'");
  c.max_depth = p.value("max_depth", std::size_t{64});
  c.min_samples_split = p.value("min_samples_split", std::size_t{2});
  c.feature_subsample = p.value("feature_subsample", 1.0);
  if (!(c.feature_subsample > 0.0 && c.feature_subsample <= 1.0))
    throw InputError("feature_subsample must be in (0,1]");
  const std::string mode = p.value("split_mode", "best");
  if (mode == "best") c.split_mode = SplitMode::best;
  else if (mode == "random") c.split_mode = SplitMode::random;
  else throw InputError("split_mode must be 'best' or 'random'");
  return c;
}

}  // namespace

std::unique_ptr<Classifier> make_classifier(const std::string& family,
                                            const nlohmann::json& params) {
  const nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;

  if (family == "softmax_regression" || family == "logistic_regression") {
    reject_unknown_keys(p, {"lr", "epochs", "l2"}, family);
    SoftmaxConfig c;
    c.lr = p.value("lr", c.lr);
    c.epochs = p.value("epochs", c.epochs);
    c.l2 = p.value("l2", c.l2);
    return std::make_unique<SoftmaxRegression>(c);
  }
  if (family == "gaussian_nb") {
    reject_unknown_keys(p, {"var_floor_rel"}, family);
    return std::make_unique<GaussianNb>(p.value("var_floor_rel", 1e-9));
  }
  if (family == "svm") {
    reject_unknown_keys(p, {"kernel", "C", "tol", "max_passes", "seed"}, family);
    SvmConfig c;
    if (p.contains("kernel")) c.kernel = KernelSpec::from_json(p["kernel"]);
    c.C = p.value("C", c.C);
    c.tol = p.value("tol", c.tol);
    c.max_passes = p.value("max_passes", c.max_passes);
    c.seed = p.value("seed", c.seed);
    if (c.C <= 0) throw InputError("svm: C must be > 0");
    return std::make_unique<SvmClassifier>(c);
  }
  if (family == "mlp") {
    reject_unknown_keys(p, {"hidden_units", "lr", "epochs", "seed", "activation"}, family);
    MlpConfig c;
    c.hidden_units = p.value("hidden_units", c.hidden_units);
    c.lr = p.value("lr", c.lr);
    c.epochs = p.value("epochs", c.epochs);
    c.seed = p.value("seed", c.seed);
    const std::string act = p.value("activation", "tanh");
    if (act == "tanh") c.activation = MlpConfig::Activation::tanh_act;
    else if (act == "logistic") c.activation = MlpConfig::Activation::logistic;
    else throw InputError("mlp: activation must be 'tanh' or 'logistic'");
    return std::make_unique<MlpClassifier>(c);
  }
  if (family == "knn") {
    reject_unknown_keys(p, {"k"}, family);
    return std::make_unique<KnnClassifier>(p.value("k", std::size_t{5}));
  }
  if (family == "decision_tree") {
    reject_unknown_keys(
        p, {"criterion", "max_depth", "min_samples_split", "feature_subsample", "split_mode",
            "seed"},
        family);
    return std::make_unique<DecisionTreeClassifier>(tree_config_from(p),
                                                    p.value("seed", std::uint64_t{0}));
  }
  if (family == "random_forest" || family == "extra_trees") {
    reject_unknown_keys(p,
                        {"n_trees", "criterion", "max_depth", "min_samples_split",
                         "bootstrap", "feature_subsample", "seed"},
                        family);
    ForestConfig c;
    c.n_trees = p.value("n_trees", std::size_t{100});
    c.tree.max_depth = p.value("max_depth", std::size_t{64});
    c.tree.min_samples_split = p.value("min_samples_split", std::size_t{2});
    const std::string crit = p.value("criterion", "gini");
    c.tree.criterion = crit == "entropy" ? SplitCriterion::entropy : SplitCriterion::gini;
    if (p.contains("bootstrap")) c.bootstrap = p["bootstrap"].get<bool>();
    if (p.contains("feature_subsample")) {
      c.sqrt_features = false;
      c.tree.feature_subsample = p["feature_subsample"].get<double>();
    }
    return std::make_unique<ForestClassifier>(family, c, p.value("seed", std::uint64_t{0}));
  }
  if (family == "adaboost") {
    reject_unknown_keys(p, {"n_rounds", "stump_depth"}, family);
    AdaBoostConfig c;
    c.n_rounds = p.value("n_rounds", c.n_rounds);
    c.stump_depth = p.value("stump_depth", c.stump_depth);
    return std::make_unique<AdaBoostClassifier>(c);
  }
  if (family == "gradient_boosting") {
    reject_unknown_keys(
        p, {"n_rounds", "learning_rate", "max_depth", "max_leaves", "growth",
            "min_samples_split"},
        family);
    GradientBoostingConfig c;
    c.n_rounds = p.value("n_rounds", c.n_rounds);
    c.learning_rate = p.value("learning_rate", c.learning_rate);
    c.max_depth = p.value("max_depth", c.max_depth);
    c.max_leaves = p.value("max_leaves", c.max_leaves);
    c.min_samples_split = p.value("min_samples_split", c.min_samples_split);
    const std::string growth = p.value("growth", "level_wise");
    if (growth == "level_wise") c.growth = TreeGrowth::level_wise;
    else if (growth == "leaf_wise") c.growth = TreeGrowth::leaf_wise;
    else throw InputError("gradient_boosting: growth must be 'level_wise' or 'leaf_wise'");
    return std::make_unique<GradientBoostingClassifier>(c);
  }
  throw InputError("unknown classifier family '" + family + "'");
}

std::vector<std::string> classifier_families() {
  return {"softmax_regression", "gaussian_nb", "svm",        "mlp",
          "knn",                "decision_tree", "random_forest", "extra_trees",
          "adaboost",           "gradient_boosting"};
}

std::string classifier_display_name(const std::string& family) {
  if (family == "softmax_regression" || family == "logistic_regression")
    return "LogisticRegression";
  if (family == "gaussian_nb") return "GaussianNB";
  if (family == "svm") return "SVM";
  if (family == "mlp") return "NeuralNetwork";
  if (family == "knn") return "KNeighbors";
  if (family == "decision_tree") return "DecisionTree";
  if (family == "random_forest") return "RandomForest";
  if (family == "extra_trees") return "ExtraTrees";
  if (family == "adaboost") return "AdaBoost";
  if (family == "gradient_boosting") return "GradientBoosting";
  return family;
}

}  // namespace rtdpa
