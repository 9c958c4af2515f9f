#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rtdpa/errors.hpp"
#include "rtdpa/learners_tree.hpp"

namespace rtdpa {

double impurity(std::span<const double> class_counts, SplitCriterion criterion) {
  double total = 0.0;
  for (double c : class_counts) total += c;
  if (total <= 0) throw std::invalid_argument("impurity: empty node");
  if (criterion == SplitCriterion::gini) {
    double s = 0.0;
    for (double c : class_counts) {
      const double p = c / total;
      s += p * p;
    }
    return 1.0 - s;
  }
  double h = 0.0;
  for (double c : class_counts) {
    if (c <= 0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

namespace {

constexpr double kMinGain = 1e-12;

struct NodeSample {
  double value;
  std::size_t cls;
  double weight;
};

// Impurity decrease for fixed left/right class-count splits; written once so
// the sweep and any caller agree bit-for-bit.
double split_gain(std::span<const double> left, std::span<const double> right,
                  double parent_impurity, SplitCriterion criterion) {
  double wl = 0.0, wr = 0.0;
  for (double c : left) wl += c;
  for (double c : right) wr += c;
  const double total = wl + wr;
  return parent_impurity - (wl / total) * impurity(left, criterion) -
         (wr / total) * impurity(right, criterion);
}

std::vector<std::size_t> sampled_features(std::size_t m, double fraction, Rng* rng) {
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (fraction >= 1.0 || !rng) return all;
  std::size_t take = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(m)));
  take = std::clamp<std::size_t>(take, 1, m);
  rng->shuffle(all);
  all.resize(take);
  std::sort(all.begin(), all.end());  // ascending keeps the tie-break canonical
  return all;
}

}  // namespace

std::optional<SplitCandidate> best_split(const Matrix& x, const std::vector<std::size_t>& y,
                                         std::span<const std::size_t> samples,
                                         std::span<const double> weights,
                                         const TreeConfig& config, std::size_t n_classes,
                                         Rng* rng) {
  if (samples.size() < config.min_samples_split) return std::nullopt;

  std::vector<double> parent_counts(n_classes, 0.0);
  for (std::size_t i : samples)
    parent_counts[y[i]] += weights.empty() ? 1.0 : weights[i];
  const double parent_impurity = impurity(parent_counts, config.criterion);

  const auto features = sampled_features(x.cols(), config.feature_subsample,
                                         config.split_mode == SplitMode::best ? rng : nullptr);

  std::optional<SplitCandidate> best;
  std::vector<NodeSample> column(samples.size());
  std::vector<double> left(n_classes), right(n_classes);

  for (std::size_t f : features) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const std::size_t s = samples[i];
      column[i] = {x(s, f), y[s], weights.empty() ? 1.0 : weights[s]};
    }
    std::sort(column.begin(), column.end(),
              [](const NodeSample& a, const NodeSample& b) { return a.value < b.value; });
    if (column.front().value == column.back().value) continue;  // constant feature

    if (config.split_mode == SplitMode::random) {
      if (!rng) throw std::logic_error("random split mode needs an rng");
      const double t = rng->uniform(column.front().value, column.back().value);
      std::fill(left.begin(), left.end(), 0.0);
      std::fill(right.begin(), right.end(), 0.0);
      bool any_left = false, any_right = false;
      for (const auto& s : column) {
        if (s.value <= t) {
          left[s.cls] += s.weight;
          any_left = true;
        } else {
          right[s.cls] += s.weight;
          any_right = true;
        }
      }
      if (!any_left || !any_right) continue;
      const double gain = split_gain(left, right, parent_impurity, config.criterion);
      if (gain > kMinGain && (!best || gain > best->gain))
        best = SplitCandidate{f, t, gain};
      continue;
    }

    std::fill(left.begin(), left.end(), 0.0);
    right = parent_counts;
    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      left[column[i].cls] += column[i].weight;
      right[column[i].cls] -= column[i].weight;
      if (column[i].value == column[i + 1].value) continue;
      const double t = 0.5 * (column[i].value + column[i + 1].value);
      if (!(t > column[i].value)) continue;  // midpoint collapsed onto the left value
      const double gain = split_gain(left, right, parent_impurity, config.criterion);
      if (gain > kMinGain && (!best || gain > best->gain))
        best = SplitCandidate{f, t, gain};
    }
  }
  return best;
}

namespace {

struct TreeBuilder {
  const Matrix& x;
  const std::vector<std::size_t>& y;
  std::span<const double> weights;
  const TreeConfig& config;
  std::size_t n_classes;
  Rng rng;
  DecisionTreeModel& model;

  std::int32_t build(std::vector<std::size_t>& samples, std::size_t depth) {
    model.depth = std::max(model.depth, depth);
    std::vector<double> counts(n_classes, 0.0);
    for (std::size_t i : samples) counts[y[i]] += weights.empty() ? 1.0 : weights[i];

    const bool pure = std::count_if(counts.begin(), counts.end(),
                                    [](double c) { return c > 0; }) <= 1;
    std::optional<SplitCandidate> split;
    if (!pure && depth < config.max_depth && samples.size() >= config.min_samples_split)
      split = best_split(x, y, samples, weights, config, n_classes, &rng);

    const auto ix = static_cast<std::int32_t>(model.nodes.size());
    model.nodes.emplace_back();
    if (!split) {
      TreeNode& leaf = model.nodes.back();
      leaf.is_leaf = true;
      leaf.counts = counts;
      leaf.predicted = static_cast<std::size_t>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
      return ix;
    }

    std::vector<std::size_t> left_samples, right_samples;
    for (std::size_t i : samples)
      (x(i, split->feature) <= split->threshold ? left_samples : right_samples).push_back(i);
    samples.clear();
    samples.shrink_to_fit();

    const std::int32_t left = build(left_samples, depth + 1);
    const std::int32_t right = build(right_samples, depth + 1);
    TreeNode& node = model.nodes[static_cast<std::size_t>(ix)];
    node.is_leaf = false;
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = left;
    node.right = right;
    return ix;
  }
};

}  // namespace

DecisionTreeModel build_tree(const Matrix& x, const std::vector<int>& y,
                             const TreeConfig& config, std::uint64_t seed,
                             std::span<const double> weights) {
  if (x.rows() == 0) throw InputError("build_tree: empty input");
  if (x.rows() != y.size()) throw std::invalid_argument("build_tree: X/y length mismatch");

  DecisionTreeModel model;
  model.config = config;
  std::vector<int> classes = y;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  model.classes = classes;

  std::vector<std::size_t> ids(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    ids[i] = static_cast<std::size_t>(
        std::lower_bound(classes.begin(), classes.end(), y[i]) - classes.begin());

  std::vector<std::size_t> samples(x.rows());
  std::iota(samples.begin(), samples.end(), std::size_t{0});
  TreeBuilder builder{x, ids, weights, config, classes.size(), Rng(derive_seed(seed, "tree")),
                      model};
  builder.build(samples, 0);
  return model;
}

std::size_t DecisionTreeModel::leaf_for(std::span<const double> x) const {
  std::size_t ix = 0;
  while (!nodes[ix].is_leaf) {
    const TreeNode& n = nodes[ix];
    ix = static_cast<std::size_t>(x[n.feature] <= n.threshold ? n.left : n.right);
  }
  return ix;
}

std::vector<int> DecisionTreeModel::predict(const Matrix& x) const {
  std::vector<int> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    out[i] = classes[nodes[leaf_for(x.row(i))].predicted];
  return out;
}

Matrix DecisionTreeModel::predict_proba(const Matrix& x) const {
  Matrix probs(x.rows(), classes.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto& counts = nodes[leaf_for(x.row(i))].counts;
    double total = 0.0;
    for (double c : counts) total += c;
    for (std::size_t k = 0; k < classes.size(); ++k) probs(i, k) = counts[k] / total;
  }
  return probs;
}

namespace {

std::string feature_label(std::size_t f, const std::vector<std::string>& names) {
  if (f < names.size()) return names[f];
  return "x" + std::to_string(f);
}

void dump_text(const DecisionTreeModel& m, std::size_t ix, std::size_t indent,
               const std::vector<std::string>& names, std::ostringstream& out) {
  const TreeNode& n = m.nodes[ix];
  const std::string pad(indent * 2, ' ');
  if (n.is_leaf) {
    out << pad << "leaf class=" << m.classes[n.predicted] << " counts=[";
    for (std::size_t k = 0; k < n.counts.size(); ++k)
      out << (k ? " " : "") << n.counts[k];
    out << "]\n";
    return;
  }
  out << pad << "if " << feature_label(n.feature, names) << " <= " << n.threshold << ":\n";
  dump_text(m, static_cast<std::size_t>(n.left), indent + 1, names, out);
  out << pad << "else:\n";
  dump_text(m, static_cast<std::size_t>(n.right), indent + 1, names, out);
}

}  // namespace

std::string DecisionTreeModel::to_text(const std::vector<std::string>& feature_names) const {
  std::ostringstream out;
  dump_text(*this, 0, 0, feature_names, out);
  return out.str();
}

std::string DecisionTreeModel::to_graph(const std::vector<std::string>& feature_names) const {
  std::ostringstream out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& n = nodes[i];
    if (n.is_leaf) {
      out << "node " << i << " leaf class=" << classes[n.predicted] << "\n";
    } else {
      out << "node " << i << " split " << feature_label(n.feature, feature_names)
          << " <= " << n.threshold << "\n";
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& n = nodes[i];
    if (n.is_leaf) continue;
    out << "edge " << i << " " << n.left << " left\n";
    out << "edge " << i << " " << n.right << " right\n";
  }
  return out.str();
}

nlohmann::json DecisionTreeModel::to_json() const {
  nlohmann::json jn = nlohmann::json::array();
  for (const auto& n : nodes) {
    if (n.is_leaf)
      jn.push_back({{"counts", n.counts}, {"predicted", n.predicted}});
    else
      jn.push_back({{"feature", n.feature},
                    {"threshold", n.threshold},
                    {"left", n.left},
                    {"right", n.right}});
  }
  return {{"classes", classes}, {"nodes", jn}, {"depth", depth}};
}

DecisionTreeModel DecisionTreeModel::from_json(const nlohmann::json& j) {
  DecisionTreeModel m;
  m.classes = j.at("classes").get<std::vector<int>>();
  m.depth = j.at("depth").get<std::size_t>();
  for (const auto& jn : j.at("nodes")) {
    TreeNode n;
    if (jn.contains("counts")) {
      n.is_leaf = true;
      n.counts = jn.at("counts").get<std::vector<double>>();
      n.predicted = jn.at("predicted").get<std::size_t>();
    } else {
      n.is_leaf = false;
      n.feature = jn.at("feature").get<std::size_t>();
      n.threshold = jn.at("threshold").get<double>();
      n.left = jn.at("left").get<std::int32_t>();
      n.right = jn.at("right").get<std::int32_t>();
    }
    m.nodes.push_back(std::move(n));
  }
  return m;
}

void DecisionTreeClassifier::train(const Matrix& x, const std::vector<int>& y) {
  model_ = build_tree(x, y, config_, seed_);
}

Matrix DecisionTreeClassifier::predict_proba(const Matrix& x) const {
  return model_.predict_proba(x);
}

nlohmann::json DecisionTreeClassifier::save_state() const {
  return {{"model", model_.to_json()}, {"seed", seed_}};
}

void DecisionTreeClassifier::load_state(const nlohmann::json& state) {
  model_ = DecisionTreeModel::from_json(state.at("model"));
  seed_ = state.at("seed").get<std::uint64_t>();
}

}  // namespace rtdpa
