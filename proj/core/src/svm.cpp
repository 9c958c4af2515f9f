#include <algorithm>
#include <cmath>

#include "rtdpa/errors.hpp"
#include "rtdpa/learners_core.hpp"
#include "rtdpa/rng.hpp"

namespace rtdpa {

KernelSpec::Kind KernelSpec::kind_from_string(const std::string& s) {
  if (s == "linear") return Kind::linear;
  if (s == "polynomial" || s == "poly") return Kind::polynomial;
  if (s == "rbf") return Kind::rbf;
  if (s == "sigmoid") return Kind::sigmoid;
  if (s == "laplacian") return Kind::laplacian;
  if (s == "exponential") return Kind::exponential;
  throw InputError("unknown kernel '" + s + "'");
}

std::string KernelSpec::to_string(Kind k) {
  switch (k) {
    case Kind::linear: return "linear";
    case Kind::polynomial: return "polynomial";
    case Kind::rbf: return "rbf";
    case Kind::sigmoid: return "sigmoid";
    case Kind::laplacian: return "laplacian";
    case Kind::exponential: return "exponential";
  }
  return "?";
}

nlohmann::json KernelSpec::to_json() const {
  return {{"kind", to_string(kind)}, {"sigma", sigma}, {"c", c}, {"alpha", alpha},
          {"degree", degree}};
}

KernelSpec KernelSpec::from_json(const nlohmann::json& j) {
  KernelSpec s;
  s.kind = kind_from_string(j.value("kind", "rbf"));
  s.sigma = j.value("sigma", 1.0);
  s.c = j.value("c", 0.0);
  s.alpha = j.value("alpha", 1.0);
  s.degree = j.value("degree", 3);
  if (s.sigma <= 0 &&
      (s.kind == Kind::rbf || s.kind == Kind::laplacian || s.kind == Kind::exponential))
    throw InputError("kernel sigma must be > 0");
  if (s.degree < 1) throw InputError("polynomial kernel degree must be >= 1");
  return s;
}

double kernel_eval(const KernelSpec& spec, std::span<const double> a,
                   std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("kernel_eval: dimension mismatch");
  switch (spec.kind) {
    case KernelSpec::Kind::linear:
      return dot(a, b);
    case KernelSpec::Kind::polynomial:
      return std::pow(dot(a, b) + spec.c, spec.degree);
    case KernelSpec::Kind::rbf:
      return std::exp(-squared_distance(a, b) / (2.0 * spec.sigma * spec.sigma));
    case KernelSpec::Kind::sigmoid:
      return std::tanh(spec.alpha * dot(a, b) + spec.c);
    case KernelSpec::Kind::laplacian:
      return std::exp(-std::sqrt(squared_distance(a, b)) / spec.sigma);
    case KernelSpec::Kind::exponential:
      return std::exp(-std::sqrt(squared_distance(a, b)) / (2.0 * spec.sigma * spec.sigma));
  }
  throw std::logic_error("unreachable kernel kind");
}

double BinarySvm::decision(std::span<const double> x, const KernelSpec& kernel) const {
  double s = bias;
  for (std::size_t i = 0; i < support_points.rows(); ++i)
    s += dual_coef[i] * kernel_eval(kernel, x, support_points.row(i));
  return s;
}

namespace {

/// Platt's SMO with an error cache; f(x) = sum alpha_i y_i K(x_i, x) + b.
class SmoSolver {
 public:
  SmoSolver(const Matrix& x, const std::vector<double>& y, const SvmConfig& config)
      : x_(x), y_(y), cfg_(config), n_(x.rows()), rng_(derive_seed(config.seed, "smo")) {
    alphas_.assign(n_, 0.0);
    errors_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) errors_[i] = -y_[i];  // f == 0 initially
  }

  bool solve() {
    bool examine_all = true;
    std::size_t sweeps = 0;
    while (true) {
      std::size_t changed = 0;
      if (examine_all) {
        if (++sweeps > cfg_.max_passes) return false;
        for (std::size_t i = 0; i < n_; ++i) changed += examine(i);
      } else {
        for (std::size_t i = 0; i < n_; ++i)
          if (alphas_[i] > 0 && alphas_[i] < cfg_.C) changed += examine(i);
      }
      if (examine_all) {
        if (changed == 0) return true;
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
  }

  const std::vector<double>& alphas() const { return alphas_; }
  double bias() const { return b_; }

 private:
  double kernel(std::size_t i, std::size_t j) const {
    return kernel_eval(cfg_.kernel, x_.row(i), x_.row(j));
  }

  std::size_t examine(std::size_t i2) {
    const double y2 = y_[i2], alph2 = alphas_[i2], e2 = errors_[i2];
    const double r2 = e2 * y2;
    const bool violates = (r2 < -cfg_.tol && alph2 < cfg_.C) || (r2 > cfg_.tol && alph2 > 0);
    if (!violates) return 0;

    // Second-choice heuristic: largest |E1 - E2| among non-bound points.
    std::ptrdiff_t best = -1;
    double best_gap = -1.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!(alphas_[i] > 0 && alphas_[i] < cfg_.C)) continue;
      const double gap = std::abs(errors_[i] - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = static_cast<std::ptrdiff_t>(i);
      }
    }
    if (best >= 0 && take_step(static_cast<std::size_t>(best), i2)) return 1;

    const std::size_t start = rng_.below(n_);
    for (std::size_t off = 0; off < n_; ++off) {
      const std::size_t i1 = (start + off) % n_;
      if (alphas_[i1] > 0 && alphas_[i1] < cfg_.C && take_step(i1, i2)) return 1;
    }
    for (std::size_t off = 0; off < n_; ++off) {
      const std::size_t i1 = (start + off) % n_;
      if (take_step(i1, i2)) return 1;
    }
    return 0;
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double alph1 = alphas_[i1], alph2 = alphas_[i2];
    const double y1 = y_[i1], y2 = y_[i2];
    const double e1 = errors_[i1], e2 = errors_[i2];
    const double s = y1 * y2;
    const double C = cfg_.C;

    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, alph2 - alph1);
      hi = std::min(C, C + alph2 - alph1);
    } else {
      lo = std::max(0.0, alph1 + alph2 - C);
      hi = std::min(C, alph1 + alph2);
    }
    if (lo >= hi) return false;

    const double k11 = kernel(i1, i1), k12 = kernel(i1, i2), k22 = kernel(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;
    double a2;
    if (eta > 0) {
      a2 = std::clamp(alph2 + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // Flat or concave direction: evaluate the objective at both clip ends.
      const double f1 = y1 * (e1 + b_) - alph1 * k11 - s * alph2 * k12;
      const double f2 = y2 * (e2 + b_) - s * alph1 * k12 - alph2 * k22;
      const double l1 = alph1 + s * (alph2 - lo);
      const double h1 = alph1 + s * (alph2 - hi);
      const double lo_obj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 +
                            s * lo * l1 * k12;
      const double hi_obj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 +
                            s * hi * h1 * k12;
      if (lo_obj < hi_obj - kEps) a2 = lo;
      else if (lo_obj > hi_obj + kEps) a2 = hi;
      else return false;
    }
    if (std::abs(a2 - alph2) < kEps * (a2 + alph2 + kEps)) return false;
    const double a1 = alph1 + s * (alph2 - a2);

    const double d1 = y1 * (a1 - alph1), d2 = y2 * (a2 - alph2);
    const double b1 = b_ - e1 - d1 * k11 - d2 * k12;
    const double b2 = b_ - e2 - d1 * k12 - d2 * k22;
    double b_new;
    if (a1 > 0 && a1 < C) b_new = b1;
    else if (a2 > 0 && a2 < C) b_new = b2;
    else b_new = 0.5 * (b1 + b2);

    const double db = b_new - b_;
    for (std::size_t k = 0; k < n_; ++k)
      errors_[k] += d1 * kernel(i1, k) + d2 * kernel(i2, k) + db;

    alphas_[i1] = a1;
    alphas_[i2] = a2;
    b_ = b_new;
    return true;
  }

  static constexpr double kEps = 1e-8;

  const Matrix& x_;
  const std::vector<double>& y_;
  const SvmConfig& cfg_;
  std::size_t n_;
  Rng rng_;
  std::vector<double> alphas_;
  std::vector<double> errors_;
  double b_ = 0.0;
};

}  // namespace

BinarySvm train_binary_svm(const Matrix& x, const std::vector<double>& y_pm,
                           const SvmConfig& config) {
  if (x.rows() != y_pm.size()) throw std::invalid_argument("svm: X/y length mismatch");
  SmoSolver solver(x, y_pm, config);
  BinarySvm out;
  out.converged = solver.solve();
  out.alphas = solver.alphas();
  out.labels_pm = y_pm;
  out.bias = solver.bias();
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < out.alphas.size(); ++i)
    if (out.alphas[i] > 1e-8) support.push_back(i);
  out.support_points = x.take_rows(support);
  out.dual_coef.reserve(support.size());
  for (std::size_t i : support) out.dual_coef.push_back(out.alphas[i] * y_pm[i]);
  return out;
}

void SvmClassifier::train(const Matrix& x, const std::vector<int>& y) {
  classes_ = sorted_classes(y);
  if (classes_.size() < 2) throw InputError("svm: needs at least 2 classes");
  machines_.clear();
  warnings_.clear();
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    std::vector<double> y_pm(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) y_pm[i] = y[i] == classes_[c] ? 1.0 : -1.0;
    SvmConfig sub = config_;
    sub.seed = derive_seed(config_.seed, c);
    machines_.push_back(train_binary_svm(x, y_pm, sub));
    if (!machines_.back().converged)
      warnings_.push_back("svm subproblem for class " + std::to_string(classes_[c]) +
                          " hit max_passes; best iterate kept");
  }
}

Matrix SvmClassifier::decision_scores(const Matrix& x) const {
  Matrix scores(x.rows(), machines_.size());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t c = 0; c < machines_.size(); ++c)
      scores(i, c) = machines_[c].decision(x.row(i), config_.kernel);
  return scores;
}

Matrix SvmClassifier::predict_proba(const Matrix& x) const {
  // Softmax over OvR decision values: a scoring convention, not a calibrated
  // probability.
  Matrix scores = decision_scores(x);
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    double mx = -1e300;
    for (std::size_t c = 0; c < scores.cols(); ++c) mx = std::max(mx, scores(i, c));
    double sum = 0.0;
    for (std::size_t c = 0; c < scores.cols(); ++c) {
      scores(i, c) = std::exp(scores(i, c) - mx);
      sum += scores(i, c);
    }
    for (std::size_t c = 0; c < scores.cols(); ++c) scores(i, c) /= sum;
  }
  return scores;
}

nlohmann::json SvmClassifier::save_state() const {
  nlohmann::json ms = nlohmann::json::array();
  for (const auto& m : machines_) {
    ms.push_back({{"support", m.support_points.storage()},
                  {"n_support", m.support_points.rows()},
                  {"n_features", m.support_points.cols()},
                  {"dual_coef", m.dual_coef},
                  {"bias", m.bias},
                  {"converged", m.converged}});
  }
  return {{"classes", classes_},
          {"kernel", config_.kernel.to_json()},
          {"C", config_.C},
          {"tol", config_.tol},
          {"max_passes", config_.max_passes},
          {"machines", ms}};
}

void SvmClassifier::load_state(const nlohmann::json& state) {
  classes_ = state.at("classes").get<std::vector<int>>();
  config_.kernel = KernelSpec::from_json(state.at("kernel"));
  config_.C = state.at("C").get<double>();
  config_.tol = state.at("tol").get<double>();
  config_.max_passes = state.at("max_passes").get<std::size_t>();
  machines_.clear();
  for (const auto& jm : state.at("machines")) {
    BinarySvm m;
    const auto rows = jm.at("n_support").get<std::size_t>();
    const auto cols = jm.at("n_features").get<std::size_t>();
    const auto flat = jm.at("support").get<std::vector<double>>();
    m.support_points = Matrix(rows, cols);
    for (std::size_t i = 0; i < flat.size(); ++i)
      m.support_points(i / cols, i % cols) = flat[i];
    m.dual_coef = jm.at("dual_coef").get<std::vector<double>>();
    m.bias = jm.at("bias").get<double>();
    m.converged = jm.at("converged").get<bool>();
    machines_.push_back(std::move(m));
  }
}

}  // namespace rtdpa
