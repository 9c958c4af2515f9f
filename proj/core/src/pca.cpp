#include "rtdpa/pca.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rtdpa/errors.hpp"

namespace rtdpa {

void jacobi_eigen_symmetric(Matrix a, std::vector<double>& eigenvalues, Matrix& eigenvectors) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("jacobi: matrix must be square");

  eigenvectors = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) eigenvectors(i, i) = 1.0;

  auto off_diag_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
  };

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
  const double tol = (scale > 0 ? scale : 1.0) * 1e-15 * static_cast<double>(n);

  for (int sweep = 0; sweep < 100 && off_diag_norm() > tol; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= tol / static_cast<double>(n * n)) continue;
        const double app = a(p, p), aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = eigenvectors(k, p), vkq = eigenvectors(k, q);
          eigenvectors(k, p) = c * vkp - s * vkq;
          eigenvectors(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = a(i, i);
}

PcaModel fit_pca(const Matrix& x) {
  const std::size_t n = x.rows(), m = x.cols();
  if (n < 2) throw InputError("fit_pca requires at least 2 rows");
  if (m < 1) throw InputError("fit_pca requires at least 1 column");
  if (!x.all_finite()) throw InputError("fit_pca: input contains non-finite values");

  PcaModel model;
  model.input_dim = m;
  model.center.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) model.center[j] += x(i, j);
  for (double& c : model.center) c /= static_cast<double>(n);

  // Sample covariance of the centered data (n-1 denominator).
  Matrix cov(m, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < m; ++a) {
      const double da = x(i, a) - model.center[a];
      for (std::size_t b = a; b < m; ++b)
        cov(a, b) += da * (x(i, b) - model.center[b]);
    }
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a; b < m; ++b) {
      cov(a, b) /= static_cast<double>(n - 1);
      cov(b, a) = cov(a, b);
    }

  std::vector<double> eig;
  Matrix vec;
  jacobi_eigen_symmetric(cov, eig, vec);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return eig[a] > eig[b]; });

  model.components = Matrix(m, m);
  model.eigenvalues.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t src = order[k];
    model.eigenvalues[k] = std::max(0.0, eig[src]);
    // Sign convention: first coordinate with magnitude above 1e-12 is positive.
    double sign = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (std::abs(vec(i, src)) > 1e-12) {
        sign = vec(i, src) > 0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < m; ++i) model.components(i, k) = sign * vec(i, src);
  }

  const double total = std::accumulate(model.eigenvalues.begin(), model.eigenvalues.end(), 0.0);
  model.explained_ratio.resize(m);
  for (std::size_t k = 0; k < m; ++k)
    model.explained_ratio[k] =
        total > 0 ? model.eigenvalues[k] / total : 1.0 / static_cast<double>(m);
  model.n_kept = m;
  return model;
}

PcaModel select_components(PcaModel p, const PcaSelectPolicy& policy) {
  if (policy.fixed_count.has_value() == policy.cumulative_threshold.has_value())
    throw InputError("PCA selection needs exactly one of fixed_count or cumulative_threshold");
  if (policy.fixed_count) {
    const std::size_t k = *policy.fixed_count;
    if (k < 1 || k > p.input_dim)
      throw InputError("PCA fixed_count " + std::to_string(k) + " outside 1.." +
                       std::to_string(p.input_dim));
    p.n_kept = k;
  } else {
    const double t = *policy.cumulative_threshold;
    if (!(t > 0.0 && t <= 1.0)) throw InputError("PCA cumulative_threshold must be in (0,1]");
    double cum = 0.0;
    std::size_t k = p.input_dim;
    for (std::size_t i = 0; i < p.input_dim; ++i) {
      cum += p.explained_ratio[i];
      if (cum >= t - 1e-12) {
        k = i + 1;
        break;
      }
    }
    p.n_kept = k;
  }
  return p;
}

Matrix project(const PcaModel& p, const Matrix& x) {
  if (x.cols() != p.input_dim)
    throw InputError("project: input has " + std::to_string(x.cols()) +
                     " columns, model expects " + std::to_string(p.input_dim));
  Matrix out(x.rows(), p.n_kept);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t k = 0; k < p.n_kept; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < p.input_dim; ++j)
        s += (x(i, j) - p.center[j]) * p.components(j, k);
      out(i, k) = s;
    }
  return out;
}

Matrix reconstruct(const PcaModel& p, const Matrix& projected) {
  if (projected.cols() != p.n_kept)
    throw InputError("reconstruct: input has " + std::to_string(projected.cols()) +
                     " columns, model keeps " + std::to_string(p.n_kept));
  Matrix out(projected.rows(), p.input_dim);
  for (std::size_t i = 0; i < projected.rows(); ++i)
    for (std::size_t j = 0; j < p.input_dim; ++j) {
      double s = p.center[j];
      for (std::size_t k = 0; k < p.n_kept; ++k)
        s += projected(i, k) * p.components(j, k);
      out(i, j) = s;
    }
  return out;
}

std::string scree_csv(const PcaModel& p) {
  std::ostringstream out;
  out << "component,eigenvalue,explained_ratio,cumulative\n";
  double cum = 0.0;
  char buf[32];
  auto fmt = [&buf](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
  };
  for (std::size_t k = 0; k < p.eigenvalues.size(); ++k) {
    cum += p.explained_ratio[k];
    out << (k + 1) << ',' << fmt(p.eigenvalues[k]) << ',' << fmt(p.explained_ratio[k]) << ','
        << fmt(cum) << '\n';
  }
  return out.str();
}

nlohmann::json PcaModel::to_json() const {
  return {{"input_dim", input_dim},
          {"components", components.storage()},
          {"eigenvalues", eigenvalues},
          {"center", center},
          {"explained_ratio", explained_ratio},
          {"n_kept", n_kept}};
}

PcaModel PcaModel::from_json(const nlohmann::json& j) {
  PcaModel p;
  p.input_dim = j.at("input_dim").get<std::size_t>();
  p.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
  p.center = j.at("center").get<std::vector<double>>();
  p.explained_ratio = j.at("explained_ratio").get<std::vector<double>>();
  p.n_kept = j.at("n_kept").get<std::size_t>();
  const auto flat = j.at("components").get<std::vector<double>>();
  p.components = Matrix(p.input_dim, p.input_dim);
  for (std::size_t i = 0; i < flat.size(); ++i)
    p.components(i / p.input_dim, i % p.input_dim) = flat[i];
  return p;
}

}  // namespace rtdpa
