#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtdpa/matrix.hpp"

namespace rtdpa {

/// Principal components of the sample covariance. The full component set is
/// retained; n_kept controls how many columns project() uses.
struct PcaModel {
  std::size_t input_dim = 0;
  Matrix components;                    // m x m, column j = j-th principal direction
  std::vector<double> eigenvalues;      // descending, clamped to >= 0
  std::vector<double> center;           // per-feature mean of the fitting data
  std::vector<double> explained_ratio;  // sums to 1
  std::size_t n_kept = 0;

  nlohmann::json to_json() const;
  static PcaModel from_json(const nlohmann::json& j);
};

struct PcaSelectPolicy {
  std::optional<double> cumulative_threshold;  // in (0,1]
  std::optional<std::size_t> fixed_count;      // 1..m
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenvalues are
/// returned unsorted; columns of eigenvectors correspond to eigenvalues.
void jacobi_eigen_symmetric(Matrix a, std::vector<double>& eigenvalues, Matrix& eigenvectors);

PcaModel fit_pca(const Matrix& x);
PcaModel select_components(PcaModel p, const PcaSelectPolicy& policy);
Matrix project(const PcaModel& p, const Matrix& x);

/// Inverse map from component space back to the original feature space.
Matrix reconstruct(const PcaModel& p, const Matrix& projected);

/// "component,eigenvalue,explained_ratio,cumulative" rows for scree plotting.
std::string scree_csv(const PcaModel& p);

}  // namespace rtdpa
