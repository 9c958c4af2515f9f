#pragma once

// Shared fixtures for the test suites.

#include <string>
#include <vector>

#include "rtdpa/dataset.hpp"
#include "rtdpa/matrix.hpp"
#include "rtdpa/rng.hpp"

namespace testing_helpers {

using namespace rtdpa;

/// Minimal schema: row_type (categorical), target (numeric), plus n numeric
/// feature columns f0..f{n-1}.
inline Schema basic_schema(std::size_t n_features) {
  Schema s;
  s.columns.push_back({"row_type", ColumnKind::categorical, ColumnRole::row_type});
  for (std::size_t i = 0; i < n_features; ++i)
    s.columns.push_back({"f" + std::to_string(i), ColumnKind::numeric, ColumnRole::feature});
  s.columns.push_back({"label", ColumnKind::numeric, ColumnRole::target});
  return s;
}

inline Dataset make_dataset(std::size_t n_features,
                            const std::vector<std::string>& types,
                            const std::vector<std::vector<double>>& features,
                            const std::vector<int>& labels) {
  Dataset d;
  d.schema = basic_schema(n_features);
  for (std::size_t i = 0; i < types.size(); ++i) {
    std::vector<Cell> row;
    row.push_back(Cell::text(types[i]));
    for (double v : features[i]) row.push_back(Cell::number(v));
    row.push_back(Cell::number(labels[i]));
    d.rows.push_back(std::move(row));
  }
  return d;
}

/// Random matrix with entries from N(0,1).
inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

/// Two well-separated Gaussian blobs in 2D, labels 1/2.
inline void two_blobs(std::size_t n_per_class, double separation, std::uint64_t seed,
                      Matrix& x, std::vector<int>& y) {
  Rng rng(seed);
  x = Matrix(2 * n_per_class, 2);
  y.assign(2 * n_per_class, 1);
  for (std::size_t i = 0; i < n_per_class; ++i) {
    x(i, 0) = rng.normal() - separation / 2;
    x(i, 1) = rng.normal();
    x(n_per_class + i, 0) = rng.normal() + separation / 2;
    x(n_per_class + i, 1) = rng.normal();
    y[n_per_class + i] = 2;
  }
}

inline Matrix xor_points() {
  return Matrix::from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
}

inline std::vector<int> xor_labels() { return {1, 2, 2, 1}; }

}  // namespace testing_helpers
