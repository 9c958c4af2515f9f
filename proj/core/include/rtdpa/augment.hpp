#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rtdpa/matrix.hpp"

namespace rtdpa {

struct AugmentSpec {
  enum class Variant { none, smote, adasyn, smote_tomek, smote_enn };
  Variant variant = Variant::none;
  std::size_t k_neighbors = 5;
  std::size_t enn_k = 3;
  std::uint64_t seed = 0;

  static Variant variant_from_string(const std::string& s);
  static std::string to_string(Variant v);
};

/// Exact k-nearest-neighbour lookup under Euclidean distance. Ties break by
/// ascending point index, so queries are fully deterministic.
class NeighborIndex {
 public:
  explicit NeighborIndex(const Matrix& points) : points_(&points) {}

  std::vector<std::size_t> query(std::span<const double> x, std::size_t k,
                                 std::optional<std::size_t> exclude = std::nullopt) const;
  std::size_t nearest_excluding_self(std::size_t i) const;
  std::size_t size() const { return points_->rows(); }

 private:
  const Matrix* points_;
};

struct SyntheticProvenance {
  std::size_t source = 0;    // index into the pre-augmentation matrix
  std::size_t neighbor = 0;  // same-class neighbour the segment runs to
  double delta = 0.0;        // interpolation coefficient in [0,1)
};

struct AugmentResult {
  Matrix x;
  std::vector<int> y;
  std::vector<SyntheticProvenance> synthetic;  // one entry per appended row
  std::vector<std::string> warnings;
};

/// Oversample every non-majority class up to the majority count by
/// interpolating between a class member and one of its k same-class
/// nearest neighbours. Originals are preserved in order; synthetics append.
AugmentResult smote(const Matrix& x, const std::vector<int>& y, const AugmentSpec& spec);

/// SMOTE with per-point quotas proportional to the majority-class share of
/// each minority point's k-neighbourhood (largest-remainder rounding).
AugmentResult adasyn(const Matrix& x, const std::vector<int>& y, const AugmentSpec& spec);

/// Unordered pairs (i, j), i < j, of mutual nearest neighbours with
/// different labels.
std::vector<std::pair<std::size_t, std::size_t>> tomek_links(const Matrix& x,
                                                             const std::vector<int>& y,
                                                             const NeighborIndex& index);

AugmentResult smote_tomek(const Matrix& x, const std::vector<int>& y, const AugmentSpec& spec);
AugmentResult smote_enn(const Matrix& x, const std::vector<int>& y, const AugmentSpec& spec);

/// Dispatch on spec.variant (none -> identity).
AugmentResult augment(const Matrix& x, const std::vector<int>& y, const AugmentSpec& spec);

}  // namespace rtdpa
