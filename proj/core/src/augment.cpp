#include "rtdpa/augment.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "rtdpa/errors.hpp"
#include "rtdpa/rng.hpp"

namespace rtdpa {

AugmentSpec::Variant AugmentSpec::variant_from_string(const std::string& s) {
  if (s == "none") return Variant::none;
  if (s == "smote") return Variant::smote;
  if (s == "adasyn") return Variant::adasyn;
  if (s == "smote_tomek") return Variant::smote_tomek;
  if (s == "smote_enn") return Variant::smote_enn;
  throw InputError("unknown augmentation variant '" + s + "'");
}

std::string AugmentSpec::to_string(Variant v) {
  switch (v) {
    case Variant::none: return "none";
    case Variant::smote: return "smote";
    case Variant::adasyn: return "adasyn";
    case Variant::smote_tomek: return "smote_tomek";
    case Variant::smote_enn: return "smote_enn";
  }
  return "?";
}

std::vector<std::size_t> NeighborIndex::query(std::span<const double> x, std::size_t k,
                                              std::optional<std::size_t> exclude) const {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(points_->rows());
  for (std::size_t i = 0; i < points_->rows(); ++i) {
    if (exclude && *exclude == i) continue;
    dist.emplace_back(squared_distance(x, points_->row(i)), i);
  }
  k = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

std::size_t NeighborIndex::nearest_excluding_self(std::size_t i) const {
  auto nn = query(points_->row(i), 1, i);
  if (nn.empty()) throw std::logic_error("nearest_excluding_self on singleton set");
  return nn[0];
}

namespace {

std::map<int, std::vector<std::size_t>> group_by_class(const std::vector<int>& y) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < y.size(); ++i) groups[y[i]].push_back(i);
  return groups;
}

std::size_t majority_count(const std::map<int, std::vector<std::size_t>>& groups) {
  std::size_t best = 0;
  for (const auto& [cls, idx] : groups) {
    (void)cls;
    best = std::max(best, idx.size());
  }
  return best;
}

// Same-class k nearest neighbours of every member, global indices.
std::vector<std::vector<std::size_t>> same_class_neighbors(const Matrix& x,
                                                           const std::vector<std::size_t>& members,
                                                           std::size_t k) {
  Matrix sub = x.take_rows(members);
  NeighborIndex idx(sub);
  std::vector<std::vector<std::size_t>> out(members.size());
  const std::size_t kk = std::min(k, members.size() > 0 ? members.size() - 1 : 0);
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t local : idx.query(sub.row(i), kk, i)) out[i].push_back(members[local]);
  }
  return out;
}

void emit_synthetic(AugmentResult& result, const Matrix& x, std::size_t source,
                    const std::vector<std::size_t>& neighbors, int label, Rng& rng) {
  std::vector<double> point(x.cols());
  if (neighbors.empty()) {
    // Class of size 1: pure duplication.
    auto src = x.row(source);
    std::copy(src.begin(), src.end(), point.begin());
    result.synthetic.push_back({source, source, 0.0});
  } else {
    const std::size_t nb = neighbors[rng.below(neighbors.size())];
    const double delta = rng.uniform01();
    auto src = x.row(source);
    auto dst = x.row(nb);
    for (std::size_t j = 0; j < x.cols(); ++j)
      point[j] = src[j] + delta * (dst[j] - src[j]);
    result.synthetic.push_back({source, nb, delta});
  }
  result.x.append_row(point);
  result.y.push_back(label);
}

AugmentResult oversample(const Matrix& x, const std::vector<int>& y, const AugmentSpec& spec,
                         bool adaptive) {
  if (x.rows() != y.size()) throw std::invalid_argument("augment: X/y length mismatch");
  AugmentResult result;
  result.x = x;
  result.y = y;

  auto groups = group_by_class(y);
  if (groups.size() < 2) {
    if (!y.empty())
      result.warnings.push_back("augmentation skipped: single-class input");
    return result;
  }
  const std::size_t target = majority_count(groups);
  Rng rng(derive_seed(spec.seed, "oversample"));

  // ADASYN ranks minority points by how majority-dominated their global
  // k-neighbourhood is.
  int majority_label = 0;
  std::size_t best = 0;
  for (const auto& [cls, idx] : groups)
    if (idx.size() > best) {
      best = idx.size();
      majority_label = cls;
    }
  NeighborIndex global(x);

  for (const auto& [cls, members] : groups) {
    const std::size_t need = target - members.size();
    if (need == 0) continue;
    auto neighbors = same_class_neighbors(x, members, spec.k_neighbors);

    std::vector<std::size_t> quota(members.size(), 0);
    if (!adaptive) {
      for (std::size_t i = 0; i < need; ++i) ++quota[rng.below(members.size())];
    } else {
      std::vector<double> ratio(members.size(), 0.0);
      double total = 0.0;
      const std::size_t k = std::min(spec.k_neighbors, x.rows() - 1);
      for (std::size_t i = 0; i < members.size(); ++i) {
        std::size_t majority_neighbors = 0;
        for (std::size_t nb : global.query(x.row(members[i]), k, members[i]))
          if (y[nb] == majority_label) ++majority_neighbors;
        ratio[i] = k > 0 ? static_cast<double>(majority_neighbors) / static_cast<double>(k) : 0.0;
        total += ratio[i];
      }
      if (total <= 0.0) {
        result.warnings.push_back("adasyn: class " + std::to_string(cls) +
                                  " has no majority-class neighbours; using uniform quotas");
        const std::size_t base = need / members.size();
        std::size_t rem = need % members.size();
        for (std::size_t i = 0; i < members.size(); ++i)
          quota[i] = base + (i < rem ? 1 : 0);
      } else {
        // Largest-remainder rounding keeps the class balance exact.
        std::vector<double> share(members.size());
        std::size_t assigned = 0;
        std::vector<std::pair<double, std::size_t>> remainder;
        for (std::size_t i = 0; i < members.size(); ++i) {
          share[i] = static_cast<double>(need) * ratio[i] / total;
          quota[i] = static_cast<std::size_t>(share[i]);
          assigned += quota[i];
          remainder.emplace_back(-(share[i] - static_cast<double>(quota[i])), i);
        }
        std::stable_sort(remainder.begin(), remainder.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t r = 0; assigned < need; ++r, ++assigned)
          ++quota[remainder[r % remainder.size()].second];
      }
    }

    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t q = 0; q < quota[i]; ++q)
        emit_synthetic(result, x, members[i], neighbors[i], cls, rng);
  }
  return result;
}

// Remove rows while guarding against emptying any class: the highest-index
// survivor of a would-be-emptied class is kept.
AugmentResult remove_rows(const AugmentResult& in, std::set<std::size_t> removal,
                          const char* guard_tag) {
  AugmentResult out;
  out.warnings = in.warnings;

  std::map<int, std::size_t> remaining;
  for (std::size_t i = 0; i < in.y.size(); ++i)
    if (!removal.count(i)) ++remaining[in.y[i]];
  std::set<int> all_classes(in.y.begin(), in.y.end());
  for (int cls : all_classes) {
    if (remaining.count(cls)) continue;
    for (std::size_t i = in.y.size(); i-- > 0;) {
      if (in.y[i] == cls && removal.count(i)) {
        removal.erase(i);
        out.warnings.push_back(std::string(guard_tag) + ": kept last member of class " +
                               std::to_string(cls));
        break;
      }
    }
  }

  const std::size_t n_original = in.x.rows() - in.synthetic.size();
  for (std::size_t i = 0; i < in.x.rows(); ++i) {
    if (removal.count(i)) continue;
    out.x.append_row(in.x.row(i));
    out.y.push_back(in.y[i]);
    if (i >= n_original) out.synthetic.push_back(in.synthetic[i - n_original]);
  }
  return out;
}

}  // namespace

AugmentResult smote(const Matrix& x, const std::vector<int>& y, const AugmentSpec& spec) {
  return oversample(x, y, spec, false);
}

AugmentResult adasyn(const Matrix& x, const std::vector<int>& y, const AugmentSpec& spec) {
  return oversample(x, y, spec, true);
}

std::vector<std::pair<std::size_t, std::size_t>> tomek_links(const Matrix& x,
                                                             const std::vector<int>& y,
                                                             const NeighborIndex& index) {
  std::vector<std::pair<std::size_t, std::size_t>> links;
  if (x.rows() < 2) return links;
  std::vector<std::size_t> nn1(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) nn1[i] = index.nearest_excluding_self(i);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const std::size_t j = nn1[i];
    if (i < j && nn1[j] == i && y[i] != y[j]) links.emplace_back(i, j);
  }
  return links;
}

AugmentResult smote_tomek(const Matrix& x, const std::vector<int>& y, const AugmentSpec& spec) {
  AugmentResult oversampled = smote(x, y, spec);
  NeighborIndex index(oversampled.x);
  std::set<std::size_t> removal;
  for (const auto& [i, j] : tomek_links(oversampled.x, oversampled.y, index)) {
    removal.insert(i);
    removal.insert(j);
  }
  if (removal.empty()) return oversampled;
  return remove_rows(oversampled, std::move(removal), "smote_tomek");
}

AugmentResult smote_enn(const Matrix& x, const std::vector<int>& y, const AugmentSpec& spec) {
  AugmentResult oversampled = smote(x, y, spec);
  NeighborIndex index(oversampled.x);
  std::set<std::size_t> removal;
  const std::size_t k = std::min(spec.enn_k, oversampled.x.rows() > 0 ? oversampled.x.rows() - 1
                                                                      : std::size_t{0});
  if (k == 0) return oversampled;
  for (std::size_t i = 0; i < oversampled.x.rows(); ++i) {
    std::map<int, std::size_t> votes;
    for (std::size_t nb : index.query(oversampled.x.row(i), k, i)) ++votes[oversampled.y[nb]];
    int winner = 0;
    std::size_t best = 0;
    for (const auto& [cls, n] : votes) {
      if (n > best) {
        best = n;
        winner = cls;
      }
    }
    if (winner != oversampled.y[i]) removal.insert(i);
  }
  if (removal.empty()) return oversampled;
  return remove_rows(oversampled, std::move(removal), "smote_enn");
}

AugmentResult augment(const Matrix& x, const std::vector<int>& y, const AugmentSpec& spec) {
  switch (spec.variant) {
    case AugmentSpec::Variant::none: {
      AugmentResult r;
      r.x = x;
      r.y = y;
      return r;
    }
    case AugmentSpec::Variant::smote: return smote(x, y, spec);
    case AugmentSpec::Variant::adasyn: return adasyn(x, y, spec);
    case AugmentSpec::Variant::smote_tomek: return smote_tomek(x, y, spec);
    case AugmentSpec::Variant::smote_enn: return smote_enn(x, y, spec);
  }
  throw std::logic_error("unreachable augment variant");
}

}  // namespace rtdpa
