#pragma once

// Independent oracles for the test suites. Everything here is written the
// slow, obvious way on purpose: brute-force scans and naive enumeration that
// the implementations under test are checked against. Nothing in this file
// may call into the code paths it verifies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "rtdpa/matrix.hpp"

namespace oracle {

using rtdpa::Matrix;

// --- kNN: full O(n^2) scan, ties by (distance, index), vote ties by code ---
inline std::vector<int> knn_predict(const Matrix& train_x, const std::vector<int>& train_y,
                                    const Matrix& query, std::size_t k) {
  std::vector<int> out(query.rows());
  for (std::size_t q = 0; q < query.rows(); ++q) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t t = 0; t < train_x.rows(); ++t)
      d.emplace_back(rtdpa::squared_distance(query.row(q), train_x.row(t)), t);
    std::sort(d.begin(), d.end());
    std::map<int, std::size_t> votes;
    for (std::size_t i = 0; i < k; ++i) ++votes[train_y[d[i].second]];
    int winner = 0;
    std::size_t best = 0;
    for (const auto& [cls, n] : votes)
      if (n > best) {
        best = n;
        winner = cls;
      }
    out[q] = winner;
  }
  return out;
}

// --- CART split: exhaustive enumeration over midpoint candidates -----------
struct SplitOracle {
  std::size_t feature;
  double threshold;
  double gain;
};

inline double gini_of(const std::vector<double>& counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  double s = 0.0;
  for (double c : counts) {
    const double p = c / total;
    s += p * p;
  }
  return 1.0 - s;
}

inline double entropy_of(const std::vector<double>& counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  double h = 0.0;
  for (double c : counts) {
    if (c <= 0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

inline std::optional<SplitOracle> exhaustive_best_split(const Matrix& x,
                                                        const std::vector<int>& y,
                                                        bool use_entropy = false) {
  std::vector<int> classes = y;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  auto class_of = [&](int label) {
    return static_cast<std::size_t>(
        std::lower_bound(classes.begin(), classes.end(), label) - classes.begin());
  };
  auto imp = [&](const std::vector<double>& c) {
    return use_entropy ? entropy_of(c) : gini_of(c);
  };

  std::vector<double> parent(classes.size(), 0.0);
  for (int label : y) parent[class_of(label)] += 1.0;
  const double parent_imp = imp(parent);
  const double n = static_cast<double>(y.size());

  std::optional<SplitOracle> best;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::vector<double> values;
    for (std::size_t i = 0; i < x.rows(); ++i) values.push_back(x(i, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t v = 0; v + 1 < values.size(); ++v) {
      const double t = 0.5 * (values[v] + values[v + 1]);
      if (!(t > values[v])) continue;
      std::vector<double> left(classes.size(), 0.0), right(classes.size(), 0.0);
      double nl = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        if (x(i, f) <= t) {
          left[class_of(y[i])] += 1.0;
          nl += 1.0;
        } else {
          right[class_of(y[i])] += 1.0;
        }
      }
      if (nl == 0.0 || nl == n) continue;
      const double gain = parent_imp - (nl / n) * imp(left) - ((n - nl) / n) * imp(right);
      if (gain > 1e-12 && (!best || gain > best->gain)) best = SplitOracle{f, t, gain};
    }
  }
  return best;
}

// --- AUC: concordant/discordant pair counting, ties worth one half ---------
inline double pair_counting_auc(const std::vector<double>& score,
                                const std::vector<bool>& positive) {
  double twice_conc_plus_ties = 0.0;  // 2*concordant + ties, kept integral
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < score.size(); ++i) {
    if (!positive[i]) continue;
    ++n_pos;
    for (std::size_t j = 0; j < score.size(); ++j) {
      if (positive[j]) continue;
      if (score[i] > score[j]) twice_conc_plus_ties += 2.0;
      else if (score[i] == score[j]) twice_conc_plus_ties += 1.0;
    }
  }
  for (bool p : positive)
    if (!p) ++n_neg;
  return twice_conc_plus_ties /
         (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// --- Tomek links: O(n^2) mutual nearest-neighbour scan ---------------------
inline std::vector<std::pair<std::size_t, std::size_t>> brute_force_tomek(
    const Matrix& x, const std::vector<int>& y) {
  const std::size_t n = x.rows();
  std::vector<std::size_t> nn(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = 1e300;
    std::size_t arg = i;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = rtdpa::squared_distance(x.row(i), x.row(j));
      if (d < best || (d == best && j < arg)) {
        best = d;
        arg = j;
      }
    }
    nn[i] = arg;
  }
  std::vector<std::pair<std::size_t, std::size_t>> links;
  for (std::size_t i = 0; i < n; ++i)
    if (nn[i] > i && nn[nn[i]] == i && y[i] != y[nn[i]]) links.emplace_back(i, nn[i]);
  return links;
}

// --- Central finite differences over a flat parameter vector ---------------
inline std::vector<double> central_differences(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> params,
    double step = 1e-5) {
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + step;
    const double hi = f(params);
    params[i] = keep - step;
    const double lo = f(params);
    params[i] = keep;
    grad[i] = (hi - lo) / (2.0 * step);
  }
  return grad;
}

inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-6});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

// --- Small scalar oracles ---------------------------------------------------
inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double segment_distance(std::span<const double> p, std::span<const double> a,
                               std::span<const double> b) {
  // Distance from p to segment [a, b].
  double ab2 = 0.0, ap_ab = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = b[i] - a[i];
    ab2 += d * d;
    ap_ab += (p[i] - a[i]) * d;
  }
  const double t = ab2 > 0 ? std::clamp(ap_ab / ab2, 0.0, 1.0) : 0.0;
  double dist2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double proj = a[i] + t * (b[i] - a[i]);
    const double d = p[i] - proj;
    dist2 += d * d;
  }
  return std::sqrt(dist2);
}

}  // namespace oracle
