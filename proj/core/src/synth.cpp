#include "rtdpa/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "rtdpa/errors.hpp"
#include "rtdpa/rng.hpp"

namespace rtdpa {

SynthSpec SynthSpec::defaults() {
  SynthSpec s;
  s.row_types = {
      {"type_a", 5000, {0.85, 0.015, 0.125, 0.01}, {0, 1}, 1.0},
      {"type_b", 5000, {0.85, 0.015, 0.125, 0.01}, {2, 3}, -1.0},
  };
  return s;
}

void SynthSpec::validate() const {
  if (row_types.size() < 2) throw InputError("synth: needs at least 2 row types");
  if (n_features < 1) throw InputError("synth: needs at least 1 feature");
  if (noise < 0) throw InputError("synth: noise must be >= 0");
  if (class_separation <= 0) throw InputError("synth: class_separation must be > 0");
  std::set<std::string> names;
  std::set<std::pair<std::pair<std::size_t, std::size_t>, double>> rules;
  for (const auto& t : row_types) {
    if (t.name.empty()) throw InputError("synth: row type with empty name");
    if (!names.insert(t.name).second)
      throw InputError("synth: duplicate row type '" + t.name + "'");
    if (t.n_rows < 2) throw InputError("synth: row type '" + t.name + "' needs >= 2 rows");
    if (t.class_proportions.size() < 2)
      throw InputError("synth: row type '" + t.name + "' needs >= 2 classes");
    double sum = 0.0;
    for (double p : t.class_proportions) {
      if (p <= 0) throw InputError("synth: class proportions must be > 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw InputError("synth: class proportions for '" + t.name + "' sum to " +
                       std::to_string(sum) + ", expected 1");
    for (std::size_t f : t.active_features)
      if (f >= n_features)
        throw InputError("synth: active feature index out of range for '" + t.name + "'");
    // Distinct decision rules across types are the point of the benchmark.
    auto rule = std::make_pair(std::make_pair(t.active_features[0], t.active_features[1]),
                               t.direction_sign);
    if (!rules.insert(rule).second)
      throw InputError("synth: row types must have distinct decision rules; '" + t.name +
                       "' repeats one");
  }
}

SynthSpec SynthSpec::from_json(const nlohmann::json& j) {
  static const std::set<std::string> allowed = {"row_types", "n_features", "noise",
                                                "class_separation", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw InputError("synth spec: unknown key '" + it.key() + "'");
  SynthSpec s = defaults();
  if (j.contains("n_features")) s.n_features = j["n_features"].get<std::size_t>();
  if (j.contains("noise")) s.noise = j["noise"].get<double>();
  if (j.contains("class_separation")) s.class_separation = j["class_separation"].get<double>();
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("row_types")) {
    s.row_types.clear();
    static const std::set<std::string> type_keys = {"name", "n_rows", "class_proportions",
                                                    "active_features", "direction_sign"};
    for (const auto& jt : j["row_types"]) {
      for (auto it = jt.begin(); it != jt.end(); ++it)
        if (!type_keys.count(it.key()))
          throw InputError("synth row type: unknown key '" + it.key() + "'");
      SynthTypeSpec t;
      t.name = jt.at("name").get<std::string>();
      t.n_rows = jt.value("n_rows", std::size_t{5000});
      if (jt.contains("class_proportions"))
        t.class_proportions = jt["class_proportions"].get<std::vector<double>>();
      if (jt.contains("active_features")) {
        const auto v = jt["active_features"].get<std::vector<std::size_t>>();
        if (v.size() != 2) throw InputError("synth: active_features must list 2 indices");
        t.active_features = {v[0], v[1]};
      }
      t.direction_sign = jt.value("direction_sign", 1.0);
      s.row_types.push_back(std::move(t));
    }
  }
  s.validate();
  return s;
}

SynthSpec SynthSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open synth spec '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("synth spec '" + path + "': " + e.what());
  }
  return from_json(j);
}

namespace {

std::vector<std::size_t> exact_class_counts(const std::vector<double>& proportions,
                                            std::size_t n) {
  // Largest-remainder apportionment: counts realize the proportions exactly.
  std::vector<std::size_t> counts(proportions.size());
  std::vector<std::pair<double, std::size_t>> remainder;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < proportions.size(); ++k) {
    const double share = proportions[k] * static_cast<double>(n);
    counts[k] = static_cast<std::size_t>(share);
    assigned += counts[k];
    remainder.emplace_back(-(share - static_cast<double>(counts[k])), k);
  }
  std::stable_sort(remainder.begin(), remainder.end());
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++counts[remainder[r].second];
  return counts;
}

std::vector<std::string> default_class_names(std::size_t k) {
  if (k == 4) return {"standard", "substandard", "doubtful", "loss"};
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= k; ++i) names.push_back("class_" + std::to_string(i));
  return names;
}

}  // namespace

SynthResult generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const double inv_sqrt2 = 0.70710678118654752440;

  std::size_t max_k = 0;
  for (const auto& t : spec.row_types) max_k = std::max(max_k, t.class_proportions.size());
  const auto class_names = default_class_names(max_k);

  Schema schema;
  schema.columns.push_back({"row_id", ColumnKind::identifier, ColumnRole::ignored});
  schema.columns.push_back({"row_type", ColumnKind::categorical, ColumnRole::row_type});
  for (std::size_t f = 0; f < spec.n_features; ++f)
    schema.columns.push_back({"f" + std::to_string(f), ColumnKind::numeric,
                              ColumnRole::feature});
  schema.columns.push_back({"label", ColumnKind::numeric, ColumnRole::target});
  for (std::size_t k = 0; k < max_k; ++k)
    schema.class_names[static_cast<int>(k + 1)] = class_names[k];

  SynthResult result;
  result.data.schema = schema;

  std::size_t row_id = 0;
  std::size_t total_bayes_hits = 0, total_rows = 0;
  for (const auto& type : spec.row_types) {
    Rng rng(derive_seed(spec.seed, type.name));
    const std::size_t k_classes = type.class_proportions.size();
    const auto counts = exact_class_counts(type.class_proportions, type.n_rows);

    std::vector<int> labels;
    labels.reserve(type.n_rows);
    for (std::size_t k = 0; k < k_classes; ++k)
      labels.insert(labels.end(), counts[k], static_cast<int>(k + 1));
    rng.shuffle(labels);

    // Class k mean along the type's direction on its active feature pair.
    auto class_mean = [&](std::size_t k, std::size_t active_slot) {
      (void)active_slot;
      return type.direction_sign * static_cast<double>(k) * spec.class_separation * inv_sqrt2;
    };

    std::size_t bayes_hits = 0;
    for (std::size_t i = 0; i < type.n_rows; ++i) {
      const int label = labels[i];
      const std::size_t k = static_cast<std::size_t>(label - 1);
      std::vector<double> x(spec.n_features);
      for (std::size_t f = 0; f < spec.n_features; ++f) x[f] = rng.normal();
      for (std::size_t slot = 0; slot < 2; ++slot) {
        const std::size_t f = type.active_features[slot];
        x[f] = class_mean(k, slot) + spec.noise * x[f];
      }

      // Closed-form Bayes label under the generating Gaussians: the inactive
      // features are class-independent and cancel.
      int bayes = 1;
      double best = -1e300;
      for (std::size_t c = 0; c < k_classes; ++c) {
        double score;
        if (spec.noise > 0) {
          double d2 = 0.0;
          for (std::size_t slot = 0; slot < 2; ++slot) {
            const double d = x[type.active_features[slot]] - class_mean(c, slot);
            d2 += d * d;
          }
          score = std::log(type.class_proportions[c]) -
                  d2 / (2.0 * spec.noise * spec.noise);
        } else {
          double d2 = 0.0;
          for (std::size_t slot = 0; slot < 2; ++slot) {
            const double d = x[type.active_features[slot]] - class_mean(c, slot);
            d2 += d * d;
          }
          score = -d2;  // noiseless: nearest mean
        }
        if (score > best) {
          best = score;
          bayes = static_cast<int>(c + 1);
        }
      }
      if (bayes == label) ++bayes_hits;

      std::vector<Cell> row;
      row.reserve(schema.columns.size());
      row.push_back(Cell::text("r" + std::to_string(row_id++)));
      row.push_back(Cell::text(type.name));
      for (double v : x) row.push_back(Cell::number(v));
      row.push_back(Cell::number(static_cast<double>(label)));
      result.data.rows.push_back(std::move(row));
      result.bayes_labels.push_back(bayes);
    }
    result.bayes_accuracy_per_type[type.name] =
        static_cast<double>(bayes_hits) / static_cast<double>(type.n_rows);
    total_bayes_hits += bayes_hits;
    total_rows += type.n_rows;
  }
  result.bayes_accuracy_overall =
      static_cast<double>(total_bayes_hits) / static_cast<double>(total_rows);
  return result;
}

std::string synth_csv(const SynthResult& r) {
  std::ostringstream out;
  const auto& schema = r.data.schema;
  for (std::size_t c = 0; c < schema.columns.size(); ++c)
    out << (c ? "," : "") << csv_escape(schema.columns[c].name);
  out << "\n";
  char buf[32];
  for (const auto& row : r.data.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ",";
      const Cell& cell = row[c];
      if (cell.is_missing()) continue;
      if (cell.is_text()) {
        out << csv_escape(cell.as_text());
      } else {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), cell.as_number());
        (void)ec;
        out << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
      }
    }
    out << "\n";
  }
  return out.str();
}

nlohmann::json synth_sidecar(const SynthResult& r) {
  return {{"bayes_accuracy_overall", r.bayes_accuracy_overall},
          {"bayes_accuracy_per_type", r.bayes_accuracy_per_type},
          {"bayes_labels", r.bayes_labels}};
}

}  // namespace rtdpa
