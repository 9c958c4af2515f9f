#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtdpa/dataset.hpp"

namespace rtdpa {

/// One row type of the synthetic benchmark: its class mix and its private
/// decision rule (which feature pair carries the class structure, and in
/// which direction).
struct SynthTypeSpec {
  std::string name;
  std::size_t n_rows = 5000;
  std::vector<double> class_proportions = {0.85, 0.015, 0.125, 0.01};
  std::array<std::size_t, 2> active_features = {0, 1};
  double direction_sign = 1.0;
};

/// Row-typed benchmark generator. Class k of a type sits at
/// sign * (k-1) * separation along the type's active feature pair; all other
/// features are standard noise. Distinct rules across types are enforced, so
/// a pooled model cannot reuse one type's boundaries for another.
struct SynthSpec {
  std::vector<SynthTypeSpec> row_types;
  std::size_t n_features = 6;
  double noise = 0.4;            // class-conditional stddev on active features
  double class_separation = 3.0; // distance between adjacent class means
  std::uint64_t seed = 0;

  static SynthSpec defaults();
  static SynthSpec from_json(const nlohmann::json& j);
  static SynthSpec from_file(const std::string& path);
  void validate() const;
};

struct SynthResult {
  Dataset data;
  std::vector<int> bayes_labels;  // Bayes-optimal label per row, closed form
  std::map<std::string, double> bayes_accuracy_per_type;
  double bayes_accuracy_overall = 0.0;
};

SynthResult generate_synthetic(const SynthSpec& spec);

/// Deterministic CSV bytes (shortest round-trip float formatting).
std::string synth_csv(const SynthResult& r);
nlohmann::json synth_sidecar(const SynthResult& r);

}  // namespace rtdpa
