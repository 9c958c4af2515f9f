#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtdpa/matrix.hpp"

namespace rtdpa {

/// Shared contract for the ten classifier families. predict() is argmax of
/// predict_proba with ties resolved to the smallest class code, so labels
/// and scores can never disagree.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string family() const = 0;
  virtual void train(const Matrix& x, const std::vector<int>& y) = 0;
  virtual Matrix predict_proba(const Matrix& x) const = 0;
  virtual const std::vector<int>& classes() const = 0;

  virtual std::vector<int> predict(const Matrix& x) const;

  virtual nlohmann::json save_state() const = 0;
  virtual void load_state(const nlohmann::json& state) = 0;

 protected:
  static std::vector<int> sorted_classes(const std::vector<int>& y);
  static std::vector<std::size_t> class_ids(const std::vector<int>& y,
                                            const std::vector<int>& classes);
};

/// Factory over the family registry. Unknown families and unknown parameter
/// keys are input errors.
std::unique_ptr<Classifier> make_classifier(const std::string& family,
                                            const nlohmann::json& params);
std::vector<std::string> classifier_families();
/// Paper-style display name, e.g. "decision_tree" -> "DecisionTree".
std::string classifier_display_name(const std::string& family);

}  // namespace rtdpa
