#include <algorithm>
#include <map>

#include "rtdpa/errors.hpp"
#include "rtdpa/learners_core.hpp"

namespace rtdpa {

void KnnClassifier::train(const Matrix& x, const std::vector<int>& y) {
  if (x.rows() == 0) throw InputError("knn: empty training set");
  if (k_ < 1) throw InputError("knn: k must be >= 1");
  if (k_ > x.rows())
    throw InputError("knn: k=" + std::to_string(k_) + " exceeds training size " +
                     std::to_string(x.rows()));
  classes_ = sorted_classes(y);
  train_x_ = x;
  train_y_ = y;
}

Matrix KnnClassifier::predict_proba(const Matrix& x) const {
  if (train_x_.rows() == 0) throw InputError("knn: model not trained");
  if (x.cols() != train_x_.cols()) throw InputError("knn: feature count mismatch");
  std::map<int, std::size_t> class_ix;
  for (std::size_t c = 0; c < classes_.size(); ++c) class_ix[classes_[c]] = c;

  Matrix probs(x.rows(), classes_.size());
  std::vector<std::pair<double, std::size_t>> dist(train_x_.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t t = 0; t < train_x_.rows(); ++t)
      dist[t] = {squared_distance(x.row(i), train_x_.row(t)), t};
    // pair ordering breaks distance ties by ascending training index
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_),
                      dist.end());
    for (std::size_t t = 0; t < k_; ++t)
      probs(i, class_ix.at(train_y_[dist[t].second])) += 1.0;
    for (std::size_t c = 0; c < classes_.size(); ++c)
      probs(i, c) /= static_cast<double>(k_);
  }
  return probs;
}

nlohmann::json KnnClassifier::save_state() const {
  return {{"classes", classes_},
          {"k", k_},
          {"n_rows", train_x_.rows()},
          {"n_cols", train_x_.cols()},
          {"x", train_x_.storage()},
          {"y", train_y_}};
}

void KnnClassifier::load_state(const nlohmann::json& state) {
  classes_ = state.at("classes").get<std::vector<int>>();
  k_ = state.at("k").get<std::size_t>();
  const auto rows = state.at("n_rows").get<std::size_t>();
  const auto cols = state.at("n_cols").get<std::size_t>();
  const auto flat = state.at("x").get<std::vector<double>>();
  train_x_ = Matrix(rows, cols);
  for (std::size_t i = 0; i < flat.size(); ++i) train_x_(i / cols, i % cols) = flat[i];
  train_y_ = state.at("y").get<std::vector<int>>();
}

}  // namespace rtdpa
