#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "ronguard/dataset.hpp"
#include "ronguard/kernels.hpp"
#include "ronguard/label.hpp"
#include "ronguard/matrix.hpp"

namespace ronguard {

/// Lazy k-nearest-neighbour model: the (standardized) training points.
class TrainedKnn {
 public:
  TrainedKnn(FeatureMatrix points, std::vector<Label> labels, int k)
      : points_(std::move(points)), labels_(std::move(labels)), k_(k) {
    if (labels_.size() != points_.rows()) throw ArgumentError("knn: label count does not match point count");
    if (k_ < 1 || static_cast<std::size_t>(k_) > points_.rows()) {
      throw ArgumentError("knn: k must be in [1, " + std::to_string(points_.rows()) + "], got " + std::to_string(k_));
    }
  }

  int k() const noexcept { return k_; }
  std::size_t n_features() const noexcept { return points_.cols(); }
  const FeatureMatrix& points() const noexcept { return points_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }

  /// Indices of the `count` nearest training points, nearest first. Equal
  /// distances are ordered by training index.
  std::vector<std::size_t> nearest(std::span<const double> query, std::size_t count) const {
    if (query.size() != points_.cols()) {
      throw ArgumentError("knn: query has " + std::to_string(query.size()) + " features, model has " +
                          std::to_string(points_.cols()));
    }
    count = std::min(count, points_.rows());
    std::vector<double> dist(points_.rows());
    for (std::size_t i = 0; i < points_.rows(); ++i) dist[i] = squared_distance(points_.row(i), query);
    std::vector<std::size_t> idx(points_.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto closer = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(), closer);
    idx.resize(count);
    return idx;
  }

 private:
  FeatureMatrix points_;
  std::vector<Label> labels_;
  int k_;
};

/// Majority label among the first `k` entries of a nearest-first neighbour
/// list. A split vote (even k) goes to the single nearest neighbour.
inline Label knn_vote(std::span<const std::size_t> neighbours, std::span<const Label> labels, std::size_t k) {
  int tally = 0;
  for (std::size_t i = 0; i < k; ++i) tally += sign(labels[neighbours[i]]);
  if (tally > 0) return Label::Trojan;
  if (tally < 0) return Label::Golden;
  return labels[neighbours.front()];
}

inline TrainedKnn knn_train(const LabeledDataset& train, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > train.size()) {
    throw ArgumentError("knn: k must be in [1, " + std::to_string(train.size()) + "], got " + std::to_string(k));
  }
  return TrainedKnn(train.feature_matrix(), train.labels(), k);
}

inline Label knn_classify(const TrainedKnn& model, std::span<const double> query) {
  const auto nn = model.nearest(query, static_cast<std::size_t>(model.k()));
  return knn_vote(nn, model.labels(), nn.size());
}

/// Fraction of the k nearest neighbours that are Trojan.
inline double knn_score(const TrainedKnn& model, std::span<const double> query) {
  const auto nn = model.nearest(query, static_cast<std::size_t>(model.k()));
  std::size_t trojans = 0;
  for (std::size_t i : nn) trojans += is_positive(model.labels()[i]) ? 1 : 0;
  return static_cast<double>(trojans) / static_cast<double>(nn.size());
}

}  // namespace ronguard
