#pragma once

// Brute-force KNN: sort every training point by (distance, index), count the
// first k labels, and on an even split take the nearest point's label.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace oracle {

inline int knn_predict(const std::vector<std::vector<double>>& points, const std::vector<int>& labels,
                       const std::vector<double>& query, int k) {
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double s = 0.0;
    for (std::size_t d = 0; d < query.size(); ++d) s += (points[i][d] - query[d]) * (points[i][d] - query[d]);
    order.emplace_back(std::sqrt(s), i);
  }
  std::sort(order.begin(), order.end());
  int votes = 0;
  for (int i = 0; i < k; ++i) votes += labels[order[static_cast<std::size_t>(i)].second];
  if (votes == 0) return labels[order.front().second];
  return votes > 0 ? 1 : -1;
}

}  // namespace oracle
