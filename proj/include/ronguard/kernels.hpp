#pragma once

#include <cmath>
#include <span>
#include <string>

#include "ronguard/error.hpp"

namespace ronguard {

namespace detail {

inline void check_same_dim(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ArgumentError("dimension mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
}

}  // namespace detail

inline double squared_distance(std::span<const double> x, std::span<const double> y) {
  detail::check_same_dim(x, y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

inline double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  return std::sqrt(squared_distance(x, y));
}

/// Gaussian radial basis function exp(-gamma * |x - y|^2).
inline double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ArgumentError("rbf gamma must be > 0");
  return std::exp(-gamma * squared_distance(x, y));
}

}  // namespace ronguard
