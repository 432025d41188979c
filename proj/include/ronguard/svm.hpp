#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ronguard/dataset.hpp"
#include "ronguard/error.hpp"
#include "ronguard/kernels.hpp"
#include "ronguard/label.hpp"
#include "ronguard/matrix.hpp"

namespace ronguard {

/// Multipliers applied to C for each class.
struct ClassWeights {
  double negative = 1.0;
  double positive = 1.0;
  bool operator==(const ClassWeights&) const = default;
};

/// Inverse-frequency weights n_total / (2 n_k), so both classes carry equal
/// total penalty regardless of the golden/Trojan imbalance.
inline ClassWeights balanced_class_weights(std::size_t n_negative, std::size_t n_positive) {
  if (n_negative == 0 || n_positive == 0) throw ArgumentError("balanced weights need both classes present");
  const double n = static_cast<double>(n_negative + n_positive);
  return {n / (2.0 * static_cast<double>(n_negative)), n / (2.0 * static_cast<double>(n_positive))};
}

inline ClassWeights balanced_class_weights(std::span<const Label> y) {
  const auto pos = static_cast<std::size_t>(std::ranges::count(y, Label::Trojan));
  return balanced_class_weights(y.size() - pos, pos);
}

struct SvmParams {
  double c = 1.0;
  double gamma = 0.1;
  std::optional<ClassWeights> class_weights;  ///< none = both classes use C
  double tol = 1e-3;                          ///< KKT tolerance
  long max_passes = 10000;                    ///< iteration cap, in units of n pair updates
  TieBreak tie_break = TieBreak::PreferPositive;
};

/// Fitted RBF-kernel SVM. Only support vectors (alpha > 0) are kept.
class TrainedSvm {
 public:
  TrainedSvm(FeatureMatrix support_vectors, std::vector<double> alpha, std::vector<Label> labels, double bias,
             double gamma, double c_negative, double c_positive, TieBreak tie_break)
      : sv_(std::move(support_vectors)),
        alpha_(std::move(alpha)),
        labels_(std::move(labels)),
        bias_(bias),
        gamma_(gamma),
        c_neg_(c_negative),
        c_pos_(c_positive),
        tie_(tie_break) {
    if (alpha_.size() != sv_.rows() || labels_.size() != sv_.rows()) {
      throw ArgumentError("svm: support vector, alpha and label counts differ");
    }
    if (!(gamma_ > 0.0)) throw ArgumentError("svm: gamma must be > 0");
    if (!(c_neg_ > 0.0) || !(c_pos_ > 0.0)) throw ArgumentError("svm: class penalties must be > 0");
    for (std::size_t i = 0; i < alpha_.size(); ++i) {
      const double upper = labels_[i] == Label::Trojan ? c_pos_ : c_neg_;
      if (!(alpha_[i] >= 0.0) || alpha_[i] > upper * (1.0 + 1e-12)) {
        throw ArgumentError("svm: alpha " + std::to_string(i) + " outside [0, C]");
      }
    }
  }

  const FeatureMatrix& support_vectors() const noexcept { return sv_; }
  const std::vector<double>& alpha() const noexcept { return alpha_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }
  double bias() const noexcept { return bias_; }
  double gamma() const noexcept { return gamma_; }
  double c_negative() const noexcept { return c_neg_; }
  double c_positive() const noexcept { return c_pos_; }
  TieBreak tie_break() const noexcept { return tie_; }
  std::size_t n_features() const noexcept { return sv_.cols(); }

 private:
  FeatureMatrix sv_;
  std::vector<double> alpha_;
  std::vector<Label> labels_;
  double bias_;
  double gamma_;
  double c_neg_;
  double c_pos_;
  TieBreak tie_;
};

/// Raw output of the dual solver, one alpha per training point.
struct DualSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  long iterations = 0;
  double max_violation = 0.0;             ///< final maximal-violating-pair gap
  std::vector<double> objective_trace;  ///< dual objective after each update, if requested
};

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
inline double dual_objective(std::span<const double> kernel, std::span<const Label> y, std::span<const double> alpha) {
  const std::size_t n = y.size();
  double linear = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    linear += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) quad += alpha[i] * alpha[j] * sign(y[i]) * sign(y[j]) * kernel[i * n + j];
  }
  return linear - 0.5 * quad;
}

/**
 * Soft-margin SVM dual by sequential minimal optimization.
 *
 * Minimizes 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij subject to
 * 0 <= a_i <= upper_i and y'a = 0. Each step updates the pair chosen by
 * second-order working-set selection: i maximizes -y_i grad_i over the "up"
 * set, j minimizes the predicted objective change over the "low" set. Stops
 * when the maximal violating pair gap falls below `tol`, which bounds every
 * KKT residual of the returned (alpha, bias) by `tol`.
 *
 * `kernel` is the full n x n kernel matrix, row-major.
 */
inline DualSolution solve_svm_dual(std::span<const double> kernel, std::span<const Label> y,
                                   std::span<const double> upper, double tol, long max_passes,
                                   bool record_objective = false) {
  const std::size_t n = y.size();
  if (kernel.size() != n * n || upper.size() != n) throw ArgumentError("svm dual: inconsistent problem sizes");
  if (max_passes < 1) throw ArgumentError("svm dual: max_passes must be >= 1");
  constexpr double kTau = 1e-12;
  auto K = [&](std::size_t i, std::size_t j) { return kernel[i * n + j]; };
  auto ys = [&](std::size_t i) { return static_cast<double>(sign(y[i])); };

  DualSolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double>& a = sol.alpha;
  std::vector<double> grad(n, -1.0);

  auto in_up = [&](std::size_t t) { return y[t] == Label::Trojan ? a[t] < upper[t] : a[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return y[t] == Label::Trojan ? a[t] > 0.0 : a[t] < upper[t]; };
  auto objective = [&] {
    double f = 0.0;
    for (std::size_t t = 0; t < n; ++t) f += a[t] * (grad[t] - 1.0);
    return -0.5 * f;
  };

  const long max_iter = max_passes * static_cast<long>(std::max<std::size_t>(n, 1));
  double gap = 0.0;
  while (true) {
    std::ptrdiff_t i = -1;
    double g_max = -std::numeric_limits<double>::infinity();
    double g_max2 = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -ys(t) * grad[t] >= g_max) {
        g_max = -ys(t) * grad[t];
        i = static_cast<std::ptrdiff_t>(t);
      }
    }
    std::ptrdiff_t j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      g_max2 = std::max(g_max2, ys(t) * grad[t]);
      const double b = g_max + ys(t) * grad[t];
      if (i >= 0 && b > 0.0) {
        double quad = K(i, i) + K(t, t) - 2.0 * K(i, t);
        if (quad <= 0.0) quad = kTau;
        if (-(b * b) / quad <= best) {
          best = -(b * b) / quad;
          j = static_cast<std::ptrdiff_t>(t);
        }
      }
    }
    gap = g_max + g_max2;
    if (i < 0 || j < 0 || gap < tol) break;
    if (sol.iterations >= max_iter) {
      throw ConvergenceError(gap, "svm dual did not converge within " + std::to_string(max_iter) +
                                      " iterations (max KKT violation " + std::to_string(gap) + ")");
    }
    ++sol.iterations;

    const auto ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
    const double ci = upper[ii], cj = upper[jj];
    const double old_i = a[ii], old_j = a[jj];
    double quad = K(ii, ii) + K(jj, jj) - 2.0 * K(ii, jj);
    if (quad <= 0.0) quad = kTau;

    if (y[ii] != y[jj]) {
      const double delta = (-grad[ii] - grad[jj]) / quad;
      const double diff = a[ii] - a[jj];
      a[ii] += delta;
      a[jj] += delta;
      if (diff > 0.0) {
        if (a[jj] < 0.0) { a[jj] = 0.0; a[ii] = diff; }
      } else {
        if (a[ii] < 0.0) { a[ii] = 0.0; a[jj] = -diff; }
      }
      if (diff > ci - cj) {
        if (a[ii] > ci) { a[ii] = ci; a[jj] = ci - diff; }
      } else {
        if (a[jj] > cj) { a[jj] = cj; a[ii] = cj + diff; }
      }
    } else {
      const double delta = (grad[ii] - grad[jj]) / quad;
      const double sum = a[ii] + a[jj];
      a[ii] -= delta;
      a[jj] += delta;
      if (sum > ci) {
        if (a[ii] > ci) { a[ii] = ci; a[jj] = sum - ci; }
      } else {
        if (a[jj] < 0.0) { a[jj] = 0.0; a[ii] = sum; }
      }
      if (sum > cj) {
        if (a[jj] > cj) { a[jj] = cj; a[ii] = sum - cj; }
      } else {
        if (a[ii] < 0.0) { a[ii] = 0.0; a[jj] = sum; }
      }
    }

    const double d_i = (a[ii] - old_i) * ys(ii);
    const double d_j = (a[jj] - old_j) * ys(jj);
    for (std::size_t t = 0; t < n; ++t) grad[t] += ys(t) * (K(t, ii) * d_i + K(t, jj) * d_j);
    if (record_objective) sol.objective_trace.push_back(objective());
  }
  sol.max_violation = std::max(gap, 0.0);

  // Bias: mean of -y_i grad_i over free vectors, else the midpoint of the
  // feasible interval left by the bound vectors.
  double free_sum = 0.0;
  std::size_t n_free = 0;
  double up_max = -std::numeric_limits<double>::infinity();
  double low_min = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    const double v = -ys(t) * grad[t];
    if (a[t] > 0.0 && a[t] < upper[t]) {
      free_sum += v;
      ++n_free;
    }
    if (in_up(t)) up_max = std::max(up_max, v);
    if (in_low(t)) low_min = std::min(low_min, v);
  }
  if (n_free > 0) {
    sol.bias = free_sum / static_cast<double>(n_free);
  } else if (std::isfinite(up_max) && std::isfinite(low_min)) {
    sol.bias = 0.5 * (up_max + low_min);
  } else {
    sol.bias = std::isfinite(up_max) ? up_max : low_min;
  }
  return sol;
}

/// Row-major n x n matrix of squared Euclidean distances between rows.
inline std::vector<double> pairwise_squared_distances(const FeatureMatrix& x) {
  const std::size_t n = x.rows();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = squared_distance(x.row(i), x.row(j));
  }
  return d;
}

inline std::vector<double> rbf_kernel_matrix(std::span<const double> sq_dist, double gamma) {
  std::vector<double> k(sq_dist.size());
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = std::exp(-gamma * sq_dist[i]);
  return k;
}

/// Trains on already-standardized points. `sq_dist`, when given, must be
/// pairwise_squared_distances(points); grid search shares it across cells.
inline TrainedSvm svm_train(const FeatureMatrix& points, std::span<const Label> y, const SvmParams& params,
                            std::span<const double> sq_dist = {}, DualSolution* solution_out = nullptr,
                            bool record_objective = false) {
  if (points.rows() != y.size()) throw ArgumentError("svm: label count does not match point count");
  if (!(params.c > 0.0) || !std::isfinite(params.c)) throw ArgumentError("svm: C must be > 0");
  if (!(params.gamma > 0.0) || !std::isfinite(params.gamma)) throw ArgumentError("svm: gamma must be > 0");
  const auto n_pos = static_cast<std::size_t>(std::ranges::count(y, Label::Trojan));
  if (n_pos == 0 || n_pos == y.size()) throw ArgumentError("svm: training set must contain both classes");

  const ClassWeights w = params.class_weights.value_or(ClassWeights{});
  if (!(w.negative > 0.0) || !(w.positive > 0.0)) throw ArgumentError("svm: class weights must be > 0");
  const double c_neg = params.c * w.negative, c_pos = params.c * w.positive;

  std::vector<double> own_dist;
  if (sq_dist.empty()) {
    own_dist = pairwise_squared_distances(points);
    sq_dist = own_dist;
  }
  if (sq_dist.size() != points.rows() * points.rows()) throw ArgumentError("svm: distance matrix has wrong size");
  const auto kernel = rbf_kernel_matrix(sq_dist, params.gamma);
  std::vector<double> upper(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) upper[i] = y[i] == Label::Trojan ? c_pos : c_neg;

  DualSolution sol = solve_svm_dual(kernel, y, upper, params.tol, params.max_passes, record_objective);

  std::vector<std::size_t> sv;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (sol.alpha[i] > 0.0) sv.push_back(i);
  FeatureMatrix sv_points(sv.size(), points.cols());
  std::vector<double> alpha;
  std::vector<Label> labels;
  for (std::size_t r = 0; r < sv.size(); ++r) {
    std::ranges::copy(points.row(sv[r]), sv_points.row(r).begin());
    alpha.push_back(sol.alpha[sv[r]]);
    labels.push_back(y[sv[r]]);
  }
  TrainedSvm model(std::move(sv_points), std::move(alpha), std::move(labels), sol.bias, params.gamma, c_neg, c_pos,
                   params.tie_break);
  if (solution_out) *solution_out = std::move(sol);
  return model;
}

inline TrainedSvm svm_train(const LabeledDataset& train, const SvmParams& params) {
  return svm_train(train.feature_matrix(), train.labels(), params);
}

/// sum_i alpha_i y_i k(sv_i, query) + b
inline double svm_decision(const TrainedSvm& model, std::span<const double> query) {
  if (query.size() != model.n_features()) {
    throw ArgumentError("svm: query has " + std::to_string(query.size()) + " features, model has " +
                        std::to_string(model.n_features()));
  }
  const auto& sv = model.support_vectors();
  double f = model.bias();
  for (std::size_t i = 0; i < sv.rows(); ++i) {
    f += model.alpha()[i] * sign(model.labels()[i]) * std::exp(-model.gamma() * squared_distance(sv.row(i), query));
  }
  return f;
}

inline Label svm_classify(const TrainedSvm& model, std::span<const double> query) {
  const double f = svm_decision(model, query);
  if (f > 0.0) return Label::Trojan;
  if (f < 0.0) return Label::Golden;
  return tie_label(model.tie_break());
}

/// Largest amount by which (alpha_i, y_i f(x_i)) misses its KKT condition:
/// alpha = 0 needs y f >= 1, 0 < alpha < C needs y f = 1, alpha = C needs y f <= 1.
inline double kkt_residual(double alpha, double upper, Label y, double decision) {
  const double margin = sign(y) * decision;
  if (alpha <= 0.0) return std::max(0.0, 1.0 - margin);
  if (alpha >= upper) return std::max(0.0, margin - 1.0);
  return std::abs(margin - 1.0);
}

}  // namespace ronguard
