#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ronguard/dataset.hpp"
#include "ronguard/knn.hpp"
#include "ronguard/metrics.hpp"
#include "ronguard/parallel.hpp"
#include "ronguard/seed.hpp"
#include "ronguard/svm.hpp"

namespace ronguard {

/// Repeated random chip-level subsampling used inside tuning.
struct ValidationPlan {
  std::size_t n_reps = 10;
  double train_fraction = 0.75;
  TieBreak tie_break = TieBreak::PreferPositive;
  unsigned threads = 1;
  std::size_t max_resample_attempts = 100;
};

/// Rates averaged over validation repetitions, plus the pooled counts.
struct ValidationScore {
  double accuracy = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  ConfusionCounts pooled;
  bool operator==(const ValidationScore&) const = default;
};

struct SweepResult {
  int k = 0;
  ValidationScore score;
  bool operator==(const SweepResult&) const = default;
};

struct GridSpec {
  std::vector<double> c_values{0.01, 0.1, 1.0, 10.0, 100.0, 1000.0};
  std::vector<double> gamma_values{0.001, 0.01, 0.1, 1.0, 10.0};

  void validate() const {
    auto check = [](const std::vector<double>& v, const char* name) {
      if (v.empty()) throw ArgumentError(std::string("grid: ") + name + " list is empty");
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || !std::isfinite(v[i])) throw ArgumentError(std::string("grid: ") + name + " must be > 0");
        if (i > 0 && !(v[i] > v[i - 1])) throw ArgumentError(std::string("grid: ") + name + " must be strictly increasing");
      }
    };
    check(c_values, "C");
    check(gamma_values, "gamma");
  }
};

struct GridCell {
  double c = 0.0;
  double gamma = 0.0;
  ValidationScore score;
  bool operator==(const GridCell&) const = default;
};

struct GridSearchResult {
  GridCell best;
  std::vector<GridCell> cells;  ///< in evaluation order
};

/// One standardized train/validation pair; the scaler is fit on `train` only.
struct ValidationFold {
  LabeledDataset train;
  LabeledDataset validation;
};

inline std::size_t fold_train_chips(std::size_t n_chips, double fraction) {
  if (n_chips < 2) throw ArgumentError("validation needs at least 2 chips, have " + std::to_string(n_chips));
  if (!(fraction > 0.0 && fraction < 1.0)) throw ArgumentError("validation train fraction must be in (0, 1)");
  const auto n = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n_chips)));
  return std::clamp<std::size_t>(n, 1, n_chips - 1);
}

/// Folds depend only on (data, plan, seed, repetition); every tuned
/// configuration is scored on the same folds.
inline std::vector<ValidationFold> make_validation_folds(const LabeledDataset& data, const ValidationPlan& plan,
                                                         std::uint64_t seed) {
  if (plan.n_reps < 1) throw ArgumentError("validation needs n_reps >= 1");
  const std::size_t n_train = fold_train_chips(data.n_chips(), plan.train_fraction);
  std::vector<ValidationFold> folds;
  folds.reserve(plan.n_reps);
  for (std::size_t rep = 0; rep < plan.n_reps; ++rep) {
    bool done = false;
    for (std::size_t attempt = 0; attempt < plan.max_resample_attempts && !done; ++attempt) {
      auto split = split_by_chip(data, n_train, derive_seed(seed, {rep, attempt}));
      auto both = [](const LabeledDataset& d) { return d.count(Label::Trojan) > 0 && d.count(Label::Golden) > 0; };
      if (!both(split.train) || !both(split.test)) continue;
      Scaler scaler;
      try {
        scaler = fit_scaler(split.train);
      } catch (const DegenerateFeatureError&) {
        continue;
      }
      folds.push_back({apply_scaler(scaler, split.train), apply_scaler(scaler, split.test)});
      done = true;
    }
    if (!done) {
      throw DataError("could not draw a validation fold with both classes on each side after " +
                      std::to_string(plan.max_resample_attempts) + " attempts");
    }
  }
  return folds;
}

namespace detail {

inline ValidationScore mean_score(std::span<const ConfusionCounts> per_fold) {
  ValidationScore s;
  for (const auto& c : per_fold) {
    const auto r = rates(c);
    s.accuracy += r.accuracy;
    s.fpr += r.fpr;
    s.fnr += r.fnr;
    s.pooled += c;
  }
  const auto n = static_cast<double>(per_fold.size());
  s.accuracy /= n;
  s.fpr /= n;
  s.fnr /= n;
  return s;
}

}  // namespace detail

/**
 * Validation accuracy / FPR / FNR of KNN for every k in [k_min, k_max].
 * Each validation point's neighbour list is computed once per fold and
 * reused for all k.
 */
inline std::vector<SweepResult> k_sweep(const LabeledDataset& train, int k_min, int k_max, const ValidationPlan& plan,
                                        std::uint64_t seed) {
  if (k_min < 1 || k_max < k_min) {
    throw ArgumentError("k range [" + std::to_string(k_min) + ", " + std::to_string(k_max) + "] is invalid");
  }
  const auto folds = make_validation_folds(train, plan, seed);
  for (const auto& f : folds) {
    if (static_cast<std::size_t>(k_max) > f.train.size()) {
      throw ArgumentError("k_max " + std::to_string(k_max) + " exceeds the validation fold size " +
                          std::to_string(f.train.size()));
    }
  }
  const std::size_t n_k = static_cast<std::size_t>(k_max - k_min + 1);
  // per_fold[f][k - k_min]
  std::vector<std::vector<ConfusionCounts>> per_fold(folds.size(), std::vector<ConfusionCounts>(n_k));
  parallel_for(folds.size(), plan.threads, [&](std::size_t f) {
    const TrainedKnn model = knn_train(folds[f].train, k_max);
    const auto& val = folds[f].validation;
    for (const auto& s : val.samples()) {
      const auto nn = model.nearest(s.features, static_cast<std::size_t>(k_max));
      for (std::size_t ki = 0; ki < n_k; ++ki) {
        tally(per_fold[f][ki], knn_vote(nn, model.labels(), static_cast<std::size_t>(k_min) + ki), s.label());
      }
    }
  });
  std::vector<SweepResult> out;
  out.reserve(n_k);
  for (std::size_t ki = 0; ki < n_k; ++ki) {
    std::vector<ConfusionCounts> counts;
    for (const auto& f : per_fold) counts.push_back(f[ki]);
    out.push_back({k_min + static_cast<int>(ki), detail::mean_score(counts)});
  }
  return out;
}

/// Smallest k, among those within `accuracy_slack` of the best accuracy,
/// that attains the lowest FPR.
inline int select_k(std::span<const SweepResult> results, double accuracy_slack = 0.02) {
  if (results.empty()) throw ArgumentError("select_k: no sweep results");
  double best_acc = -1.0;
  for (const auto& r : results) best_acc = std::max(best_acc, r.score.accuracy);
  const SweepResult* pick = nullptr;
  for (const auto& r : results) {
    if (r.score.accuracy + 1e-12 < best_acc - accuracy_slack) continue;
    if (!pick || r.score.fpr < pick->score.fpr || (r.score.fpr == pick->score.fpr && r.k < pick->k)) pick = &r;
  }
  return pick->k;
}

/// Grid ordering: higher accuracy, then lower FPR, then smaller C, then smaller gamma.
inline bool better_cell(const GridCell& a, const GridCell& b) {
  if (a.score.accuracy != b.score.accuracy) return a.score.accuracy > b.score.accuracy;
  if (a.score.fpr != b.score.fpr) return a.score.fpr < b.score.fpr;
  if (a.c != b.c) return a.c < b.c;
  return a.gamma < b.gamma;
}

struct SvmTuningOptions {
  bool balanced = true;  ///< inverse-frequency class weights on C
  double tol = 1e-3;
  long max_passes = 10000;
};

/// Scores arbitrary (C, gamma) candidates on shared folds; `cells` keeps the
/// candidate order and `best` is the maximum under better_cell.
inline GridSearchResult search_svm_cells(const LabeledDataset& train,
                                         std::span<const std::pair<double, double>> candidates,
                                         const ValidationPlan& plan, std::uint64_t seed,
                                         const SvmTuningOptions& svm = {}) {
  if (candidates.empty()) throw ArgumentError("grid: no candidates");
  const auto folds = make_validation_folds(train, plan, seed);
  struct Prepared {
    FeatureMatrix points;
    std::vector<Label> labels;
    std::vector<double> sq_dist;
    FeatureMatrix val_points;
    std::vector<Label> val_labels;
  };
  std::vector<Prepared> prep(folds.size());
  parallel_for(folds.size(), plan.threads, [&](std::size_t f) {
    prep[f].points = folds[f].train.feature_matrix();
    prep[f].labels = folds[f].train.labels();
    prep[f].sq_dist = pairwise_squared_distances(prep[f].points);
    prep[f].val_points = folds[f].validation.feature_matrix();
    prep[f].val_labels = folds[f].validation.labels();
  });

  std::vector<GridCell> cells(candidates.size());
  parallel_for(candidates.size(), plan.threads, [&](std::size_t ci) {
    const auto [c, gamma] = candidates[ci];
    std::vector<ConfusionCounts> counts;
    for (const auto& p : prep) {
      SvmParams params;
      params.c = c;
      params.gamma = gamma;
      params.tol = svm.tol;
      params.max_passes = svm.max_passes;
      params.tie_break = plan.tie_break;
      if (svm.balanced) params.class_weights = balanced_class_weights(p.labels);
      const TrainedSvm model = svm_train(p.points, p.labels, params, p.sq_dist);
      std::vector<Label> pred;
      pred.reserve(p.val_points.rows());
      for (std::size_t i = 0; i < p.val_points.rows(); ++i) pred.push_back(svm_classify(model, p.val_points.row(i)));
      counts.push_back(confusion(pred, p.val_labels));
    }
    cells[ci] = {c, gamma, detail::mean_score(counts)};
  });

  GridCell best = cells.front();
  for (const auto& cell : cells)
    if (better_cell(cell, best)) best = cell;
  return {best, std::move(cells)};
}

/// Exhaustive (C, gamma) search over the grid, C-major order.
inline GridSearchResult grid_search(const LabeledDataset& train, const GridSpec& grid, const ValidationPlan& plan,
                                    std::uint64_t seed, const SvmTuningOptions& svm = {}) {
  grid.validate();
  std::vector<std::pair<double, double>> candidates;
  for (double c : grid.c_values)
    for (double g : grid.gamma_values) candidates.emplace_back(c, g);
  return search_svm_cells(train, candidates, plan, seed, svm);
}

}  // namespace ronguard
