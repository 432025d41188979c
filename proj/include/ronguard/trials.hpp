#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ronguard/dataset.hpp"
#include "ronguard/ensemble.hpp"
#include "ronguard/metrics.hpp"
#include "ronguard/parallel.hpp"
#include "ronguard/seed.hpp"
#include "ronguard/tuning.hpp"

namespace ronguard {

/// A classifier configuration to benchmark: one kind, or an ensemble of
/// two or three distinct kinds.
struct ClassifierSpec {
  std::string name;
  std::vector<ClassifierKind> members;

  bool is_ensemble() const noexcept { return members.size() > 1; }

  /// "knn", "svm", "gnb" or "ensemble:a+b[+c]".
  static ClassifierSpec parse(std::string_view token) {
    constexpr std::string_view prefix = "ensemble:";
    ClassifierSpec spec{std::string(token), {}};
    if (token.substr(0, prefix.size()) != prefix) {
      spec.members.push_back(parse_classifier_kind(token));
      return spec;
    }
    std::string_view rest = token.substr(prefix.size());
    while (true) {
      const auto plus = rest.find('+');
      spec.members.push_back(parse_classifier_kind(rest.substr(0, plus)));
      if (plus == std::string_view::npos) break;
      rest = rest.substr(plus + 1);
    }
    if (spec.members.size() < 2 || spec.members.size() > 3) {
      throw ArgumentError("ensemble '" + spec.name + "' must combine 2 or 3 classifiers");
    }
    for (std::size_t i = 0; i < spec.members.size(); ++i)
      for (std::size_t j = i + 1; j < spec.members.size(); ++j)
        if (spec.members[i] == spec.members[j]) throw ArgumentError("ensemble '" + spec.name + "' repeats a member");
    return spec;
  }
};

/// The three single classifiers and the four ensemble combinations.
inline std::vector<ClassifierSpec> standard_classifiers() {
  std::vector<ClassifierSpec> out;
  for (const char* t : {"knn", "svm", "gnb", "ensemble:knn+svm+gnb", "ensemble:knn+svm", "ensemble:knn+gnb",
                        "ensemble:svm+gnb"})
    out.push_back(ClassifierSpec::parse(t));
  return out;
}

struct TrialOptions {
  ValidationPlan validation;
  int k_min = 1;
  int k_max = 40;
  double accuracy_slack = 0.02;
  GridSpec grid;
  SvmTuningOptions svm;
  bool tune_per_trial = false;
  std::optional<int> fixed_k;                          ///< skip the k sweep
  std::optional<std::pair<double, double>> fixed_svm;  ///< (C, gamma); skip the grid search
  TieBreak tie_break = TieBreak::PreferPositive;           ///< SVM / GNB exact ties
  TieBreak ensemble_tie_break = TieBreak::PreferPositive;  ///< split two-member votes
  double variance_floor = kDefaultVarianceFloor;
  unsigned threads = 1;
};

/// Hyperparameters in force for one training size (and trial, when tuning per trial).
struct TunedParams {
  std::size_t size = 0;
  std::size_t trial = 0;
  int k = 0;
  double c = 0.0;
  double gamma = 0.0;
};

struct TrialRecord {
  std::string classifier;
  std::size_t size = 0;
  std::size_t trial = 0;
  ConfusionCounts counts;
  RateMetrics metrics;
  bool vacuous = false;  ///< a class was absent from the test chips
};

struct ReportRow {
  std::string classifier;
  std::size_t size = 0;
  RateMetrics mean;
};

struct TrialReport {
  std::vector<std::string> classifiers;
  std::vector<std::size_t> sizes;
  std::vector<ReportRow> rows;
  std::vector<TrialRecord> trials;
  std::vector<TunedParams> tuning;
  std::size_t n_trials = 0;
  std::uint64_t seed = 0;

  const ReportRow& row(std::string_view classifier, std::size_t size) const {
    for (const auto& r : rows)
      if (r.classifier == classifier && r.size == size) return r;
    throw ArgumentError("report has no row for " + std::string(classifier) + " at size " + std::to_string(size));
  }
};

/// Unweighted mean of per-trial rates.
inline RateMetrics mean_metrics(std::span<const RateMetrics> per_trial) {
  RateMetrics m;
  for (const auto& r : per_trial) {
    m.tpr += r.tpr;
    m.tnr += r.tnr;
    m.fpr += r.fpr;
    m.fnr += r.fnr;
    m.accuracy += r.accuracy;
  }
  const auto n = static_cast<double>(per_trial.size());
  m.tpr /= n, m.tnr /= n, m.fpr /= n, m.fnr /= n, m.accuracy /= n;
  return m;
}

namespace detail {

// Stream tags for derive_seed.
inline constexpr std::uint64_t kSplitStream = 1;
inline constexpr std::uint64_t kTuneStream = 2;

inline int knn_k_upper_bound(const LabeledDataset& train, const TrialOptions& opt) {
  std::size_t smallest = train.size();
  for (const auto& chip : train.chips()) smallest = std::min(smallest, chip.indices.size());
  const auto fold_chips = fold_train_chips(train.n_chips(), opt.validation.train_fraction);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(opt.k_max), smallest * fold_chips));
}

inline int tune_k(const LabeledDataset& train, const TrialOptions& opt, std::uint64_t seed) {
  if (opt.fixed_k) return *opt.fixed_k;
  ValidationPlan plan = opt.validation;
  plan.threads = 1;
  const int k_hi = knn_k_upper_bound(train, opt);
  const auto sweep = k_sweep(train, std::min(opt.k_min, k_hi), k_hi, plan, seed);
  return select_k(sweep, opt.accuracy_slack);
}

inline std::pair<double, double> tune_svm(const LabeledDataset& train, const TrialOptions& opt, std::uint64_t seed) {
  if (opt.fixed_svm) return *opt.fixed_svm;
  ValidationPlan plan = opt.validation;
  plan.threads = 1;
  plan.tie_break = opt.tie_break;
  const auto best = grid_search(train, opt.grid, plan, seed, opt.svm).best;
  return {best.c, best.gamma};
}

}  // namespace detail

/**
 * Benchmarks each classifier at each training size over `n_trials` random
 * chip-level splits: the remaining chips form the test set, the scaler is fit
 * on the training chips, and per-size metrics are means over trials.
 *
 * Splits derive from (seed, size, trial), so every classifier sees the same
 * trials and the report does not depend on classifier order or threading.
 * KNN k and SVM (C, gamma) are tuned on the first trial's training split of
 * each size and reused for that size, unless `tune_per_trial` is set;
 * ensembles reuse the tuned members.
 */
inline TrialReport run_trials(const LabeledDataset& data, const std::vector<ClassifierSpec>& classifiers,
                              const std::vector<std::size_t>& sizes, std::size_t n_trials, std::uint64_t seed,
                              const TrialOptions& opt = {}) {
  if (classifiers.empty()) throw ArgumentError("run_trials: no classifiers");
  if (sizes.empty()) throw ArgumentError("run_trials: no training sizes");
  if (n_trials < 1) throw ArgumentError("run_trials: n_trials must be >= 1");
  for (std::size_t s : sizes) {
    if (s < 1 || s >= data.n_chips()) {
      throw ArgumentError("training size " + std::to_string(s) + " must be in [1, " + std::to_string(data.n_chips()) +
                          ") chips");
    }
  }
  bool need[3] = {false, false, false};
  for (const auto& spec : classifiers)
    for (auto k : spec.members) need[static_cast<int>(k)] = true;

  auto split_for = [&](std::size_t size, std::size_t trial) {
    return split_by_chip(data, size, derive_seed(seed, {detail::kSplitStream, size, trial}));
  };

  // Tuning: one entry per (size, trial) that needs its own hyperparameters.
  const std::size_t tuned_trials = opt.tune_per_trial ? n_trials : 1;
  std::vector<TunedParams> tuned(sizes.size() * tuned_trials);
  parallel_for(tuned.size(), opt.threads, [&](std::size_t idx) {
    const std::size_t si = idx / tuned_trials, t = idx % tuned_trials;
    const std::size_t size = sizes[si];
    TunedParams p{size, t, 0, 0.0, 0.0};
    const auto split = split_for(size, t);
    if (need[static_cast<int>(ClassifierKind::Knn)]) {
      p.k = detail::tune_k(split.train, opt, derive_seed(seed, {detail::kTuneStream, 0, size, t}));
    }
    if (need[static_cast<int>(ClassifierKind::Svm)]) {
      std::tie(p.c, p.gamma) = detail::tune_svm(split.train, opt, derive_seed(seed, {detail::kTuneStream, 1, size, t}));
    }
    tuned[idx] = p;
  });

  // Trials: results[spec][size][trial]
  const std::size_t n_specs = classifiers.size();
  std::vector<TrialRecord> records(n_specs * sizes.size() * n_trials);
  parallel_for(sizes.size() * n_trials, opt.threads, [&](std::size_t idx) {
    const std::size_t si = idx / n_trials, t = idx % n_trials;
    const std::size_t size = sizes[si];
    const TunedParams& hp = tuned[si * tuned_trials + (opt.tune_per_trial ? t : 0)];
    const auto split = split_for(size, t);
    const Scaler scaler = fit_scaler(split.train);
    const auto train = apply_scaler(scaler, split.train);
    const auto test = apply_scaler(scaler, split.test);
    const auto test_points = test.feature_matrix();
    const auto truth = test.labels();

    std::optional<TrainedKnn> knn;
    std::optional<TrainedSvm> svm;
    std::optional<TrainedGnb> gnb;
    if (need[static_cast<int>(ClassifierKind::Knn)]) knn = knn_train(train, hp.k);
    if (need[static_cast<int>(ClassifierKind::Svm)]) {
      SvmParams p;
      p.c = hp.c;
      p.gamma = hp.gamma;
      p.tol = opt.svm.tol;
      p.max_passes = opt.svm.max_passes;
      p.tie_break = opt.tie_break;
      if (opt.svm.balanced) p.class_weights = balanced_class_weights(train.count(Label::Golden), train.count(Label::Trojan));
      svm = svm_train(train, p);
    }
    if (need[static_cast<int>(ClassifierKind::Gnb)]) gnb = gnb_train(train, opt.variance_floor, opt.tie_break);

    auto member = [&](ClassifierKind k) -> MemberModel {
      switch (k) {
        case ClassifierKind::Knn: return *knn;
        case ClassifierKind::Svm: return *svm;
        case ClassifierKind::Gnb: return *gnb;
      }
      throw ArgumentError("unknown classifier kind");
    };

    for (std::size_t ci = 0; ci < n_specs; ++ci) {
      const auto& spec = classifiers[ci];
      std::vector<Label> pred;
      if (spec.is_ensemble()) {
        std::vector<MemberModel> members;
        for (auto k : spec.members) members.push_back(member(k));
        pred = classify_batch(Model(TrainedEnsemble(std::move(members), opt.ensemble_tie_break)), test_points);
      } else {
        pred = classify_batch(member(spec.members.front()), test_points);
      }
      TrialRecord rec{spec.name, size, t, confusion(pred, truth), {}, false};
      rec.metrics = rates(rec.counts);
      rec.vacuous = has_vacuous_rate(rec.counts);
      records[(ci * sizes.size() + si) * n_trials + t] = std::move(rec);
    }
  });

  TrialReport report;
  report.sizes = sizes;
  report.n_trials = n_trials;
  report.seed = seed;
  report.tuning = std::move(tuned);
  for (std::size_t ci = 0; ci < n_specs; ++ci) {
    report.classifiers.push_back(classifiers[ci].name);
    for (std::size_t si = 0; si < sizes.size(); ++si) {
      std::vector<RateMetrics> per_trial;
      for (std::size_t t = 0; t < n_trials; ++t) per_trial.push_back(records[(ci * sizes.size() + si) * n_trials + t].metrics);
      report.rows.push_back({classifiers[ci].name, sizes[si], mean_metrics(per_trial)});
    }
  }
  report.trials = std::move(records);
  return report;
}

}  // namespace ronguard
