#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "ronguard/error.hpp"
#include "ronguard/label.hpp"

namespace ronguard {

/// Confusion tallies with Trojan as the positive class.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  std::uint64_t positives() const noexcept { return tp + fn; }
  std::uint64_t negatives() const noexcept { return tn + fp; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
    tp += o.tp, tn += o.tn, fp += o.fp, fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

struct RateMetrics {
  double tpr = 0.0;
  double tnr = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  double accuracy = 0.0;
  bool operator==(const RateMetrics&) const = default;
};

inline void tally(ConfusionCounts& c, Label predicted, Label truth) noexcept {
  const bool pred_pos = is_positive(predicted);
  if (is_positive(truth)) (pred_pos ? c.tp : c.fn) += 1;
  else (pred_pos ? c.fp : c.tn) += 1;
}

inline ConfusionCounts confusion(std::span<const Label> predictions, std::span<const Label> truth) {
  if (predictions.size() != truth.size()) {
    throw ArgumentError("confusion: " + std::to_string(predictions.size()) + " predictions for " +
                        std::to_string(truth.size()) + " labels");
  }
  if (truth.empty()) throw ArgumentError("confusion: no samples");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) tally(c, predictions[i], truth[i]);
  return c;
}

/// True when a class is absent, so its rate pair takes the 1.0 / 0.0 sentinel.
inline bool has_vacuous_rate(const ConfusionCounts& c) noexcept { return c.positives() == 0 || c.negatives() == 0; }

/// TPR = TP/(TP+FN), TNR = TN/(TN+FP), FNR = FN/(FN+TP), FPR = FP/(FP+TN).
/// A rate whose denominator is zero is 1.0 and its complement 0.0.
inline RateMetrics rates(const ConfusionCounts& c) {
  if (c.total() == 0) throw ArgumentError("rates: no samples");
  auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return static_cast<double>(num) / static_cast<double>(den);
  };
  RateMetrics m;
  if (c.positives() > 0) {
    m.tpr = ratio(c.tp, c.positives());
    m.fnr = ratio(c.fn, c.positives());
  } else {
    m.tpr = 1.0;
    m.fnr = 0.0;
  }
  if (c.negatives() > 0) {
    m.tnr = ratio(c.tn, c.negatives());
    m.fpr = ratio(c.fp, c.negatives());
  } else {
    m.tnr = 1.0;
    m.fpr = 0.0;
  }
  m.accuracy = ratio(c.tp + c.tn, c.total());
  return m;
}

}  // namespace ronguard
