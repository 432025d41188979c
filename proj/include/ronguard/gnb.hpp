#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ronguard/dataset.hpp"
#include "ronguard/error.hpp"
#include "ronguard/label.hpp"

namespace ronguard {

inline constexpr double kDefaultVarianceFloor = 1e-9;

/// Index 0 is Golden, 1 is Trojan.
constexpr std::size_t class_index(Label l) noexcept { return l == Label::Trojan ? 1 : 0; }

/// Gaussian naive Bayes: per-class prior and per-feature normal densities.
class TrainedGnb {
 public:
  TrainedGnb(std::array<double, 2> priors, std::array<std::vector<double>, 2> means,
             std::array<std::vector<double>, 2> variances, double variance_floor, TieBreak tie_break)
      : priors_(priors), means_(std::move(means)), vars_(std::move(variances)), floor_(variance_floor), tie_(tie_break) {
    if (!(priors_[0] > 0.0 && priors_[0] < 1.0 && priors_[1] > 0.0 && priors_[1] < 1.0) ||
        std::abs(priors_[0] + priors_[1] - 1.0) > 1e-12) {
      throw ArgumentError("gnb: priors must lie in (0,1) and sum to 1");
    }
    if (means_[0].size() != means_[1].size() || vars_[0].size() != means_[0].size() ||
        vars_[1].size() != means_[0].size()) {
      throw ArgumentError("gnb: per-class parameter lengths differ");
    }
    for (const auto& v : vars_)
      for (double s2 : v)
        if (!(s2 >= floor_) || !std::isfinite(s2)) throw ArgumentError("gnb: variance below floor");
  }

  double prior(Label l) const noexcept { return priors_[class_index(l)]; }
  const std::vector<double>& mean(Label l) const noexcept { return means_[class_index(l)]; }
  const std::vector<double>& variance(Label l) const noexcept { return vars_[class_index(l)]; }
  double variance_floor() const noexcept { return floor_; }
  TieBreak tie_break() const noexcept { return tie_; }
  std::size_t n_features() const noexcept { return means_[0].size(); }

  /// log P(C) + sum_i log N(x_i; mu, sigma^2)
  double log_score(Label l, std::span<const double> x) const {
    const std::size_t c = class_index(l);
    double s = std::log(priors_[c]);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - means_[c][i];
      s += -0.5 * std::log(2.0 * std::numbers::pi * vars_[c][i]) - 0.5 * d * d / vars_[c][i];
    }
    return s;
  }

 private:
  std::array<double, 2> priors_;
  std::array<std::vector<double>, 2> means_;
  std::array<std::vector<double>, 2> vars_;
  double floor_;
  TieBreak tie_;
};

struct GnbPrediction {
  Label label;
  double posterior;         ///< posterior of `label`
  double trojan_posterior;  ///< P(Trojan | x)
};

/// Class priors are class frequencies; variances are maximum-likelihood
/// (divide by n) and floored at `variance_floor`.
inline TrainedGnb gnb_train(const LabeledDataset& train, double variance_floor = kDefaultVarianceFloor,
                            TieBreak tie_break = TieBreak::PreferPositive) {
  if (!(variance_floor > 0.0)) throw ArgumentError("gnb: variance floor must be > 0");
  const std::size_t d = train.n_features();
  std::array<std::size_t, 2> count{0, 0};
  std::array<std::vector<double>, 2> mean{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  std::array<std::vector<double>, 2> var{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (const auto& s : train.samples()) {
    const auto c = class_index(s.label());
    ++count[c];
    for (std::size_t j = 0; j < d; ++j) mean[c][j] += s.features[j];
  }
  for (std::size_t c = 0; c < 2; ++c) {
    if (count[c] < 2) {
      throw ArgumentError(std::string("gnb: class ") + (c ? "trojan" : "golden") + " needs at least 2 samples, has " +
                          std::to_string(count[c]));
    }
    for (double& m : mean[c]) m /= static_cast<double>(count[c]);
  }
  for (const auto& s : train.samples()) {
    const auto c = class_index(s.label());
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = s.features[j] - mean[c][j];
      var[c][j] += dev * dev;
    }
  }
  for (std::size_t c = 0; c < 2; ++c)
    for (double& v : var[c]) v = std::max(v / static_cast<double>(count[c]), variance_floor);

  const double n = static_cast<double>(count[0] + count[1]);
  const double p_trojan = static_cast<double>(count[1]) / n;
  return TrainedGnb({1.0 - p_trojan, p_trojan}, std::move(mean), std::move(var), variance_floor, tie_break);
}

/// MAP label with the normalized posterior, computed in log space.
inline GnbPrediction gnb_classify(const TrainedGnb& model, std::span<const double> query) {
  if (query.size() != model.n_features()) {
    throw ArgumentError("gnb: query has " + std::to_string(query.size()) + " features, model has " +
                        std::to_string(model.n_features()));
  }
  const double s_neg = model.log_score(Label::Golden, query);
  const double s_pos = model.log_score(Label::Trojan, query);
  // Logistic form of the normalized posterior; equal scores give exactly 0.5.
  const double p_pos = 1.0 / (1.0 + std::exp(s_neg - s_pos));
  const double p_neg = 1.0 / (1.0 + std::exp(s_pos - s_neg));

  Label label;
  if (s_pos > s_neg) label = Label::Trojan;
  else if (s_neg > s_pos) label = Label::Golden;
  else label = tie_label(model.tie_break());
  return {label, label == Label::Trojan ? p_pos : p_neg, p_pos};
}

}  // namespace ronguard
