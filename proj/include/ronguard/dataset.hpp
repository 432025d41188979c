#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ronguard/error.hpp"
#include "ronguard/label.hpp"
#include "ronguard/matrix.hpp"
#include "ronguard/seed.hpp"

namespace ronguard {

inline constexpr std::size_t kDefaultRos = 8;

enum class SampleKind { Golden, Trojan };

/// One averaged RO frequency fingerprint of one chip under one workload.
struct FrequencySample {
  std::string chip_id;
  int region_id = 0;
  SampleKind kind = SampleKind::Golden;
  std::string benchmark_id;  ///< Trojan benchmark name; empty for golden samples.
  std::vector<double> features;

  Label label() const noexcept { return kind == SampleKind::Trojan ? Label::Trojan : Label::Golden; }

  bool operator==(const FrequencySample&) const = default;
};

/// Sample indices belonging to one chip, in dataset order.
struct ChipGroup {
  std::string chip_id;
  std::vector<std::size_t> indices;
};

/**
 * Immutable collection of samples sharing one feature dimension, indexed by
 * chip. Chips are listed in order of first appearance.
 *
 * Features only need to be finite here; strict positivity of raw frequencies
 * is enforced where raw data enters (CSV ingestion and the generator), since
 * standardized datasets are also LabeledDatasets.
 */
class LabeledDataset {
 public:
  LabeledDataset() = default;

  explicit LabeledDataset(std::vector<FrequencySample> samples, std::size_t n_features = kDefaultRos)
      : samples_(std::move(samples)), n_features_(n_features) {
    if (n_features_ == 0) throw ArgumentError("n_features must be at least 1");
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const auto& s = samples_[i];
      if (s.features.size() != n_features_) {
        throw ArgumentError("sample " + std::to_string(i) + " has " + std::to_string(s.features.size()) +
                            " features, expected " + std::to_string(n_features_));
      }
      for (double f : s.features) {
        if (!std::isfinite(f)) throw ArgumentError("sample " + std::to_string(i) + " has a non-finite feature");
      }
      auto [it, inserted] = position.try_emplace(s.chip_id, chips_.size());
      if (inserted) chips_.push_back({s.chip_id, {}});
      chips_[it->second].indices.push_back(i);
    }
  }

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t n_chips() const noexcept { return chips_.size(); }

  const std::vector<FrequencySample>& samples() const noexcept { return samples_; }
  const FrequencySample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<ChipGroup>& chips() const noexcept { return chips_; }

  std::vector<Label> labels() const {
    std::vector<Label> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(s.label());
    return out;
  }

  std::size_t count(Label l) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(samples_.begin(), samples_.end(), [l](const auto& s) { return s.label() == l; }));
  }

  FeatureMatrix feature_matrix() const {
    FeatureMatrix m(samples_.size(), n_features_);
    for (std::size_t i = 0; i < samples_.size(); ++i) std::ranges::copy(samples_[i].features, m.row(i).begin());
    return m;
  }

  /// Samples at the given indices, in the given order.
  LabeledDataset subset(std::span<const std::size_t> indices) const {
    std::vector<FrequencySample> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(samples_.at(i));
    return LabeledDataset(std::move(out), n_features_);
  }

  bool operator==(const LabeledDataset& o) const { return n_features_ == o.n_features_ && samples_ == o.samples_; }

 private:
  std::vector<FrequencySample> samples_;
  std::size_t n_features_ = kDefaultRos;
  std::vector<ChipGroup> chips_;
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline bool parse_int(std::string_view s, long long& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline std::string format_sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

inline std::vector<std::string> csv_columns(std::size_t n_features = kDefaultRos) {
  std::vector<std::string> cols{"chip_id", "region_id", "sample_kind", "benchmark_id"};
  for (std::size_t i = 1; i <= n_features; ++i) cols.push_back("f" + std::to_string(i));
  return cols;
}

/// Parses the dataset CSV schema
/// `chip_id,region_id,sample_kind,benchmark_id,f1..fN` from a stream.
inline LabeledDataset read_csv(std::istream& in, std::size_t n_features = kDefaultRos) {
  const auto expected = csv_columns(n_features);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw EmptyDatasetError("dataset file is empty");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_commas(line);
  for (std::size_t i = 0; i < std::max(header.size(), expected.size()); ++i) {
    if (i >= header.size()) throw SchemaError(expected[i], "header is missing column '" + expected[i] + "'");
    if (i >= expected.size()) {
      std::string extra(header[i]);
      throw SchemaError(extra, "header has unexpected column '" + extra + "'");
    }
    if (header[i] != expected[i]) {
      throw SchemaError(expected[i], "header column " + std::to_string(i + 1) + " is '" + std::string(header[i]) +
                                         "', expected '" + expected[i] + "'");
    }
  }

  std::vector<FrequencySample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_commas(line);
    if (fields.size() != expected.size()) {
      throw RowError(line_no, "expected " + std::to_string(expected.size()) + " fields, found " +
                                  std::to_string(fields.size()));
    }
    FrequencySample s;
    s.chip_id = std::string(fields[0]);
    if (s.chip_id.empty()) throw RowError(line_no, "empty chip_id");
    long long region = 0;
    if (!detail::parse_int(fields[1], region) || region < 0 || region > 3) {
      throw RowError(line_no, "region_id '" + std::string(fields[1]) + "' is not an integer in 0..3");
    }
    s.region_id = static_cast<int>(region);
    if (fields[2] == "golden") {
      s.kind = SampleKind::Golden;
      if (!fields[3].empty()) throw RowError(line_no, "golden row must have an empty benchmark_id");
    } else if (fields[2] == "trojan") {
      s.kind = SampleKind::Trojan;
      s.benchmark_id = std::string(fields[3]);
    } else {
      throw RowError(line_no, "sample_kind '" + std::string(fields[2]) + "' is not golden or trojan");
    }
    s.features.reserve(n_features);
    for (std::size_t f = 0; f < n_features; ++f) {
      double v = 0.0;
      const auto field = fields[4 + f];
      if (!detail::parse_double(field, v)) {
        throw RowError(line_no, expected[4 + f] + " value '" + std::string(field) + "' is not numeric");
      }
      if (!std::isfinite(v) || v <= 0.0) {
        throw RowError(line_no, expected[4 + f] + " value '" + std::string(field) + "' must be finite and positive");
      }
      s.features.push_back(v);
    }
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw EmptyDatasetError("dataset has no data rows");
  return LabeledDataset(std::move(samples), n_features);
}

inline LabeledDataset load_csv(const std::string& path, std::size_t n_features = kDefaultRos) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open dataset '" + path + "'");
  return read_csv(in, n_features);
}

/// Writes the dataset schema; frequencies carry 6 significant digits.
inline void write_csv(std::ostream& out, const LabeledDataset& data) {
  const auto cols = csv_columns(data.n_features());
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& s : data.samples()) {
    out << s.chip_id << ',' << s.region_id << ',' << (s.kind == SampleKind::Trojan ? "trojan" : "golden") << ','
        << s.benchmark_id;
    for (double f : s.features) out << ',' << detail::format_sig6(f);
    out << '\n';
  }
}

inline void save_csv(const std::string& path, const LabeledDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write dataset '" + path + "'");
  write_csv(out, data);
  if (!out) throw Error("failed writing dataset '" + path + "'");
}

// ---------------------------------------------------------------------------
// Chip-level splitting
// ---------------------------------------------------------------------------

struct ChipSplit {
  LabeledDataset train;
  LabeledDataset test;
};

/// Moves every sample of `n_train_chips` randomly chosen chips into train and
/// the rest into test. Sample order within each side follows the input.
inline ChipSplit split_by_chip(const LabeledDataset& data, std::size_t n_train_chips, std::uint64_t seed) {
  const std::size_t n_chips = data.n_chips();
  if (n_train_chips < 1 || n_train_chips >= n_chips) {
    throw ArgumentError("n_train_chips must be in [1, " + std::to_string(n_chips) + "), got " +
                        std::to_string(n_train_chips));
  }
  std::vector<std::size_t> order(n_chips);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<bool> in_train(n_chips, false);
  for (std::size_t i = 0; i < n_train_chips; ++i) in_train[order[i]] = true;

  std::vector<std::size_t> sample_chip(data.size());
  for (std::size_t c = 0; c < n_chips; ++c) {
    for (std::size_t idx : data.chips()[c].indices) sample_chip[idx] = c;
  }
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < data.size(); ++i) (in_train[sample_chip[i]] ? train_idx : test_idx).push_back(i);
  return {data.subset(train_idx), data.subset(test_idx)};
}

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

/// Per-feature affine standardization (x - mean) / stddev.
class Scaler {
 public:
  Scaler() = default;
  Scaler(std::vector<double> mean, std::vector<double> stddev) : mean_(std::move(mean)), stddev_(std::move(stddev)) {
    if (mean_.size() != stddev_.size()) throw ArgumentError("scaler mean and stddev lengths differ");
    for (std::size_t i = 0; i < stddev_.size(); ++i) {
      if (!(stddev_[i] > 0.0) || !std::isfinite(stddev_[i])) throw DegenerateFeatureError(i);
    }
  }

  /// Identity transform for `n` features.
  static Scaler identity(std::size_t n) { return Scaler(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)); }

  std::size_t n_features() const noexcept { return mean_.size(); }
  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& stddev() const noexcept { return stddev_; }

  void transform(std::span<const double> in, std::span<double> out) const {
    if (in.size() != mean_.size() || out.size() != mean_.size()) {
      throw ArgumentError("scaler expects " + std::to_string(mean_.size()) + " features, got " +
                          std::to_string(in.size()));
    }
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = (in[i] - mean_[i]) / stddev_[i];
  }

  std::vector<double> transform(std::span<const double> in) const {
    std::vector<double> out(in.size());
    transform(in, out);
    return out;
  }

  bool operator==(const Scaler&) const = default;

 private:
  std::vector<double> mean_;
  std::vector<double> stddev_;
};

/// Sample mean and sample (n-1) standard deviation of each training feature.
inline Scaler fit_scaler(const LabeledDataset& train) {
  if (train.size() < 2) throw ArgumentError("fit_scaler needs at least two samples");
  const std::size_t d = train.n_features();
  const double n = static_cast<double>(train.size());
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (const auto& s : train.samples())
    for (std::size_t j = 0; j < d; ++j) mean[j] += s.features[j];
  for (double& m : mean) m /= n;
  for (const auto& s : train.samples()) {
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = s.features[j] - mean[j];
      sd[j] += dev * dev;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    sd[j] = std::sqrt(sd[j] / (n - 1.0));
    // Relative guard: constant features leave only rounding noise behind.
    if (!(sd[j] > 1e-12 * std::max(1.0, std::abs(mean[j])))) throw DegenerateFeatureError(j);
  }
  return Scaler(std::move(mean), std::move(sd));
}

inline LabeledDataset apply_scaler(const Scaler& scaler, const LabeledDataset& data) {
  if (scaler.n_features() != data.n_features()) {
    throw ArgumentError("scaler has " + std::to_string(scaler.n_features()) + " features, dataset has " +
                        std::to_string(data.n_features()));
  }
  std::vector<FrequencySample> out = data.samples();
  for (auto& s : out) scaler.transform(s.features, s.features);
  return LabeledDataset(std::move(out), data.n_features());
}

}  // namespace ronguard
