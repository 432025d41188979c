#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <random>
#include <string>
#include <vector>

#include "ronguard/dataset.hpp"
#include "ronguard/kv_file.hpp"
#include "ronguard/parallel.hpp"
#include "ronguard/seed.hpp"

namespace ronguard {

/**
 * Generative model of an RO-network measurement campaign.
 *
 * Each chip gets a common frequency offset and each RO on it an independent
 * offset (process variation). Every recorded sample is the mean of
 * `n_meas_avg` noisy reads. A Trojan sample additionally loses a random
 * fraction of the nominal frequency, strongest at a random RO site and
 * attenuated exponentially with RO index distance from it.
 */
struct SynthConfig {
  int n_chips = 32;  ///< 8 boards x 4 regions
  int n_ros = 8;
  double f_nominal = 100e6;  ///< Hz
  // Chosen so small drops sit inside the per-sample spread while the
  // larger ones stand clear of it.
  double sigma_chip_rel = 1.5e-4;
  double sigma_ro_rel = 1.5e-4;
  double sigma_meas_rel = 4e-3;
  int n_meas_avg = 50;
  int n_golden_per_chip = 2;
  int n_trojan_per_chip = 23;
  double trojan_drop_rel_min = 0.001;
  double trojan_drop_rel_max = 0.01;
  double locality_decay = 0.5;

  bool operator==(const SynthConfig&) const = default;
};

inline constexpr int kRegionsPerBoard = 4;

/// Throws ArgumentError naming the first invalid field.
inline void validate(const SynthConfig& c) {
  auto fail = [](const std::string& field, const std::string& rule) {
    throw ArgumentError("synth config: " + field + " " + rule);
  };
  auto non_negative = [&](double v, const char* field) {
    if (!std::isfinite(v) || v < 0.0) fail(field, "must be finite and >= 0");
  };
  if (c.n_chips < 1) fail("n_chips", "must be >= 1");
  if (c.n_ros < 1) fail("n_ros", "must be >= 1");
  if (!std::isfinite(c.f_nominal) || c.f_nominal <= 0.0) fail("f_nominal", "must be > 0");
  non_negative(c.sigma_chip_rel, "sigma_chip_rel");
  non_negative(c.sigma_ro_rel, "sigma_ro_rel");
  non_negative(c.sigma_meas_rel, "sigma_meas_rel");
  if (c.n_meas_avg < 1) fail("n_meas_avg", "must be >= 1");
  if (c.n_golden_per_chip < 1) fail("n_golden_per_chip", "must be >= 1");
  if (c.n_trojan_per_chip < 1) fail("n_trojan_per_chip", "must be >= 1");
  non_negative(c.trojan_drop_rel_min, "trojan_drop_rel_min");
  non_negative(c.trojan_drop_rel_max, "trojan_drop_rel_max");
  if (c.trojan_drop_rel_min > c.trojan_drop_rel_max) fail("trojan_drop_rel_min", "must be <= trojan_drop_rel_max");
  if (c.trojan_drop_rel_max >= 1.0) fail("trojan_drop_rel_max", "must be < 1");
  non_negative(c.locality_decay, "locality_decay");
}

/// Applies `key = value` settings on top of `base`. Unknown keys are errors.
inline SynthConfig apply_key_values(SynthConfig base, const std::vector<KeyValue>& kvs) {
  for (const auto& kv : kvs) {
    auto as_double = [&] {
      double v = 0.0;
      if (!detail::parse_double(kv.value, v)) {
        throw FormatError("line " + std::to_string(kv.line) + ": " + kv.key + " expects a number");
      }
      return v;
    };
    auto as_int = [&] {
      long long v = 0;
      if (!detail::parse_int(kv.value, v)) {
        throw FormatError("line " + std::to_string(kv.line) + ": " + kv.key + " expects an integer");
      }
      return static_cast<int>(v);
    };
    if (kv.key == "n_chips") base.n_chips = as_int();
    else if (kv.key == "n_ros") base.n_ros = as_int();
    else if (kv.key == "f_nominal") base.f_nominal = as_double();
    else if (kv.key == "sigma_chip_rel") base.sigma_chip_rel = as_double();
    else if (kv.key == "sigma_ro_rel") base.sigma_ro_rel = as_double();
    else if (kv.key == "sigma_meas_rel") base.sigma_meas_rel = as_double();
    else if (kv.key == "n_meas_avg") base.n_meas_avg = as_int();
    else if (kv.key == "n_golden_per_chip") base.n_golden_per_chip = as_int();
    else if (kv.key == "n_trojan_per_chip") base.n_trojan_per_chip = as_int();
    else if (kv.key == "trojan_drop_rel_min") base.trojan_drop_rel_min = as_double();
    else if (kv.key == "trojan_drop_rel_max") base.trojan_drop_rel_max = as_double();
    else if (kv.key == "locality_decay") base.locality_decay = as_double();
    else throw FormatError("line " + std::to_string(kv.line) + ": unknown synth key '" + kv.key + "'");
  }
  return base;
}

inline SynthConfig read_synth_config(std::istream& in) { return apply_key_values(SynthConfig{}, read_key_values(in)); }

inline SynthConfig load_synth_config(const std::string& path) {
  return apply_key_values(SynthConfig{}, load_key_values(path));
}

inline std::string chip_name(int chip) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "B%02dR%d", chip / kRegionsPerBoard, chip % kRegionsPerBoard);
  return buf;
}

/// Noise-free process-variation draw for one chip.
struct ChipProfile {
  double offset = 0.0;        ///< common chip offset, Hz
  std::vector<double> base;   ///< per-RO base frequency, Hz
};

namespace detail {

inline Rng chip_rng(int chip, std::uint64_t seed) { return Rng(derive_seed(seed, {static_cast<std::uint64_t>(chip)})); }

inline ChipProfile draw_profile(const SynthConfig& c, Rng& rng, std::normal_distribution<double>& normal) {
  const double f0 = c.f_nominal;
  ChipProfile p;
  p.offset = c.sigma_chip_rel * f0 * normal(rng);
  p.base.resize(static_cast<std::size_t>(c.n_ros));
  for (double& b : p.base) b = f0 + p.offset + c.sigma_ro_rel * f0 * normal(rng);
  return p;
}

inline std::vector<FrequencySample> generate_chip(const SynthConfig& c, int chip, std::uint64_t seed) {
  Rng rng = chip_rng(chip, seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> site_dist(0, c.n_ros - 1);

  const double f0 = c.f_nominal;
  const std::vector<double> base = draw_profile(c, rng, normal).base;
  const double meas_sd = c.sigma_meas_rel * f0 / std::sqrt(static_cast<double>(c.n_meas_avg));

  const std::string id = chip_name(chip);
  const int region = chip % kRegionsPerBoard;
  std::vector<FrequencySample> out;
  out.reserve(static_cast<std::size_t>(c.n_golden_per_chip + c.n_trojan_per_chip));

  auto measured = [&](std::size_t r) { return base[r] + meas_sd * normal(rng); };

  for (int g = 0; g < c.n_golden_per_chip; ++g) {
    FrequencySample s{id, region, SampleKind::Golden, {}, std::vector<double>(base.size())};
    for (std::size_t r = 0; r < base.size(); ++r) s.features[r] = measured(r);
    out.push_back(std::move(s));
  }
  for (int t = 0; t < c.n_trojan_per_chip; ++t) {
    const double drop = c.trojan_drop_rel_min + (c.trojan_drop_rel_max - c.trojan_drop_rel_min) * unit(rng);
    const int site = site_dist(rng);
    char bench[16];
    std::snprintf(bench, sizeof bench, "T%02d", t + 1);
    FrequencySample s{id, region, SampleKind::Trojan, bench, std::vector<double>(base.size())};
    for (std::size_t r = 0; r < base.size(); ++r) {
      const double w = std::exp(-c.locality_decay * std::abs(static_cast<double>(r) - site));
      s.features[r] = measured(r) - drop * w * f0;
    }
    out.push_back(std::move(s));
  }
  for (const auto& s : out) {
    for (double f : s.features) {
      if (!(f > 0.0)) throw ArgumentError("synth config produces a non-positive frequency on chip " + id);
    }
  }
  return out;
}

}  // namespace detail

/// The base frequencies `generate` uses for `chip` under the same seed.
inline ChipProfile chip_profile(const SynthConfig& config, std::uint64_t seed, int chip) {
  validate(config);
  if (chip < 0 || chip >= config.n_chips) throw ArgumentError("chip index " + std::to_string(chip) + " out of range");
  Rng rng = detail::chip_rng(chip, seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  return detail::draw_profile(config, rng, normal);
}

/// Pure function of (config, seed); `threads` only changes how chips are
/// scheduled, never the output.
inline LabeledDataset generate(const SynthConfig& config, std::uint64_t seed, unsigned threads = 1) {
  validate(config);
  std::vector<std::vector<FrequencySample>> per_chip(static_cast<std::size_t>(config.n_chips));
  parallel_for(per_chip.size(), threads,
               [&](std::size_t c) { per_chip[c] = detail::generate_chip(config, static_cast<int>(c), seed); });
  std::vector<FrequencySample> samples;
  samples.reserve(per_chip.size() * static_cast<std::size_t>(config.n_golden_per_chip + config.n_trojan_per_chip));
  for (auto& chip : per_chip) std::ranges::move(chip, std::back_inserter(samples));
  return LabeledDataset(std::move(samples), static_cast<std::size_t>(config.n_ros));
}

}  // namespace ronguard
