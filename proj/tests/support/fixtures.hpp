#pragma once

#include <random>
#include <string>
#include <vector>

#include "ronguard/dataset.hpp"
#include "ronguard/seed.hpp"

namespace fixtures {

inline ronguard::FrequencySample sample(std::string chip, ronguard::SampleKind kind, std::vector<double> f,
                                        int region = 0) {
  return {std::move(chip), region, kind, kind == ronguard::SampleKind::Trojan ? "T01" : "", std::move(f)};
}

// Two Gaussian blobs in `dims` dimensions; `n_chips` chips with `per_chip`
// samples each, golden with probability `golden_rate`.
inline ronguard::LabeledDataset blobs(std::uint64_t seed, std::size_t n_chips, std::size_t per_chip,
                                      std::size_t dims = 8, double separation = 3.0, double golden_rate = 0.3) {
  ronguard::Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution golden(golden_rate);
  std::vector<ronguard::FrequencySample> out;
  for (std::size_t c = 0; c < n_chips; ++c) {
    for (std::size_t s = 0; s < per_chip; ++s) {
      const bool g = s == 0 || (s != 1 && golden(rng));
      std::vector<double> f(dims);
      for (auto& v : f) v = 100.0 + normal(rng) + (g ? 0.0 : -separation);
      out.push_back(sample("C" + std::to_string(c), g ? ronguard::SampleKind::Golden : ronguard::SampleKind::Trojan,
                           std::move(f)));
    }
  }
  return ronguard::LabeledDataset(std::move(out), dims);
}

}  // namespace fixtures
