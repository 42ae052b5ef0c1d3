#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mlpa {

using Rng = std::mt19937_64;

/// Independent stream for item `index` under a run-level seed.
inline Rng stream_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

inline std::vector<double> sample_dirichlet(std::span<const double> concentration,
                                            Rng& rng) {
  std::vector<double> out(concentration.size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::gamma_distribution<double> draw(concentration[i], 1.0);
    out[i] = draw(rng);
    total += out[i];
  }
  if (total <= 0.0) {
    // All draws underflowed (tiny concentrations): put the mass on one
    // uniformly chosen component.
    std::uniform_int_distribution<std::size_t> pick(0, out.size() - 1);
    out[pick(rng)] = 1.0;
    return out;
  }
  for (double& x : out) x /= total;
  return out;
}

inline std::size_t sample_categorical(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    u -= probs[i];
    if (u < 0.0) return i;
  }
  // Rounding left a sliver of mass: return the last positive entry.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return probs.size() - 1;
}

}  // namespace mlpa
