#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace fedsim {

// Derives an independent substream seed from a master seed, a textual label
// and up to two indices. Every piece of randomness in an experiment comes
// from mix_seed(master, label, i, j), which makes runs reproducible and lets
// independent components (clients, rounds, seeds) draw in parallel without
// sharing generator state.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view label,
                       std::uint64_t a = 0, std::uint64_t b = 0);

// Deterministic random source. All distributions are implemented here rather
// than taken from <random> so that the value sequence is fixed by this code
// alone, not by the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform01();

  // Uniform on (0, 1].
  double uniform01_open();

  double uniform(double lo, double hi);

  // Standard normal via Box-Muller.
  double normal();
  double normal(double mean, double stddev);

  // Gamma(shape, 1) via Marsaglia-Tsang, with the alpha<1 boost.
  double gamma(double shape);

  // Unbiased integer in [0, n). n must be > 0.
  std::size_t below(std::size_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = below(i + 1);
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fedsim
