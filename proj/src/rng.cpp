#include "fedsim/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fedsim/errors.hpp"

namespace fedsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::string_view label,
                       std::uint64_t a, std::uint64_t b) {
  // FNV-1a over the label, then three mixing rounds absorbing the inputs.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : label) {
    h = (h ^ c) * 0x100000001b3ull;
  }
  std::uint64_t x = splitmix64(seed ^ h);
  x = splitmix64(x ^ a);
  x = splitmix64(x ^ b);
  return x;
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform01_open() { return 1.0 - uniform01(); }

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double Rng::normal() {
  double u1 = uniform01_open();
  double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) {
    throw ValidationError("gamma: shape must be positive");
  }
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a+1) * U^(1/a)
    double g = gamma(shape + 1.0);
    double u = uniform01_open();
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = uniform01_open();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw ValidationError("Rng::below: n must be > 0");
  const std::uint64_t nn = static_cast<std::uint64_t>(n);
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % nn;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return static_cast<std::size_t>(x % nn);
}

}  // namespace fedsim
