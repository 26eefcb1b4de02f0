#include <cmath>

#include "doctest.h"
#include "fedsim/rng.hpp"

using namespace fedsim;

TEST_CASE("mix_seed separates labels and indices") {
  const std::uint64_t base = mix_seed(7, "init");
  CHECK(base == mix_seed(7, "init"));
  CHECK(base != mix_seed(7, "partition"));
  CHECK(base != mix_seed(8, "init"));
  CHECK(mix_seed(7, "client_train", 1, 2) != mix_seed(7, "client_train", 2, 1));
}

TEST_CASE("uniform01 stays in [0,1) and reproduces per seed") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 1000; ++i) {
    const double v = a.uniform01();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    CHECK(v == b.uniform01());
  }
}

TEST_CASE("normal matches its first two moments") {
  Rng rng(3);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("gamma sampler matches mean and variance for several shapes") {
  for (double shape : {0.1, 0.5, 1.0, 2.5, 10.0}) {
    Rng rng(11);
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = rng.gamma(shape);
      CHECK(v > 0.0);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    // Gamma(k, 1): mean k, variance k.
    CHECK(mean == doctest::Approx(shape).epsilon(0.05));
    CHECK(var == doctest::Approx(shape).epsilon(0.10));
  }
}

TEST_CASE("below is bounded and shuffle is a permutation") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.below(7) < 7);
  }
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 10; ++i) CHECK(sorted[i] == i);
}
