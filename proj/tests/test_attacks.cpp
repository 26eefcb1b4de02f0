#include <cmath>

#include "doctest.h"
#include "fedsim/attacks.hpp"
#include "fedsim/errors.hpp"

using namespace fedsim;

TEST_CASE("assign_roles fixed pattern places attackers at every third index") {
  AttackSpec spec;
  spec.faulty_count = 10;
  auto roles = assign_roles(30, spec, 0);
  const std::vector<std::size_t> expected = {2,  5,  8,  11, 14,
                                             17, 20, 23, 26, 29};
  for (std::size_t k = 0; k < 30; ++k) {
    const bool is_attacker =
        std::find(expected.begin(), expected.end(), k) != expected.end();
    CHECK(roles[k] == (is_attacker ? ClientRole::faulty : ClientRole::honest));
  }
}

TEST_CASE("assign_roles: faulty before malicious in index order") {
  AttackSpec spec;
  spec.faulty_count = 5;
  spec.malicious_count = 5;
  auto roles = assign_roles(30, spec, 0);
  for (std::size_t k : {2u, 5u, 8u, 11u, 14u}) {
    CHECK(roles[k] == ClientRole::faulty);
  }
  for (std::size_t k : {17u, 20u, 23u, 26u, 29u}) {
    CHECK(roles[k] == ClientRole::malicious);
  }
}

TEST_CASE("assign_roles: empty spec, validation, other modes") {
  AttackSpec none;
  for (ClientRole role : assign_roles(10, none, 0)) {
    CHECK(role == ClientRole::honest);
  }

  AttackSpec too_many;
  too_many.faulty_count = 11;  // only 10 pattern slots among 30 clients
  CHECK_THROWS_AS(assign_roles(30, too_many, 0), ValidationError);

  AttackSpec overflow;
  overflow.faulty_count = 31;
  CHECK_THROWS_AS(assign_roles(30, overflow, 0), ValidationError);

  AttackSpec explicit_spec;
  explicit_spec.assignment = RoleAssignment::explicit_list;
  explicit_spec.faulty_count = 1;
  explicit_spec.malicious_count = 1;
  explicit_spec.explicit_faulty = {4};
  explicit_spec.explicit_malicious = {7};
  auto roles = assign_roles(10, explicit_spec, 0);
  CHECK(roles[4] == ClientRole::faulty);
  CHECK(roles[7] == ClientRole::malicious);

  AttackSpec random_spec;
  random_spec.assignment = RoleAssignment::seeded_random;
  random_spec.faulty_count = 3;
  auto a = assign_roles(10, random_spec, 5);
  auto b = assign_roles(10, random_spec, 5);
  CHECK(a == b);  // role assignment is pure
  std::size_t faulty = 0;
  for (ClientRole role : a) {
    if (role == ClientRole::faulty) ++faulty;
  }
  CHECK(faulty == 3);
}

TEST_CASE("apply_faulty: variance realized, mean near zero, input intact") {
  ModelParams params;
  params.values.assign(100000, 0.25);
  Rng rng(3);
  ModelParams noisy = apply_faulty(params, 20.0, rng);
  CHECK(noisy.size() == params.size());
  for (double v : params.values) CHECK(v == 0.25);  // untouched

  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    const double d = noisy.values[i] - params.values[i];
    sum += d;
    sum2 += d * d;
  }
  const double n = static_cast<double>(noisy.size());
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 20.0) <= 0.05 * 20.0);

  Rng other(4);
  ModelParams noisy2 = apply_faulty(params, 20.0, other);
  CHECK(noisy2.values != noisy.values);

  // Vanishing variance leaves the parameters unchanged at double precision.
  Rng tiny_rng(5);
  ModelParams same = apply_faulty(params, 1e-300, tiny_rng);
  CHECK(same == params);

  CHECK_THROWS_AS(apply_faulty(params, 0.0, rng), ValidationError);
}

TEST_CASE("apply_malicious: flips labels only, idempotent") {
  LabeledDataset data;
  data.class_count = 5;
  data.inputs = RealMatrix(3, 2);
  data.inputs.data = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  data.labels = {3, 1, 4};

  LabeledDataset flipped = apply_malicious(data, 0);
  CHECK(flipped.labels == std::vector<int>{0, 0, 0});
  CHECK(flipped.inputs == data.inputs);
  CHECK(data.labels == std::vector<int>{3, 1, 4});  // input preserved

  LabeledDataset again = apply_malicious(flipped, 0);
  CHECK(again.labels == flipped.labels);
  CHECK(again.inputs == flipped.inputs);

  CHECK_THROWS_AS(apply_malicious(data, 5), ValidationError);
}
