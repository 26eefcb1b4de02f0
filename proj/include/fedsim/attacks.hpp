#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/mlp.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

// Roles are fixed for a whole experiment; attackers never rotate.
enum class ClientRole { honest, faulty, malicious };

std::string to_string(ClientRole role);

enum class RoleAssignment { fixed_pattern, explicit_list, seeded_random };

struct AttackSpec {
  std::size_t faulty_count = 0;
  std::size_t malicious_count = 0;
  double noise_variance = 20.0;   // per-element variance of the faulty noise
  bool variance_is_sigma = false; // read noise_variance as sigma instead
  int flip_target_label = 0;
  RoleAssignment assignment = RoleAssignment::fixed_pattern;
  std::vector<std::size_t> explicit_faulty;
  std::vector<std::size_t> explicit_malicious;
  bool noise_only = false;  // faulty clients skip local training

  std::size_t attacker_count() const { return faulty_count + malicious_count; }
};

// fixed_pattern puts attackers at indices 2, 5, 8, ... (every third client,
// zero-based), faulty before malicious in index order.
std::vector<ClientRole> assign_roles(std::size_t num_clients,
                                     const AttackSpec& spec,
                                     std::uint64_t seed);

// params + N(0, variance) noise, i.i.d. per element. The input is untouched.
ModelParams apply_faulty(const ModelParams& params, double variance, Rng& rng);

// Replaces every label with target_label; inputs are untouched.
LabeledDataset apply_malicious(const LabeledDataset& dataset,
                               int target_label);

}  // namespace fedsim
