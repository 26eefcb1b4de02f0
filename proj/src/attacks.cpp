#include "fedsim/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedsim/errors.hpp"

namespace fedsim {

std::string to_string(ClientRole role) {
  switch (role) {
    case ClientRole::honest: return "honest";
    case ClientRole::faulty: return "faulty";
    case ClientRole::malicious: return "malicious";
  }
  return "unknown";
}

std::vector<ClientRole> assign_roles(std::size_t num_clients,
                                     const AttackSpec& spec,
                                     std::uint64_t seed) {
  if (spec.attacker_count() > num_clients) {
    throw ValidationError("assign_roles: " +
                          std::to_string(spec.attacker_count()) +
                          " attackers for " + std::to_string(num_clients) +
                          " clients");
  }
  std::vector<ClientRole> roles(num_clients, ClientRole::honest);

  auto place = [&](const std::vector<std::size_t>& indices) {
    // First faulty_count indices become faulty, the rest malicious.
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const std::size_t idx = indices[i];
      if (idx >= num_clients) {
        throw ValidationError("assign_roles: attacker index " +
                              std::to_string(idx) + " out of range");
      }
      if (roles[idx] != ClientRole::honest) {
        throw ValidationError("assign_roles: attacker index " +
                              std::to_string(idx) + " assigned twice");
      }
      roles[idx] = (i < spec.faulty_count) ? ClientRole::faulty
                                           : ClientRole::malicious;
    }
  };

  switch (spec.assignment) {
    case RoleAssignment::fixed_pattern: {
      std::vector<std::size_t> slots;
      for (std::size_t idx = 2; idx < num_clients; idx += 3) {
        slots.push_back(idx);
      }
      if (slots.size() < spec.attacker_count()) {
        throw ValidationError(
            "assign_roles: pattern offers " + std::to_string(slots.size()) +
            " attacker slots, " + std::to_string(spec.attacker_count()) +
            " requested");
      }
      slots.resize(spec.attacker_count());
      place(slots);
      break;
    }
    case RoleAssignment::explicit_list: {
      if (spec.explicit_faulty.size() != spec.faulty_count ||
          spec.explicit_malicious.size() != spec.malicious_count) {
        throw ValidationError(
            "assign_roles: explicit index lists do not match counts");
      }
      std::vector<std::size_t> indices = spec.explicit_faulty;
      indices.insert(indices.end(), spec.explicit_malicious.begin(),
                     spec.explicit_malicious.end());
      place(indices);
      break;
    }
    case RoleAssignment::seeded_random: {
      std::vector<std::size_t> order(num_clients);
      std::iota(order.begin(), order.end(), 0);
      Rng rng(mix_seed(seed, "assign_roles"));
      rng.shuffle(order);
      order.resize(spec.attacker_count());
      place(order);
      break;
    }
  }
  return roles;
}

ModelParams apply_faulty(const ModelParams& params, double variance,
                         Rng& rng) {
  if (!(variance > 0.0)) {
    throw ValidationError("apply_faulty: variance must be positive");
  }
  const double sigma = std::sqrt(variance);
  ModelParams out = params;
  for (double& v : out.values) {
    v += sigma * rng.normal();
  }
  return out;
}

LabeledDataset apply_malicious(const LabeledDataset& dataset,
                               int target_label) {
  if (target_label < 0 || target_label >= dataset.class_count) {
    throw ValidationError("apply_malicious: target label " +
                          std::to_string(target_label) + " outside [0, " +
                          std::to_string(dataset.class_count) + ")");
  }
  LabeledDataset out = dataset;
  std::fill(out.labels.begin(), out.labels.end(), target_label);
  return out;
}

}  // namespace fedsim
