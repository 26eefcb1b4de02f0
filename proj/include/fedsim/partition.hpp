#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fedsim/dataset.hpp"

namespace fedsim {

struct PartitionSpec {
  std::size_t num_clients = 30;
  std::optional<double> alpha;  // engaged => symmetric Dirichlet, else IID
  std::uint64_t rng_seed = 0;
  double iid_size_jitter = 0.1;  // +-10% multiplicative quantity skew

  bool is_iid() const { return !alpha.has_value(); }
};

// Splits `total` items proportionally to `proportions` (which must sum to ~1)
// using largest-remainder rounding, so every item is assigned exactly once.
std::vector<std::size_t> largest_remainder_split(
    std::size_t total, const std::vector<double>& proportions);

// Label-skewed split: for each class a K-vector is drawn from Dir(alpha*1)
// via normalized gamma variates and the class samples are divided in those
// proportions. Resamples (bounded) if any client ends up empty.
std::vector<ClientShard> dirichlet_partition(const LabeledDataset& dataset,
                                             const PartitionSpec& spec);

// Global shuffle, then near-equal contiguous splits with a mild per-client
// size jitter (the "quantity skew").
std::vector<ClientShard> iid_partition(const LabeledDataset& dataset,
                                       std::size_t num_clients,
                                       std::uint64_t seed,
                                       double jitter = 0.1);

// Dispatches on spec.alpha.
std::vector<ClientShard> make_partition(const LabeledDataset& dataset,
                                        const PartitionSpec& spec);

// Removes `size` samples uniformly at random from the training pool and
// returns them unlabeled, for server-side scoring and distillation.
std::pair<LabeledDataset, ServerDistillSet> carve_server_set(
    const LabeledDataset& train_set, std::size_t size, std::uint64_t seed);

// i.i.d. uniform values on [0,1]; the data-free distillation input.
ServerDistillSet uniform_noise_set(std::size_t count, std::size_t dim,
                                   std::uint64_t seed);

}  // namespace fedsim
