#include "fedsim/partition.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

constexpr int kMaxPartitionRetries = 100;

std::vector<ClientShard> shards_from_indices(
    const LabeledDataset& dataset,
    const std::vector<std::vector<std::size_t>>& per_client) {
  std::vector<ClientShard> shards;
  shards.reserve(per_client.size());
  for (std::size_t k = 0; k < per_client.size(); ++k) {
    ClientShard shard;
    shard.client_id = k;
    shard.dataset = dataset.select(per_client[k]);
    shard.size = per_client[k].size();
    shards.push_back(std::move(shard));
  }
  return shards;
}

}  // namespace

std::vector<std::size_t> largest_remainder_split(
    std::size_t total, const std::vector<double>& proportions) {
  const std::size_t k = proportions.size();
  std::vector<std::size_t> counts(k, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  remainders.reserve(k);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double ideal = static_cast<double>(total) * proportions[i];
    const double base = std::floor(ideal);
    counts[i] = static_cast<std::size_t>(base);
    assigned += counts[i];
    remainders.emplace_back(ideal - base, i);
  }
  // Hand out the leftover units to the largest fractional parts; ties go to
  // the lower index so the result is deterministic.
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;
            });
  std::size_t leftover = total - assigned;
  for (std::size_t i = 0; i < leftover; ++i) {
    counts[remainders[i % k].second] += 1;
  }
  return counts;
}

std::vector<ClientShard> dirichlet_partition(const LabeledDataset& dataset,
                                             const PartitionSpec& spec) {
  dataset.validate();
  if (spec.is_iid()) {
    throw ValidationError("dirichlet_partition: spec has no alpha");
  }
  const double alpha = *spec.alpha;
  if (!(alpha > 0.0)) {
    throw ValidationError("dirichlet_partition: alpha must be positive");
  }
  const std::size_t k = spec.num_clients;
  if (k == 0) throw ValidationError("dirichlet_partition: zero clients");

  std::vector<std::vector<std::size_t>> class_indices(dataset.class_count);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    class_indices[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
  }
  for (int c = 0; c < dataset.class_count; ++c) {
    if (class_indices[static_cast<std::size_t>(c)].empty()) {
      throw ValidationError("dirichlet_partition: class " +
                            std::to_string(c) + " has no samples");
    }
  }

  Rng rng(mix_seed(spec.rng_seed, "dirichlet_partition"));
  for (int attempt = 0; attempt < kMaxPartitionRetries; ++attempt) {
    std::vector<std::vector<std::size_t>> per_client(k);
    for (const auto& members : class_indices) {
      std::vector<double> props(k);
      double sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        props[i] = rng.gamma(alpha);
        sum += props[i];
      }
      for (double& p : props) p /= sum;
      const auto counts = largest_remainder_split(members.size(), props);
      std::size_t cursor = 0;
      for (std::size_t i = 0; i < k; ++i) {
        per_client[i].insert(per_client[i].end(),
                             members.begin() + cursor,
                             members.begin() + cursor + counts[i]);
        cursor += counts[i];
      }
    }
    const bool any_empty =
        std::any_of(per_client.begin(), per_client.end(),
                    [](const auto& v) { return v.empty(); });
    if (!any_empty) {
      return shards_from_indices(dataset, per_client);
    }
  }
  throw PartitionError(
      "dirichlet_partition: could not produce nonempty shards after " +
      std::to_string(kMaxPartitionRetries) + " attempts (alpha=" +
      std::to_string(alpha) + ", clients=" + std::to_string(k) + ")");
}

std::vector<ClientShard> iid_partition(const LabeledDataset& dataset,
                                       std::size_t num_clients,
                                       std::uint64_t seed, double jitter) {
  dataset.validate();
  if (num_clients == 0) throw ValidationError("iid_partition: zero clients");
  if (dataset.size() < num_clients) {
    throw ValidationError("iid_partition: " + std::to_string(dataset.size()) +
                          " samples cannot cover " +
                          std::to_string(num_clients) + " clients");
  }
  Rng rng(mix_seed(seed, "iid_partition"));
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  for (int attempt = 0; attempt < kMaxPartitionRetries; ++attempt) {
    rng.shuffle(order);
    std::vector<double> props(num_clients);
    double sum = 0.0;
    for (double& p : props) {
      p = 1.0 + jitter * rng.uniform(-1.0, 1.0);
      sum += p;
    }
    for (double& p : props) p /= sum;
    const auto counts = largest_remainder_split(dataset.size(), props);
    if (std::any_of(counts.begin(), counts.end(),
                    [](std::size_t c) { return c == 0; })) {
      continue;
    }
    std::vector<std::vector<std::size_t>> per_client(num_clients);
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < num_clients; ++i) {
      per_client[i].assign(order.begin() + cursor,
                           order.begin() + cursor + counts[i]);
      cursor += counts[i];
    }
    return shards_from_indices(dataset, per_client);
  }
  throw PartitionError("iid_partition: jitter produced empty shards " +
                       std::to_string(kMaxPartitionRetries) + " times");
}

std::vector<ClientShard> make_partition(const LabeledDataset& dataset,
                                        const PartitionSpec& spec) {
  if (spec.is_iid()) {
    return iid_partition(dataset, spec.num_clients, spec.rng_seed,
                         spec.iid_size_jitter);
  }
  return dirichlet_partition(dataset, spec);
}

std::pair<LabeledDataset, ServerDistillSet> carve_server_set(
    const LabeledDataset& train_set, std::size_t size, std::uint64_t seed) {
  train_set.validate();
  if (size >= train_set.size()) {
    throw ValidationError("carve_server_set: size " + std::to_string(size) +
                          " >= pool " + std::to_string(train_set.size()));
  }
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, "carve_server_set"));
  rng.shuffle(order);

  std::vector<std::size_t> carved(order.begin(), order.begin() + size);
  std::vector<std::size_t> remaining(order.begin() + size, order.end());
  std::sort(carved.begin(), carved.end());
  std::sort(remaining.begin(), remaining.end());

  ServerDistillSet distill;
  distill.source = DistillSource::held_out_real;
  distill.inputs = RealMatrix(size, train_set.dim());
  for (std::size_t i = 0; i < carved.size(); ++i) {
    std::copy(train_set.inputs.row_ptr(carved[i]),
              train_set.inputs.row_ptr(carved[i]) + train_set.dim(),
              distill.inputs.row_ptr(i));
  }
  return {train_set.select(remaining), std::move(distill)};
}

ServerDistillSet uniform_noise_set(std::size_t count, std::size_t dim,
                                   std::uint64_t seed) {
  if (count == 0 || dim == 0) {
    throw ValidationError("uniform_noise_set: count and dim must be positive");
  }
  ServerDistillSet out;
  out.source = DistillSource::uniform_noise;
  out.inputs = RealMatrix(count, dim);
  Rng rng(mix_seed(seed, "uniform_noise_set"));
  for (double& v : out.inputs.data) {
    v = rng.uniform01();
  }
  return out;
}

}  // namespace fedsim
