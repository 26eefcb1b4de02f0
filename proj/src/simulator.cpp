#include "fedsim/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "fedsim/errors.hpp"
#include "fedsim/stats.hpp"
#include "fedsim/train.hpp"

namespace fedsim {

void SimulationConfig::validate() const {
  if (num_clients == 0) throw ConfigError("config: num_clients must be >= 1");
  if (!(client_fraction > 0.0) || client_fraction > 1.0) {
    throw ConfigError("config: client_fraction must be in (0, 1]");
  }
  if (local.epochs == 0) throw ConfigError("config: local epochs must be >= 1");
  if (!(local.learning_rate > 0.0)) {
    throw ConfigError("config: local learning_rate must be positive");
  }
  if (local.batch_size == 0) {
    throw ConfigError("config: local batch_size must be >= 1");
  }
  if (!(distill.learning_rate > 0.0) || distill.batch_size == 0 ||
      !(distill.temperature > 0.0)) {
    throw ConfigError("config: distill hyperparameters must be positive");
  }
  if (seeds.empty()) throw ConfigError("config: at least one seed required");
  if (attack.attacker_count() > num_clients) {
    throw ConfigError("config: more attackers than clients");
  }
  if (partition.num_clients != num_clients) {
    throw ConfigError("config: partition.num_clients disagrees with num_clients");
  }
  if (!partition.is_iid() && !(*partition.alpha > 0.0)) {
    throw ConfigError("config: alpha must be positive");
  }
}

std::vector<std::size_t> SimulationConfig::architecture_for(
    std::size_t input_dim, std::size_t classes) const {
  std::vector<std::size_t> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(classes);
  return dims;
}

std::vector<double> ExperimentResult::final_errors() const {
  std::vector<double> out;
  out.reserve(traces.size());
  for (const ExperimentTrace& t : traces) out.push_back(t.final_error());
  return out;
}

bool is_collapsed_error(double error) {
  return std::abs(error - 0.90) <= 0.005 + 1e-12;
}

double evaluate(const ModelParams& params,
                const std::vector<std::size_t>& architecture,
                const LabeledDataset& test_set) {
  return evaluate_error(unflatten(params, architecture), test_set);
}

ExperimentSetup prepare_experiment(const SimulationConfig& config,
                                   const ExperimentData& data,
                                   std::uint64_t seed) {
  config.validate();
  data.train.validate();
  data.test.validate();

  ExperimentSetup setup;
  LabeledDataset pool;
  // The distillation pool is carved for every aggregator, whether or not it
  // gets used, so all aggregators in a comparison train on identical shards.
  std::tie(pool, setup.distill_set) = carve_server_set(
      data.train, config.distill_set_size, mix_seed(seed, "carve"));

  PartitionSpec spec = config.partition;
  spec.rng_seed = mix_seed(seed, "partition");
  setup.shards = make_partition(pool, spec);

  setup.roles =
      assign_roles(config.num_clients, config.attack, mix_seed(seed, "roles"));

  // Label flipping happens once up front: roles are static, so the flipped
  // shard is the client's training set for the whole experiment.
  for (std::size_t k = 0; k < setup.shards.size(); ++k) {
    if (setup.roles[k] == ClientRole::malicious) {
      setup.shards[k].dataset = apply_malicious(
          setup.shards[k].dataset, config.attack.flip_target_label);
    }
  }
  return setup;
}

std::pair<ModelParams, RoundRecord> run_round(
    const ModelParams& global_params, const std::vector<ClientShard>& shards,
    const std::vector<ClientRole>& roles, const ServerDistillSet& distill_set,
    const LabeledDataset& test_set, const SimulationConfig& config,
    std::uint64_t master_seed, std::size_t round_index) {
  if (shards.size() != roles.size()) {
    throw ValidationError("run_round: shards and roles disagree");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t num_clients = shards.size();
  const std::size_t selected_count = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(config.client_fraction *
                       static_cast<double>(num_clients))));

  std::vector<std::size_t> selected(num_clients);
  std::iota(selected.begin(), selected.end(), 0);
  if (selected_count < num_clients) {
    Rng sample_rng(mix_seed(master_seed, "client_sample", round_index));
    sample_rng.shuffle(selected);
    selected.resize(selected_count);
    std::sort(selected.begin(), selected.end());
  }

  const std::vector<std::size_t> architecture =
      config.architecture_for(test_set.dim(), test_set.class_count);

  // Local training, parallel across clients. Every client derives its own
  // seed, so the result does not depend on scheduling.
  std::vector<ModelParams> client_params(selected.size());
  std::atomic<std::size_t> next{0};
  auto train_one = [&](std::size_t slot) {
    const std::size_t k = selected[slot];
    const ClientShard& shard = shards[k];
    TrainConfig local = config.local;
    local.rng_seed = mix_seed(master_seed, "client_train", round_index, k);
    MlpModel model = unflatten(global_params, architecture);
    const bool skip_training =
        roles[k] == ClientRole::faulty && config.attack.noise_only;
    if (!skip_training) {
      model = sgd_train(std::move(model), shard.dataset, local);
    }
    ModelParams params = flatten(model);
    if (roles[k] == ClientRole::faulty) {
      Rng noise_rng(mix_seed(master_seed, "attack_noise", round_index, k));
      const double variance = config.attack.variance_is_sigma
                                  ? config.attack.noise_variance *
                                        config.attack.noise_variance
                                  : config.attack.noise_variance;
      params = apply_faulty(params, variance, noise_rng);
    }
    client_params[slot] = std::move(params);
  };
  std::size_t workers = config.max_threads == 0
                            ? std::max(1u, std::thread::hardware_concurrency())
                            : config.max_threads;
  workers = std::min(workers, selected.size());
  if (workers <= 1) {
    for (std::size_t slot = 0; slot < selected.size(); ++slot) train_one(slot);
  } else {
    auto drain = [&] {
      for (;;) {
        const std::size_t slot = next.fetch_add(1);
        if (slot >= selected.size()) return;
        train_one(slot);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(drain);
    for (std::thread& t : pool) t.join();
  }

  AggregationInput input;
  input.client_params = std::move(client_params);
  input.client_sizes.reserve(selected.size());
  for (std::size_t k : selected) input.client_sizes.push_back(shards[k].size);
  input.distill_set = &distill_set;
  input.architecture = architecture;
  input.round_index = round_index;
  input.rng_seed = mix_seed(master_seed, "kd", round_index);
  input.distill = config.distill;
  input.distill.rng_seed = input.rng_seed;
  input.median_convention = config.median_convention;
  input.noise_set_size =
      config.distill_set_size > 0 ? config.distill_set_size : 10000;
  input.attacker_count_hint = config.attack.attacker_count();
  input.max_threads = config.max_threads;

  AggregationOutcome outcome;
  try {
    outcome = aggregate(config.aggregator, input);
  } catch (const Error& e) {
    throw ConfigError("round " + std::to_string(round_index) + ": " +
                      e.what());
  }

  RoundRecord record;
  record.round_index = round_index;
  record.test_error = evaluate(outcome.global, architecture, test_set);
  record.selected_clients = std::move(selected);
  record.scores = std::move(outcome.scores);
  record.histogram = std::move(outcome.histogram);
  record.used_fallback_weights = outcome.used_fallback_weights;
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return {std::move(outcome.global), std::move(record)};
}

ExperimentTrace run_experiment_with_setup(const SimulationConfig& config,
                                          const ExperimentSetup& setup,
                                          const LabeledDataset& test_set,
                                          std::uint64_t seed) {
  const std::vector<std::size_t> architecture =
      config.architecture_for(test_set.dim(), test_set.class_count);

  ExperimentTrace trace;
  trace.seed = seed;
  MlpModel global = init_model(architecture, mix_seed(seed, "init"));
  ModelParams global_params = flatten(global);
  trace.baseline_error = evaluate(global_params, architecture, test_set);

  for (std::size_t round = 1; round <= config.rounds; ++round) {
    auto [next_params, record] =
        run_round(global_params, setup.shards, setup.roles, setup.distill_set,
                  test_set, config, seed, round);
    global_params = std::move(next_params);
    trace.rounds.push_back(std::move(record));
  }
  trace.collapsed = is_collapsed_error(trace.final_error());
  return trace;
}

ExperimentTrace run_experiment(const SimulationConfig& config,
                               const ExperimentData& data,
                               std::uint64_t seed) {
  ExperimentSetup setup = prepare_experiment(config, data, seed);
  return run_experiment_with_setup(config, setup, data.test, seed);
}

ExperimentResult run_seeds(const SimulationConfig& config,
                           const ExperimentData& data) {
  config.validate();
  ExperimentResult result;
  result.traces.resize(config.seeds.size());

  std::vector<std::string> failures(config.seeds.size());
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.seeds.size()) return;
      try {
        result.traces[i] = run_experiment(config, data, config.seeds[i]);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  std::size_t workers = config.max_threads == 0
                            ? std::max(1u, std::thread::hardware_concurrency())
                            : config.max_threads;
  workers = std::min(workers, config.seeds.size());
  if (workers <= 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(drain);
    for (std::thread& t : pool) t.join();
  }
  for (std::size_t i = 0; i < config.seeds.size(); ++i) {
    if (!failures[i].empty()) {
      throw ConfigError("seed " + std::to_string(config.seeds[i]) +
                        " failed: " + failures[i]);
    }
  }

  const std::vector<double> finals = result.final_errors();
  result.final_error_mean = mean_of(finals);
  result.final_error_std = sample_std(finals);
  result.single_seed = finals.size() == 1;
  return result;
}

}  // namespace fedsim
