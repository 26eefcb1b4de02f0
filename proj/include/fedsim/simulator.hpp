#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fedsim/aggregators.hpp"
#include "fedsim/attacks.hpp"
#include "fedsim/dataset.hpp"
#include "fedsim/distill.hpp"
#include "fedsim/mlp.hpp"
#include "fedsim/partition.hpp"
#include "fedsim/scoring.hpp"

namespace fedsim {

struct SimulationConfig {
  std::size_t num_clients = 30;
  std::size_t rounds = 30;
  double client_fraction = 1.0;  // C in (0, 1]
  TrainConfig local{0.05, 5, 64, 0};
  PartitionSpec partition;
  AttackSpec attack;
  AggregatorKind aggregator;
  DistillConfig distill;
  std::size_t distill_set_size = 10000;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<std::size_t> hidden_dims = {256, 128};
  MedianConvention median_convention = MedianConvention::lower;
  std::size_t max_threads = 0;  // 0 => hardware concurrency

  void validate() const;
  std::vector<std::size_t> architecture_for(std::size_t input_dim,
                                            std::size_t classes) const;
};

struct RoundRecord {
  std::size_t round_index = 0;  // 1-based
  double test_error = 0.0;
  std::vector<std::size_t> selected_clients;  // ids, ascending
  std::optional<ScoreVector> scores;          // aligned with selected_clients
  std::optional<MedianCountHistogram> histogram;
  bool used_fallback_weights = false;
  double wall_seconds = 0.0;
};

struct ExperimentTrace {
  std::uint64_t seed = 0;
  double baseline_error = 0.0;  // initial model, before round 1
  std::vector<RoundRecord> rounds;
  bool collapsed = false;  // final error within 0.90 +- 0.005

  double final_error() const {
    return rounds.empty() ? baseline_error : rounds.back().test_error;
  }
};

struct ExperimentResult {
  std::vector<ExperimentTrace> traces;
  double final_error_mean = 0.0;
  double final_error_std = 0.0;  // sample std (n-1)
  bool single_seed = false;

  std::vector<double> final_errors() const;
};

// The data an experiment runs on: the (post-carve) client pool is derived
// from `train` inside run_experiment.
struct ExperimentData {
  LabeledDataset train;
  LabeledDataset test;
};

// Fixed per-experiment material derived from one seed; exposed so the
// matrix runner can reuse partitions across aggregators.
struct ExperimentSetup {
  std::vector<ClientShard> shards;       // post-carve pool split by client
  ServerDistillSet distill_set;          // carved, unlabeled
  std::vector<ClientRole> roles;
};

ExperimentSetup prepare_experiment(const SimulationConfig& config,
                                   const ExperimentData& data,
                                   std::uint64_t seed);

// One communication round: sample clients, local training (with attacks),
// aggregate, evaluate.
std::pair<ModelParams, RoundRecord> run_round(
    const ModelParams& global_params, const std::vector<ClientShard>& shards,
    const std::vector<ClientRole>& roles, const ServerDistillSet& distill_set,
    const LabeledDataset& test_set, const SimulationConfig& config,
    std::uint64_t master_seed, std::size_t round_index);

ExperimentTrace run_experiment(const SimulationConfig& config,
                               const ExperimentData& data, std::uint64_t seed);

// Also usable with a caller-provided setup (shared across aggregators).
ExperimentTrace run_experiment_with_setup(const SimulationConfig& config,
                                          const ExperimentSetup& setup,
                                          const LabeledDataset& test_set,
                                          std::uint64_t seed);

// Runs every configured seed and aggregates final-round errors.
ExperimentResult run_seeds(const SimulationConfig& config,
                           const ExperimentData& data);

// Error rate of a flat parameter vector on a labeled set.
double evaluate(const ModelParams& params,
                const std::vector<std::size_t>& architecture,
                const LabeledDataset& test_set);

bool is_collapsed_error(double error);

}  // namespace fedsim
