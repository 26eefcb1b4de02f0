#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/distill.hpp"
#include "fedsim/mlp.hpp"
#include "fedsim/scoring.hpp"

namespace fedsim {

enum class AggregatorId {
  fedavg,
  comed,
  mkrum,
  feddf,
  feddfmed,
  fedrad,
  fedradnoise,
};

struct MkrumOptions {
  // f defaults to the configured attacker count, m to M - f.
  std::optional<std::size_t> f;
  std::optional<std::size_t> m;
  bool size_weighted = true;
};

struct AggregatorKind {
  AggregatorId id = AggregatorId::fedavg;
  MkrumOptions mkrum;

  bool needs_distill_set() const {
    return id == AggregatorId::feddf || id == AggregatorId::feddfmed ||
           id == AggregatorId::fedrad;
  }
  bool produces_scores() const {
    return id == AggregatorId::fedrad || id == AggregatorId::fedradnoise;
  }
};

// Unknown names are rejected at config-parse time.
AggregatorId parse_aggregator(const std::string& name);
std::string to_string(AggregatorId id);
const std::vector<std::string>& aggregator_names();

struct AggregationInput {
  std::vector<ModelParams> client_params;
  std::vector<std::size_t> client_sizes;  // n_k
  const ServerDistillSet* distill_set = nullptr;
  std::vector<std::size_t> architecture;  // layer_dims
  std::size_t round_index = 0;
  std::uint64_t rng_seed = 0;
  DistillConfig distill;
  MedianConvention median_convention = MedianConvention::lower;
  // fedradnoise generates its own distill inputs with this geometry.
  std::size_t noise_set_size = 10000;
  std::size_t attacker_count_hint = 0;  // default f for mkrum
  std::size_t max_threads = 0;          // 0 => hardware concurrency

  std::size_t model_count() const { return client_params.size(); }
  void validate() const;
};

struct AggregationOutcome {
  ModelParams global;
  std::optional<ScoreVector> scores;
  std::optional<MedianCountHistogram> histogram;
  bool used_fallback_weights = false;
};

// Forward passes of every (unflattened) client model over the given inputs,
// evaluated in parallel; the result order matches client order.
LogitEnsemble compute_ensemble_logits(
    const std::vector<ModelParams>& client_params,
    const std::vector<std::size_t>& architecture, const RealMatrix& inputs,
    std::size_t max_threads = 0);

// sum_k (n_k / sum n) * w_k
ModelParams fedavg(const AggregationInput& input);

// Per-coordinate value median (midpoint for even M).
ModelParams comed(const AggregationInput& input);

// Per client, score = sum of squared distances to its M-f-2 nearest other
// clients; the m lowest-scored clients are averaged.
ModelParams mkrum(const AggregationInput& input, std::size_t f,
                  std::size_t m, bool size_weighted = true);

// Size-weighted average distilled against mean-logit (feddf) or
// median-logit (feddfmed) pseudolabels.
ModelParams feddf(const AggregationInput& input);
ModelParams feddfmed(const AggregationInput& input);

// Median-score weighted average followed by median-logit distillation.
AggregationOutcome fedrad(const AggregationInput& input);

// fedrad with a self-generated uniform-noise distill set.
AggregationOutcome fedradnoise(const AggregationInput& input);

AggregationOutcome aggregate(const AggregatorKind& kind,
                             const AggregationInput& input);

}  // namespace fedsim
