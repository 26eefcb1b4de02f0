#pragma once

#include <cstdint>

#include "fedsim/dataset.hpp"
#include "fedsim/mlp.hpp"
#include "fedsim/scoring.hpp"

namespace fedsim {

enum class PseudolabelMode { mean_logits, median_logits };

// Soft targets for the server's unlabeled set; rows sum to 1.
struct PseudolabelSet {
  RealMatrix probs;  // N x C
  PseudolabelMode mode = PseudolabelMode::mean_logits;
};

struct DistillConfig {
  std::size_t epochs = 2;
  double learning_rate = 0.01;
  std::size_t batch_size = 128;
  double temperature = 1.0;
  std::uint64_t rng_seed = 0;
};

// Per-cell arithmetic mean of the ensemble's logits.
RealMatrix mean_logits(const LogitEnsemble& ensemble);

// Per-cell value median (midpoint of the two middle values for even M).
// Unlike the scoring rule, no owner is needed here, only a value.
RealMatrix median_logits(const LogitEnsemble& ensemble);

// Mean or median logits followed by a row softmax.
PseudolabelSet pseudolabels_mean(const LogitEnsemble& ensemble);
PseudolabelSet pseudolabels_median(const LogitEnsemble& ensemble);

// Trains the student against the fixed pseudolabels with SGD on the KD
// objective. Deterministic per config.rng_seed.
MlpModel distill(MlpModel student, const PseudolabelSet& pseudolabels,
                 const ServerDistillSet& distill_set,
                 const DistillConfig& config);

}  // namespace fedsim
