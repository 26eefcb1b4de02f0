#pragma once

#include "fedsim/dataset.hpp"
#include "fedsim/mlp.hpp"

namespace fedsim {

// Plain SGD with cross-entropy, shuffling once per epoch from
// config.rng_seed. Bit-identical for identical inputs and seed.
MlpModel sgd_train(MlpModel model, const LabeledDataset& dataset,
                   const TrainConfig& config);

// Fraction of argmax-misclassified samples; argmax ties go to the lowest
// class index.
double evaluate_error(const MlpModel& model, const LabeledDataset& test_set);

}  // namespace fedsim
