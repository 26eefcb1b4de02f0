#include "fedsim/train.hpp"

#include <algorithm>
#include <numeric>

#include "fedsim/errors.hpp"
#include "fedsim/losses.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

MlpModel sgd_train(MlpModel model, const LabeledDataset& dataset,
                   const TrainConfig& config) {
  if (dataset.size() == 0) {
    throw ValidationError("sgd_train: empty dataset");
  }
  if (config.batch_size == 0) {
    throw ValidationError("sgd_train: batch_size must be >= 1");
  }
  if (config.learning_rate < 0.0) {
    throw ValidationError("sgd_train: negative learning rate");
  }
  const std::size_t n = dataset.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(config.rng_seed, "epoch_shuffle", epoch));
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(start + config.batch_size, n);
      const std::size_t rows = end - start;
      RealMatrix batch(rows, dataset.dim());
      std::vector<int> labels(rows);
      for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t src = order[start + i];
        std::copy(dataset.inputs.row_ptr(src),
                  dataset.inputs.row_ptr(src) + dataset.dim(),
                  batch.row_ptr(i));
        labels[i] = dataset.labels[src];
      }
      LossResult result = cross_entropy_loss(model, batch, labels);
      apply_gradients(model, result.grads, config.learning_rate);
    }
  }
  return model;
}

double evaluate_error(const MlpModel& model, const LabeledDataset& test_set) {
  if (test_set.size() == 0) {
    throw ValidationError("evaluate_error: empty test set");
  }
  std::size_t wrong = 0;
  // Batched forward keeps evaluation fast on the full test set.
  const std::size_t chunk = 512;
  for (std::size_t start = 0; start < test_set.size(); start += chunk) {
    const std::size_t end = std::min(start + chunk, test_set.size());
    RealMatrix batch(end - start, test_set.dim());
    for (std::size_t i = start; i < end; ++i) {
      std::copy(test_set.inputs.row_ptr(i),
                test_set.inputs.row_ptr(i) + test_set.dim(),
                batch.row_ptr(i - start));
    }
    RealMatrix logits = forward(model, batch);
    for (std::size_t i = 0; i < logits.rows; ++i) {
      const double* row = logits.row_ptr(i);
      std::size_t best = 0;
      for (std::size_t j = 1; j < logits.cols; ++j) {
        if (row[j] > row[best]) best = j;
      }
      if (static_cast<int>(best) != test_set.labels[start + i]) ++wrong;
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(test_set.size());
}

}  // namespace fedsim
