#include "fedsim/distill.hpp"

#include <algorithm>
#include <numeric>

#include "fedsim/errors.hpp"
#include "fedsim/losses.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

RealMatrix mean_logits(const LogitEnsemble& ensemble) {
  ensemble.validate();
  RealMatrix out(ensemble.points(), ensemble.classes());
  const double inv_m = 1.0 / static_cast<double>(ensemble.models());
  for (const RealMatrix& model : ensemble.logits) {
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      out.data[i] += model.data[i];
    }
  }
  for (double& v : out.data) v *= inv_m;
  return out;
}

RealMatrix median_logits(const LogitEnsemble& ensemble) {
  ensemble.validate();
  const std::size_t m = ensemble.models();
  RealMatrix out(ensemble.points(), ensemble.classes());
  std::vector<double> cell(m);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    for (std::size_t model = 0; model < m; ++model) {
      cell[model] = ensemble.logits[model].data[i];
    }
    std::sort(cell.begin(), cell.end());
    out.data[i] = (m % 2 == 1)
                      ? cell[m / 2]
                      : 0.5 * (cell[m / 2 - 1] + cell[m / 2]);
  }
  return out;
}

PseudolabelSet pseudolabels_mean(const LogitEnsemble& ensemble) {
  PseudolabelSet out;
  out.mode = PseudolabelMode::mean_logits;
  out.probs = softmax(mean_logits(ensemble));
  return out;
}

PseudolabelSet pseudolabels_median(const LogitEnsemble& ensemble) {
  PseudolabelSet out;
  out.mode = PseudolabelMode::median_logits;
  out.probs = softmax(median_logits(ensemble));
  return out;
}

MlpModel distill(MlpModel student, const PseudolabelSet& pseudolabels,
                 const ServerDistillSet& distill_set,
                 const DistillConfig& config) {
  if (pseudolabels.probs.rows != distill_set.size()) {
    throw ValidationError("distill: " +
                          std::to_string(pseudolabels.probs.rows) +
                          " pseudolabel rows for " +
                          std::to_string(distill_set.size()) +
                          " distill inputs");
  }
  if (config.batch_size == 0) {
    throw ValidationError("distill: batch_size must be >= 1");
  }
  const std::size_t n = distill_set.size();
  const std::size_t dim = distill_set.inputs.cols;
  const std::size_t c = pseudolabels.probs.cols;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(config.rng_seed, "distill_shuffle", epoch));
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(start + config.batch_size, n);
      const std::size_t rows = end - start;
      RealMatrix batch(rows, dim);
      RealMatrix teacher(rows, c);
      for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t src = order[start + i];
        std::copy(distill_set.inputs.row_ptr(src),
                  distill_set.inputs.row_ptr(src) + dim, batch.row_ptr(i));
        std::copy(pseudolabels.probs.row_ptr(src),
                  pseudolabels.probs.row_ptr(src) + c, teacher.row_ptr(i));
      }
      LossResult result =
          kd_loss(student, batch, teacher, config.temperature);
      apply_gradients(student, result.grads, config.learning_rate);
    }
  }
  return student;
}

}  // namespace fedsim
