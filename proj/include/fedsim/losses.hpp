#pragma once

#include <vector>

#include "fedsim/matrix.hpp"
#include "fedsim/mlp.hpp"

namespace fedsim {

// Row-wise softmax, stabilized by max-subtraction. Rows sum to 1 within
// 1e-12 for any finite input. NaN input raises NumericError.
RealMatrix softmax(const RealMatrix& logits);

struct LossResult {
  double loss = 0.0;
  Gradients grads;
};

// Mean negative log softmax probability of the true class, with gradients
// w.r.t. every model parameter.
LossResult cross_entropy_loss(const MlpModel& model, const RealMatrix& batch,
                              const std::vector<int>& labels);

// KL(teacher || softmax(student_logits / T)) averaged over the batch and
// scaled by T^2, with gradients w.r.t. every student parameter. Teacher rows
// must sum to 1 within 1e-6.
LossResult kd_loss(const MlpModel& student, const RealMatrix& batch,
                   const RealMatrix& teacher_probs, double temperature);

// Loss-layer pieces, exposed for gradient checks: value and d(loss)/d(logits)
// without touching model parameters.
struct LogitLoss {
  double loss = 0.0;
  RealMatrix dlogits;
};

LogitLoss cross_entropy_on_logits(const RealMatrix& logits,
                                  const std::vector<int>& labels);
LogitLoss kd_on_logits(const RealMatrix& student_logits,
                       const RealMatrix& teacher_probs, double temperature);

}  // namespace fedsim
