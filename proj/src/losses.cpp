#include "fedsim/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedsim/errors.hpp"

namespace fedsim {

RealMatrix softmax(const RealMatrix& logits) {
  RealMatrix out(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double* row = logits.row_ptr(i);
    double* orow = out.row_ptr(i);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < logits.cols; ++j) {
      if (std::isnan(row[j])) {
        throw NumericError("softmax: NaN logit at row " + std::to_string(i));
      }
      mx = std::max(mx, row[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.cols; ++j) {
      orow[j] = std::exp(row[j] - mx);
      sum += orow[j];
    }
    for (std::size_t j = 0; j < logits.cols; ++j) {
      orow[j] /= sum;
    }
  }
  return out;
}

LogitLoss cross_entropy_on_logits(const RealMatrix& logits,
                                  const std::vector<int>& labels) {
  if (labels.size() != logits.rows) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(logits.rows) + " rows");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= logits.cols) {
      throw ValidationError("cross_entropy: label " +
                            std::to_string(labels[i]) + " at row " +
                            std::to_string(i) + " outside [0, " +
                            std::to_string(logits.cols) + ")");
    }
  }
  const double inv_n = 1.0 / static_cast<double>(logits.rows);
  RealMatrix probs = softmax(logits);
  LogitLoss result;
  result.dlogits = probs;
  double loss = 0.0;
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double p = probs(i, static_cast<std::size_t>(labels[i]));
    loss -= std::log(std::max(p, 1e-300));
    result.dlogits(i, static_cast<std::size_t>(labels[i])) -= 1.0;
  }
  for (double& v : result.dlogits.data) {
    v *= inv_n;
  }
  result.loss = loss * inv_n;
  return result;
}

LogitLoss kd_on_logits(const RealMatrix& student_logits,
                       const RealMatrix& teacher_probs, double temperature) {
  if (!(temperature > 0.0)) {
    throw ValidationError("kd_loss: temperature must be positive");
  }
  if (!student_logits.same_shape(teacher_probs)) {
    throw ShapeError("kd_loss: student logits and teacher probs differ in shape");
  }
  for (std::size_t i = 0; i < teacher_probs.rows; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < teacher_probs.cols; ++j) {
      sum += teacher_probs(i, j);
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw ValidationError("kd_loss: teacher row " + std::to_string(i) +
                            " sums to " + std::to_string(sum));
    }
  }

  const std::size_t n = student_logits.rows;
  const std::size_t c = student_logits.cols;
  const double t = temperature;
  const double inv_n = 1.0 / static_cast<double>(n);

  // log-softmax of student_logits / T, stabilized.
  RealMatrix scaled(n, c);
  for (std::size_t i = 0; i < scaled.data.size(); ++i) {
    scaled.data[i] = student_logits.data[i] / t;
  }
  RealMatrix q = softmax(scaled);

  LogitLoss result;
  result.dlogits = RealMatrix(n, c);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* srow = scaled.row_ptr(i);
    double mx = *std::max_element(srow, srow + c);
    double lse = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      lse += std::exp(srow[j] - mx);
    }
    lse = std::log(lse) + mx;
    for (std::size_t j = 0; j < c; ++j) {
      const double p = teacher_probs(i, j);
      if (p > 0.0) {
        loss += p * (std::log(p) - (srow[j] - lse));
      }
      result.dlogits(i, j) = t * (q(i, j) - p) * inv_n;
    }
  }
  result.loss = loss * t * t * inv_n;
  return result;
}

LossResult cross_entropy_loss(const MlpModel& model, const RealMatrix& batch,
                              const std::vector<int>& labels) {
  ForwardTrace trace;
  RealMatrix logits = forward_with_trace(model, batch, trace);
  LogitLoss ll = cross_entropy_on_logits(logits, labels);
  LossResult result;
  result.loss = ll.loss;
  result.grads = backprop(model, trace, ll.dlogits);
  return result;
}

LossResult kd_loss(const MlpModel& student, const RealMatrix& batch,
                   const RealMatrix& teacher_probs, double temperature) {
  ForwardTrace trace;
  RealMatrix logits = forward_with_trace(student, batch, trace);
  LogitLoss ll = kd_on_logits(logits, teacher_probs, temperature);
  LossResult result;
  result.loss = ll.loss;
  result.grads = backprop(student, trace, ll.dlogits);
  return result;
}

}  // namespace fedsim
