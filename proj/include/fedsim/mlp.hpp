#pragma once

#include <cstdint>
#include <vector>

#include "fedsim/matrix.hpp"

namespace fedsim {

// Fully-connected classifier with ReLU hidden layers and a linear output
// layer (raw logits, no softmax). weights[l] is layer_dims[l] x
// layer_dims[l+1]; forward computes x*W + b per layer.
struct MlpModel {
  std::vector<std::size_t> layer_dims;
  std::vector<RealMatrix> weights;
  std::vector<std::vector<double>> biases;

  std::size_t layer_count() const { return weights.size(); }
  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }
  std::size_t parameter_count() const;

  bool operator==(const MlpModel& other) const = default;
};

// Flat parameter vector; the unit of aggregation. Layout is layer-major:
// layer-0 weights row-major, layer-0 biases, layer-1 weights, ...
struct ModelParams {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool operator==(const ModelParams& other) const = default;
};

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 5;
  std::size_t batch_size = 64;
  std::uint64_t rng_seed = 0;
};

// Per-parameter gradients, shaped like the model they came from.
struct Gradients {
  std::vector<RealMatrix> weight_grads;
  std::vector<std::vector<double>> bias_grads;
};

// Activations recorded during a forward pass; layer_inputs[l] is the input
// to layer l (layer_inputs[0] is the batch itself), logits is the output.
struct ForwardTrace {
  std::vector<RealMatrix> layer_inputs;
  RealMatrix logits;
};

std::size_t parameter_count_for(const std::vector<std::size_t>& layer_dims);

// Glorot-uniform weights, zero biases. Deterministic for a fixed seed.
MlpModel init_model(const std::vector<std::size_t>& layer_dims,
                    std::uint64_t seed);

// batch is N x input_dim; returns N x output_dim logits.
RealMatrix forward(const MlpModel& model, const RealMatrix& batch);
RealMatrix forward_with_trace(const MlpModel& model, const RealMatrix& batch,
                              ForwardTrace& trace);

// Backpropagates d(loss)/d(logits) through the recorded trace.
Gradients backprop(const MlpModel& model, const ForwardTrace& trace,
                   const RealMatrix& dlogits);

// params -= scale * grads
void apply_gradients(MlpModel& model, const Gradients& grads, double scale);

ModelParams flatten(const MlpModel& model);
MlpModel unflatten(const ModelParams& params,
                   const std::vector<std::size_t>& layer_dims);

}  // namespace fedsim
