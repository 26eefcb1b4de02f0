#include "fedsim/mlp.hpp"

#include <cmath>
#include <string>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

std::size_t parameter_count_for(const std::vector<std::size_t>& layer_dims) {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    total += layer_dims[l] * layer_dims[l + 1] + layer_dims[l + 1];
  }
  return total;
}

std::size_t MlpModel::parameter_count() const {
  return parameter_count_for(layer_dims);
}

MlpModel init_model(const std::vector<std::size_t>& layer_dims,
                    std::uint64_t seed) {
  if (layer_dims.size() < 2) {
    throw ShapeError("init_model: need at least input and output dims");
  }
  for (std::size_t d : layer_dims) {
    if (d == 0) throw ShapeError("init_model: zero layer dimension");
  }
  MlpModel model;
  model.layer_dims = layer_dims;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const std::size_t fan_in = layer_dims[l];
    const std::size_t fan_out = layer_dims[l + 1];
    const double bound =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    RealMatrix w(fan_in, fan_out);
    for (double& v : w.data) {
      v = rng.uniform(-bound, bound);
    }
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(fan_out, 0.0);
  }
  return model;
}

RealMatrix forward(const MlpModel& model, const RealMatrix& batch) {
  ForwardTrace trace;
  return forward_with_trace(model, batch, trace);
}

RealMatrix forward_with_trace(const MlpModel& model, const RealMatrix& batch,
                              ForwardTrace& trace) {
  if (batch.cols != model.input_dim()) {
    throw ShapeError("forward: batch has " + std::to_string(batch.cols) +
                     " columns, model expects " +
                     std::to_string(model.input_dim()));
  }
  trace.layer_inputs.clear();
  trace.layer_inputs.push_back(batch);
  RealMatrix x = batch;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    RealMatrix z = matmul(x, model.weights[l]);
    add_row_vector(z, model.biases[l]);
    if (l + 1 < model.layer_count()) {
      for (double& v : z.data) {
        if (v < 0.0) v = 0.0;
      }
      trace.layer_inputs.push_back(z);
    }
    x = std::move(z);
  }
  trace.logits = x;
  return x;
}

Gradients backprop(const MlpModel& model, const ForwardTrace& trace,
                   const RealMatrix& dlogits) {
  const std::size_t layers = model.layer_count();
  Gradients grads;
  grads.weight_grads.resize(layers);
  grads.bias_grads.resize(layers);

  RealMatrix delta = dlogits;
  for (std::size_t l = layers; l-- > 0;) {
    const RealMatrix& input = trace.layer_inputs[l];
    grads.weight_grads[l] = matmul_at(input, delta);
    grads.bias_grads[l] = column_sums(delta);
    if (l > 0) {
      RealMatrix prev = matmul_bt(delta, model.weights[l]);
      // ReLU gate: the stored activation is post-ReLU, so zero means the
      // unit was inactive.
      for (std::size_t i = 0; i < prev.data.size(); ++i) {
        if (input.data[i] <= 0.0) prev.data[i] = 0.0;
      }
      delta = std::move(prev);
    }
  }
  return grads;
}

void apply_gradients(MlpModel& model, const Gradients& grads, double scale) {
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    double* w = model.weights[l].data.data();
    const double* g = grads.weight_grads[l].data.data();
    const std::size_t n = model.weights[l].data.size();
    for (std::size_t i = 0; i < n; ++i) {
      w[i] -= scale * g[i];
    }
    for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
      model.biases[l][i] -= scale * grads.bias_grads[l][i];
    }
  }
}

ModelParams flatten(const MlpModel& model) {
  ModelParams params;
  params.values.reserve(model.parameter_count());
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    params.values.insert(params.values.end(), model.weights[l].data.begin(),
                         model.weights[l].data.end());
    params.values.insert(params.values.end(), model.biases[l].begin(),
                         model.biases[l].end());
  }
  return params;
}

MlpModel unflatten(const ModelParams& params,
                   const std::vector<std::size_t>& layer_dims) {
  const std::size_t expected = parameter_count_for(layer_dims);
  if (params.size() != expected) {
    throw ShapeError("unflatten: got " + std::to_string(params.size()) +
                     " values, architecture needs " + std::to_string(expected));
  }
  MlpModel model;
  model.layer_dims = layer_dims;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const std::size_t in = layer_dims[l];
    const std::size_t out = layer_dims[l + 1];
    RealMatrix w(in, out);
    std::copy(params.values.begin() + offset,
              params.values.begin() + offset + in * out, w.data.begin());
    offset += in * out;
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(params.values.begin() + offset,
                              params.values.begin() + offset + out);
    offset += out;
  }
  return model;
}

}  // namespace fedsim
