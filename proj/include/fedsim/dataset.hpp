#pragma once

#include <cstdint>
#include <vector>

#include "fedsim/matrix.hpp"

namespace fedsim {

struct LabeledDataset {
  RealMatrix inputs;        // N x D, values in [0, 1]
  std::vector<int> labels;  // length N, values in [0, class_count)
  int class_count = 0;

  std::size_t size() const { return inputs.rows; }
  std::size_t dim() const { return inputs.cols; }

  // Checks the type invariants: nonempty, labels in range, finite inputs.
  void validate() const;

  // Row subset in the given index order.
  LabeledDataset select(const std::vector<std::size_t>& indices) const;
};

struct ClientShard {
  std::size_t client_id = 0;
  LabeledDataset dataset;
  std::size_t size = 0;  // n_k
};

enum class DistillSource { held_out_real, uniform_noise };

struct ServerDistillSet {
  RealMatrix inputs;  // unlabeled, values in [0, 1]
  DistillSource source = DistillSource::held_out_real;

  std::size_t size() const { return inputs.rows; }
};

// Well-separated per-class Gaussian clusters inside [0,1]^dim; a fast,
// linearly separable test fixture.
LabeledDataset synthetic_gaussian_blobs(int classes, std::size_t per_class,
                                        std::size_t dim, std::uint64_t seed);

}  // namespace fedsim
