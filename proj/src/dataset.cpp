#include "fedsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

void LabeledDataset::validate() const {
  if (inputs.rows == 0) throw ValidationError("dataset: empty");
  if (labels.size() != inputs.rows) {
    throw ValidationError("dataset: " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(inputs.rows) +
                          " rows");
  }
  if (class_count <= 0) throw ValidationError("dataset: class_count not set");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) {
      throw ValidationError("dataset: label " + std::to_string(labels[i]) +
                            " at row " + std::to_string(i) +
                            " outside [0, " + std::to_string(class_count) +
                            ")");
    }
  }
  if (!all_finite(inputs)) throw NumericError("dataset: non-finite input");
}

LabeledDataset LabeledDataset::select(
    const std::vector<std::size_t>& indices) const {
  LabeledDataset out;
  out.class_count = class_count;
  out.inputs = RealMatrix(indices.size(), inputs.cols);
  out.labels.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t src = indices[i];
    std::copy(inputs.row_ptr(src), inputs.row_ptr(src) + inputs.cols,
              out.inputs.row_ptr(i));
    out.labels[i] = labels[src];
  }
  return out;
}

LabeledDataset synthetic_gaussian_blobs(int classes, std::size_t per_class,
                                        std::size_t dim, std::uint64_t seed) {
  if (classes < 2) {
    throw ValidationError("synthetic_gaussian_blobs: need at least 2 classes");
  }
  if (per_class == 0 || dim == 0) {
    throw ValidationError("synthetic_gaussian_blobs: empty geometry");
  }
  const double lo = 0.2;
  const double hi = 0.8;
  const double sigma = 0.05;

  LabeledDataset out;
  out.class_count = classes;
  out.inputs = RealMatrix(per_class * static_cast<std::size_t>(classes), dim);
  out.labels.resize(out.inputs.rows);
  Rng rng(seed);
  std::size_t row = 0;
  for (int c = 0; c < classes; ++c) {
    for (std::size_t k = 0; k < per_class; ++k, ++row) {
      double* r = out.inputs.row_ptr(row);
      for (std::size_t j = 0; j < dim; ++j) {
        const double center =
            (static_cast<int>(j % static_cast<std::size_t>(classes)) == c)
                ? hi
                : lo;
        r[j] = std::clamp(center + sigma * rng.normal(), 0.0, 1.0);
      }
      out.labels[row] = c;
    }
  }
  return out;
}

}  // namespace fedsim
