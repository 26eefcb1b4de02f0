#pragma once

#include <cstddef>
#include <vector>

namespace fedsim {

// Dense row-major matrix of doubles. The only tensor type in the project;
// model inputs, logits and per-layer weights are all RealMatrix.
struct RealMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major, rows * cols entries

  RealMatrix() = default;
  RealMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) {
    return data[r * cols + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }

  double* row_ptr(std::size_t r) { return data.data() + r * cols; }
  const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }

  bool same_shape(const RealMatrix& other) const {
    return rows == other.rows && cols == other.cols;
  }

  bool operator==(const RealMatrix& other) const = default;
};

// out = a * b
RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);

// out = a * b^T
RealMatrix matmul_bt(const RealMatrix& a, const RealMatrix& b);

// out = a^T * b
RealMatrix matmul_at(const RealMatrix& a, const RealMatrix& b);

// Adds v to every row of m in place. v.size() must equal m.cols.
void add_row_vector(RealMatrix& m, const std::vector<double>& v);

// Sum of each column of m, as a vector of length m.cols.
std::vector<double> column_sums(const RealMatrix& m);

// True if every entry is finite.
bool all_finite(const RealMatrix& m);

}  // namespace fedsim
