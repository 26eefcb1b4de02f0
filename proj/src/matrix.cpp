#include "fedsim/matrix.hpp"

#include <cmath>
#include <string>

#include "fedsim/errors.hpp"

namespace fedsim {

namespace {

void check_inner(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string("matmul: inner dimensions differ (") +
                     std::to_string(a) + " vs " + std::to_string(b) + ") in " +
                     what);
  }
}

}  // namespace

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
  check_inner(a.cols, b.rows, "a*b");
  RealMatrix out(a.rows, b.cols);
  // i-k-j order: streams through b and out rows, vectorizes well.
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row_ptr(i);
    double* orow = out.row_ptr(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row_ptr(k);
      for (std::size_t j = 0; j < b.cols; ++j) {
        orow[j] += aik * brow[j];
      }
    }
  }
  return out;
}

RealMatrix matmul_bt(const RealMatrix& a, const RealMatrix& b) {
  check_inner(a.cols, b.cols, "a*b^T");
  RealMatrix out(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row_ptr(i);
    double* orow = out.row_ptr(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* brow = b.row_ptr(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) {
        acc += arow[k] * brow[k];
      }
      orow[j] = acc;
    }
  }
  return out;
}

RealMatrix matmul_at(const RealMatrix& a, const RealMatrix& b) {
  check_inner(a.rows, b.rows, "a^T*b");
  RealMatrix out(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* arow = a.row_ptr(k);
    const double* brow = b.row_ptr(k);
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* orow = out.row_ptr(i);
      for (std::size_t j = 0; j < b.cols; ++j) {
        orow[j] += aki * brow[j];
      }
    }
  }
  return out;
}

void add_row_vector(RealMatrix& m, const std::vector<double>& v) {
  if (v.size() != m.cols) {
    throw ShapeError("add_row_vector: vector length " +
                     std::to_string(v.size()) + " != cols " +
                     std::to_string(m.cols));
  }
  for (std::size_t i = 0; i < m.rows; ++i) {
    double* row = m.row_ptr(i);
    for (std::size_t j = 0; j < m.cols; ++j) {
      row[j] += v[j];
    }
  }
}

std::vector<double> column_sums(const RealMatrix& m) {
  std::vector<double> sums(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.row_ptr(i);
    for (std::size_t j = 0; j < m.cols; ++j) {
      sums[j] += row[j];
    }
  }
  return sums;
}

bool all_finite(const RealMatrix& m) {
  for (double v : m.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace fedsim
