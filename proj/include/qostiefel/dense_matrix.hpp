#pragma once

#include <cstddef>
#include <vector>

#include "qostiefel/errors.hpp"

namespace qostiefel {

// Row-major dense matrix. Stays small throughout the solver (N x N blocks and
// the 2N x 2N midpoint core); grows large only for reference solves.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double value = 0.0);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  DenseMatrix transposed() const;
  double frobenius_norm() const;
  double max_abs() const;
  double trace() const;
  // max over (i, j) of |A_ij - A_ji|; zero for exactly symmetric storage.
  double symmetry_defect() const;
  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& A, const DenseMatrix& B);
DenseMatrix operator+(const DenseMatrix& A, const DenseMatrix& B);
DenseMatrix operator-(const DenseMatrix& A, const DenseMatrix& B);
DenseMatrix operator*(double a, const DenseMatrix& A);

}  // namespace qostiefel
