#include "qostiefel/dense_matrix.hpp"

#include <cmath>
#include <string>

namespace qostiefel {

namespace {

void require_same_shape(const DenseMatrix& A, const DenseMatrix& B, const char* op) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(A.rows()) + "x" +
                     std::to_string(A.cols()) + " vs " + std::to_string(B.rows()) + "x" +
                     std::to_string(B.cols()));
  }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double value)
    : rows_(rows), cols_(cols), data_(rows * cols, value) {
  if (rows == 0 || cols == 0) throw ShapeError("DenseMatrix: zero dimension");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix I(n, n);
  for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix T(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) T(j, i) = (*this)(i, j);
  return T;
}

double DenseMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double DenseMatrix::trace() const {
  const std::size_t n = std::min(rows_, cols_);
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) t += (*this)(i, i);
  return t;
}

double DenseMatrix::symmetry_defect() const {
  if (rows_ != cols_) throw ShapeError("symmetry_defect: matrix not square");
  double m = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i + 1; j < cols_; ++j)
      m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
  return m;
}

bool DenseMatrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

DenseMatrix operator*(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.cols() != B.rows()) throw ShapeError("matmul: inner dimension mismatch");
  DenseMatrix C(A.rows(), B.cols());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t k = 0; k < A.cols(); ++k) {
      const double a = A(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < B.cols(); ++j) C(i, j) += a * B(k, j);
    }
  }
  return C;
}

DenseMatrix operator+(const DenseMatrix& A, const DenseMatrix& B) {
  require_same_shape(A, B, "operator+");
  DenseMatrix C = A;
  for (std::size_t i = 0; i < C.rows(); ++i)
    for (std::size_t j = 0; j < C.cols(); ++j) C(i, j) += B(i, j);
  return C;
}

DenseMatrix operator-(const DenseMatrix& A, const DenseMatrix& B) {
  require_same_shape(A, B, "operator-");
  DenseMatrix C = A;
  for (std::size_t i = 0; i < C.rows(); ++i)
    for (std::size_t j = 0; j < C.cols(); ++j) C(i, j) -= B(i, j);
  return C;
}

DenseMatrix operator*(double a, const DenseMatrix& A) {
  DenseMatrix C = A;
  for (std::size_t i = 0; i < C.rows(); ++i)
    for (std::size_t j = 0; j < C.cols(); ++j) C(i, j) *= a;
  return C;
}

}  // namespace qostiefel
