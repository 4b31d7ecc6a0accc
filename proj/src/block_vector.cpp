#include "qostiefel/block_vector.hpp"

#include <cmath>
#include <string>

namespace qostiefel {

namespace {

void require_same_shape(const BlockVector& X, const BlockVector& Y, const char* op) {
  if (X.ambient_dim() != Y.ambient_dim() || X.block_size() != Y.block_size()) {
    throw ShapeError(std::string(op) + ": block shape mismatch " + std::to_string(X.ambient_dim()) +
                     "x" + std::to_string(X.block_size()) + " vs " + std::to_string(Y.ambient_dim()) +
                     "x" + std::to_string(Y.block_size()));
  }
}

}  // namespace

BlockVector::BlockVector(std::size_t ambient_dim, std::size_t block_size)
    : ambient_dim_(ambient_dim), block_size_(block_size), data_(ambient_dim * block_size, 0.0) {
  if (block_size == 0 || ambient_dim < block_size) {
    throw ShapeError("BlockVector: need 1 <= block_size <= ambient_dim, got " +
                     std::to_string(ambient_dim) + "x" + std::to_string(block_size));
  }
}

double BlockVector::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double BlockVector::column_norm(std::size_t j) const {
  const double* c = col(j);
  double s = 0.0;
  for (std::size_t i = 0; i < ambient_dim_; ++i) s += c[i] * c[i];
  return std::sqrt(s);
}

bool BlockVector::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

DenseMatrix gram(const BlockVector& U, const BlockVector& V) {
  require_same_shape(U, V, "gram");
  const std::size_t n = U.ambient_dim();
  const std::size_t N = U.block_size();
  DenseMatrix G(N, N);
  for (std::size_t i = 0; i < N; ++i) {
    const double* ui = U.col(i);
    for (std::size_t j = 0; j < N; ++j) {
      const double* vj = V.col(j);
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += ui[k] * vj[k];
      G(i, j) = s;
    }
  }
  return G;
}

BlockVector multiply(const BlockVector& X, const DenseMatrix& M) {
  if (X.block_size() != M.rows()) throw ShapeError("multiply: coefficient rows must match block size");
  BlockVector Y(X.ambient_dim(), M.cols());
  const std::size_t n = X.ambient_dim();
  for (std::size_t j = 0; j < M.cols(); ++j) {
    double* yj = Y.col(j);
    for (std::size_t k = 0; k < M.rows(); ++k) {
      const double m = M(k, j);
      if (m == 0.0) continue;
      const double* xk = X.col(k);
      for (std::size_t i = 0; i < n; ++i) yj[i] += m * xk[i];
    }
  }
  return Y;
}

void add_scaled(BlockVector& Y, double a, const BlockVector& X) {
  require_same_shape(Y, X, "add_scaled");
  const std::size_t n = Y.ambient_dim();
  for (std::size_t j = 0; j < Y.block_size(); ++j) {
    double* yj = Y.col(j);
    const double* xj = X.col(j);
    for (std::size_t i = 0; i < n; ++i) yj[i] += a * xj[i];
  }
}

BlockVector linear_combination(double a, const BlockVector& X, double b, const BlockVector& Y) {
  require_same_shape(X, Y, "linear_combination");
  BlockVector Z(X.ambient_dim(), X.block_size());
  const std::size_t n = X.ambient_dim();
  for (std::size_t j = 0; j < X.block_size(); ++j) {
    const double* xj = X.col(j);
    const double* yj = Y.col(j);
    double* zj = Z.col(j);
    for (std::size_t i = 0; i < n; ++i) zj[i] = a * xj[i] + b * yj[i];
  }
  return Z;
}

double frobenius_distance(const BlockVector& X, const BlockVector& Y) {
  require_same_shape(X, Y, "frobenius_distance");
  double s = 0.0;
  const std::size_t n = X.ambient_dim();
  for (std::size_t j = 0; j < X.block_size(); ++j) {
    const double* xj = X.col(j);
    const double* yj = Y.col(j);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = xj[i] - yj[i];
      s += d * d;
    }
  }
  return std::sqrt(s);
}

void scale_in_place(BlockVector& X, double a) {
  const std::size_t n = X.ambient_dim();
  for (std::size_t j = 0; j < X.block_size(); ++j) {
    double* xj = X.col(j);
    for (std::size_t i = 0; i < n; ++i) xj[i] *= a;
  }
}

}  // namespace qostiefel
