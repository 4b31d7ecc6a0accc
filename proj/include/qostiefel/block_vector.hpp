#pragma once

#include <cstddef>
#include <vector>

#include "qostiefel/dense_matrix.hpp"

namespace qostiefel {

// N_g x N column block stored column-major; column j is contiguous.
// Invariant: 1 <= block_size <= ambient_dim.
class BlockVector {
 public:
  BlockVector() = default;
  BlockVector(std::size_t ambient_dim, std::size_t block_size);

  std::size_t ambient_dim() const { return ambient_dim_; }
  std::size_t block_size() const { return block_size_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * ambient_dim_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * ambient_dim_ + i]; }

  double* col(std::size_t j) { return data_.data() + j * ambient_dim_; }
  const double* col(std::size_t j) const { return data_.data() + j * ambient_dim_; }

  double frobenius_norm() const;
  double column_norm(std::size_t j) const;
  bool all_finite() const;

 private:
  std::size_t ambient_dim_ = 0;
  std::size_t block_size_ = 0;
  std::vector<double> data_;
};

// U^T V with entry (i, j) = <u_i, v_j>.
DenseMatrix gram(const BlockVector& U, const BlockVector& V);

// X * M for an N x m coefficient matrix; result has block_size m.
BlockVector multiply(const BlockVector& X, const DenseMatrix& M);

// Y += a * X.
void add_scaled(BlockVector& Y, double a, const BlockVector& X);

// a * X + b * Y.
BlockVector linear_combination(double a, const BlockVector& X, double b, const BlockVector& Y);

double frobenius_distance(const BlockVector& X, const BlockVector& Y);

void scale_in_place(BlockVector& X, double a);

}  // namespace qostiefel
