#pragma once

#include <cstddef>
#include <vector>

#include "qostiefel/block_vector.hpp"
#include "qostiefel/dense_matrix.hpp"

namespace qostiefel {

// Largest matrix order handled by the dense kernels.
inline constexpr std::size_t kDefaultDenseCap = 4096;

// Symmetry gate for sym_eig inputs: max|A_ij - A_ji| <= tol * max|A_ij|.
inline constexpr double kSymmetryRelTol = 1e-12;

struct EigResult {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // column k is the eigenvector for values[k]
};

// Full symmetric eigendecomposition; residual ||A v - lambda v|| <= 1e-10 ||A||
// and orthonormal vectors to 1e-12.
EigResult sym_eig(const DenseMatrix& A, std::size_t dense_cap = kDefaultDenseCap);

struct SvdResult {
  DenseMatrix left;           // m x k, orthonormal columns
  std::vector<double> sigma;  // descending, nonnegative, k = min(m, n)
  DenseMatrix right;          // n x k, orthonormal columns; M = left diag(sigma) right^T
};

SvdResult thin_svd(const DenseMatrix& M);

// Solves A X = B by partial-pivoting elimination. A pivot below
// 1e-13 * max|A| aborts with a SingularError naming the elimination step.
DenseMatrix solve_dense(const DenseMatrix& A, const DenseMatrix& B);

// Modified Gram-Schmidt with a second pass; output spans the same column
// space with Q^T Q = I to 1e-12. A dependent column raises DegeneracyError
// naming the first offender.
BlockVector orthonormalize(const BlockVector& U);

}  // namespace qostiefel
