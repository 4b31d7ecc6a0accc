#include "qostiefel/linalg.hpp"

#include <lapacke.h>

#include <cmath>
#include <string>

namespace qostiefel {

EigResult sym_eig(const DenseMatrix& A, std::size_t dense_cap) {
  if (A.rows() != A.cols()) throw ShapeError("sym_eig: matrix not square");
  if (A.rows() > dense_cap) {
    throw SizeError("sym_eig: order " + std::to_string(A.rows()) + " exceeds dense cap " +
                    std::to_string(dense_cap));
  }
  const double scale = A.max_abs();
  if (A.symmetry_defect() > kSymmetryRelTol * scale) {
    throw ContractError("sym_eig: input asymmetric beyond tolerance (defect " +
                        std::to_string(A.symmetry_defect()) + ")");
  }

  const lapack_int n = static_cast<lapack_int>(A.rows());
  EigResult out;
  out.values.assign(A.rows(), 0.0);
  out.vectors = A;  // dsyevd overwrites with eigenvectors
  const lapack_int info = LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'V', 'U', n, out.vectors.data(), n,
                                         out.values.data());
  if (info != 0) {
    throw NumericalError("sym_eig: eigensolver failed to converge (info " + std::to_string(info) +
                         ")");
  }
  // Row-major layout: vectors(i, k) is component i of eigenvector k; values ascending.
  return out;
}

SvdResult thin_svd(const DenseMatrix& M) {
  if (!M.all_finite()) throw ContractError("thin_svd: input has non-finite entries");
  const lapack_int m = static_cast<lapack_int>(M.rows());
  const lapack_int n = static_cast<lapack_int>(M.cols());
  const lapack_int k = std::min(m, n);

  DenseMatrix work = M;
  SvdResult out;
  out.sigma.assign(static_cast<std::size_t>(k), 0.0);
  out.left = DenseMatrix(M.rows(), static_cast<std::size_t>(k));
  DenseMatrix vt(static_cast<std::size_t>(k), M.cols());
  const lapack_int info =
      LAPACKE_dgesdd(LAPACK_ROW_MAJOR, 'S', m, n, work.data(), n, out.sigma.data(),
                     out.left.data(), k, vt.data(), n);
  if (info != 0) {
    throw NumericalError("thin_svd: SVD failed to converge (info " + std::to_string(info) + ")");
  }
  out.right = vt.transposed();
  return out;
}

DenseMatrix solve_dense(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.rows() != A.cols()) throw ShapeError("solve_dense: matrix not square");
  if (A.rows() != B.rows()) throw ShapeError("solve_dense: right-hand side rows mismatch");

  const std::size_t n = A.rows();
  const std::size_t m = B.cols();
  const double threshold = 1e-13 * A.max_abs();

  DenseMatrix U = A;
  DenseMatrix X = B;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(U(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(U(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best < threshold || best == 0.0) {
      throw SingularError("solve_dense: pivot " + std::to_string(best) +
                          " below threshold at elimination step " + std::to_string(k));
    }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(U(k, j), U(p, j));
      for (std::size_t j = 0; j < m; ++j) std::swap(X(k, j), X(p, j));
    }
    const double piv = U(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = U(i, k) / piv;
      if (f == 0.0) continue;
      U(i, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) U(i, j) -= f * U(k, j);
      for (std::size_t j = 0; j < m; ++j) X(i, j) -= f * X(k, j);
    }
  }

  for (std::size_t kk = n; kk-- > 0;) {
    const double piv = U(kk, kk);
    for (std::size_t j = 0; j < m; ++j) {
      double s = X(kk, j);
      for (std::size_t c = kk + 1; c < n; ++c) s -= U(kk, c) * X(c, j);
      X(kk, j) = s / piv;
    }
  }
  return X;
}

BlockVector orthonormalize(const BlockVector& U) {
  BlockVector Q = U;
  const std::size_t n = Q.ambient_dim();
  const std::size_t N = Q.block_size();

  for (std::size_t j = 0; j < N; ++j) {
    double* qj = Q.col(j);
    const double original_norm = Q.column_norm(j);
    // Two projection passes keep loss of orthogonality near machine precision.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        const double* qi = Q.col(i);
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += qi[k] * qj[k];
        for (std::size_t k = 0; k < n; ++k) qj[k] -= dot * qi[k];
      }
    }
    const double norm = Q.column_norm(j);
    if (!(norm > 1e-13 * original_norm) || norm == 0.0) {
      throw DegeneracyError("orthonormalize: column " + std::to_string(j) +
                            " is linearly dependent on the preceding columns");
    }
    const double inv = 1.0 / norm;
    for (std::size_t k = 0; k < n; ++k) qj[k] *= inv;
  }
  return Q;
}

}  // namespace qostiefel
