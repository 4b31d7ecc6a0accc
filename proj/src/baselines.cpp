#include "qostiefel/baselines.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace qostiefel {

ReferenceSolution reference_eigensolve(const Operator& H, std::size_t N, std::size_t dense_cap) {
  if (N < 1 || N > H.dim())
    throw ContractError("reference_eigensolve: need 1 <= N <= operator dimension");
  const EigResult eig = sym_eig(H.dense_view(dense_cap), dense_cap);

  ReferenceSolution out;
  out.values.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(N));
  out.vectors = BlockVector(H.dim(), N);
  for (std::size_t k = 0; k < N; ++k) {
    double* col = out.vectors.col(k);
    for (std::size_t i = 0; i < H.dim(); ++i) col[i] = eig.vectors(i, k);
  }
  return out;
}

BlockVector dense_predictor_solve(const Operator& H, const BlockVector& U_mid, double s,
                                  const BlockVector& rhs, std::size_t dense_cap) {
  if (U_mid.ambient_dim() != H.dim())
    throw ShapeError("dense_predictor_solve: block does not match operator dimension");
  if (rhs.ambient_dim() != U_mid.ambient_dim() || rhs.block_size() != U_mid.block_size())
    throw ShapeError("dense_predictor_solve: right-hand side shape mismatch");
  if (s < 0.0) throw ContractError("dense_predictor_solve: step must be nonnegative");
  const std::size_t n = H.dim();
  if (n > dense_cap)
    throw SizeError("dense_predictor_solve: dimension exceeds dense cap");

  const BlockVector G = H.apply(U_mid);
  const std::size_t N = U_mid.block_size();

  // System matrix I + (s/2) ( G U^T - U G^T ), assembled entrywise.
  DenseMatrix A(n, n);
  const double half = 0.5 * s;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double commutator = 0.0;
      for (std::size_t k = 0; k < N; ++k)
        commutator += G(i, k) * U_mid(j, k) - U_mid(i, k) * G(j, k);
      A(i, j) = (i == j ? 1.0 : 0.0) + half * commutator;
    }
  }

  DenseMatrix B(n, N);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < N; ++k) B(i, k) = rhs(i, k);

  const DenseMatrix X = solve_dense(A, B);
  BlockVector out(n, N);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < N; ++k) out(i, k) = X(i, k);
  return out;
}

SpectralResult baseline_projected_gradient(const Operator& H, const BlockVector& U0,
                                           const SolverConfig& config) {
  config.validate();
  if (U0.ambient_dim() != H.dim())
    throw ShapeError("baseline_projected_gradient: block does not match operator dimension");

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto elapsed = [&t0] {
    return std::chrono::duration<double>(clock::now() - t0).count();
  };

  const auto orth_defect = [](const BlockVector& U) {
    const DenseMatrix G = gram(U, U);
    double sum = 0.0;
    for (std::size_t i = 0; i < G.rows(); ++i)
      for (std::size_t j = 0; j < G.cols(); ++j) {
        const double d = (i == j ? 1.0 : 0.0) - G(i, j);
        sum += d * d;
      }
    return std::sqrt(sum);
  };

  SpectralResult result;
  BlockVector U = orthonormalize(U0);
  double pending_pre = orth_defect(U);
  result.snapshot_indices.push_back(0);
  result.snapshots.push_back(U);

  bool converged = false;
  std::size_t n = 0;
  for (;;) {
    const BlockVector HU = H.apply(U);
    const DenseMatrix M = gram(U, HU);
    BlockVector UM = multiply(U, M);
    const BlockVector G = linear_combination(1.0, HU, -1.0, UM);
    const double grad_norm = G.frobenius_norm();
    const double E = 0.5 * M.trace();
    if (!std::isfinite(E) || !G.all_finite())
      throw DivergenceError("baseline_projected_gradient: non-finite value at iteration " +
                            std::to_string(n));

    IterationRecord rec;
    rec.n = n;
    rec.energy = E;
    rec.grad_norm = grad_norm;
    rec.orth_err_pre = pending_pre;
    rec.orth_err_post = orth_defect(U);

    double s = config.step_cap;
    if (config.step_mode == StepMode::fixed) {
      s = std::min(config.fixed_step, config.step_cap);
    } else {
      const double g2 = grad_norm * grad_norm;
      BlockVector T = H.apply(G);
      BlockVector GM = multiply(G, M);
      add_scaled(T, -1.0, GM);
      double h = 0.0;
      for (std::size_t j = 0; j < T.block_size(); ++j) {
        const double* gj = G.col(j);
        const double* tj = T.col(j);
        for (std::size_t i = 0; i < T.ambient_dim(); ++i) h += gj[i] * tj[i];
      }
      if (h > 1e-14 * g2) s = std::min(g2 / h, config.step_cap);
    }
    rec.step = s;
    rec.inner_count = 0;  // no inner iteration in the baseline

    converged = grad_norm <= config.epsilon;
    if (converged || n >= config.max_outer) {
      rec.wall_time_s = elapsed();
      result.trace.push_back(rec);
      break;
    }

    BlockVector candidate = U;
    add_scaled(candidate, -s, G);
    pending_pre = orth_defect(candidate);
    U = orthonormalize(candidate);

    rec.wall_time_s = elapsed();
    result.trace.push_back(rec);
    ++n;
    if (n % config.snapshot_stride == 0) {
      result.snapshot_indices.push_back(n);
      result.snapshots.push_back(U);
    }
  }

  result.converged = converged;
  if (result.snapshot_indices.back() != n) {
    result.snapshot_indices.push_back(n);
    result.snapshots.push_back(U);
  }

  // Rayleigh-Ritz on the orthonormal block: the small Gram is the identity to
  // machine precision, so diagonalizing U^T H U directly is exact here.
  const BlockVector HU = H.apply(U);
  DenseMatrix A = gram(U, HU);
  A = 0.5 * (A + A.transposed());
  const EigResult ae = sym_eig(A);
  result.ritz_rotation = ae.vectors;
  result.ritz_values = ae.values;
  for (double& v : result.ritz_values) v += H.shift();

  const BlockVector W = multiply(U, ae.vectors);
  const BlockVector HW = H.apply(W);
  const std::size_t N = U.block_size();
  result.residual_norms.assign(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    const double* wk = W.col(k);
    const double* hk = HW.col(k);
    const double theta = ae.values[k];
    double r2 = 0.0, w2 = 0.0;
    for (std::size_t i = 0; i < W.ambient_dim(); ++i) {
      const double d = hk[i] - theta * wk[i];
      r2 += d * d;
      w2 += wk[i] * wk[i];
    }
    result.residual_norms[k] = std::sqrt(r2) / std::sqrt(w2);
  }
  result.final_block = std::move(U);
  return result;
}

}  // namespace qostiefel
