#include "qostiefel/solver.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <utility>

namespace qostiefel {

InnerPolicy InnerPolicy::fixed_count(std::size_t p) {
  InnerPolicy ip;
  ip.mode = Mode::fixed;
  ip.p = p;
  return ip;
}

InnerPolicy InnerPolicy::tolerance_capped(double tol, std::size_t p_max) {
  InnerPolicy ip;
  ip.mode = Mode::tolerance;
  ip.tol = tol;
  ip.p_max = p_max;
  return ip;
}

void InnerPolicy::validate() const {
  if (mode == Mode::fixed) {
    if (p < 1) throw ContractError("InnerPolicy: fixed iteration count must be >= 1");
  } else {
    if (!(tol > 0.0)) throw ContractError("InnerPolicy: tolerance must be positive");
    if (p_max < 1) throw ContractError("InnerPolicy: iteration cap must be >= 1");
  }
}

void SolverConfig::validate() const {
  if (!(epsilon > 0.0)) throw ContractError("SolverConfig: epsilon must be positive");
  if (!(step_cap > 0.0)) throw ContractError("SolverConfig: step_cap must be positive");
  if (step_mode == StepMode::fixed && !(fixed_step > 0.0))
    throw ContractError("SolverConfig: fixed_step must be positive in fixed step mode");
  if (max_outer < 1) throw ContractError("SolverConfig: max_outer must be >= 1");
  if (snapshot_stride < 1) throw ContractError("SolverConfig: snapshot_stride must be >= 1");
  inner.validate();
}

double energy(const Operator& H, const BlockVector& U) {
  if (U.ambient_dim() != H.dim()) throw ShapeError("energy: block does not match operator dimension");
  return 0.5 * gram(U, H.apply(U)).trace();
}

BlockVector grassmann_grad(const Operator& H, const BlockVector& U) {
  if (U.ambient_dim() != H.dim())
    throw ShapeError("grassmann_grad: block does not match operator dimension");
  BlockVector HU = H.apply(U);
  const DenseMatrix M = gram(U, HU);
  BlockVector UM = multiply(U, M);
  add_scaled(HU, -1.0, UM);
  return HU;
}

BlockVector commutator_apply(const Operator& H, const BlockVector& U, const BlockVector& X) {
  if (U.ambient_dim() != H.dim())
    throw ShapeError("commutator_apply: block does not match operator dimension");
  BlockVector HU = H.apply(U);
  BlockVector R = multiply(HU, gram(U, X));
  BlockVector UB = multiply(U, gram(HU, X));
  add_scaled(R, -1.0, UB);
  return R;
}

BlockVector woodbury_apply(const Operator& H, const BlockVector& U_mid, double s,
                           const BlockVector& rhs) {
  if (U_mid.ambient_dim() != H.dim())
    throw ShapeError("woodbury_apply: block does not match operator dimension");
  if (rhs.ambient_dim() != U_mid.ambient_dim() || rhs.block_size() != U_mid.block_size())
    throw ShapeError("woodbury_apply: right-hand side shape mismatch");
  if (s < 0.0) throw ContractError("woodbury_apply: step must be nonnegative");

  const std::size_t N = U_mid.block_size();
  const double half = 0.5 * s;
  const BlockVector G = H.apply(U_mid);

  // Core system I_{2N} + (s/2) [[U^T G, U^T U], [-G^T G, -G^T U]].
  const DenseMatrix UG = gram(U_mid, G);
  const DenseMatrix UU = gram(U_mid, U_mid);
  const DenseMatrix GG = gram(G, G);
  const DenseMatrix GU = gram(G, U_mid);
  DenseMatrix core = DenseMatrix::identity(2 * N);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      core(i, j) += half * UG(i, j);
      core(i, N + j) += half * UU(i, j);
      core(N + i, j) -= half * GG(i, j);
      core(N + i, N + j) -= half * GU(i, j);
    }
  }

  const DenseMatrix top = gram(U_mid, rhs);
  const DenseMatrix bottom = gram(G, rhs);
  DenseMatrix small_rhs(2 * N, N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      small_rhs(i, j) = top(i, j);
      small_rhs(N + i, j) = -bottom(i, j);
    }

  DenseMatrix Y;
  try {
    Y = solve_dense(core, small_rhs);
  } catch (const SingularError& e) {
    throw StepSizeError("woodbury_apply: midpoint system singular at s = " + std::to_string(s) +
                        "; retry with a smaller step (" + e.what() + ")");
  }

  DenseMatrix Y_top(N, N), Y_bottom(N, N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      Y_top(i, j) = Y(i, j);
      Y_bottom(i, j) = Y(N + i, j);
    }

  BlockVector out = rhs;
  BlockVector GY = multiply(G, Y_top);
  add_scaled(out, -half, GY);
  BlockVector UY = multiply(U_mid, Y_bottom);
  add_scaled(out, -half, UY);
  return out;
}

PredictorResult predictor(const Operator& H, const BlockVector& U_n, double s,
                          const InnerPolicy& policy) {
  policy.validate();
  if (s < 0.0) throw ContractError("predictor: step must be nonnegative");

  BlockVector mid = U_n;
  std::size_t used = 0;
  const std::size_t limit = (policy.mode == InnerPolicy::Mode::fixed) ? policy.p : policy.p_max;
  for (std::size_t k = 0; k < limit; ++k) {
    BlockVector next = woodbury_apply(H, mid, s, U_n);
    const double diff = frobenius_distance(next, mid);
    mid = std::move(next);
    ++used;
    if (policy.mode == InnerPolicy::Mode::tolerance && diff <= policy.tol) break;
  }

  PredictorResult out;
  out.predicted = linear_combination(2.0, mid, -1.0, U_n);
  out.midpoint = std::move(mid);
  out.inner_count = used;
  return out;
}

BlockVector corrector(const Operator& H, const BlockVector& predicted, const BlockVector& U_n,
                      double s, ProjectorMode mode) {
  if (predicted.ambient_dim() != U_n.ambient_dim() || predicted.block_size() != U_n.block_size())
    throw ShapeError("corrector: predictor and iterate shapes differ");
  if (s < 0.0) throw ContractError("corrector: step must be nonnegative");

  const std::size_t N = U_n.block_size();
  const DenseMatrix G =
      (mode == ProjectorMode::previous_iterate) ? gram(U_n, U_n) : gram(predicted, predicted);
  const DenseMatrix P = DenseMatrix::identity(N) - G;
  const BlockVector HP = H.apply(predicted);
  BlockVector out = predicted;
  BlockVector correction = multiply(HP, P);
  add_scaled(out, -s, correction);
  return out;
}

namespace {

// Quantities computed once per outer iteration and shared between the energy,
// gradient, and adaptive-step evaluations.
struct StepState {
  BlockVector HU;
  DenseMatrix M;  // U^T H U
  BlockVector G;  // H U - U M
  double energy = 0.0;
  double grad_norm = 0.0;
};

StepState evaluate(const Operator& H, const BlockVector& U) {
  StepState st;
  st.HU = H.apply(U);
  st.M = gram(U, st.HU);
  st.energy = 0.5 * st.M.trace();
  BlockVector UM = multiply(U, st.M);
  st.G = linear_combination(1.0, st.HU, -1.0, UM);
  st.grad_norm = st.G.frobenius_norm();
  return st;
}

double curvature_from(const Operator& H, const StepState& st) {
  BlockVector T = H.apply(st.G);
  BlockVector GM = multiply(st.G, st.M);
  add_scaled(T, -1.0, GM);
  double t = 0.0;
  const std::size_t n = T.ambient_dim();
  for (std::size_t j = 0; j < T.block_size(); ++j) {
    const double* gj = st.G.col(j);
    const double* tj = T.col(j);
    for (std::size_t i = 0; i < n; ++i) t += gj[i] * tj[i];
  }
  return t;
}

double step_from(const Operator& H, const StepState& st, const SolverConfig& config) {
  if (config.step_mode == StepMode::fixed) return std::min(config.fixed_step, config.step_cap);
  const double g2 = st.grad_norm * st.grad_norm;
  const double h = curvature_from(H, st);
  if (h <= 1e-14 * g2) return config.step_cap;
  return std::min(g2 / h, config.step_cap);
}

double orthogonality_defect(const BlockVector& U) {
  const DenseMatrix G = gram(U, U);
  double s = 0.0;
  for (std::size_t i = 0; i < G.rows(); ++i)
    for (std::size_t j = 0; j < G.cols(); ++j) {
      const double d = (i == j ? 1.0 : 0.0) - G(i, j);
      s += d * d;
    }
  return std::sqrt(s);
}

double min_gram_eigenvalue(const BlockVector& U) {
  return sym_eig(gram(U, U)).values.front();
}

void rayleigh_ritz(const Operator& H, const BlockVector& U, SpectralResult& result) {
  const std::size_t N = U.block_size();
  const BlockVector HU = H.apply(U);
  DenseMatrix A = gram(U, HU);
  A = 0.5 * (A + A.transposed());
  const DenseMatrix B = gram(U, U);

  const EigResult be = sym_eig(B);
  if (be.values.front() < 1e-13)
    throw DegeneracyError("rayleigh_ritz: final block Gram matrix is rank deficient");

  // S = B^{-1/2}; the small problem becomes the symmetric S A S.
  DenseMatrix S(N, N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < N; ++k)
        s += be.vectors(i, k) * be.vectors(j, k) / std::sqrt(be.values[k]);
      S(i, j) = s;
    }

  DenseMatrix At = S * A * S;
  At = 0.5 * (At + At.transposed());
  const EigResult ae = sym_eig(At);

  const DenseMatrix raw_rotation = S * ae.vectors;  // B-orthonormal coefficients
  // The returned rotation is the orthogonal polar factor of the coefficient
  // matrix; it coincides with raw_rotation once the block is orthonormal.
  const SvdResult sv = thin_svd(raw_rotation);
  result.ritz_rotation = sv.left * sv.right.transposed();

  result.ritz_values = ae.values;
  for (double& v : result.ritz_values) v += H.shift();

  const BlockVector W = multiply(U, raw_rotation);
  const BlockVector HW = H.apply(W);
  result.residual_norms.assign(N, 0.0);
  const std::size_t n = W.ambient_dim();
  for (std::size_t k = 0; k < N; ++k) {
    const double* wk = W.col(k);
    const double* hk = HW.col(k);
    const double theta = ae.values[k];
    double r2 = 0.0, w2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = hk[i] - theta * wk[i];
      r2 += d * d;
      w2 += wk[i] * wk[i];
    }
    result.residual_norms[k] = std::sqrt(r2) / std::sqrt(w2);
  }
}

}  // namespace

double hess_form(const Operator& H, const BlockVector& U, const BlockVector& G) {
  if (U.ambient_dim() != H.dim())
    throw ShapeError("hess_form: block does not match operator dimension");
  if (G.ambient_dim() != U.ambient_dim() || G.block_size() != U.block_size())
    throw ShapeError("hess_form: direction shape mismatch");
  const BlockVector HU = H.apply(U);
  const DenseMatrix M = gram(U, HU);
  BlockVector T = H.apply(G);
  BlockVector GM = multiply(G, M);
  add_scaled(T, -1.0, GM);
  double t = 0.0;
  const std::size_t n = T.ambient_dim();
  for (std::size_t j = 0; j < T.block_size(); ++j) {
    const double* gj = G.col(j);
    const double* tj = T.col(j);
    for (std::size_t i = 0; i < n; ++i) t += gj[i] * tj[i];
  }
  return t;
}

double adaptive_step(const Operator& H, const BlockVector& U, double step_cap) {
  if (!(step_cap > 0.0)) throw ContractError("adaptive_step: cap must be positive");
  const BlockVector G = grassmann_grad(H, U);
  const double g2 = G.frobenius_norm() * G.frobenius_norm();
  const double h = hess_form(H, U, G);
  if (h <= 1e-14 * g2) return step_cap;
  return std::min(g2 / h, step_cap);
}

double default_step_cap(const SpectralBounds& bounds) {
  const double a = std::abs(bounds.lambda_min_est);
  const double width = std::abs(bounds.lambda_max_est - bounds.lambda_min_est);
  double cap = std::numeric_limits<double>::infinity();
  if (a > 0.0) cap = std::min(cap, 0.95 / (std::sqrt(2.0 * a + 4.0 * a * a) + 2.0 * a));
  if (width > 0.0) cap = std::min(cap, 1.9 / width);
  if (!std::isfinite(cap) || !(cap > 0.0))
    throw ContractError("default_step_cap: degenerate spectral bounds");
  return cap;
}

SpectralResult solve(const Operator& H, const BlockVector& U0, const SolverConfig& config,
                     const StepObserver& observer) {
  config.validate();
  if (U0.ambient_dim() != H.dim()) throw ShapeError("solve: block does not match operator dimension");
  if (min_gram_eigenvalue(U0) < 1e-13)
    throw DegeneracyError("solve: initial block has numerically dependent columns");

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto elapsed = [&t0] {
    return std::chrono::duration<double>(clock::now() - t0).count();
  };

  SpectralResult result;
  BlockVector U = U0;
  double pending_orth_pre = orthogonality_defect(U0);
  result.snapshot_indices.push_back(0);
  result.snapshots.push_back(U);

  bool converged = false;
  std::size_t n = 0;
  for (;;) {
    const StepState st = evaluate(H, U);
    if (!std::isfinite(st.energy) || !st.G.all_finite())
      throw DivergenceError("solve: non-finite value at iteration " + std::to_string(n));

    IterationRecord rec;
    rec.n = n;
    rec.energy = st.energy;
    rec.grad_norm = st.grad_norm;
    rec.orth_err_pre = pending_orth_pre;
    rec.orth_err_post = orthogonality_defect(U);
    rec.step = step_from(H, st, config);

    converged = st.grad_norm <= config.epsilon;
    if (converged || n >= config.max_outer) {
      rec.wall_time_s = elapsed();
      result.trace.push_back(rec);
      break;
    }

    PredictorResult pred = predictor(H, U, rec.step, config.inner);
    BlockVector next = corrector(H, pred.predicted, U, rec.step, config.corrector_projector);

    if (!next.all_finite())
      throw DivergenceError("solve: non-finite iterate at iteration " + std::to_string(n + 1));
    const double gmin = min_gram_eigenvalue(next);
    if (gmin < 1e-13)
      throw DegeneracyError("solve: iterate Gram matrix lost rank at iteration " +
                            std::to_string(n + 1) + " (min eigenvalue " + std::to_string(gmin) +
                            ")");

    rec.inner_count = pred.inner_count;
    rec.wall_time_s = elapsed();
    result.trace.push_back(rec);

    if (observer)
      observer(StepObservation{n, rec.step, pred.inner_count, U, pred.midpoint, pred.predicted,
                               next});

    pending_orth_pre = orthogonality_defect(pred.predicted);
    U = std::move(next);
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

  rayleigh_ritz(H, U, result);
  result.final_block = std::move(U);
  return result;
}

}  // namespace qostiefel
