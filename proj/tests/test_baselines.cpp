#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "qostiefel/baselines.hpp"
#include "qostiefel/diagnostics.hpp"
#include "qostiefel/errors.hpp"
#include "qostiefel/rng.hpp"

using namespace qostiefel;

namespace {

constexpr double kPi = std::numbers::pi_v<double>;

DenseMatrix random_symmetric(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  DenseMatrix A(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = rng.uniform_sym();
      A(i, j) = v;
      A(j, i) = v;
    }
  return A;
}

BlockVector random_block_raw(std::size_t dim, std::size_t N, std::uint64_t seed) {
  SplitMix64 rng(seed);
  BlockVector U(dim, N);
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t i = 0; i < dim; ++i) U(i, j) = rng.uniform_sym();
  return U;
}

Operator diag_operator(const std::vector<double>& d) {
  DenseMatrix A(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) A(i, i) = d[i];
  return operator_from_dense(A);
}

}  // namespace

TEST_CASE("reference eigensolve picks the smallest eigenpairs of a diagonal operator") {
  const Operator H = diag_operator({-1.0, -3.0, -2.0});
  const ReferenceSolution ref = reference_eigensolve(H, 2);
  REQUIRE(ref.values.size() == 2);
  CHECK(ref.values[0] == doctest::Approx(-3.0).epsilon(1e-14));
  CHECK(ref.values[1] == doctest::Approx(-2.0).epsilon(1e-14));
  // eigenvectors are +-e1 and +-e2
  CHECK(std::abs(ref.vectors(1, 0)) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(ref.vectors(2, 1)) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(orthogonality_error(ref.vectors) <= 1e-13);
}

TEST_CASE("reference eigensolve matches the closed-form box spectrum") {
  GridSpec grid;
  grid.dimension = 1;
  grid.n = 63;
  grid.a = 0.0;
  grid.b = kPi;
  const Operator H = build_laplacian(grid);
  const ReferenceSolution ref = reference_eigensolve(H, 4);
  const double h = grid.spacing();
  for (std::size_t k = 1; k <= 4; ++k) {
    const double s = std::sin(static_cast<double>(k) * kPi / 128.0);
    const double exact = 2.0 * s * s / (h * h);
    CHECK(ref.values[k - 1] == doctest::Approx(exact).epsilon(1e-10));
  }
}

TEST_CASE("reference eigensolve tracks operator shifts and leaves small residuals") {
  const Operator base = operator_from_dense(random_symmetric(14, 501));
  const double sigma = 4.5;
  const Operator shifted = shift_operator(base, sigma);

  const ReferenceSolution a = reference_eigensolve(base, 3);
  const ReferenceSolution b = reference_eigensolve(shifted, 3);
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(b.values[k] + sigma == doctest::Approx(a.values[k]).epsilon(1e-12));

  const BlockVector HV = base.apply(a.vectors);
  for (std::size_t k = 0; k < 3; ++k) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < 14; ++i) {
      const double d = HV(i, k) - a.values[k] * a.vectors(i, k);
      r2 += d * d;
    }
    CHECK(std::sqrt(r2) <= 1e-9);
  }

  CHECK_THROWS_AS(reference_eigensolve(base, 0), ContractError);
  CHECK_THROWS_AS(reference_eigensolve(base, 15), ContractError);
}

TEST_CASE("dense midpoint solve is the identity at step zero") {
  const Operator H = operator_from_dense(random_symmetric(9, 511));
  const BlockVector U = random_block_raw(9, 2, 512);
  const BlockVector rhs = random_block_raw(9, 2, 513);
  const BlockVector out = dense_predictor_solve(H, U, 0.0, rhs);
  CHECK(frobenius_distance(out, rhs) <= 1e-13);
}

TEST_CASE("dense midpoint solve satisfies its defining linear system") {
  const Operator H = operator_from_dense(random_symmetric(11, 521));
  const BlockVector U = random_block_raw(11, 3, 522);
  const BlockVector rhs = random_block_raw(11, 3, 523);
  const double s = 0.15;
  const BlockVector X = dense_predictor_solve(H, U, s, rhs);
  const BlockVector AX = commutator_apply(H, U, X);
  const BlockVector back = linear_combination(1.0, X, 0.5 * s, AX);
  CHECK(frobenius_distance(back, rhs) <= 1e-10 * (1.0 + rhs.frobenius_norm()));
}

TEST_CASE("dense and low-rank midpoint solves agree across shapes and steps") {
  std::size_t trial = 0;
  for (std::size_t dim : {6, 13, 24}) {
    for (std::size_t N : {1, 3}) {
      for (double s : {0.01, 0.3}) {
        ++trial;
        const Operator H = operator_from_dense(random_symmetric(dim, 600 + trial));
        const BlockVector U = random_block_raw(dim, N, 700 + trial);
        const BlockVector rhs = random_block_raw(dim, N, 800 + trial);
        const BlockVector dense = dense_predictor_solve(H, U, s, rhs);
        const BlockVector fast = woodbury_apply(H, U, s, rhs);
        CHECK(frobenius_distance(fast, dense) <= 1e-10 * (1.0 + dense.frobenius_norm()));
      }
    }
  }
  CHECK(trial == 12);
}

TEST_CASE("dense midpoint solve validates shapes and the step sign") {
  const Operator H = operator_from_dense(random_symmetric(6, 531));
  const BlockVector U = random_block_raw(6, 2, 532);
  CHECK_THROWS_AS(dense_predictor_solve(H, random_block_raw(5, 2, 533), 0.1, U), ShapeError);
  CHECK_THROWS_AS(dense_predictor_solve(H, U, 0.1, random_block_raw(6, 3, 534)), ShapeError);
  CHECK_THROWS_AS(dense_predictor_solve(H, U, -0.1, U), ContractError);
}

TEST_CASE("projected gradient baseline accepts an eigenvector block immediately") {
  const Operator H = operator_from_dense(random_symmetric(10, 541));
  const ReferenceSolution ref = reference_eigensolve(H, 3);
  SolverConfig config;
  config.step_cap = 0.1;
  const SpectralResult res = baseline_projected_gradient(H, ref.vectors, config);
  CHECK(res.converged);
  CHECK(res.trace.size() == 1);
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(res.ritz_values[k] == doctest::Approx(ref.values[k]).epsilon(1e-10));
}

TEST_CASE("projected gradient baseline reaches the same box spectrum as the main solver") {
  GridSpec grid;
  grid.dimension = 1;
  grid.n = 63;
  grid.a = 0.0;
  grid.b = kPi;
  const Operator base = build_laplacian(grid);
  const SpectralBounds bounds = estimate_spectral_bounds(base, 100);
  const Operator H = shift_operator(base, bounds.lambda_max_est + 1.0);

  InitSpec init;
  init.mode = InitMode::orthonormal;
  const BlockVector U0 = random_block(H.dim(), 4, init, 1);

  SolverConfig config;
  config.epsilon = 1e-5;
  config.step_cap = default_step_cap(estimate_spectral_bounds(H, 100));
  const SpectralResult res = baseline_projected_gradient(H, U0, config);

  REQUIRE(res.converged);
  const double h = grid.spacing();
  for (std::size_t k = 1; k <= 4; ++k) {
    const double sk = std::sin(static_cast<double>(k) * kPi / 128.0);
    const double exact = 2.0 * sk * sk / (h * h);
    CHECK(std::abs(res.ritz_values[k - 1] - exact) <= 1e-6 * exact);
  }
  // every stored iterate was re-orthonormalized before being recorded
  for (const IterationRecord& rec : res.trace) {
    CHECK(rec.orth_err_post <= 1e-12);
    CHECK(rec.inner_count == 0);
    CHECK(rec.step > 0.0);
    CHECK(rec.step <= config.step_cap);
  }
  CHECK(orthogonality_error(res.final_block) <= 1e-12);
}

TEST_CASE("projected gradient baseline validates its inputs") {
  const Operator H = operator_from_dense(random_symmetric(6, 551));
  const BlockVector U = random_block_raw(6, 2, 552);
  SolverConfig bad;
  bad.step_cap = 0.0;
  CHECK_THROWS_AS(baseline_projected_gradient(H, U, bad), ContractError);
  SolverConfig ok;
  ok.step_cap = 0.1;
  CHECK_THROWS_AS(baseline_projected_gradient(H, random_block_raw(5, 2, 553), ok), ShapeError);
}
