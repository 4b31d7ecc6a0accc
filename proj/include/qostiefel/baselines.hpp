#pragma once

#include <vector>

#include "qostiefel/solver.hpp"

namespace qostiefel {

struct ReferenceSolution {
  std::vector<double> values;  // N smallest eigenvalues, ascending
  BlockVector vectors;         // orthonormal eigenvector block
};

// Dense ground truth: N smallest eigenpairs of the operator's dense view.
ReferenceSolution reference_eigensolve(const Operator& H, std::size_t N,
                                       std::size_t dense_cap = kDefaultDenseCap);

// Oracle for the midpoint inverse: materializes the commutator as a dense
// ambient-dimension matrix and solves (I + (s/2) A) X = RHS directly.
BlockVector dense_predictor_solve(const Operator& H, const BlockVector& U_mid, double s,
                                  const BlockVector& rhs,
                                  std::size_t dense_cap = kDefaultDenseCap);

// Classical projected gradient with explicit re-orthogonalization each step;
// same step rule, stopping test and record schema as solve, so comparisons
// isolate the orthogonalization strategy.
SpectralResult baseline_projected_gradient(const Operator& H, const BlockVector& U0,
                                           const SolverConfig& config);

}  // namespace qostiefel
