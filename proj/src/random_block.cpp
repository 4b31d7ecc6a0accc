#include <cmath>

#include "qostiefel/rng.hpp"
#include "qostiefel/solver.hpp"

namespace qostiefel {

namespace {

double max_gram_eigenvalue(const BlockVector& U) { return sym_eig(gram(U, U)).values.back(); }

}  // namespace

BlockVector random_block(std::size_t dim, std::size_t N, const InitSpec& init,
                         std::uint64_t seed) {
  SplitMix64 rng(seed);
  BlockVector U(dim, N);
  // Fill order is part of the reproducibility contract: column by column,
  // entries top to bottom, one uniform_sym draw each.
  for (std::size_t j = 0; j < N; ++j) {
    double* c = U.col(j);
    for (std::size_t i = 0; i < dim; ++i) c[i] = rng.uniform_sym();
  }

  switch (init.mode) {
    case InitMode::raw:
      return U;
    case InitMode::quasi_stiefel: {
      const double smax = std::sqrt(std::max(max_gram_eigenvalue(U), 0.0));
      if (smax > 0.0) scale_in_place(U, 1.0 / smax);
      return U;
    }
    case InitMode::orthonormal:
      return orthonormalize(U);
    case InitMode::near_solution: {
      if (init.reference == nullptr)
        throw ContractError("random_block: near_solution requires a reference block");
      if (!(init.eta > 0.0))
        throw ContractError("random_block: near_solution perturbation must be positive");
      const BlockVector& V = *init.reference;
      if (V.ambient_dim() != dim || V.block_size() != N)
        throw ShapeError("random_block: reference block shape mismatch");
      const double pnorm = U.frobenius_norm();
      BlockVector out = V;
      if (pnorm > 0.0) add_scaled(out, init.eta / pnorm, U);
      // Pull back into the quasi-Stiefel set when the perturbation pushed the
      // largest singular value above one.
      const double smax = std::sqrt(std::max(max_gram_eigenvalue(out), 0.0));
      if (smax > 1.0) scale_in_place(out, 1.0 / smax);
      return out;
    }
  }
  throw ContractError("random_block: unknown init mode");
}

}  // namespace qostiefel
