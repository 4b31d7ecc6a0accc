#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "qostiefel/linalg.hpp"

namespace qostiefel {

// Regular grid of interior points for the finite-difference operators.
// Homogeneous Dirichlet values sit on the boundary nodes just outside.
struct GridSpec {
  int dimension = 1;   // 1, 2 or 3
  std::size_t n = 2;   // interior points per axis
  double a = 0.0;      // domain interval (a, b), identical on every axis
  double b = 1.0;

  double spacing() const { return (b - a) / static_cast<double>(n + 1); }
  std::size_t total_points() const;
  // Coordinate of interior node i in [0, n) along one axis.
  double node(std::size_t i) const { return a + spacing() * static_cast<double>(i + 1); }
  void validate() const;
};

struct SpectralBounds {
  double lambda_min_est = 0.0;  // <= smallest eigenvalue
  double lambda_max_est = 0.0;  // >= largest eigenvalue
};

// Symmetric linear operator on R^{N_g}. The spectral shift sigma is already
// folded into the action: apply computes (H0 - sigma I) x for the unshifted H0.
// Immutable after construction; safe for concurrent read-only use.
class Operator {
 public:
  using ApplyColumn = std::function<void(const double* in, double* out)>;

  Operator(std::size_t dim, ApplyColumn apply_column, double shift,
           std::optional<SpectralBounds> gershgorin);

  std::size_t dim() const;
  double shift() const;

  void apply_column(const double* in, double* out) const;
  // Block action is defined as the column-wise action.
  void apply(const BlockVector& in, BlockVector& out) const;
  BlockVector apply(const BlockVector& in) const;

  // Exact Gershgorin enclosure recorded at build time, when available.
  const std::optional<SpectralBounds>& gershgorin_hint() const;

  // Dense representation, assembled from unit columns once on first use and
  // cached. Throws SizeError above the cap.
  const DenseMatrix& dense_view(std::size_t dense_cap = kDefaultDenseCap) const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

// Gallery of model Hamiltonians, all -1/2 Laplacian + diagonal potential with
// the standard (2d+1)-point stencil: diagonal d/h^2, axis neighbors -1/(2h^2).
Operator build_laplacian(const GridSpec& grid);
Operator build_harmonic(const GridSpec& grid);
Operator build_hydrogen(const GridSpec& grid, double softening);

// H - sigma I; eigenvalues translate by -sigma, eigenvectors unchanged.
Operator shift_operator(const Operator& H, double sigma);

// Wraps a symmetric dense matrix (validated to 1e-10 relative) as an Operator
// with the dense view preloaded.
Operator operator_from_dense(DenseMatrix A);

// Gershgorin enclosure, with the lower end optionally tightened by `probes`
// power-iteration steps. The upper end is always a rigorous bound; the
// tightened lower end carries a residual margin but is not certified, so
// consumers that need slack (the step cap) keep their own safety factor.
SpectralBounds estimate_spectral_bounds(const Operator& H, std::size_t probes);

// Matrix Market reader: `matrix coordinate real symmetric` (1-based indices,
// lower triangle) or `matrix array real general` with symmetric content.
Operator load_matrix_market(const std::string& path);

// Writer for the coordinate symmetric variant; round-trips with the reader.
void write_matrix_market(const DenseMatrix& A, const std::string& path);

}  // namespace qostiefel
