#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qostiefel/operator.hpp"

namespace qostiefel {

// Inner fixed-point policy for the midpoint solve.
struct InnerPolicy {
  enum class Mode { fixed, tolerance };
  Mode mode = Mode::tolerance;
  std::size_t p = 8;       // iteration count in fixed mode
  double tol = 1e-12;      // threshold on ||U~_k - U~_{k-1}||_F in tolerance mode
  std::size_t p_max = 8;   // cap in tolerance mode

  static InnerPolicy fixed_count(std::size_t p);
  static InnerPolicy tolerance_capped(double tol, std::size_t p_max);
  void validate() const;
};

enum class StepMode { adaptive, fixed };
enum class ProjectorMode { previous_iterate, predictor };

struct SolverConfig {
  double epsilon = 1e-5;     // stopping tolerance on the projected gradient norm
  double step_cap = 0.0;     // required > 0; see default_step_cap
  StepMode step_mode = StepMode::adaptive;
  double fixed_step = 0.0;   // fixed mode only; clamped to step_cap
  InnerPolicy inner;
  std::size_t max_outer = 50000;
  ProjectorMode corrector_projector = ProjectorMode::previous_iterate;
  std::uint64_t seed = 0;    // recorded for provenance; solve itself draws no randomness
  std::size_t snapshot_stride = 10;

  void validate() const;
};

// Record n describes the state U_n: energy, gradient norm and orthogonality
// error are evaluated at U_n; step and inner_count belong to the step taken
// from U_n (inner_count is 0 on the final record); orth_err_pre is the
// predictor's orthogonality error from the step that produced U_n (for n = 0
// it equals orth_err_post). wall_time_s is cumulative since solve start.
struct IterationRecord {
  std::size_t n = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double orth_err_pre = 0.0;
  double orth_err_post = 0.0;
  double step = 0.0;
  std::size_t inner_count = 0;
  double wall_time_s = 0.0;
};

struct SpectralResult {
  BlockVector final_block;
  std::vector<double> ritz_values;     // ascending, with the operator shift removed
  DenseMatrix ritz_rotation;           // orthogonal rotation into the Ritz basis
  std::vector<double> residual_norms;  // ||H w - theta w|| per Ritz pair
  std::vector<IterationRecord> trace;
  bool converged = false;
  std::vector<std::size_t> snapshot_indices;  // always includes 0 and the final index
  std::vector<BlockVector> snapshots;
};

// Invoked after each completed outer step with every intermediate block.
struct StepObservation {
  std::size_t n;                 // index of the step's starting iterate
  double step;
  std::size_t inner_count;
  const BlockVector& current;    // U_n
  const BlockVector& midpoint;   // final inner iterate U~
  const BlockVector& predicted;  // U^_{n+1}
  const BlockVector& corrected;  // U_{n+1}
};
using StepObserver = std::function<void(const StepObservation&)>;

// E(U) = 1/2 tr(U^T H U).
double energy(const Operator& H, const BlockVector& U);

// H U - U (U^T H U), zero exactly on invariant subspaces.
BlockVector grassmann_grad(const Operator& H, const BlockVector& U);

// Action of the skew commutator (HU) U^T - U (HU)^T on X, without ever
// materializing the ambient-dimension operator.
BlockVector commutator_apply(const Operator& H, const BlockVector& U, const BlockVector& X);

// (I + (s/2) A_{U_mid})^{-1} RHS via the low-rank inversion identity: block
// products plus one 2N x 2N solve.
BlockVector woodbury_apply(const Operator& H, const BlockVector& U_mid, double s,
                           const BlockVector& rhs);

struct PredictorResult {
  BlockVector predicted;  // U^ = 2 U~ - U_n
  BlockVector midpoint;   // final inner iterate U~
  std::size_t inner_count = 0;
};

// Midpoint fixed-point iteration U~_k = (I + (s/2) A_{U~_{k-1}})^{-1} U_n
// started from U~_0 = U_n.
PredictorResult predictor(const Operator& H, const BlockVector& U_n, double s,
                          const InnerPolicy& policy);

// U^ - s (H U^) (I - G) with G the Gram matrix of the previous iterate
// (default) or of the predictor.
BlockVector corrector(const Operator& H, const BlockVector& predicted, const BlockVector& U_n,
                      double s, ProjectorMode mode);

// tr( G^T (H G - G U^T H U) ), the curvature form behind the adaptive step.
double hess_form(const Operator& H, const BlockVector& U, const BlockVector& G);

// min( ||grad||^2 / hess_form, cap ); returns the cap when the curvature is
// nonpositive or negligible (<= 1e-14 ||grad||^2).
double adaptive_step(const Operator& H, const BlockVector& U, double step_cap);

// Step cap derived from spectral bounds of the (shifted) operator:
// min( 0.95 / (sqrt(2|l1| + 4 l1^2) + 2 |l1|), 1.9 / |l1 - lmax| ).
double default_step_cap(const SpectralBounds& bounds);

// Predictor-corrector outer loop with Rayleigh-Ritz extraction at the end.
// Requires linearly independent columns in U0 and an operator whose relevant
// spectrum has been shifted below zero.
SpectralResult solve(const Operator& H, const BlockVector& U0, const SolverConfig& config,
                     const StepObserver& observer = {});

enum class InitMode { raw, quasi_stiefel, orthonormal, near_solution };

struct InitSpec {
  InitMode mode = InitMode::quasi_stiefel;
  double eta = 0.1;                        // near_solution perturbation magnitude
  const BlockVector* reference = nullptr;  // near_solution target block
};

// Deterministic random block: entries are drawn column by column from
// splitmix64(seed) uniform on [-1, 1), then post-processed per mode.
BlockVector random_block(std::size_t dim, std::size_t N, const InitSpec& init, std::uint64_t seed);

}  // namespace qostiefel
