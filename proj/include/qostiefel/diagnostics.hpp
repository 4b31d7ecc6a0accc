#pragma once

#include <string>
#include <vector>

#include "qostiefel/solver.hpp"

namespace qostiefel {

// Plateau floor used when fitting decay ratios of orthogonality-error series.
inline constexpr double kDecayFloor = 1e-11;

// ||I - U^T U||_F.
double orthogonality_error(const BlockVector& U);

// Distance between column spans up to right rotation, via orthogonal
// Procrustes: dist^2 = ||U||^2 + ||V||^2 - 2 sum sigma_i(U^T V), clipped at 0.
double grassmann_distance(const BlockVector& U, const BlockVector& V);

// ||U_n - U_end|| / ||U_end|| per snapshot; deliberately unaligned (no
// rotation fitting) so component-wise convergence is visible.
std::vector<double> relative_iterate_error(const std::vector<BlockVector>& snapshots,
                                           const BlockVector& U_end);

struct DecayFit {
  double ratio = 0.0;            // exp(least-squares slope of log(series))
  std::size_t window_begin = 0;  // fitted index range [begin, end)
  std::size_t window_end = 0;
  double residual = 0.0;         // max relative deviation from the fitted model
};

// Fits a geometric model to the leading part of the series: the window is the
// contiguous prefix with entries strictly above the floor. Needs at least 3
// such entries, else FitError.
DecayFit fit_decay_ratio(const std::vector<double>& series, double floor_value);

enum class TraceFormat { csv, json };

// CSV columns exactly: n,energy,grad_norm,orth_err_pre,orth_err_post,step,
// inner_count,wall_time_s. Floats carry 17 significant digits so values
// round-trip bit-identically; output ends with a newline. JSON mirrors the
// field names.
void write_trace(const std::vector<IterationRecord>& trace, const std::string& path,
                 TraceFormat format);

}  // namespace qostiefel
