#pragma once

#include <stdexcept>
#include <string>

namespace qostiefel {

// Every failure in the library surfaces as a subclass of Error carrying a
// human-readable message; callers and tests dispatch on the concrete type.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Dimension mismatches between matrices / blocks.
struct ShapeError : Error { using Error::Error; };
// Violated preconditions: asymmetry, invalid domains, bad parameters.
struct ContractError : Error { using Error::Error; };
// Dense representation requested above the dense cap.
struct SizeError : Error { using Error::Error; };
// Pivot below threshold during elimination; message names the failing step.
struct SingularError : Error { using Error::Error; };
// Iterative kernel failed to converge (eigensolver back end).
struct NumericalError : Error { using Error::Error; };
// Midpoint system singular; retry with a smaller step.
struct StepSizeError : Error { using Error::Error; };
// Non-finite entries appeared in an iterate; message carries the index.
struct DivergenceError : Error { using Error::Error; };
// Iterate Gram matrix lost rank (or a dependent column was found).
struct DegeneracyError : Error { using Error::Error; };
// Config or matrix-file syntax problem; message carries file:line.
struct ParseError : Error { using Error::Error; };
// Decay-rate fit infeasible (not enough points above floor).
struct FitError : Error { using Error::Error; };
// Command-line misuse.
struct UsageError : Error { using Error::Error; };
// Filesystem failures; message carries the path.
struct IoError : Error { using Error::Error; };

}  // namespace qostiefel
