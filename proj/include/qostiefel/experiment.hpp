#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qostiefel/baselines.hpp"
#include "qostiefel/solver.hpp"

namespace qostiefel {

enum class ProblemKind { laplacian, harmonic, hydrogen, matrix_market };
enum class ShiftMode { automatic, none, explicit_value };

// Everything a run needs, read from a sectioned key = value text file.
// Grid problems and matrix_market files are mutually exclusive sources.
struct ExperimentConfig {
  ProblemKind problem = ProblemKind::laplacian;
  std::string path;                  // matrix_market source file
  int dimension = 1;
  std::size_t n = 63;                // interior points per axis
  std::optional<double> domain_min;  // per-problem default when absent
  std::optional<double> domain_max;
  std::size_t N = 4;
  std::optional<double> softening;   // hydrogen only; default is h/2
  ShiftMode shift = ShiftMode::automatic;
  double shift_value = 0.0;

  // solver.step_cap == 0 requests the spectral default at prepare time.
  SolverConfig solver;
  InitMode init_mode = InitMode::quasi_stiefel;
  double eta = 0.1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  void validate() const;
};

// Sections [problem], [solver], [init], [output]; '#' or ';' start comments.
// Unknown sections or keys are errors, reported as "path:line: message".
ExperimentConfig load_experiment_config(const std::string& path);

// Operator with the shift folded in, plus the fully resolved solver settings.
struct PreparedProblem {
  Operator op;
  double sigma;        // shift applied on top of the raw problem
  std::size_t N;
  std::string label;
  SolverConfig solver; // step_cap resolved, seed copied from the experiment
};

PreparedProblem prepare_problem(const ExperimentConfig& config);

// Draws the starting block for the prepared problem. near_solution mode
// computes the dense reference block internally.
BlockVector initial_block(const ExperimentConfig& config, const PreparedProblem& prepared);

// Outcome of one full run, with the decay ratio of the orthogonality error
// when enough of the series sits above the fitting floor.
struct RunOutcome {
  SpectralResult result;
  std::optional<double> fitted_omega;
  double sigma = 0.0;
  std::string label;
};

// Runs solve end to end and writes trace.csv + summary.json into out_dir.
RunOutcome execute_run(const ExperimentConfig& config, const std::string& out_dir);

// Exit status convention: 0 converged, 2 stopped at max_outer, errors throw
// (the command line wrapper maps them to status 1).
int cmd_run(const std::string& config_path);
int cmd_compare(const std::string& config_path);
int cmd_sweep(const std::string& config_path, const std::string& parameter,
              const std::vector<std::string>& values);

}  // namespace qostiefel
