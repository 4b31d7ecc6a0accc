#include "qostiefel/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "qostiefel/diagnostics.hpp"

namespace qostiefel {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct ParseCtx {
  const std::string& file;
  std::size_t line = 0;
};

[[noreturn]] void fail(const ParseCtx& ctx, const std::string& msg) {
  throw ParseError(ctx.file + ":" + std::to_string(ctx.line) + ": " + msg);
}

double parse_real(const ParseCtx& ctx, const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x))
    fail(ctx, "value for '" + key + "' must be a finite number, got '" + v + "'");
  return x;
}

std::uint64_t parse_count(const ParseCtx& ctx, const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || v[0] == '-' || end != v.c_str() + v.size() || errno == ERANGE)
    fail(ctx, "value for '" + key + "' must be a nonnegative integer, got '" + v + "'");
  return static_cast<std::uint64_t>(x);
}

std::string format17(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

const char* problem_label(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::laplacian: return "laplacian";
    case ProblemKind::harmonic: return "harmonic";
    case ProblemKind::hydrogen: return "hydrogen";
    case ProblemKind::matrix_market: return "matrix_market";
  }
  return "unknown";
}

void write_summary(const ExperimentConfig& config, const PreparedProblem& prepared,
                   const RunOutcome& out, const std::string& path) {
  nlohmann::ordered_json j;
  j["problem"] = prepared.label;
  j["N"] = prepared.N;
  j["iterations"] = out.result.trace.back().n;
  j["converged"] = out.result.converged;
  j["ritz_values"] = out.result.ritz_values;
  j["residual_norms"] = out.result.residual_norms;
  j["final_grad_norm"] = out.result.trace.back().grad_norm;
  j["final_orth_err"] = out.result.trace.back().orth_err_post;
  if (out.fitted_omega)
    j["fitted_omega"] = *out.fitted_omega;
  else
    j["fitted_omega"] = nullptr;
  j["sigma"] = prepared.sigma;
  j["seed"] = config.seed;

  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << j.dump(2) << "\n";
  if (!f) throw IoError("failed writing " + path);
}

double max_rel_diff(const std::vector<double>& x, const std::vector<double>& y) {
  double worst = 0.0;
  for (std::size_t k = 0; k < std::min(x.size(), y.size()); ++k) {
    const double denom = std::max({std::abs(x[k]), std::abs(y[k]), 1e-300});
    worst = std::max(worst, std::abs(x[k] - y[k]) / denom);
  }
  return worst;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (problem == ProblemKind::matrix_market) {
    if (path.empty()) throw ContractError("ExperimentConfig: matrix_market problem needs a path");
  } else {
    if (!path.empty())
      throw ContractError("ExperimentConfig: path applies only to matrix_market problems");
    if (dimension < 1 || dimension > 3)
      throw ContractError("ExperimentConfig: dimension must be 1, 2 or 3");
    if (n < 2) throw ContractError("ExperimentConfig: need at least 2 interior points per axis");
  }
  if (N < 1) throw ContractError("ExperimentConfig: N must be >= 1");
  if (softening) {
    if (problem != ProblemKind::hydrogen)
      throw ContractError("ExperimentConfig: softening applies only to the hydrogen problem");
    if (!(*softening > 0.0)) throw ContractError("ExperimentConfig: softening must be positive");
  }
  if (domain_min && domain_max && !(*domain_min < *domain_max))
    throw ContractError("ExperimentConfig: domain_min must lie below domain_max");
  if (shift == ShiftMode::explicit_value && !std::isfinite(shift_value))
    throw ContractError("ExperimentConfig: explicit shift must be finite");
  if (!(eta > 0.0)) throw ContractError("ExperimentConfig: eta must be positive");

  if (!(solver.epsilon > 0.0)) throw ContractError("ExperimentConfig: epsilon must be positive");
  if (solver.step_cap < 0.0)
    throw ContractError("ExperimentConfig: step_cap must be positive, or zero for automatic");
  if (solver.step_mode == StepMode::fixed && !(solver.fixed_step > 0.0))
    throw ContractError("ExperimentConfig: fixed_step must be positive in fixed step mode");
  if (solver.max_outer < 1) throw ContractError("ExperimentConfig: max_outer must be >= 1");
  if (solver.snapshot_stride < 1)
    throw ContractError("ExperimentConfig: snapshot_stride must be >= 1");
  solver.inner.validate();
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file " + path);

  ExperimentConfig cfg;
  ParseCtx ctx{path, 0};
  std::string section;

  // Lines that pin each side of the "exactly one problem source" rule, so the
  // conflict can be reported against a concrete key.
  std::size_t grid_key_line = 0;
  std::string grid_key_name;
  std::size_t path_line = 0;
  bool type_seen = false;

  std::string raw;
  while (std::getline(f, raw)) {
    ++ctx.line;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(ctx, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "problem" && section != "solver" && section != "init" &&
          section != "output")
        fail(ctx, "unknown section [" + section + "]");
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(ctx, "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(ctx, "missing key before '='");
    if (section.empty()) fail(ctx, "key '" + key + "' appears before any section header");

    const auto note_grid_key = [&] {
      if (grid_key_line == 0) {
        grid_key_line = ctx.line;
        grid_key_name = key;
      }
    };

    if (section == "problem") {
      if (key == "type") {
        type_seen = true;
        if (value == "laplacian") cfg.problem = ProblemKind::laplacian;
        else if (value == "harmonic") cfg.problem = ProblemKind::harmonic;
        else if (value == "hydrogen") cfg.problem = ProblemKind::hydrogen;
        else if (value == "matrix_market") cfg.problem = ProblemKind::matrix_market;
        else fail(ctx, "type must be laplacian, harmonic, hydrogen or matrix_market");
      } else if (key == "path") {
        if (value.empty()) fail(ctx, "path must not be empty");
        cfg.path = value;
        path_line = ctx.line;
      } else if (key == "dimension") {
        const std::uint64_t d = parse_count(ctx, key, value);
        if (d < 1 || d > 3) fail(ctx, "dimension must be 1, 2 or 3");
        cfg.dimension = static_cast<int>(d);
        note_grid_key();
      } else if (key == "n") {
        const std::uint64_t v = parse_count(ctx, key, value);
        if (v < 2) fail(ctx, "n must be >= 2");
        cfg.n = static_cast<std::size_t>(v);
        note_grid_key();
      } else if (key == "domain_min") {
        cfg.domain_min = parse_real(ctx, key, value);
        note_grid_key();
      } else if (key == "domain_max") {
        cfg.domain_max = parse_real(ctx, key, value);
        note_grid_key();
      } else if (key == "N") {
        const std::uint64_t v = parse_count(ctx, key, value);
        if (v < 1) fail(ctx, "N must be >= 1");
        cfg.N = static_cast<std::size_t>(v);
      } else if (key == "softening") {
        const double v = parse_real(ctx, key, value);
        if (!(v > 0.0)) fail(ctx, "softening must be positive");
        cfg.softening = v;
      } else if (key == "shift") {
        if (value == "auto") cfg.shift = ShiftMode::automatic;
        else if (value == "none") cfg.shift = ShiftMode::none;
        else {
          cfg.shift = ShiftMode::explicit_value;
          cfg.shift_value = parse_real(ctx, key, value);
        }
      } else {
        fail(ctx, "unknown key '" + key + "' in [problem]");
      }
    } else if (section == "solver") {
      if (key == "epsilon") {
        const double v = parse_real(ctx, key, value);
        if (!(v > 0.0)) fail(ctx, "epsilon must be positive");
        cfg.solver.epsilon = v;
      } else if (key == "step_cap") {
        if (value == "auto") {
          cfg.solver.step_cap = 0.0;
        } else {
          const double v = parse_real(ctx, key, value);
          if (!(v > 0.0)) fail(ctx, "step_cap must be positive or 'auto'");
          cfg.solver.step_cap = v;
        }
      } else if (key == "step_mode") {
        if (value == "adaptive") cfg.solver.step_mode = StepMode::adaptive;
        else if (value == "fixed") cfg.solver.step_mode = StepMode::fixed;
        else fail(ctx, "step_mode must be adaptive or fixed");
      } else if (key == "fixed_step") {
        const double v = parse_real(ctx, key, value);
        if (!(v > 0.0)) fail(ctx, "fixed_step must be positive");
        cfg.solver.fixed_step = v;
      } else if (key == "inner_mode") {
        if (value == "fixed") cfg.solver.inner.mode = InnerPolicy::Mode::fixed;
        else if (value == "tolerance") cfg.solver.inner.mode = InnerPolicy::Mode::tolerance;
        else fail(ctx, "inner_mode must be fixed or tolerance");
      } else if (key == "inner_p") {
        const std::uint64_t v = parse_count(ctx, key, value);
        if (v < 1) fail(ctx, "inner_p must be >= 1");
        cfg.solver.inner.p = static_cast<std::size_t>(v);
      } else if (key == "inner_tol") {
        const double v = parse_real(ctx, key, value);
        if (!(v > 0.0)) fail(ctx, "inner_tol must be positive");
        cfg.solver.inner.tol = v;
      } else if (key == "inner_p_max") {
        const std::uint64_t v = parse_count(ctx, key, value);
        if (v < 1) fail(ctx, "inner_p_max must be >= 1");
        cfg.solver.inner.p_max = static_cast<std::size_t>(v);
      } else if (key == "projector") {
        if (value == "previous_iterate")
          cfg.solver.corrector_projector = ProjectorMode::previous_iterate;
        else if (value == "predictor")
          cfg.solver.corrector_projector = ProjectorMode::predictor;
        else fail(ctx, "projector must be previous_iterate or predictor");
      } else if (key == "max_outer") {
        const std::uint64_t v = parse_count(ctx, key, value);
        if (v < 1) fail(ctx, "max_outer must be >= 1");
        cfg.solver.max_outer = static_cast<std::size_t>(v);
      } else if (key == "snapshot_stride") {
        const std::uint64_t v = parse_count(ctx, key, value);
        if (v < 1) fail(ctx, "snapshot_stride must be >= 1");
        cfg.solver.snapshot_stride = static_cast<std::size_t>(v);
      } else {
        fail(ctx, "unknown key '" + key + "' in [solver]");
      }
    } else if (section == "init") {
      if (key == "mode") {
        if (value == "raw") cfg.init_mode = InitMode::raw;
        else if (value == "quasi_stiefel") cfg.init_mode = InitMode::quasi_stiefel;
        else if (value == "orthonormal") cfg.init_mode = InitMode::orthonormal;
        else if (value == "near_solution") cfg.init_mode = InitMode::near_solution;
        else fail(ctx, "mode must be raw, quasi_stiefel, orthonormal or near_solution");
      } else if (key == "eta") {
        const double v = parse_real(ctx, key, value);
        if (!(v > 0.0)) fail(ctx, "eta must be positive");
        cfg.eta = v;
      } else if (key == "seed") {
        cfg.seed = parse_count(ctx, key, value);
      } else {
        fail(ctx, "unknown key '" + key + "' in [init]");
      }
    } else {  // output
      if (key == "dir") {
        if (value.empty()) fail(ctx, "dir must not be empty");
        cfg.output_dir = value;
      } else {
        fail(ctx, "unknown key '" + key + "' in [output]");
      }
    }
  }

  if (cfg.problem == ProblemKind::matrix_market) {
    if (grid_key_line != 0) {
      ctx.line = grid_key_line;
      fail(ctx, "key '" + grid_key_name + "' conflicts with a matrix_market problem source");
    }
    if (cfg.path.empty()) {
      ctx.line = 0;
      throw ParseError(path + ": matrix_market problem needs a 'path' key in [problem]");
    }
  } else if (path_line != 0) {
    ctx.line = path_line;
    const char* hint = type_seen ? "" : " (set 'type = matrix_market' to use a file source)";
    fail(ctx, std::string("key 'path' conflicts with a grid problem source") + hint);
  }

  cfg.validate();
  return cfg;
}

PreparedProblem prepare_problem(const ExperimentConfig& config) {
  config.validate();

  double sigma = 0.0;
  std::string label = problem_label(config.problem);

  // Base operator, before any spectral shift.
  auto build_base = [&]() -> Operator {
    if (config.problem == ProblemKind::matrix_market) return load_matrix_market(config.path);

    // Default domains: the classical interval for the box problem, and wide
    // symmetric boxes for the potentials so low modes are barely truncated.
    double a = 0.0, b = std::numbers::pi_v<double>;
    if (config.problem == ProblemKind::harmonic) { a = -5.5; b = 5.5; }
    if (config.problem == ProblemKind::hydrogen) { a = -20.0; b = 20.0; }
    if (config.domain_min) a = *config.domain_min;
    if (config.domain_max) b = *config.domain_max;

    GridSpec grid;
    grid.dimension = config.dimension;
    grid.n = config.n;
    grid.a = a;
    grid.b = b;

    switch (config.problem) {
      case ProblemKind::laplacian: return build_laplacian(grid);
      case ProblemKind::harmonic: return build_harmonic(grid);
      case ProblemKind::hydrogen:
        return build_hydrogen(grid, config.softening.value_or(0.5 * grid.spacing()));
      default: break;
    }
    throw ContractError("prepare_problem: unreachable problem kind");
  };

  Operator base = build_base();
  if (config.N > base.dim())
    throw ContractError("prepare_problem: N exceeds the operator dimension " +
                        std::to_string(base.dim()));

  switch (config.shift) {
    case ShiftMode::automatic:
      sigma = estimate_spectral_bounds(base, 100).lambda_max_est + 1.0;
      break;
    case ShiftMode::none:
      sigma = 0.0;
      break;
    case ShiftMode::explicit_value:
      sigma = config.shift_value;
      break;
  }
  Operator op = (sigma != 0.0) ? shift_operator(base, sigma) : base;

  SolverConfig solver = config.solver;
  solver.seed = config.seed;
  if (solver.step_cap == 0.0)
    solver.step_cap = default_step_cap(estimate_spectral_bounds(op, 100));
  solver.validate();

  return PreparedProblem{std::move(op), sigma, config.N, std::move(label), solver};
}

BlockVector initial_block(const ExperimentConfig& config, const PreparedProblem& prepared) {
  InitSpec spec;
  spec.mode = config.init_mode;
  spec.eta = config.eta;
  std::optional<ReferenceSolution> reference;
  if (config.init_mode == InitMode::near_solution) {
    reference = reference_eigensolve(prepared.op, prepared.N);
    spec.reference = &reference->vectors;
  }
  return random_block(prepared.op.dim(), prepared.N, spec, config.seed);
}

RunOutcome execute_run(const ExperimentConfig& config, const std::string& out_dir) {
  const PreparedProblem prepared = prepare_problem(config);
  const BlockVector U0 = initial_block(config, prepared);

  RunOutcome out;
  out.sigma = prepared.sigma;
  out.label = prepared.label;
  out.result = solve(prepared.op, U0, prepared.solver);

  std::vector<double> orth_series;
  orth_series.reserve(out.result.trace.size());
  for (const IterationRecord& rec : out.result.trace) orth_series.push_back(rec.orth_err_post);
  try {
    out.fitted_omega = fit_decay_ratio(orth_series, kDecayFloor).ratio;
  } catch (const FitError&) {
    out.fitted_omega.reset();  // series never rose above the fitting floor
  }

  std::filesystem::create_directories(out_dir);
  write_trace(out.result.trace, out_dir + "/trace.csv", TraceFormat::csv);
  write_summary(config, prepared, out, out_dir + "/summary.json");
  return out;
}

int cmd_run(const std::string& config_path) {
  const ExperimentConfig config = load_experiment_config(config_path);
  const RunOutcome out = execute_run(config, config.output_dir);
  return out.result.converged ? 0 : 2;
}

int cmd_compare(const std::string& config_path) {
  const ExperimentConfig config = load_experiment_config(config_path);

  ExperimentConfig near_cfg = config;
  near_cfg.init_mode = InitMode::near_solution;

  const std::string dir = config.output_dir;
  const RunOutcome configured = execute_run(config, dir + "/configured");
  const RunOutcome near = execute_run(near_cfg, dir + "/near_solution");

  const PreparedProblem prepared = prepare_problem(config);
  const BlockVector U0 = initial_block(config, prepared);
  const SpectralResult baseline = baseline_projected_gradient(prepared.op, U0, prepared.solver);
  std::filesystem::create_directories(dir + "/baseline");
  write_trace(baseline.trace, dir + "/baseline/trace.csv", TraceFormat::csv);

  const std::size_t it_configured = configured.result.trace.back().n;
  const std::size_t it_near = near.result.trace.back().n;
  const std::size_t it_baseline = baseline.trace.back().n;
  const double reduction =
      it_configured == 0
          ? 0.0
          : (static_cast<double>(it_configured) - static_cast<double>(it_near)) /
                static_cast<double>(it_configured);

  nlohmann::ordered_json j;
  j["problem"] = prepared.label;
  j["N"] = prepared.N;
  j["iterations"] = {{"configured", it_configured},
                     {"near_solution", it_near},
                     {"baseline", it_baseline}};
  j["converged"] = {{"configured", configured.result.converged},
                    {"near_solution", near.result.converged},
                    {"baseline", baseline.converged}};
  j["reduction_ratio"] = reduction;
  j["ritz_values"] = {{"configured", configured.result.ritz_values},
                      {"near_solution", near.result.ritz_values},
                      {"baseline", baseline.ritz_values}};
  j["ritz_max_rel_diff"] = {
      {"near_solution_vs_configured",
       max_rel_diff(configured.result.ritz_values, near.result.ritz_values)},
      {"baseline_vs_configured",
       max_rel_diff(configured.result.ritz_values, baseline.ritz_values)}};

  const std::string out_path = dir + "/comparison.json";
  std::ofstream f(out_path);
  if (!f) throw IoError("cannot open " + out_path + " for writing");
  f << j.dump(2) << "\n";
  if (!f) throw IoError("failed writing " + out_path);

  const bool all_converged =
      configured.result.converged && near.result.converged && baseline.converged;
  return all_converged ? 0 : 2;
}

int cmd_sweep(const std::string& config_path, const std::string& parameter,
              const std::vector<std::string>& values) {
  if (values.empty()) throw UsageError("sweep needs at least one value");

  enum class Param { step_cap, N, n, inner_p };
  Param param;
  if (parameter == "step_cap") param = Param::step_cap;
  else if (parameter == "N") param = Param::N;
  else if (parameter == "n") param = Param::n;
  else if (parameter == "inner_p") param = Param::inner_p;
  else
    throw UsageError("unknown sweep parameter '" + parameter +
                     "' (expected step_cap, N, n or inner_p)");

  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t k = i + 1; k < values.size(); ++k)
      if (values[i] == values[k])
        throw UsageError("duplicate sweep value '" + values[i] + "'");

  const ExperimentConfig base = load_experiment_config(config_path);

  const auto sweep_real = [&](const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x))
      throw UsageError("sweep value '" + v + "' is not a finite number");
    return x;
  };
  const auto sweep_count = [&](const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (v.empty() || v[0] == '-' || end != v.c_str() + v.size() || errno == ERANGE)
      throw UsageError("sweep value '" + v + "' is not a nonnegative integer");
    return static_cast<std::size_t>(x);
  };

  // Materialize every per-value config up front so a bad value aborts the
  // sweep before any run has started.
  std::vector<ExperimentConfig> configs;
  configs.reserve(values.size());
  for (const std::string& v : values) {
    ExperimentConfig cfg = base;
    switch (param) {
      case Param::step_cap: {
        const double x = sweep_real(v);
        if (!(x > 0.0)) throw UsageError("step_cap sweep values must be positive");
        cfg.solver.step_cap = x;
        break;
      }
      case Param::N: {
        const std::size_t x = sweep_count(v);
        if (x < 1) throw UsageError("N sweep values must be >= 1");
        cfg.N = x;
        break;
      }
      case Param::n: {
        if (base.problem == ProblemKind::matrix_market)
          throw UsageError("cannot sweep n for a matrix_market problem");
        const std::size_t x = sweep_count(v);
        if (x < 2) throw UsageError("n sweep values must be >= 2");
        cfg.n = x;
        break;
      }
      case Param::inner_p: {
        const std::size_t x = sweep_count(v);
        if (x < 1) throw UsageError("inner_p sweep values must be >= 1");
        cfg.solver.inner = InnerPolicy::fixed_count(x);
        break;
      }
    }
    cfg.output_dir = base.output_dir + "/" + parameter + "_" + v;
    configs.push_back(std::move(cfg));
  }

  std::size_t threads = 1;
  if (const char* env = std::getenv("QOSTIEFEL_THREADS")) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(env, &end, 10);
    if (*env == '\0' || *end != '\0' || errno == ERANGE || x < 1)
      throw UsageError("QOSTIEFEL_THREADS must be a positive integer");
    threads = static_cast<std::size_t>(x);
  }
  threads = std::max<std::size_t>(1, std::min(threads, configs.size()));

  struct Slot {
    std::optional<RunOutcome> outcome;
    std::string error;
  };
  std::vector<Slot> slots(configs.size());

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      try {
        slots[i].outcome = execute_run(configs[i], configs[i].output_dir);
      } catch (const std::exception& e) {
        slots[i].error = e.what()[0] ? e.what() : "unknown error";
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::filesystem::create_directories(base.output_dir);
  const std::string csv_path = base.output_dir + "/sweep.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot open " + csv_path + " for writing");
  csv << "parameter,value,iterations,converged,final_grad_norm,final_orth_err,fitted_omega\n";
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (!slots[i].outcome) continue;  // failed runs are reported on stderr only
    const SpectralResult& r = slots[i].outcome->result;
    csv << parameter << ',' << values[i] << ',' << r.trace.back().n << ','
        << (r.converged ? 1 : 0) << ',' << format17(r.trace.back().grad_norm) << ','
        << format17(r.trace.back().orth_err_post) << ','
        << (slots[i].outcome->fitted_omega ? format17(*slots[i].outcome->fitted_omega)
                                           : std::string("nan"))
        << '\n';
  }
  if (!csv) throw IoError("failed writing " + csv_path);

  bool any_error = false;
  bool all_converged = true;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].error.empty()) {
      any_error = true;
      std::fprintf(stderr, "sweep %s=%s failed: %s\n", parameter.c_str(), values[i].c_str(),
                   slots[i].error.c_str());
    } else if (!slots[i].outcome->result.converged) {
      all_converged = false;
    }
  }
  if (any_error) return 1;
  return all_converged ? 0 : 2;
}

}  // namespace qostiefel
