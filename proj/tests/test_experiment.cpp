#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qostiefel/baselines.hpp"
#include "qostiefel/errors.hpp"
#include "qostiefel/experiment.hpp"
#include "qostiefel/linalg.hpp"

using namespace qostiefel;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test case; removed on destruction.
struct Scratch {
  fs::path root;
  explicit Scratch(const std::string& name) : root(fs::temp_directory_path() / name) {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Scratch() { fs::remove_all(root); }
  std::string file(const std::string& name) const { return (root / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << content;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(slurp(path)); }

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    rows.push_back(std::move(fields));
  }
  return rows;
}

// Small harmonic problem that converges in a few thousand cheap iterations.
std::string small_harmonic_config(const std::string& out_dir, const std::string& extra = "") {
  return "[problem]\n"
         "type = harmonic\n"
         "dimension = 1\n"
         "n = 31\n"
         "N = 2\n"
         "shift = auto\n"
         "[solver]\n"
         "epsilon = 1e-5\n"
         "step_cap = auto\n"
         "inner_mode = tolerance\n"
         "inner_tol = 1e-13\n"
         "inner_p_max = 64\n" +
         extra +
         "[init]\n"
         "mode = quasi_stiefel\n"
         "seed = 3\n"
         "[output]\n"
         "dir = " +
         out_dir + "\n";
}

}  // namespace

TEST_CASE("config loader fills every recognized key") {
  Scratch tmp("qostiefel_cfg_full");
  const std::string path = tmp.file("full.ini");
  write_file(path,
             "# leading comment\n"
             "[problem]\n"
             "type = hydrogen\n"
             "dimension = 3\n"
             "n = 9\n"
             "domain_min = -12.5\n"
             "domain_max = 12.5\n"
             "N = 5\n"
             "softening = 0.25\n"
             "shift = -1.5\n"
             "\n"
             "[solver]\n"
             "epsilon = 1e-7\n"
             "step_cap = 0.125\n"
             "step_mode = fixed\n"
             "fixed_step = 0.01\n"
             "inner_mode = fixed\n"
             "inner_p = 6\n"
             "inner_tol = 1e-10\n"
             "inner_p_max = 32\n"
             "projector = predictor\n"
             "max_outer = 1234\n"
             "snapshot_stride = 7\n"
             "; another comment\n"
             "[init]\n"
             "mode = near_solution\n"
             "eta = 0.05\n"
             "seed = 99\n"
             "[output]\n"
             "dir = runs/deep\n");

  const ExperimentConfig cfg = load_experiment_config(path);
  CHECK(cfg.problem == ProblemKind::hydrogen);
  CHECK(cfg.dimension == 3);
  CHECK(cfg.n == 9);
  CHECK(cfg.domain_min == -12.5);
  CHECK(cfg.domain_max == 12.5);
  CHECK(cfg.N == 5);
  CHECK(cfg.softening == 0.25);
  CHECK(cfg.shift == ShiftMode::explicit_value);
  CHECK(cfg.shift_value == -1.5);
  CHECK(cfg.solver.epsilon == 1e-7);
  CHECK(cfg.solver.step_cap == 0.125);
  CHECK(cfg.solver.step_mode == StepMode::fixed);
  CHECK(cfg.solver.fixed_step == 0.01);
  CHECK(cfg.solver.inner.mode == InnerPolicy::Mode::fixed);
  CHECK(cfg.solver.inner.p == 6);
  CHECK(cfg.solver.inner.tol == 1e-10);
  CHECK(cfg.solver.inner.p_max == 32);
  CHECK(cfg.solver.corrector_projector == ProjectorMode::predictor);
  CHECK(cfg.solver.max_outer == 1234);
  CHECK(cfg.solver.snapshot_stride == 7);
  CHECK(cfg.init_mode == InitMode::near_solution);
  CHECK(cfg.eta == 0.05);
  CHECK(cfg.seed == 99);
  CHECK(cfg.output_dir == "runs/deep");
}

TEST_CASE("config loader applies documented defaults for a minimal file") {
  Scratch tmp("qostiefel_cfg_min");
  const std::string path = tmp.file("min.ini");
  write_file(path, "[problem]\ntype = laplacian\n");
  const ExperimentConfig cfg = load_experiment_config(path);
  CHECK(cfg.problem == ProblemKind::laplacian);
  CHECK(cfg.dimension == 1);
  CHECK(cfg.n == 63);
  CHECK_FALSE(cfg.domain_min.has_value());
  CHECK(cfg.N == 4);
  CHECK(cfg.shift == ShiftMode::automatic);
  CHECK(cfg.solver.step_cap == 0.0);  // resolved to the spectral default later
  CHECK(cfg.init_mode == InitMode::quasi_stiefel);
  CHECK(cfg.seed == 0);
  CHECK(cfg.output_dir == "out");
}

TEST_CASE("config errors carry the file name and offending line") {
  Scratch tmp("qostiefel_cfg_err");
  const auto expect_parse_fail = [&](const std::string& body, const std::string& needle) {
    const std::string path = tmp.file("bad.ini");
    write_file(path, body);
    CHECK_THROWS_WITH_AS(load_experiment_config(path), doctest::Contains(needle.c_str()),
                         ParseError);
  };

  expect_parse_fail("[problem]\ntype = laplacian\nwavelength = 3\n", ":3:");
  expect_parse_fail("[problem]\ntype = maxwell\n", "type must be");
  expect_parse_fail("[cooking]\nheat = high\n", "unknown section");
  expect_parse_fail("[problem]\ntype laplacian\n", "expected 'key = value'");
  expect_parse_fail("type = laplacian\n", "before any section");
  expect_parse_fail("[problem]\nn = one\n", "nonnegative integer");
  expect_parse_fail("[problem]\nn = 1\n", "n must be >= 2");
  expect_parse_fail("[solver]\nepsilon = 0\n", "epsilon must be positive");
  expect_parse_fail("[problem\ntype = laplacian\n", "malformed section");

  CHECK_THROWS_AS(load_experiment_config(tmp.file("missing.ini")), IoError);
}

TEST_CASE("grid keys and file sources are mutually exclusive") {
  Scratch tmp("qostiefel_cfg_conflict");
  const std::string mm = tmp.file("mm.ini");
  write_file(mm,
             "[problem]\n"
             "type = matrix_market\n"
             "path = some.mtx\n"
             "n = 16\n");
  CHECK_THROWS_WITH_AS(load_experiment_config(mm), doctest::Contains(":4:"), ParseError);

  const std::string grid = tmp.file("grid.ini");
  write_file(grid,
             "[problem]\n"
             "type = harmonic\n"
             "path = some.mtx\n");
  CHECK_THROWS_WITH_AS(load_experiment_config(grid), doctest::Contains("conflicts with a grid"),
                       ParseError);

  const std::string nopath = tmp.file("nopath.ini");
  write_file(nopath, "[problem]\ntype = matrix_market\n");
  CHECK_THROWS_WITH_AS(load_experiment_config(nopath), doctest::Contains("needs a 'path'"),
                       ParseError);
}

TEST_CASE("experiment validation rejects inconsistent settings") {
  ExperimentConfig cfg;  // laplacian defaults are valid
  cfg.solver.step_cap = 0.0;
  CHECK_NOTHROW(cfg.validate());

  auto broken = cfg;
  broken.path = "x.mtx";
  CHECK_THROWS_AS(broken.validate(), ContractError);

  broken = cfg;
  broken.N = 0;
  CHECK_THROWS_AS(broken.validate(), ContractError);

  broken = cfg;
  broken.softening = 0.5;  // only meaningful for hydrogen
  CHECK_THROWS_AS(broken.validate(), ContractError);

  broken = cfg;
  broken.domain_min = 2.0;
  broken.domain_max = -2.0;
  CHECK_THROWS_AS(broken.validate(), ContractError);

  broken = cfg;
  broken.eta = 0.0;
  CHECK_THROWS_AS(broken.validate(), ContractError);

  broken = cfg;
  broken.solver.step_mode = StepMode::fixed;
  broken.solver.fixed_step = 0.0;
  CHECK_THROWS_AS(broken.validate(), ContractError);

  ExperimentConfig mm;
  mm.problem = ProblemKind::matrix_market;
  CHECK_THROWS_AS(mm.validate(), ContractError);
}

TEST_CASE("prepare resolves the shift mode and the automatic step cap") {
  ExperimentConfig cfg;
  cfg.problem = ProblemKind::harmonic;
  cfg.n = 7;
  cfg.N = 2;
  cfg.seed = 21;

  const PreparedProblem autop = prepare_problem(cfg);
  CHECK(autop.label == "harmonic");
  CHECK(autop.sigma > 0.0);
  CHECK(autop.solver.step_cap > 0.0);
  CHECK(autop.solver.seed == 21);
  // after the automatic shift the whole spectrum sits below zero
  const ReferenceSolution full = reference_eigensolve(autop.op, 7);
  CHECK(full.values.back() < 0.0);

  cfg.shift = ShiftMode::none;
  CHECK(prepare_problem(cfg).sigma == 0.0);

  cfg.shift = ShiftMode::explicit_value;
  cfg.shift_value = 2.5;
  const PreparedProblem expl = prepare_problem(cfg);
  CHECK(expl.sigma == 2.5);
  const ReferenceSolution base = reference_eigensolve(prepare_problem([] {
                                                        ExperimentConfig c;
                                                        c.problem = ProblemKind::harmonic;
                                                        c.n = 7;
                                                        c.N = 2;
                                                        c.shift = ShiftMode::none;
                                                        return c;
                                                      }()).op,
                                                      2);
  const ReferenceSolution shifted = reference_eigensolve(expl.op, 2);
  CHECK(shifted.values[0] + 2.5 == doctest::Approx(base.values[0]).epsilon(1e-12));

  cfg.N = 8;  // exceeds the 7-point grid
  CHECK_THROWS_WITH_AS(prepare_problem(cfg), doctest::Contains("exceeds"), ContractError);
}

TEST_CASE("initial blocks are reproducible and honor the init mode") {
  ExperimentConfig cfg;
  cfg.problem = ProblemKind::harmonic;
  cfg.n = 15;
  cfg.N = 3;
  cfg.seed = 8;
  const PreparedProblem prepared = prepare_problem(cfg);

  const BlockVector A = initial_block(cfg, prepared);
  const BlockVector B = initial_block(cfg, prepared);
  CHECK(frobenius_distance(A, B) == 0.0);
  const EigResult eig = sym_eig(gram(A, A));
  CHECK(eig.values.back() <= 1.0 + 1e-12);

  ExperimentConfig near_cfg = cfg;
  near_cfg.init_mode = InitMode::near_solution;
  near_cfg.eta = 0.05;
  const BlockVector C = initial_block(near_cfg, prepared);
  const ReferenceSolution ref = reference_eigensolve(prepared.op, 3);
  // eta-sized perturbation plus the slack of the quasi-Stiefel pullback
  CHECK(frobenius_distance(C, ref.vectors) <= 1.5 * 0.05);
}

TEST_CASE("a run writes matching artifacts next to its returned outcome") {
  Scratch tmp("qostiefel_run_artifacts");
  ExperimentConfig cfg;
  cfg.problem = ProblemKind::harmonic;
  cfg.n = 31;
  cfg.N = 2;
  cfg.seed = 3;
  cfg.solver.inner = InnerPolicy::tolerance_capped(1e-13, 64);

  const std::string dir = tmp.file("run");
  const RunOutcome out = execute_run(cfg, dir);
  REQUIRE(out.result.converged);

  REQUIRE(fs::exists(dir + "/trace.csv"));
  REQUIRE(fs::exists(dir + "/summary.json"));

  const auto summary = read_json(dir + "/summary.json");
  CHECK(summary["problem"] == "harmonic");
  CHECK(summary["N"] == 2);
  CHECK(summary["iterations"].get<std::size_t>() == out.result.trace.back().n);
  CHECK(summary["converged"] == true);
  REQUIRE(summary["ritz_values"].size() == 2);
  CHECK(summary["ritz_values"][0].get<double>() == out.result.ritz_values[0]);
  CHECK(summary["residual_norms"].size() == 2);
  CHECK(summary["final_grad_norm"].get<double>() == out.result.trace.back().grad_norm);
  CHECK(summary["final_orth_err"].get<double>() == out.result.trace.back().orth_err_post);
  REQUIRE(summary["fitted_omega"].is_number());
  CHECK(summary["fitted_omega"].get<double>() == *out.fitted_omega);
  CHECK(*out.fitted_omega < 1.0);
  CHECK(summary["sigma"].get<double>() == out.sigma);
  CHECK(summary["seed"] == 3);

  const auto rows = read_csv(dir + "/trace.csv");
  REQUIRE(rows.size() == out.result.trace.size() + 1);
  CHECK(rows[0] == std::vector<std::string>{"n", "energy", "grad_norm", "orth_err_pre",
                                            "orth_err_post", "step", "inner_count",
                                            "wall_time_s"});
}

TEST_CASE("repeat runs are identical except for wall-clock timings") {
  Scratch tmp("qostiefel_run_determinism");
  ExperimentConfig cfg;
  cfg.problem = ProblemKind::harmonic;
  cfg.n = 31;
  cfg.N = 2;
  cfg.seed = 3;

  execute_run(cfg, tmp.file("a"));
  execute_run(cfg, tmp.file("b"));

  CHECK(slurp(tmp.file("a") + "/summary.json") == slurp(tmp.file("b") + "/summary.json"));

  const auto ra = read_csv(tmp.file("a") + "/trace.csv");
  const auto rb = read_csv(tmp.file("b") + "/trace.csv");
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    REQUIRE(ra[i].size() == 8);
    REQUIRE(rb[i].size() == 8);
    // wall_time_s is the documented nondeterministic column
    for (std::size_t c = 0; c + 1 < 8; ++c) CHECK(ra[i][c] == rb[i][c]);
  }
}

TEST_CASE("run command reports convergence through its exit status") {
  Scratch tmp("qostiefel_cmd_run");
  const std::string good = tmp.file("good.ini");
  write_file(good, small_harmonic_config(tmp.file("out_good")));
  CHECK(cmd_run(good) == 0);
  CHECK(fs::exists(tmp.file("out_good") + "/summary.json"));

  const std::string capped = tmp.file("capped.ini");
  write_file(capped, small_harmonic_config(tmp.file("out_capped"), "max_outer = 1\n"));
  CHECK(cmd_run(capped) == 2);
  CHECK(read_json(tmp.file("out_capped") + "/summary.json")["converged"] == false);

  CHECK_THROWS_AS(cmd_run(tmp.file("missing.ini")), IoError);
}

TEST_CASE("matrix market sources run through the same pipeline") {
  Scratch tmp("qostiefel_cmd_mm");
  write_file(tmp.file("diag.mtx"),
             "%%MatrixMarket matrix coordinate real symmetric\n"
             "3 3 3\n"
             "1 1 -3.0\n"
             "2 2 -2.0\n"
             "3 3 -1.0\n");
  const std::string cfg = tmp.file("mm.ini");
  write_file(cfg,
             "[problem]\n"
             "type = matrix_market\n"
             "path = " +
                 tmp.file("diag.mtx") +
                 "\n"
                 "N = 1\n"
                 "shift = none\n"
                 "[solver]\n"
                 "epsilon = 1e-8\n"
                 "step_cap = auto\n"
                 "[init]\n"
                 "mode = quasi_stiefel\n"
                 "seed = 5\n"
                 "[output]\n"
                 "dir = " +
                 tmp.file("mm_out") + "\n");

  CHECK(cmd_run(cfg) == 0);
  const auto summary = read_json(tmp.file("mm_out") + "/summary.json");
  CHECK(summary["problem"] == "matrix_market");
  CHECK(summary["sigma"].get<double>() == 0.0);
  CHECK(summary["ritz_values"][0].get<double>() == doctest::Approx(-3.0).epsilon(1e-7));
}

TEST_CASE("compare runs three strategies and reconciles their spectra") {
  Scratch tmp("qostiefel_cmd_compare");
  const std::string cfg = tmp.file("cmp.ini");
  const std::string out = tmp.file("cmp_out");
  write_file(cfg, small_harmonic_config(out));

  CHECK(cmd_compare(cfg) == 0);
  REQUIRE(fs::exists(out + "/configured/summary.json"));
  REQUIRE(fs::exists(out + "/near_solution/summary.json"));
  REQUIRE(fs::exists(out + "/baseline/trace.csv"));

  const auto cmp = read_json(out + "/comparison.json");
  CHECK(cmp["problem"] == "harmonic");
  CHECK(cmp["N"] == 2);
  CHECK(cmp["converged"]["configured"] == true);
  CHECK(cmp["converged"]["near_solution"] == true);
  CHECK(cmp["converged"]["baseline"] == true);

  const double c = cmp["iterations"]["configured"].get<double>();
  const double nn = cmp["iterations"]["near_solution"].get<double>();
  CHECK(cmp["iterations"]["baseline"].get<double>() >= 1.0);
  CHECK(cmp["reduction_ratio"].get<double>() == doctest::Approx((c - nn) / c).epsilon(1e-12));
  CHECK(cmp["ritz_max_rel_diff"]["near_solution_vs_configured"].get<double>() <= 1e-6);
  CHECK(cmp["ritz_max_rel_diff"]["baseline_vs_configured"].get<double>() <= 1e-6);

  // the warm start should not need more iterations than the configured run
  CHECK(nn <= c);
}

TEST_CASE("sweeps fan out over values and collect one csv row per run") {
  Scratch tmp("qostiefel_cmd_sweep");
  const std::string cfg = tmp.file("sweep.ini");
  const std::string out = tmp.file("sweep_out");
  write_file(cfg, small_harmonic_config(out));

  CHECK(cmd_sweep(cfg, "inner_p", {"1", "3", "8"}) == 0);

  const auto rows = read_csv(out + "/sweep.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"parameter", "value", "iterations", "converged",
                                            "final_grad_norm", "final_orth_err", "fitted_omega"});
  const std::vector<std::string> expect_values{"1", "3", "8"};
  std::vector<double> first_ritz;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 7);
    CHECK(rows[i][0] == "inner_p");
    CHECK(rows[i][1] == expect_values[i - 1]);
    CHECK(rows[i][3] == "1");

    const std::string sub = out + "/inner_p_" + expect_values[i - 1];
    const auto summary = read_json(sub + "/summary.json");
    CHECK(summary["iterations"].get<std::size_t>() == std::stoull(rows[i][2]));
    first_ritz.push_back(summary["ritz_values"][0].get<double>());
  }
  // the inner depth changes the path, not the answer
  for (double v : first_ritz)
    CHECK(v == doctest::Approx(first_ritz.front()).epsilon(1e-6));
}

TEST_CASE("sweeping the step cap converges for every stable value") {
  Scratch tmp("qostiefel_sweep_cap");
  const std::string cfg = tmp.file("sweep.ini");
  const std::string out = tmp.file("cap_out");
  write_file(cfg, small_harmonic_config(out));

  CHECK(cmd_sweep(cfg, "step_cap", {"0.004", "0.002"}) == 0);
  const auto rows = read_csv(out + "/sweep.csv");
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][3] == "1");
  // halving the cap cannot speed the run up
  CHECK(std::stoull(rows[2][2]) >= std::stoull(rows[1][2]));
}

TEST_CASE("sweep rejects malformed requests before running anything") {
  Scratch tmp("qostiefel_sweep_bad");
  const std::string cfg = tmp.file("sweep.ini");
  const std::string out = tmp.file("bad_out");
  write_file(cfg, small_harmonic_config(out));

  CHECK_THROWS_WITH_AS(cmd_sweep(cfg, "mass", {"1"}), doctest::Contains("unknown sweep parameter"),
                       UsageError);
  CHECK_THROWS_WITH_AS(cmd_sweep(cfg, "inner_p", {}), doctest::Contains("at least one"),
                       UsageError);
  CHECK_THROWS_WITH_AS(cmd_sweep(cfg, "inner_p", {"3", "3"}), doctest::Contains("duplicate"),
                       UsageError);
  CHECK_THROWS_AS(cmd_sweep(cfg, "step_cap", {"0"}), UsageError);
  CHECK_THROWS_AS(cmd_sweep(cfg, "step_cap", {"fast"}), UsageError);
  CHECK_THROWS_AS(cmd_sweep(cfg, "n", {"1"}), UsageError);
  CHECK_FALSE(fs::exists(out + "/sweep.csv"));
}

TEST_CASE("sweep thread count comes from the environment and is validated") {
  Scratch tmp("qostiefel_sweep_threads");
  const std::string cfg = tmp.file("sweep.ini");
  const std::string out = tmp.file("thr_out");
  write_file(cfg, small_harmonic_config(out));

  setenv("QOSTIEFEL_THREADS", "frog", 1);
  CHECK_THROWS_WITH_AS(cmd_sweep(cfg, "inner_p", {"2", "4"}),
                       doctest::Contains("QOSTIEFEL_THREADS"), UsageError);

  setenv("QOSTIEFEL_THREADS", "2", 1);
  CHECK(cmd_sweep(cfg, "inner_p", {"2", "4"}) == 0);
  unsetenv("QOSTIEFEL_THREADS");

  const auto rows = read_csv(out + "/sweep.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][1] == "2");
  CHECK(rows[2][1] == "4");
}
