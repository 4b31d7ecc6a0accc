#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qostiefel/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"quasi-orthogonal block eigensolver experiment harness"};
  app.require_subcommand(1);

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "run one experiment from a config file");
  run->add_option("config", run_config, "config file")->required();

  std::string compare_config;
  CLI::App* compare = app.add_subcommand(
      "compare", "configured init vs near-solution init vs explicit-orthogonalization baseline");
  compare->add_option("config", compare_config, "config file")->required();

  std::string sweep_config;
  std::string sweep_param;
  std::vector<std::string> sweep_values;
  CLI::App* sweep = app.add_subcommand("sweep", "one run per parameter value");
  sweep->add_option("config", sweep_config, "config file")->required();
  sweep->add_option("--param", sweep_param, "parameter to vary: step_cap, N, n or inner_p")
      ->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")
      ->required()
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems map onto the generic error status
  }

  try {
    if (run->parsed()) return qostiefel::cmd_run(run_config);
    if (compare->parsed()) return qostiefel::cmd_compare(compare_config);
    return qostiefel::cmd_sweep(sweep_config, sweep_param, sweep_values);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
