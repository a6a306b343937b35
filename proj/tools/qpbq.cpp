#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpb/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectral Picard solver and bound checks for quasi-periodic Boussinesq data"};
  app.require_subcommand(1);

  qpb::CommandOptions opts;
  std::string config, output;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_flag("--override-horizon", opts.override_horizon,
                  "allow a horizon beyond the proven interval (results are flagged)");
    sub->add_flag("--parallel", opts.parallel, "use OpenMP kernels");
    sub->add_option("--output", output, "output directory");
  };

  auto* solve = app.add_subcommand("solve", "iterate, check bounds, write CSV and manifest");
  add_common(solve);

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "property suites: trees, convolution, constants, all");
  verify->add_option("suite", suite, "suite to run")
      ->check(CLI::IsMember({"trees", "convolution", "constants", "all"}));
  add_common(verify);

  auto* oracle = app.add_subcommand("oracle", "compare the Picard limit with RK4");
  add_common(oracle);

  int k = 3, p = 2;
  std::vector<double> xi{0.0, 0.05, 0.1, 0.2};
  auto* trees = app.add_subcommand("trees", "tree counts, index maxima and tree sums");
  trees->add_option("--k", k, "deepest level")->check(CLI::NonNegativeNumber);
  trees->add_option("--p", p, "arity")->check(CLI::Range(2, 16));
  trees->add_option("--xi", xi, "tree sum arguments")->delimiter(',');
  add_common(trees);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qpb::kExitConfigError;
  }
  if (!config.empty()) opts.config_path = config;
  if (!output.empty()) opts.output_dir = output;

  if (*solve) return qpb::cmd_solve(opts, std::cout, std::cerr);
  if (*verify) return qpb::cmd_verify(suite, opts, std::cout, std::cerr);
  if (*oracle) return qpb::cmd_oracle(opts, std::cout, std::cerr);
  return qpb::cmd_trees(k, p, xi, opts, std::cout, std::cerr);
}
