#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace qpb {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;

struct CommandOptions {
  std::optional<std::string> config_path;  // defaults are used when empty
  bool override_horizon = false;
  bool parallel = false;
  std::optional<std::string> output_dir;  // overrides the config's output_dir
};

/// Constants, iteration, bound checks, residuals; writes coefficient CSVs,
/// decay_fit.json, manifest.json and timing.json.
int cmd_solve(const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// suite: trees | convolution | constants | all. Prints a pass/fail table;
/// writes verify_report.json when an output directory is given.
int cmd_verify(const std::string& suite, const CommandOptions& opts, std::ostream& out,
               std::ostream& err);

/// Picard limit against an RK4 integration of the truncated system.
int cmd_oracle(const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// Index statistics and tree sums of T_p(0..k).
int cmd_trees(int k, int p, const std::vector<double>& xi, const CommandOptions& opts,
              std::ostream& out, std::ostream& err);

}  // namespace qpb
