#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpb/decay.hpp"
#include "qpb/lattice.hpp"
#include "qpb/quadrature.hpp"

namespace qpb {

/// Malformed or inadmissible configuration (exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DataSource { Boundary, Zero, Random, File };

/// Run parameters. Defaults describe the two-frequency exponential benchmark.
///
/// File format: one `key = value` per line, `#` starts a comment, lists are
/// comma separated. Unknown or repeated keys are errors.
struct RunConfig {
  int nu = 2;
  std::vector<double> omega{1.0, 1.4142135623730951};
  int truncation_radius = 8;
  std::string decay = "exponential";  // exponential | polynomial
  double A = 1.0;
  double rho = 1.0;
  double r = 5.0;
  int power = 2;
  std::optional<double> horizon;  // empty = theoretical
  int time_steps = 64;
  QuadratureRule quadrature = QuadratureRule::Trapezoid;
  int max_k = 12;
  double tol = 1e-12;
  bool hermitian = true;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  DataSource data = DataSource::Boundary;
  std::string data_file;
  double tol_compare = 1e-6;
  int oracle_substeps = 8;
  int trials = 200;
  int tree_depth = 3;
  std::vector<double> xi{0.0, 0.05, 0.1, 0.2};

  std::vector<std::string> keys_set;  // keys given explicitly, in file order

  DecaySpec decay_spec() const;
  FrequencyVector frequencies() const { return FrequencyVector(omega); }
};

/// The recognised keys, in canonical order.
const std::vector<std::string>& config_keys();

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Checks the parameters needed by the solver (decay class hypotheses, grid,
/// frequencies). Throws ConfigError.
void validate_for_solver(const RunConfig& cfg);

std::string to_string(DataSource d);

/// key -> value text for every key, canonical order.
std::vector<std::pair<std::string, std::string>> echo(const RunConfig& cfg);

}  // namespace qpb
