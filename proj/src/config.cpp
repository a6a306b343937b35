#include "qpb/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace qpb {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, v));
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(fmt::format("{}: '{}' is not an integer", key, v));
  }
  return out;
}

int to_small_int(const std::string& key, const std::string& v) {
  const long long x = to_int(key, v);
  if (x < -1'000'000'000LL || x > 1'000'000'000LL) throw ConfigError(key + ": out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, v));
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{}", i ? "," : "", v[i]);
  return s;
}

DataSource to_source(const std::string& v) {
  if (v == "boundary") return DataSource::Boundary;
  if (v == "zero") return DataSource::Zero;
  if (v == "random") return DataSource::Random;
  if (v == "file") return DataSource::File;
  throw ConfigError(fmt::format("data: '{}' is not one of boundary, zero, random, file", v));
}

void assign(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "nu") c.nu = to_small_int(key, v);
  else if (key == "omega") c.omega = to_list(key, v);
  else if (key == "truncation_radius") c.truncation_radius = to_small_int(key, v);
  else if (key == "decay") {
    if (v != "exponential" && v != "polynomial") {
      throw ConfigError(fmt::format("decay: '{}' is not exponential or polynomial", v));
    }
    c.decay = v;
  } else if (key == "A") c.A = to_double(key, v);
  else if (key == "rho") c.rho = to_double(key, v);
  else if (key == "r") c.r = to_double(key, v);
  else if (key == "power") c.power = to_small_int(key, v);
  else if (key == "horizon") {
    if (v == "theoretical") c.horizon.reset();
    else c.horizon = to_double(key, v);
  } else if (key == "time_steps") c.time_steps = to_small_int(key, v);
  else if (key == "quadrature") {
    try {
      c.quadrature = parse_quadrature(v);
    } catch (const PreconditionError& e) {
      throw ConfigError(std::string("quadrature: ") + e.what());
    }
  } else if (key == "max_k") c.max_k = to_small_int(key, v);
  else if (key == "tol") c.tol = to_double(key, v);
  else if (key == "hermitian") c.hermitian = to_bool(key, v);
  else if (key == "seed") {
    const long long s = to_int(key, v);
    if (s < 0) throw ConfigError("seed: must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "output_dir") c.output_dir = v;
  else if (key == "data") c.data = to_source(v);
  else if (key == "data_file") c.data_file = v;
  else if (key == "tol_compare") c.tol_compare = to_double(key, v);
  else if (key == "oracle_substeps") c.oracle_substeps = to_small_int(key, v);
  else if (key == "trials") c.trials = to_small_int(key, v);
  else if (key == "tree_depth") c.tree_depth = to_small_int(key, v);
  else if (key == "xi") c.xi = to_list(key, v);
  else throw ConfigError(fmt::format("unknown key '{}'", key));
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "nu",         "omega",      "truncation_radius", "decay",      "A",
      "rho",        "r",          "power",             "horizon",    "time_steps",
      "quadrature", "max_k",      "tol",               "hermitian",  "seed",
      "output_dir", "data",       "data_file",         "tol_compare", "oracle_substeps",
      "trials",     "tree_depth", "xi"};
  return keys;
}

std::string to_string(DataSource d) {
  switch (d) {
    case DataSource::Boundary: return "boundary";
    case DataSource::Zero: return "zero";
    case DataSource::Random: return "random";
    case DataSource::File: return "file";
  }
  return "?";
}

DecaySpec RunConfig::decay_spec() const {
  if (decay == "polynomial") return Polynomial{A, r};
  return Exponential{A, rho};
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("line {}: expected key = value", lineno));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(c.keys_set.begin(), c.keys_set.end(), key) != c.keys_set.end()) {
      throw ConfigError(fmt::format("line {}: key '{}' repeated", lineno, key));
    }
    if (value.empty()) throw ConfigError(fmt::format("line {}: '{}' has no value", lineno, key));
    try {
      assign(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", lineno, e.what()));
    }
    c.keys_set.push_back(key);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

void validate_for_solver(const RunConfig& c) {
  if (c.nu < 1) throw ConfigError("nu must be >= 1");
  if (static_cast<int>(c.omega.size()) != c.nu) {
    throw ConfigError(fmt::format("omega has {} entries, nu = {}", c.omega.size(), c.nu));
  }
  if (std::all_of(c.omega.begin(), c.omega.end(), [](double w) { return w == 0.0; })) {
    throw ConfigError("omega must not be zero");
  }
  if (c.truncation_radius < 0) throw ConfigError("truncation_radius must be >= 0");
  if (c.power < 2) throw ConfigError("power must be >= 2");
  if (c.time_steps <= 0 || c.time_steps % 2 != 0) {
    throw ConfigError(fmt::format("time_steps must be a positive even integer, got {}",
                                  c.time_steps));
  }
  if (c.horizon && !(*c.horizon >= 0.0)) throw ConfigError("horizon must be >= 0");
  if (c.max_k < 1) throw ConfigError("max_k must be >= 1");
  if (!(c.tol > 0.0)) throw ConfigError("tol must be > 0");
  if (!(c.tol_compare > 0.0)) throw ConfigError("tol_compare must be > 0");
  if (c.oracle_substeps < 1) throw ConfigError("oracle_substeps must be >= 1");
  if (!(c.A > 0.0)) throw ConfigError("A must be > 0");
  if (c.data == DataSource::File && c.data_file.empty()) {
    throw ConfigError("data = file needs data_file");
  }
  try {
    validate(c.decay_spec(), c.nu, DecayPath::Solver);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::pair<std::string, std::string>> echo(const RunConfig& c) {
  return {
      {"nu", std::to_string(c.nu)},
      {"omega", list_text(c.omega)},
      {"truncation_radius", std::to_string(c.truncation_radius)},
      {"decay", c.decay},
      {"A", fmt::format("{}", c.A)},
      {"rho", fmt::format("{}", c.rho)},
      {"r", fmt::format("{}", c.r)},
      {"power", std::to_string(c.power)},
      {"horizon", c.horizon ? fmt::format("{}", *c.horizon) : "theoretical"},
      {"time_steps", std::to_string(c.time_steps)},
      {"quadrature", to_string(c.quadrature)},
      {"max_k", std::to_string(c.max_k)},
      {"tol", fmt::format("{}", c.tol)},
      {"hermitian", c.hermitian ? "true" : "false"},
      {"seed", std::to_string(c.seed)},
      {"output_dir", c.output_dir},
      {"data", to_string(c.data)},
      {"data_file", c.data_file},
      {"tol_compare", fmt::format("{}", c.tol_compare)},
      {"oracle_substeps", std::to_string(c.oracle_substeps)},
      {"trials", std::to_string(c.trials)},
      {"tree_depth", std::to_string(c.tree_depth)},
      {"xi", list_text(c.xi)},
  };
}

}  // namespace qpb
