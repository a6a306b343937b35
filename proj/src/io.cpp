#include "qpb/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace qpb {

namespace fs = std::filesystem;

void write_coefficients_csv(const fs::path& path, const Snapshot& snap, int k,
                            const TimeGrid& grid, const ConstantsReport& consts) {
  const Ball& ball = snap.ball();
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out), "k,t");
  for (int d = 1; d <= ball.nu(); ++d) fmt::format_to(std::back_inserter(out), ",n_{}", d);
  fmt::format_to(std::back_inserter(out), ",re,im,modulus,class_bound,margin\n");

  std::vector<double> bound(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) bound[i] = consts.uniform_bound(ball.norm(i));
  for (int j = 0; j < snap.nodes(); ++j) {
    const double t = grid.node(j);
    for (std::size_t i = 0; i < ball.size(); ++i) {
      const cplx v = snap(j, i);
      const double mod = std::abs(v);
      fmt::format_to(std::back_inserter(out), "{},{:.17g}", k, t);
      for (int x : ball.point(i)) fmt::format_to(std::back_inserter(out), ",{}", x);
      fmt::format_to(std::back_inserter(out), ",{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                     v.real(), v.imag(), mod, bound[i], mod / bound[i]);
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return cells;
}

}  // namespace

InitialData read_data_csv(const fs::path& path, const BallPtr& ball, bool hermitian) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read data file '{}'", path.string()));
  const int nu = ball->nu();
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("data file is empty");
  std::vector<std::string> expect;
  for (int d = 1; d <= nu; ++d) expect.push_back(fmt::format("n_{}", d));
  for (const char* c : {"c_re", "c_im", "d_re", "d_im"}) expect.emplace_back(c);
  if (split_csv(line) != expect) {
    throw ConfigError(fmt::format("data file header must be {}", fmt::join(expect, ",")));
  }
  InitialData data{LatticeField(ball), LatticeField(ball)};
  std::vector<bool> seen(ball->size(), false);
  int lineno = 1;
  std::vector<int> n(static_cast<std::size_t>(nu));
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != expect.size()) {
      throw ConfigError(fmt::format("data file line {}: expected {} columns", lineno,
                                    expect.size()));
    }
    double v[4];
    try {
      for (int d = 0; d < nu; ++d) {
        std::size_t used = 0;
        n[static_cast<std::size_t>(d)] = std::stoi(cells[static_cast<std::size_t>(d)], &used);
        if (used != cells[static_cast<std::size_t>(d)].size()) throw std::invalid_argument("");
      }
      for (int q = 0; q < 4; ++q) {
        std::size_t used = 0;
        const auto& cell = cells[static_cast<std::size_t>(nu + q)];
        v[q] = std::stod(cell, &used);
        if (used != cell.size() || !std::isfinite(v[q])) throw std::invalid_argument("");
      }
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("data file line {}: malformed number", lineno));
    }
    const auto i = ball->find(n);
    if (i == Ball::npos) {
      throw ConfigError(fmt::format("data file line {}: {} lies outside the ball", lineno,
                                    to_string(n)));
    }
    if (seen[i]) throw ConfigError(fmt::format("data file line {}: repeated point", lineno));
    seen[i] = true;
    data.position[i] = {v[0], v[1]};
    data.velocity[i] = {v[2], v[3]};
  }
  data.position.set_hermitian(hermitian);
  data.velocity.set_hermitian(hermitian);
  return data;
}

ordered_json to_json(const ConstantsReport& c) {
  ordered_json j;
  j["decay"] = describe(c.spec);
  j["nu"] = c.nu;
  j["p"] = c.p;
  if (const auto* e = c.exponential()) {
    j["b_rho"] = e->b_rho;
    j["b_tilde_rho"] = e->b_tilde_rho;
    j["M"] = e->M;
    j["B"] = e->B;
    j["L"] = e->L;
    j["L_p_rho"] = e->L_p_rho ? ordered_json(*e->L_p_rho) : ordered_json(nullptr);
    j["one_dim_half_sum"] = e->one_dim_half_sum;
    j["one_dim_quarter_sum"] = e->one_dim_quarter_sum;
    j["one_dim_checks_pass"] = e->one_dim_checks_pass;
  } else if (const auto* q = c.polynomial()) {
    j["H_r_nu"] = q->H_r_nu;
    j["H_tail_error"] = q->H_tail_error;
    j["H_shells"] = q->H_shells;
    j["K_r_nu"] = q->K_r_nu;
    j["M_r"] = q->M_r;
    j["L_r"] = q->L_r;
    j["L_p_r"] = q->L_p_r ? ordered_json(*q->L_p_r) : ordered_json(nullptr);
  }
  j["proven_horizon"] = c.proven_horizon();
  j["uniform_bound_factor"] = c.uniform_bound(0);
  return j;
}

ordered_json to_json(const BoundCheckReport& r, const TimeGrid& grid) {
  ordered_json j;
  j["name"] = r.name;
  j["applicable"] = r.applicable;
  j["passed"] = r.passed;
  j["checked"] = r.checked;
  j["violations"] = r.violations;
  j["worst_margin"] = r.worst_margin;
  j["worst_k"] = r.worst_k;
  j["worst_t"] = r.worst_j >= 0 ? ordered_json(grid.node(r.worst_j)) : ordered_json(nullptr);
  j["worst_n"] = std::vector<int>(r.worst_n.coords().begin(), r.worst_n.coords().end());
  j["note"] = r.note;
  return j;
}

ordered_json to_json(const SmallDivisorReport& s) {
  ordered_json j;
  j["min_abs_theta"] = s.min_abs_theta;
  j["argmin"] = std::vector<int>(s.argmin.coords().begin(), s.argmin.coords().end());
  j["threshold"] = s.threshold;
  j["warning"] = s.warning;
  return j;
}

ordered_json config_json(const RunConfig& cfg) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : echo(cfg)) j[k] = v;
  return j;
}

ordered_json decay_fit_json(const PicardRun& run, const InitialData& data,
                            const ConstantsReport& consts) {
  DecaySpec shape;
  double factor = 0.0;
  if (const auto* e = std::get_if<Exponential>(&consts.spec)) {
    shape = Exponential{1.0, 0.5 * e->rho};
    factor = consts.exponential()->B;
  } else {
    const auto& q = std::get<Polynomial>(consts.spec);
    shape = Polynomial{1.0, q.r};
    factor = 2.0 * q.A;
  }
  DecaySpec data_shape = consts.spec;
  std::visit([](auto& s) { s.A = 1.0; }, data_shape);

  ordered_json j;
  j["iterate_weight"] = describe(shape);
  j["class_factor"] = factor;
  j["data"] = {{"weight", describe(data_shape)},
               {"class_amplitude", amplitude(consts.spec)},
               {"position_fit", fit_decay(data.position, data_shape)},
               {"velocity_fit", fit_decay(data.velocity, data_shape)}};
  ordered_json its = ordered_json::array();
  for (std::size_t s = 0; s < run.iterates.size(); ++s) {
    const Snapshot& snap = run.iterates[s];
    double fit = 0.0;
    for (int jn = 0; jn < snap.nodes(); ++jn) fit = std::max(fit, fit_decay(snap.field(jn), shape));
    its.push_back({{"k", run.first_stored + static_cast<int>(s)},
                   {"fit", fit},
                   {"ratio_to_class_factor", fit / factor}});
  }
  j["iterates"] = its;
  return j;
}

ordered_json versions_json() {
  ordered_json j;
  j["program"] = "qpbq 1.0.0";
#if defined(__clang__)
  j["compiler"] = fmt::format("clang {}.{}.{}", __clang_major__, __clang_minor__,
                              __clang_patchlevel__);
#elif defined(__GNUC__)
  j["compiler"] = fmt::format("gcc {}.{}.{}", __GNUC__, __GNUC_MINOR__, __GNUC_PATCHLEVEL__);
#else
  j["compiler"] = "unknown";
#endif
  j["cxx_standard"] = static_cast<long>(__cplusplus);
  j["fmt"] = FMT_VERSION;
  j["nlohmann_json"] = fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR,
                                   NLOHMANN_JSON_VERSION_MINOR, NLOHMANN_JSON_VERSION_PATCH);
#ifdef _OPENMP
  j["openmp"] = _OPENMP;
#else
  j["openmp"] = nullptr;
#endif
  return j;
}

void write_json(const fs::path& path, const ordered_json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

}  // namespace qpb
