#include "qpb/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "qpb/config.hpp"
#include "qpb/convolution.hpp"
#include "qpb/io.hpp"
#include "qpb/oracle.hpp"
#include "qpb/picard.hpp"
#include "qpb/trees.hpp"

namespace qpb {

namespace fs = std::filesystem;

namespace {

RunConfig read_config(const CommandOptions& opts) {
  RunConfig cfg = opts.config_path ? load_config(*opts.config_path) : RunConfig{};
  if (opts.output_dir) cfg.output_dir = *opts.output_dir;
  return cfg;
}

struct Problem {
  RunConfig cfg;
  DecaySpec spec;
  FrequencyVector omega;
  ConstantsReport consts;
  BallPtr ball;
  InitialData data;
  double proven = 0.0;
  double horizon = 0.0;
  bool outside = false;
  SmallDivisorReport divisors;
};

Problem prepare(const CommandOptions& opts) {
  Problem pb;
  pb.cfg = read_config(opts);
  const RunConfig& c = pb.cfg;
  validate_for_solver(c);
  pb.spec = c.decay_spec();
  pb.omega = c.frequencies();
  try {
    pb.consts = constants(pb.spec, c.nu, c.power);
    pb.ball = Ball::make(c.nu, c.truncation_radius);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  pb.proven = pb.consts.proven_horizon();
  pb.horizon = c.horizon.value_or(pb.proven);
  if (pb.horizon > pb.proven * (1.0 + 1e-12)) {
    if (!opts.override_horizon) {
      throw ConfigError(fmt::format(
          "horizon {:.17g} exceeds the proven interval [0, L], L = {:.17g}; pass "
          "--override-horizon to run anyway",
          pb.horizon, pb.proven));
    }
    pb.outside = true;
  }
  if (c.truncation_radius > 0) pb.divisors = small_divisor_report(pb.omega, c.truncation_radius);

  switch (c.data) {
    case DataSource::Boundary: pb.data = boundary_data(pb.ball, pb.spec); break;
    case DataSource::Zero: pb.data = zero_data(pb.ball); break;
    case DataSource::Random: pb.data = random_data(pb.ball, pb.spec, c.seed, c.hermitian); break;
    case DataSource::File: {
      fs::path p = c.data_file;
      if (p.is_relative() && opts.config_path) p = fs::path(*opts.config_path).parent_path() / p;
      pb.data = read_data_csv(p, pb.ball, c.hermitian);
      try {
        pb.data.validate(1e-12 * std::max({1.0, pb.data.position.sup_norm(),
                                           pb.data.velocity.sup_norm()}));
      } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
      }
      DecaySpec unit = pb.spec;
      std::visit([](auto& s) { s.A = 1.0; }, unit);
      const double fit = std::max(fit_decay(pb.data.position, unit), fit_decay(pb.data.velocity, unit));
      if (fit > amplitude(pb.spec) * (1.0 + 1e-12)) {
        throw ConfigError(fmt::format("data need amplitude {:.17g} > A = {:.17g} for {}", fit,
                                      amplitude(pb.spec), describe(pb.spec)));
      }
      break;
    }
  }
  return pb;
}

PicardOptions picard_options(const Problem& pb, const CommandOptions& opts) {
  PicardOptions po;
  po.power = pb.cfg.power;
  po.quadrature = pb.cfg.quadrature;
  po.execution = opts.parallel ? Execution::Parallel : Execution::Serial;
  return po;
}

ordered_json horizon_json(const Problem& pb) {
  return {{"value", pb.horizon},
          {"proven", pb.proven},
          {"source", pb.cfg.horizon ? "config" : "theoretical"},
          {"outside_proven_interval", pb.outside}};
}

BoundCheckReport simple_check(std::string name, double value, double limit, std::string note) {
  BoundCheckReport r;
  r.name = std::move(name);
  r.checked = 1;
  r.worst_margin = limit > 0.0 ? value / limit : value;
  r.passed = value <= limit;
  r.violations = r.passed ? 0 : 1;
  r.note = std::move(note);
  return r;
}

void print_check(std::ostream& out, const BoundCheckReport& r) {
  const char* status = !r.applicable ? "n/a " : (r.passed ? "PASS" : "FAIL");
  fmt::print(out, "  [{}] {:<22} checked={:<8} violations={:<4} worst={:.6g} {}\n", status,
             r.name, r.checked, r.violations, r.worst_margin, r.note);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kExitConfigError;
  } catch (const PreconditionError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kExitConfigError;
  }
}

}  // namespace

int cmd_solve(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const Problem pb = prepare(opts);
    const TimeGrid grid(pb.horizon, pb.cfg.time_steps);
    PicardEngine engine(pb.data, grid, pb.omega, picard_options(pb, opts));
    IterateOptions io;
    io.max_k = pb.cfg.max_k;
    io.tol = pb.cfg.tol;
    io.keep_history = true;
    if (const auto* q = std::get_if<Polynomial>(&pb.spec)) io.diff_r = q->r;
    const PicardRun run = iterate(engine, io);

    std::vector<BoundCheckReport> checks;
    if (!pb.outside) {
      checks.push_back(check_uniform_bound(run, pb.consts));
      checks.push_back(check_cauchy_bound(run, pb.consts));
    } else {
      for (const char* name : {"uniform_bound", "cauchy_bound"}) {
        BoundCheckReport r;
        r.name = name;
        r.applicable = false;
        r.note = "outside proven interval";
        checks.push_back(r);
      }
    }
    checks.push_back(simple_check("zero_mode", zero_mode_error(run, pb.data), 1e-14,
                                  "|c_k(t,0) - c(0) - t d(0)|, absolute"));

    const Snapshot& fin = run.final();
    if (pb.data.hermitian()) {
      double defect = 0.0;
      for (int j = 0; j < fin.nodes(); ++j) defect = std::max(defect, fin.field(j).hermitian_defect());
      checks.push_back(simple_check("hermitian_symmetry", defect,
                                    1e-12 * std::max(1.0, fin.sup_norm()),
                                    "max |c(-n) - conj c(n)|"));
    }

    const auto xs = default_x_samples(pb.omega);
    const int last = grid.steps;
    const auto ode = pde_residual(fin, grid, pb.omega, pb.cfg.power, last, xs);
    const LatticeField cl = fin.field(last);
    const LatticeField sl = PowerConvolver(pb.ball, pb.cfg.power).apply(cl);
    double scale = 0.0;
    for (std::size_t i = 0; i < pb.ball->size(); ++i) {
      const double th = theta(pb.ball->point(i), pb.omega);
      scale += (1.0 + th * th) * (std::abs(cl[i]) + std::abs(sl[i]));
    }
    checks.push_back(simple_check("pde_consistency", ode.max_abs, 1e-12 * std::max(1.0, scale),
                                  "coefficient residual with c_tt from the mode equations"));
    const int mid = grid.steps / 2;
    const auto cd = pde_residual(fin, grid, pb.omega, pb.cfg.power, mid, xs,
                                 {CttSource::CentralDifference, NonlinearScope::Ball});
    const auto full = pde_residual(fin, grid, pb.omega, pb.cfg.power, mid, xs,
                                   {CttSource::CentralDifference, NonlinearScope::Full});

    bool failed = false;
    for (const auto& c : checks) failed = failed || (c.applicable && !c.passed);

    const fs::path dir = pb.cfg.output_dir;
    fs::create_directories(dir);
    ordered_json outputs = ordered_json::array();
    const int width = std::max(2, static_cast<int>(std::to_string(run.last_k).size()));
    for (std::size_t s = 0; s < run.iterates.size(); ++s) {
      const int k = run.first_stored + static_cast<int>(s);
      const std::string name = fmt::format("coefficients_k{:0{}}.csv", k, width);
      write_coefficients_csv(dir / name, run.iterates[s], k, grid, pb.consts);
      outputs.push_back(name);
    }
    write_json(dir / "decay_fit.json", decay_fit_json(run, pb.data, pb.consts));
    outputs.push_back("decay_fit.json");

    ordered_json m;
    m["command"] = "solve";
    m["versions"] = versions_json();
    m["config"] = config_json(pb.cfg);
    m["execution"] = opts.parallel ? "parallel" : "serial";
    m["constants"] = to_json(pb.consts);
    m["horizon"] = horizon_json(pb);
    m["ball"] = {{"nu", pb.ball->nu()}, {"radius", pb.ball->radius()}, {"modes", pb.ball->size()}};
    m["small_divisors"] = to_json(pb.divisors);
    ordered_json diffs = ordered_json::array();
    for (const auto& d : run.diffs) {
      diffs.push_back({{"k", d.k}, {"sup", d.sup}, {"weighted", d.weighted}});
    }
    m["iteration"] = {{"converged", run.converged},
                      {"last_k", run.last_k},
                      {"diff_weight_r", io.diff_r},
                      {"diffs", diffs}};
    ordered_json cj = ordered_json::array();
    for (const auto& c : checks) cj.push_back(to_json(c, grid));
    m["checks"] = cj;
    m["pde_residual"] = {{"ode_right_side_final", ode.max_abs},
                         {"central_difference_mid", cd.max_abs},
                         {"central_difference_mid_full_nonlinearity", full.max_abs},
                         {"mid_t", grid.node(mid)},
                         {"x_samples", xs.size()}};
    m["outputs"] = outputs;
    m["wall_clock"] = {{"file", "timing.json"}};
    m["status"] = failed ? "fail" : "pass";
    write_json(dir / "manifest.json", m);
    write_json(dir / "timing.json", {{"command", "solve"}, {"seconds", seconds_since(t0)}});

    fmt::print(out, "{} nu={} N={} modes={} p={}\n", describe(pb.spec), pb.cfg.nu,
               pb.cfg.truncation_radius, pb.ball->size(), pb.cfg.power);
    fmt::print(out, "horizon T = {:.17g} (proven L = {:.17g}){}\n", pb.horizon, pb.proven,
               pb.outside ? "  OUTSIDE PROVEN INTERVAL" : "");
    if (pb.cfg.nu == 1) fmt::print(out, "note: nu = 1 is the periodic special case\n");
    if (pb.divisors.warning) {
      fmt::print(out, "warning: small divisor |<n,omega>| = {:.3g} at n = {}\n",
                 pb.divisors.min_abs_theta, to_string(pb.divisors.argmin.coords()));
    }
    fmt::print(out, "iterations: k = {}, converged = {}, last diff = {:.3e}\n", run.last_k,
               run.converged, run.diffs.empty() ? 0.0 : run.diffs.back().sup);
    for (const auto& c : checks) print_check(out, c);
    fmt::print(out, "wrote {} files to {}\n", outputs.size() + 2, dir.string());
    return failed ? kExitCheckFailure : kExitPass;
  });
}

int cmd_oracle(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const Problem pb = prepare(opts);
    const TimeGrid grid(pb.horizon, pb.cfg.time_steps);
    const auto po = picard_options(pb, opts);
    PicardEngine engine(pb.data, grid, pb.omega, po);
    IterateOptions io;
    io.max_k = pb.cfg.max_k;
    io.tol = pb.cfg.tol;
    const PicardRun run = iterate(engine, io);

    const int substeps = pb.cfg.oracle_substeps;
    const double dt = grid.horizon / (static_cast<double>(grid.steps) * substeps);
    ordered_json report;
    report["command"] = "oracle";
    report["versions"] = versions_json();
    report["config"] = config_json(pb.cfg);
    report["constants"] = to_json(pb.consts);
    report["horizon"] = horizon_json(pb);
    report["picard"] = {{"converged", run.converged},
                        {"last_k", run.last_k},
                        {"last_diff", run.diffs.empty() ? 0.0 : run.diffs.back().sup}};
    bool passed = false;
    if (grid.horizon == 0.0) {
      report["oracle"] = {{"dt", 0.0}, {"steps", 0}, {"aborted", false}};
      report["comparison"] = {{"sup_diff", 0.0}, {"tol", pb.cfg.tol_compare}, {"passed", true}};
      passed = true;
    } else {
      const auto traj = rk4_integrate(pb.data, pb.omega, pb.cfg.power, grid.horizon, dt, substeps,
                                      po.execution);
      report["oracle"] = {{"method", "rk4"},
                          {"dt", dt},
                          {"steps", grid.steps * substeps},
                          {"aborted", traj.aborted},
                          {"last_good_time", traj.last_good_time},
                          {"message", traj.message}};
      if (traj.aborted) {
        fmt::print(err, "oracle aborted: {}\n", traj.message);
        report["comparison"] = {{"passed", false}};
      } else {
        const auto cmp = compare_picard_oracle(run, traj, pb.cfg.tol_compare);
        report["comparison"] = {
            {"sup_diff", cmp.sup_diff},
            {"worst_t", cmp.worst_j >= 0 ? grid.node(cmp.worst_j) : 0.0},
            {"worst_n", std::vector<int>(cmp.worst_n.coords().begin(), cmp.worst_n.coords().end())},
            {"tol", cmp.tol},
            {"passed", cmp.passed}};
        passed = cmp.passed;
        fmt::print(out, "picard k = {} (converged = {}), rk4 dt = {:.6g}: sup diff = {:.3e} (tol {:.1e})\n",
                   run.last_k, run.converged, dt, cmp.sup_diff, cmp.tol);
      }
    }
    const double zm = zero_mode_error(run, pb.data);
    report["zero_mode_error"] = zm;
    report["status"] = passed ? "pass" : "fail";
    const fs::path dir = pb.cfg.output_dir;
    fs::create_directories(dir);
    write_json(dir / "oracle_report.json", report);
    write_json(dir / "timing.json", {{"command", "oracle"}, {"seconds", seconds_since(t0)}});
    fmt::print(out, "{}\n", passed ? "PASS" : "FAIL");
    return passed ? kExitPass : kExitCheckFailure;
  });
}

namespace {

struct Row {
  std::string suite;
  std::string name;
  bool passed = false;
  double worst = 0.0;
  std::string detail;
};

void trees_suite(const RunConfig& c, std::vector<Row>& rows) {
  const int depth = c.tree_depth;
  std::vector<std::vector<double>> exact(c.xi.size());
  for (int k = 0; k <= depth; ++k) {
    const auto st = level_statistics(k, 2, c.xi);
    const double expect = tree_count(k, 2);
    const std::uint64_t bad = st.leaf_bound_violations + st.leaf_identity_violations +
                              st.branching_violations + st.denominator_violations;
    rows.push_back({"trees", fmt::format("index identities, T(k={})", k), bad == 0,
                    static_cast<double>(bad),
                    fmt::format("{} trees, max sigma {}, max ell {}", st.count, st.max_sigma,
                                st.max_ell)});
    rows.push_back({"trees", fmt::format("count T(k={})", k),
                    static_cast<double>(st.count) == expect, static_cast<double>(st.count),
                    fmt::format("recursion gives {:.0f}", expect)});
    for (std::size_t q = 0; q < c.xi.size(); ++q) exact[q].push_back(st.theta_exact[q]);
  }
  if (depth <= 3) {
    const auto trees = enumerate_trees(depth, 2);
    std::size_t bad = 0;
    for (const auto& t : trees) {
      const auto a = t->indices();
      const auto b = indices(*t);
      if (a.sigma != b.sigma || a.ell != b.ell || a.D != b.D || a.iota != b.iota) ++bad;
      if (static_cast<int>(flatten(*t).labels.size()) != a.sigma) ++bad;
    }
    rows.push_back({"trees", fmt::format("enumeration matches streaming, k={}", depth),
                    bad == 0 && trees.size() == static_cast<std::size_t>(tree_count(depth, 2)),
                    static_cast<double>(bad), fmt::format("{} trees enumerated", trees.size())});
  }
  for (int k = 0; k <= std::min(depth, 2); ++k) {
    const auto st = level_statistics(k, 3, {});
    const std::uint64_t bad = st.leaf_bound_violations + st.leaf_identity_violations +
                              st.branching_violations + st.denominator_violations;
    rows.push_back({"trees", fmt::format("index identities, T_3(k={})", k), bad == 0,
                    static_cast<double>(bad), fmt::format("{} trees", st.count)});
  }
  for (std::size_t q = 0; q < c.xi.size(); ++q) {
    const double xi = c.xi[q];
    if (xi < 0.0) continue;
    double worst = 0.0;
    bool ok = true;
    for (int k = 0; k <= depth; ++k) {
      const double up = theta_sum_upper(k, xi);
      worst = std::max(worst, exact[q][static_cast<std::size_t>(k)] / up);
      ok = ok && exact[q][static_cast<std::size_t>(k)] <= up;
      if (k > 0) ok = ok && exact[q][static_cast<std::size_t>(k)] >= exact[q][static_cast<std::size_t>(k - 1)];
    }
    rows.push_back({"trees", fmt::format("Theta exact <= upper, monotone, xi={}", xi), ok, worst,
                    "worst exact/upper"});
    if (xi <= 0.2) {
      const double up = theta_sum_upper(std::max(depth, 50), xi);
      rows.push_back({"trees", fmt::format("Theta upper <= 2, xi={}", xi), up <= 2.0, up / 2.0,
                      fmt::format("upper at k={} is {:.12g}", std::max(depth, 50), up)});
    }
  }
}

void convolution_suite(const RunConfig& c, bool parallel, std::vector<Row>& rows) {
  const double r = c.r;
  const auto rep = verify_weighted_convolution(r, c.nu, c.truncation_radius, c.trials, c.seed,
                                               parallel ? Execution::Parallel : Execution::Serial);
  rows.push_back({"convolution",
                  fmt::format("pointwise w*w <= K w, r={} nu={} N={}", r, c.nu, c.truncation_radius),
                  rep.pointwise_pass, rep.pointwise_max_ratio,
                  fmt::format("K = {:.10g}, worst n = {}", rep.K_r_nu,
                              to_string(rep.pointwise_worst_n.coords()))});
  rows.push_back({"convolution", fmt::format("X_r algebra, {} trials", rep.trials), rep.algebra_pass,
                  rep.algebra_max_ratio, "max ||f*g|| / (K ||f|| ||g||)"});
}

void constants_suite(const RunConfig& c, std::vector<Row>& rows) {
  const auto spec = c.decay_spec();
  const auto rep = constants(spec, c.nu, c.power);
  if (const auto* e = rep.exponential()) {
    const double rho = std::get<Exponential>(spec).rho;
    rows.push_back({"constants", fmt::format("sum exp(-rho|m|/2) < 6/rho, rho={}", rho),
                    e->one_dim_half_sum < 6.0 / rho, e->one_dim_half_sum * rho / 6.0,
                    fmt::format("partial sum {:.12g}", e->one_dim_half_sum)});
    rows.push_back({"constants", fmt::format("sum exp(-rho|m|/4) < 12/rho, rho={}", rho),
                    e->one_dim_quarter_sum < 12.0 / rho, e->one_dim_quarter_sum * rho / 12.0,
                    fmt::format("partial sum {:.12g}", e->one_dim_quarter_sum)});
    rows.push_back({"constants", "B = 2M, L = 1/(5M)", e->B == 2.0 * e->M && e->L == 1.0 / (5.0 * e->M),
                    e->L * 5.0 * e->M, fmt::format("M = {:.12g}, L = {:.12g}", e->M, e->L)});
  } else {
    const auto* q = rep.polynomial();
    const double r = std::get<Polynomial>(spec).r;
    rows.push_back({"constants", fmt::format("H(r={}, nu={}) certified", r, c.nu),
                    q->H_tail_error <= 1e-10 * q->H_r_nu, q->H_tail_error / q->H_r_nu,
                    fmt::format("H = {:.12g} over {} shells", q->H_r_nu, q->H_shells)});
    rows.push_back({"constants", "K = 2^(r+1) H, L_r = 1/(5 M_r)",
                    std::abs(q->K_r_nu - std::pow(2.0, r + 1.0) * q->H_r_nu) <= 1e-12 * q->K_r_nu &&
                        q->L_r == 1.0 / (5.0 * q->M_r),
                    q->L_r * 5.0 * q->M_r, fmt::format("K = {:.12g}", q->K_r_nu)});
  }
  rows.push_back({"constants", "proven horizon > 0", rep.proven_horizon() > 0.0,
                  rep.proven_horizon(), fmt::format("p = {}", c.power)});
}

}  // namespace

int cmd_verify(const std::string& suite, const CommandOptions& opts, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    if (suite != "trees" && suite != "convolution" && suite != "constants" && suite != "all") {
      throw ConfigError(fmt::format("unknown suite '{}' (trees, convolution, constants, all)", suite));
    }
    const RunConfig cfg = read_config(opts);
    if (cfg.nu < 1 || cfg.truncation_radius < 0 || cfg.trials < 0 || cfg.tree_depth < 0) {
      throw ConfigError("verify needs nu >= 1, truncation_radius >= 0, trials >= 0, tree_depth >= 0");
    }
    std::vector<Row> rows;
    if (suite == "trees" || suite == "all") trees_suite(cfg, rows);
    if (suite == "convolution" || suite == "all") convolution_suite(cfg, opts.parallel, rows);
    if (suite == "constants" || suite == "all") constants_suite(cfg, rows);

    bool ok = true;
    ordered_json arr = ordered_json::array();
    fmt::print(out, "{:<12} {:<48} {:<6} {:>14}  {}\n", "suite", "check", "status", "worst",
               "detail");
    for (const auto& r : rows) {
      ok = ok && r.passed;
      fmt::print(out, "{:<12} {:<48} {:<6} {:>14.6g}  {}\n", r.suite, r.name,
                 r.passed ? "PASS" : "FAIL", r.worst, r.detail);
      arr.push_back({{"suite", r.suite},
                     {"check", r.name},
                     {"passed", r.passed},
                     {"worst", r.worst},
                     {"detail", r.detail}});
    }
    if (opts.output_dir) {
      fs::create_directories(*opts.output_dir);
      ordered_json rep;
      rep["command"] = "verify";
      rep["suite"] = suite;
      rep["versions"] = versions_json();
      rep["config"] = config_json(cfg);
      rep["checks"] = arr;
      rep["status"] = ok ? "pass" : "fail";
      write_json(fs::path(*opts.output_dir) / "verify_report.json", rep);
    }
    return ok ? kExitPass : kExitCheckFailure;
  });
}

int cmd_trees(int k, int p, const std::vector<double>& xi, const CommandOptions& opts,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (k < 0) throw ConfigError("k must be >= 0");
    if (p < 2) throw ConfigError("p must be >= 2");
    for (double x : xi) {
      if (!(x >= 0.0)) throw ConfigError("xi values must be >= 0");
    }
    std::vector<LevelStatistics> levels;
    for (int j = 0; j <= k; ++j) levels.push_back(level_statistics(j, p, xi));

    std::string head = fmt::format("{:>3} {:>16} {:>9} {:>7} {:>8}", "k", "count", "max_sigma",
                                   "max_ell", "max_iota");
    for (double x : xi) head += fmt::format(" {:>18} {:>18}", fmt::format("exact({})", x),
                                            fmt::format("upper({})", x));
    fmt::print(out, "p = {}\n{}\n", p, head);
    ordered_json arr = ordered_json::array();
    for (const auto& st : levels) {
      std::string line = fmt::format("{:>3} {:>16} {:>9} {:>7} {:>8}", st.k, st.count,
                                     st.max_sigma, st.max_ell, st.max_iota);
      ordered_json th = ordered_json::array();
      for (std::size_t q = 0; q < xi.size(); ++q) {
        const bool has_upper = p == 2;
        const double up = has_upper ? theta_sum_upper(st.k, xi[q]) : 0.0;
        line += fmt::format(" {:>18.12g} {:>18}", st.theta_exact[q],
                            has_upper ? fmt::format("{:.12g}", up) : "n/a");
        th.push_back({{"xi", xi[q]},
                      {"exact", st.theta_exact[q]},
                      {"upper", has_upper ? ordered_json(up) : ordered_json(nullptr)}});
      }
      fmt::print(out, "{}\n", line);
      arr.push_back({{"k", st.k},
                     {"count", st.count},
                     {"max_sigma", st.max_sigma},
                     {"max_ell", st.max_ell},
                     {"max_iota", st.max_iota},
                     {"max_D", st.max_D},
                     {"identity_violations", st.leaf_bound_violations + st.leaf_identity_violations +
                                                 st.branching_violations + st.denominator_violations},
                     {"theta", th}});
    }
    if (opts.output_dir) {
      fs::create_directories(*opts.output_dir);
      write_json(fs::path(*opts.output_dir) / "trees.json",
                 {{"command", "trees"}, {"p", p}, {"levels", arr}});
    }
    return kExitPass;
  });
}

}  // namespace qpb
