#include "qpb/picard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

namespace qpb {

LatticeField Snapshot::field(int j) const {
  auto r = row(j);
  LatticeField f(ball_, std::vector<cplx>(r.begin(), r.end()));
  f.set_hermitian(hermitian_);
  return f;
}

void Snapshot::set_row(int j, const LatticeField& f) {
  require_same_ball(*ball_, f.ball(), "Snapshot::set_row");
  std::copy(f.values().begin(), f.values().end(), row(j).begin());
}

double Snapshot::sup_norm() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

double sup_diff(const Snapshot& a, const Snapshot& b) {
  return weighted_sup_diff(a, b, 0.0);
}

double weighted_sup_diff(const Snapshot& a, const Snapshot& b, double r) {
  require_same_ball(a.ball(), b.ball(), "sup_diff");
  if (a.nodes() != b.nodes()) throw PreconditionError("sup_diff: grids differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.modes(); ++i) {
    const double w = r == 0.0 ? 1.0 : std::pow(1.0 + a.ball().norm(i), r);
    for (int j = 0; j < a.nodes(); ++j) m = std::max(m, w * std::abs(a(j, i) - b(j, i)));
  }
  return m;
}

void InitialData::validate(double tol) const {
  require_same_ball(position.ball(), velocity.ball(), "initial data");
  if (position.hermitian() && position.hermitian_defect() > tol) {
    throw PreconditionError("initial positions are flagged Hermitian but are not");
  }
  if (velocity.hermitian() && velocity.hermitian_defect() > tol) {
    throw PreconditionError("initial velocities are flagged Hermitian but are not");
  }
}

InitialData boundary_data(const BallPtr& ball, const DecaySpec& spec) {
  LatticeField c(ball);
  const double A = amplitude(spec);
  for (std::size_t i = 0; i < ball->size(); ++i) c[i] = A * weight_at_norm(spec, ball->norm(i));
  c.set_hermitian(true);
  return {c, c};
}

InitialData zero_data(const BallPtr& ball) {
  LatticeField z(ball);
  z.set_hermitian(true);
  return {z, z};
}

InitialData random_data(const BallPtr& ball, const DecaySpec& spec, std::uint64_t seed,
                        bool hermitian) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double A = amplitude(spec);
  auto fill = [&](LatticeField& f) {
    for (std::size_t i = 0; i < ball->size(); ++i) {
      const double cap = A * weight_at_norm(spec, ball->norm(i));
      const std::size_t j = ball->negated(i);
      if (!hermitian) {
        f[i] = std::polar(cap * unit(rng), 2.0 * M_PI * unit(rng));
      } else if (i == j) {
        f[i] = cap * (2.0 * unit(rng) - 1.0);
      } else if (i < j) {
        f[i] = std::polar(cap * unit(rng), 2.0 * M_PI * unit(rng));
        f[j] = std::conj(f[i]);
      }
    }
    f.set_hermitian(hermitian);
  };
  InitialData d{LatticeField(ball), LatticeField(ball)};
  fill(d.position);
  fill(d.velocity);
  return d;
}

PicardEngine::PicardEngine(InitialData data, TimeGrid grid, FrequencyVector omega,
                           PicardOptions opts)
    : data_(std::move(data)),
      grid_(grid),
      omega_(std::move(omega)),
      opts_(opts),
      quad_(grid_, opts.quadrature),
      conv_(data_.position.ball_ptr(), opts.power) {
  data_.validate();
  const Ball& ball = *data_.position.ball_ptr();
  if (ball.nu() != omega_.nu()) {
    throw PreconditionError(fmt::format("ball dimension {} differs from omega dimension {}",
                                        ball.nu(), omega_.nu()));
  }
  kernels_.resize(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) kernels_[i] = kernels(ball.point(i), omega_);

  const std::size_t nodes = static_cast<std::size_t>(grid_.nodes());
  if (nodes * ball.size() <= opts_.kernel_table_cap) {
    phi_table_.resize(nodes * ball.size());
    for (std::size_t i = 0; i < ball.size(); ++i) {
      for (std::size_t lag = 0; lag < nodes; ++lag) {
        phi_table_[i * nodes + lag] = propagator_Phi(kernels_[i], grid_.node(static_cast<int>(lag)));
      }
    }
  }

  linear_ = Snapshot(data_.position.ball_ptr(), grid_.nodes());
  for (int j = 0; j < grid_.nodes(); ++j) {
    const double t = grid_.node(j);
    for (std::size_t i = 0; i < ball.size(); ++i) {
      linear_(j, i) = propagator_G(kernels_[i], t) * data_.position[i] +
                      propagator_K(kernels_[i], t) * data_.velocity[i];
    }
  }
  linear_.set_hermitian(data_.hermitian());
}

double PicardEngine::phi(std::size_t mode, int lag) const {
  if (!phi_table_.empty()) {
    return phi_table_[mode * static_cast<std::size_t>(grid_.nodes()) +
                      static_cast<std::size_t>(lag)];
  }
  return propagator_Phi(kernels_[mode], grid_.node(lag));
}

Snapshot PicardEngine::nonlinearity(const Snapshot& prev) const {
  require_same_ball(prev.ball(), *ball(), "picard_step");
  if (prev.nodes() != grid_.nodes()) {
    throw PreconditionError(fmt::format("picard_step: snapshot has {} nodes, grid has {}",
                                        prev.nodes(), grid_.nodes()));
  }
  Snapshot S(ball(), grid_.nodes());
  const bool par = opts_.execution == Execution::Parallel;
  const int nodes = grid_.nodes();
#pragma omp parallel for schedule(dynamic) if (par)
  for (int j = 0; j < nodes; ++j) {
    S.set_row(j, conv_.apply(prev.field(j), Execution::Serial));
  }
  return S;
}

Snapshot PicardEngine::step(const Snapshot& prev) const {
  const Snapshot S = nonlinearity(prev);
  const std::size_t modes = ball()->size();
  const int nodes = grid_.nodes();
  Snapshot next(ball(), nodes);
  const bool par = opts_.execution == Execution::Parallel;
  const auto total = static_cast<std::int64_t>(modes) * nodes;

#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t flat = 0; flat < total; ++flat) {
    const int j = static_cast<int>(flat / static_cast<std::int64_t>(modes));
    const std::size_t i = static_cast<std::size_t>(flat % static_cast<std::int64_t>(modes));
    if (kernels_[i].omega_n == 0.0) {
      next(j, i) = linear_(j, i);
      continue;
    }
    const auto w = quad_.weights(j);
    cplx acc{0.0, 0.0};
    for (int l = 0; l <= j; ++l) acc += (w[l] * phi(i, j - l)) * S(l, i);
    next(j, i) = linear_(j, i) - acc;
  }
  next.set_hermitian(prev.hermitian() && data_.hermitian());
  return next;
}

Snapshot linear_solution(const InitialData& data, const TimeGrid& grid,
                         const FrequencyVector& omega) {
  return PicardEngine(data, grid, omega).linear();
}

Snapshot picard_step(const Snapshot& prev, const InitialData& data, const TimeGrid& grid,
                     const FrequencyVector& omega, int p, QuadratureRule rule) {
  PicardOptions opts;
  opts.power = p;
  opts.quadrature = rule;
  return PicardEngine(data, grid, omega, opts).step(prev);
}

const Snapshot& PicardRun::iterate(int k) const {
  if (!has_iterate(k)) {
    throw PreconditionError(fmt::format(
        "iterate {} not retained (stored {}..{}); enable history", k, first_stored,
        first_stored + static_cast<int>(iterates.size()) - 1));
  }
  return iterates[static_cast<std::size_t>(k - first_stored)];
}

PicardRun iterate(const PicardEngine& engine, const IterateOptions& opts) {
  if (opts.max_k < 1) throw PreconditionError("max_k must be >= 1");
  if (!(opts.tol >= 0.0)) throw PreconditionError("tol must be >= 0");
  PicardRun run;
  run.grid = engine.grid();
  run.power = engine.options().power;
  run.started_from_linear = !opts.initial_guess.has_value();
  run.iterates.push_back(opts.initial_guess ? *opts.initial_guess : engine.linear());

  for (int k = 1; k <= opts.max_k; ++k) {
    Snapshot next = engine.step(run.iterates.back());
    IterationDiff d;
    d.k = k;
    d.sup = sup_diff(next, run.iterates.back());
    d.weighted = opts.diff_r == 0.0 ? d.sup : weighted_sup_diff(next, run.iterates.back(), opts.diff_r);
    run.diffs.push_back(d);
    run.iterates.push_back(std::move(next));
    if (!opts.keep_history && run.iterates.size() > 2) {
      run.iterates.erase(run.iterates.begin());
      ++run.first_stored;
    }
    run.last_k = k;
    if (d.sup < opts.tol) {
      run.converged = true;
      if (!opts.run_all) break;
    }
  }
  return run;
}

PicardRun iterate(const InitialData& data, const TimeGrid& grid, const FrequencyVector& omega,
                  int p, int max_k, double tol) {
  PicardOptions po;
  po.power = p;
  IterateOptions io;
  io.max_k = max_k;
  io.tol = tol;
  return iterate(PicardEngine(data, grid, omega, po), io);
}

namespace {

void require_proven_horizon(const PicardRun& run, const ConstantsReport& consts) {
  if (consts.p != run.power) {
    throw PreconditionError(fmt::format("constants computed for p = {}, run uses p = {}",
                                        consts.p, run.power));
  }
  const double L = consts.proven_horizon();
  if (run.grid.horizon > L * (1.0 + 1e-12)) {
    throw PreconditionError(fmt::format(
        "horizon {:.17g} exceeds the proven interval [0, L] with L = {:.17g}",
        run.grid.horizon, L));
  }
}

void record(BoundCheckReport& rep, double value, double bound, double rel_slack, double floor,
            int k, int j, const Ball& ball, std::size_t i) {
  ++rep.checked;
  const double margin = bound > 0.0 ? value / bound : (value > 0.0 ? HUGE_VAL : 0.0);
  if (margin > rep.worst_margin || rep.worst_k < 0) {
    if (margin >= rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_k = k;
      rep.worst_j = j;
      rep.worst_n = ball.vector(i);
    }
  }
  if (value > bound * (1.0 + rel_slack) + floor) ++rep.violations;
}

double power_over_factorial(double x, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v *= x / i;
  return v;
}

}  // namespace

BoundCheckReport check_uniform_bound(const PicardRun& run, const ConstantsReport& consts,
                                     double rel_slack) {
  require_proven_horizon(run, consts);
  BoundCheckReport rep;
  rep.name = "uniform_bound";
  if (run.iterates.empty()) return rep;
  const Ball& ball = run.iterates.front().ball();
  std::vector<double> bound(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) bound[i] = consts.uniform_bound(ball.norm(i));

  for (std::size_t s = 0; s < run.iterates.size(); ++s) {
    const int k = run.first_stored + static_cast<int>(s);
    const Snapshot& snap = run.iterates[s];
    for (int j = 0; j < snap.nodes(); ++j) {
      for (std::size_t i = 0; i < ball.size(); ++i) {
        record(rep, std::abs(snap(j, i)), bound[i], rel_slack, 0.0, k, j, ball, i);
      }
    }
  }
  rep.passed = rep.violations == 0;
  if (!run.started_from_linear) rep.note = "iteration did not start from the linear solution";
  return rep;
}

double cauchy_bound_value(const ConstantsReport& consts, int k, double t, int norm) {
  if (consts.p != 2) throw PreconditionError("the factorial difference bound is stated for p = 2");
  if (k < 1) throw PreconditionError("difference bounds start at k = 1");
  if (const auto* e = consts.exponential()) {
    const double bb = e->B * e->b_tilde_rho;
    const double rho = std::get<Exponential>(consts.spec).rho;
    return 0.5 * bb * power_over_factorial(2.0 * bb * t, k) * std::exp(-0.25 * rho * norm);
  }
  const auto& poly = std::get<Polynomial>(consts.spec);
  const double K = consts.polynomial()->K_r_nu;
  return poly.A * power_over_factorial(4.0 * poly.A * K * t, k) * std::pow(1.0 + norm, -poly.r);
}

BoundCheckReport check_cauchy_bound(const PicardRun& run, const ConstantsReport& consts,
                                    double rel_slack) {
  BoundCheckReport rep;
  rep.name = "cauchy_bound";
  if (run.iterates.size() < 2) throw PreconditionError("cauchy bound needs >= 2 iterates");
  if (consts.p != run.power) {
    throw PreconditionError(fmt::format("constants computed for p = {}, run uses p = {}",
                                        consts.p, run.power));
  }
  if (!run.started_from_linear) {
    rep.applicable = false;
    rep.note = "iteration did not start from the linear solution";
    return rep;
  }
  if (run.grid.horizon > consts.proven_horizon() * (1.0 + 1e-12)) {
    rep.applicable = false;
    rep.note = "horizon lies outside the proven interval";
    return rep;
  }
  const Ball& ball = run.iterates.front().ball();
  const double eps = std::numeric_limits<double>::epsilon();
  const int k_first = std::max(1, run.first_stored + 1);
  const int k_last = run.first_stored + static_cast<int>(run.iterates.size()) - 1;

  if (run.power == 2) {
    for (int k = k_first; k <= k_last; ++k) {
      const Snapshot& cur = run.iterate(k);
      const Snapshot& prev = run.iterate(k - 1);
      for (int j = 0; j < cur.nodes(); ++j) {
        const double t = run.grid.node(j);
        for (std::size_t i = 0; i < ball.size(); ++i) {
          const double floor = 8.0 * eps * std::max(std::abs(cur(j, i)), std::abs(prev(j, i)));
          record(rep, std::abs(cur(j, i) - prev(j, i)), cauchy_bound_value(consts, k, t, ball.norm(i)),
                 rel_slack, floor, k, j, ball, i);
        }
      }
    }
    rep.passed = rep.violations == 0;
    return rep;
  }

  // p >= 3: contraction factor 1/16 of the fixed-point map on the invariant ball.
  std::vector<double> norm_weight(ball.size());
  if (consts.exponential()) {
    const double rho = std::get<Exponential>(consts.spec).rho;
    for (std::size_t i = 0; i < ball.size(); ++i) norm_weight[i] = std::exp(0.5 * rho * ball.norm(i));
  } else {
    const double r = std::get<Polynomial>(consts.spec).r;
    for (std::size_t i = 0; i < ball.size(); ++i) norm_weight[i] = std::pow(1.0 + ball.norm(i), r);
  }
  const bool l1 = consts.exponential() != nullptr;
  auto slice_norm = [&](const Snapshot& a, const Snapshot* b, int j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < ball.size(); ++i) {
      const double v = norm_weight[i] * std::abs(b ? a(j, i) - (*b)(j, i) : a(j, i));
      acc = l1 ? acc + v : std::max(acc, v);
    }
    return acc;
  };
  auto sup_over_t = [&](const Snapshot& a, const Snapshot* b) {
    double m = 0.0;
    for (int j = 0; j < a.nodes(); ++j) m = std::max(m, slice_norm(a, b, j));
    return m;
  };
  for (int k = std::max(2, k_first); k <= k_last; ++k) {
    const double dk = sup_over_t(run.iterate(k), &run.iterate(k - 1));
    const double dprev = sup_over_t(run.iterate(k - 1), &run.iterate(k - 2));
    const double floor = 8.0 * eps * sup_over_t(run.iterate(k), nullptr);
    record(rep, dk, dprev / 16.0, rel_slack, floor, k, -1, ball, ball.zero_index());
  }
  rep.note = "contraction factor 1/16 in the class norm";
  if (rep.checked == 0) {
    rep.applicable = false;
    rep.note = "contraction check needs three consecutive iterates";
  }
  rep.passed = rep.violations == 0;
  return rep;
}

std::vector<cplx> reconstruct_u(const LatticeField& f, const FrequencyVector& omega,
                                std::span<const double> x_samples) {
  std::vector<double> th(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) th[i] = theta(f.ball().point(i), omega);
  std::vector<cplx> u(x_samples.size());
  for (std::size_t s = 0; s < x_samples.size(); ++s) {
    cplx acc{};
    for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * std::polar(1.0, th[i] * x_samples[s]);
    u[s] = acc;
  }
  return u;
}

std::vector<cplx> reconstruct_u(const Snapshot& snap, const FrequencyVector& omega,
                                int t_index, std::span<const double> x_samples) {
  return reconstruct_u(snap.field(t_index), omega, x_samples);
}

}  // namespace qpb
