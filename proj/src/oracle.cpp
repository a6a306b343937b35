#include "qpb/oracle.hpp"

#include <cmath>

#include <fmt/format.h>

namespace qpb {

namespace {

bool finite(const LatticeField& f) {
  for (const auto& v : f.values()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

}  // namespace

Trajectory rk4_integrate(const InitialData& data, const FrequencyVector& omega, int p, double T,
                         double dt, int record_every, Execution exec) {
  data.validate();
  if (!(dt > 0.0) || !(T >= 0.0)) throw PreconditionError("rk4 needs dt > 0 and T >= 0");
  if (record_every < 1) throw PreconditionError("record_every must be >= 1");
  const double ratio = T / dt;
  const long steps = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio)) {
    throw PreconditionError(fmt::format("T / dt = {:.17g} is not an integer", ratio));
  }
  const BallPtr& ball = data.position.ball_ptr();
  if (ball->nu() != omega.nu()) throw PreconditionError("ball and omega dimensions differ");
  const std::size_t n = ball->size();
  std::vector<double> beta(n);
  for (std::size_t i = 0; i < n; ++i) beta[i] = kernels(ball->point(i), omega).beta_n;
  const PowerConvolver conv(ball, p);

  auto accel = [&](const LatticeField& c) {
    LatticeField a = conv.apply(c, exec);
    for (std::size_t i = 0; i < n; ++i) a[i] = beta[i] == 0.0 ? cplx{} : -beta[i] * (c[i] + a[i]);
    return a;
  };
  auto axpy = [&](const LatticeField& x, double h, const LatticeField& y) {
    LatticeField out(ball);
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + h * y[i];
    return out;
  };

  Trajectory traj;
  OdeState s{data.position, data.velocity};
  traj.times.push_back(0.0);
  traj.states.push_back(s);
  for (long step = 1; step <= steps; ++step) {
    const LatticeField& c = s.position;
    const LatticeField& v = s.velocity;
    const LatticeField k1c = v;
    const LatticeField k1v = accel(c);
    const LatticeField k2c = axpy(v, 0.5 * dt, k1v);
    const LatticeField k2v = accel(axpy(c, 0.5 * dt, k1c));
    const LatticeField k3c = axpy(v, 0.5 * dt, k2v);
    const LatticeField k3v = accel(axpy(c, 0.5 * dt, k2c));
    const LatticeField k4c = axpy(v, dt, k3v);
    const LatticeField k4v = accel(axpy(c, dt, k3c));
    OdeState next{LatticeField(ball), LatticeField(ball)};
    for (std::size_t i = 0; i < n; ++i) {
      next.position[i] = c[i] + dt / 6.0 * (k1c[i] + 2.0 * k2c[i] + 2.0 * k3c[i] + k4c[i]);
      next.velocity[i] = v[i] + dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    }
    const double t = T * static_cast<double>(step) / static_cast<double>(steps);
    if (!finite(next.position) || !finite(next.velocity)) {
      traj.aborted = true;
      traj.message = fmt::format("non-finite state at t = {:.17g}; last good time {:.17g}", t,
                                 traj.last_good_time);
      return traj;
    }
    next.position.set_hermitian(data.position.hermitian());
    next.velocity.set_hermitian(data.velocity.hermitian());
    s = std::move(next);
    traj.last_good_time = t;
    if (step % record_every == 0) {
      traj.times.push_back(t);
      traj.states.push_back(s);
    }
  }
  return traj;
}

OracleComparison compare_picard_oracle(const Snapshot& picard, const TimeGrid& grid,
                                       const Trajectory& oracle, double tol) {
  if (oracle.aborted) throw PreconditionError("oracle trajectory aborted: " + oracle.message);
  if (static_cast<int>(oracle.states.size()) != grid.nodes()) {
    throw PreconditionError(fmt::format("oracle has {} records, grid has {} nodes",
                                        oracle.states.size(), grid.nodes()));
  }
  OracleComparison out;
  out.tol = tol;
  const Ball& ball = picard.ball();
  for (int j = 0; j < grid.nodes(); ++j) {
    const auto& s = oracle.states[static_cast<std::size_t>(j)];
    require_same_ball(ball, s.position.ball(), "compare_picard_oracle");
    if (std::abs(oracle.times[static_cast<std::size_t>(j)] - grid.node(j)) >
        1e-12 * std::max(1.0, grid.horizon)) {
      throw PreconditionError("oracle records are not at the grid nodes");
    }
    for (std::size_t i = 0; i < ball.size(); ++i) {
      const double d = std::abs(picard(j, i) - s.position[i]);
      if (d > out.sup_diff || out.worst_j < 0) {
        out.sup_diff = std::max(out.sup_diff, d);
        out.worst_j = j;
        out.worst_n = ball.vector(i);
      }
    }
  }
  out.passed = out.sup_diff <= tol;
  return out;
}

OracleComparison compare_picard_oracle(const PicardRun& run, const Trajectory& oracle,
                                       double tol) {
  return compare_picard_oracle(run.final(), run.grid, oracle, tol);
}

std::vector<double> default_x_samples(const FrequencyVector& omega, int count) {
  const double C = omega.max_abs();
  if (!(C > 0.0)) throw PreconditionError("omega must be nonzero");
  std::vector<double> xs(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    xs[static_cast<std::size_t>(s)] = count == 1 ? 0.0 : 2.0 * M_PI / C * s / (count - 1);
  }
  return xs;
}

namespace {

std::vector<cplx> synthesize(std::span<const cplx> coeffs, std::span<const double> th,
                             std::span<const double> xs) {
  std::vector<cplx> u(xs.size());
  for (std::size_t s = 0; s < xs.size(); ++s) {
    cplx acc{};
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      if (coeffs[i] != cplx{}) acc += coeffs[i] * std::polar(1.0, th[i] * xs[s]);
    }
    u[s] = acc;
  }
  return u;
}

void require_interior(const TimeGrid& grid, int t_index) {
  if (t_index <= 0 || t_index >= grid.steps) {
    throw PreconditionError(fmt::format(
        "a time second difference needs an interior node, got {} of 0..{}", t_index, grid.steps));
  }
}

ResidualReport report_from(const std::vector<cplx>& R, std::span<const double> xs) {
  ResidualReport rep;
  rep.values.resize(R.size());
  for (std::size_t s = 0; s < R.size(); ++s) {
    rep.values[s] = std::abs(R[s]);
    if (rep.values[s] > rep.max_abs || s == 0) {
      rep.max_abs = std::max(rep.max_abs, rep.values[s]);
      rep.at_x = xs[s];
    }
  }
  return rep;
}

}  // namespace

ResidualReport pde_residual(const Snapshot& snap, const TimeGrid& grid,
                            const FrequencyVector& omega, int p, int t_index,
                            std::span<const double> x_samples, ResidualOptions opts) {
  if (t_index < 0 || t_index > grid.steps) throw PreconditionError("t_index outside the grid");
  if (snap.nodes() != grid.nodes()) throw PreconditionError("snapshot and grid differ");
  const BallPtr& ball = snap.ball_ptr();
  const LatticeField c = snap.field(t_index);
  const LatticeField s_ball = PowerConvolver(ball, p).apply(c);

  BallPtr target = ball;
  LatticeField s_scope = s_ball;
  if (opts.scope == NonlinearScope::Full) {
    target = Ball::make(ball->nu(), p * ball->radius());
    s_scope = PowerConvolver(ball, p, target).apply(c);
  }

  std::vector<cplx> ctt(ball->size());
  if (opts.ctt == CttSource::CentralDifference) {
    require_interior(grid, t_index);
    const double h = grid.spacing();
    for (std::size_t i = 0; i < ball->size(); ++i) {
      ctt[i] = (snap(t_index + 1, i) - 2.0 * snap(t_index, i) + snap(t_index - 1, i)) / (h * h);
    }
  } else {
    for (std::size_t i = 0; i < ball->size(); ++i) {
      const double b = kernels(ball->point(i), omega).beta_n;
      ctt[i] = b == 0.0 ? cplx{} : -b * (c[i] + s_ball[i]);
    }
  }

  std::vector<cplx> coeff(target->size());
  std::vector<double> th(target->size());
  for (std::size_t i = 0; i < target->size(); ++i) {
    const auto pt = target->point(i);
    th[i] = theta(pt, omega);
    const double t2 = th[i] * th[i];
    const auto bi = ball->find(pt);
    cplx lin{};
    if (bi != Ball::npos) lin = (1.0 + t2) * ctt[bi] + t2 * c[bi];
    coeff[i] = lin + t2 * s_scope[i];
  }
  return report_from(synthesize(coeff, th, x_samples), x_samples);
}

ResidualReport physical_residual(const Snapshot& snap, const TimeGrid& grid,
                                 const FrequencyVector& omega, int p, int t_index,
                                 std::span<const double> x_samples, double h_x) {
  require_interior(grid, t_index);
  if (!(h_x > 0.0)) throw PreconditionError("h_x must be > 0");
  const Ball& ball = snap.ball();
  std::vector<double> th(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) th[i] = theta(ball.point(i), omega);

  // stencil offsets in x: 0, +-h/2, +-h
  const double offs[5] = {-h_x, -0.5 * h_x, 0.0, 0.5 * h_x, h_x};
  std::vector<double> xs;
  xs.reserve(x_samples.size() * 5);
  for (double x : x_samples) {
    for (double o : offs) xs.push_back(x + o);
  }
  const auto um = synthesize(snap.row(t_index - 1), th, xs);
  const auto u0 = synthesize(snap.row(t_index), th, xs);
  const auto up = synthesize(snap.row(t_index + 1), th, xs);
  const double h = grid.spacing();

  auto dxx = [&](const std::vector<cplx>& f, std::size_t base) {
    const cplx coarse = (f[base + 4] - 2.0 * f[base + 2] + f[base]) / (h_x * h_x);
    const cplx fine =
        (f[base + 3] - 2.0 * f[base + 2] + f[base + 1]) / (0.25 * h_x * h_x);
    return (4.0 * fine - coarse) / 3.0;
  };

  std::vector<cplx> utt(xs.size()), upow(xs.size());
  for (std::size_t q = 0; q < xs.size(); ++q) {
    utt[q] = (up[q] - 2.0 * u0[q] + um[q]) / (h * h);
    cplx v{1.0, 0.0};
    for (int e = 0; e < p; ++e) v *= u0[q];
    upow[q] = v;
  }
  std::vector<cplx> R(x_samples.size());
  for (std::size_t s = 0; s < x_samples.size(); ++s) {
    const std::size_t base = 5 * s;
    R[s] = utt[base + 2] - dxx(u0, base) - dxx(utt, base) - dxx(upow, base);
  }
  return report_from(R, x_samples);
}

double zero_mode_error(const PicardRun& run, const InitialData& data) {
  const std::size_t z = data.position.ball().zero_index();
  double err = 0.0;
  for (const auto& snap : run.iterates) {
    for (int j = 0; j < snap.nodes(); ++j) {
      const cplx expect = data.position[z] + run.grid.node(j) * data.velocity[z];
      err = std::max(err, std::abs(snap(j, z) - expect));
    }
  }
  return err;
}

}  // namespace qpb
