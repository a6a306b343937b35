#include "qpb/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace qpb {

namespace {

constexpr std::size_t kMaxNu = 16;

struct DiffScratch {
  int buf[kMaxNu];
};

}  // namespace

LatticeField convolve_onto(const LatticeField& a, const LatticeField& b, BallPtr target,
                           Execution exec) {
  const Ball& ba = a.ball();
  const Ball& bb = b.ball();
  if (ba.nu() != bb.nu() || ba.nu() != target->nu()) {
    throw PreconditionError("convolution operands live in different dimensions");
  }
  const int nu = ba.nu();
  if (static_cast<std::size_t>(nu) > kMaxNu) throw PreconditionError("nu too large");

  LatticeField out(target);
  const auto n_out = static_cast<std::int64_t>(target->size());
  const std::size_t n_b = bb.size();
  const bool par = exec == Execution::Parallel;

#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t io = 0; io < n_out; ++io) {
    const auto n = target->point(static_cast<std::size_t>(io));
    DiffScratch s;
    cplx acc{0.0, 0.0};
    for (std::size_t ix = 0; ix < n_b; ++ix) {
      const auto x = bb.point(ix);
      for (int d = 0; d < nu; ++d) s.buf[d] = n[d] - x[d];
      const auto ia = ba.find(std::span<const int>(s.buf, static_cast<std::size_t>(nu)));
      if (ia == Ball::npos) continue;
      acc += a[ia] * b[ix];
    }
    out[static_cast<std::size_t>(io)] = acc;
  }
  return out;
}

LatticeField convolve2(const LatticeField& a, const LatticeField& b, Execution exec) {
  require_same_ball(a.ball(), b.ball(), "convolve2");
  const Ball& ball = a.ball();
  const int nu = ball.nu();
  if (static_cast<std::size_t>(nu) > kMaxNu) throw PreconditionError("nu too large");

  LatticeField out(a.ball_ptr());
  const auto n_pts = static_cast<std::int64_t>(ball.size());
  const bool par = exec == Execution::Parallel;

#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t io = 0; io < n_pts; ++io) {
    const auto n = ball.point(static_cast<std::size_t>(io));
    DiffScratch s;
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < ball.size(); ++i) {
      const auto n1 = ball.point(i);
      for (int d = 0; d < nu; ++d) s.buf[d] = n[d] - n1[d];
      const auto j = ball.find(std::span<const int>(s.buf, static_cast<std::size_t>(nu)));
      if (j == Ball::npos || j < i) continue;
      if (j == i) {
        acc += a[i] * b[i];
      } else {
        acc += a[i] * b[j] + a[j] * b[i];
      }
    }
    out[static_cast<std::size_t>(io)] = acc;
  }
  return out;
}

PowerConvolver::PowerConvolver(BallPtr ball, int p, BallPtr target)
    : ball_(std::move(ball)), target_(target ? std::move(target) : ball_), p_(p) {
  if (p_ < 2) throw PreconditionError("convolution power must be >= 2");
  if (target_->nu() != ball_->nu()) throw PreconditionError("target ball dimension differs");
  const int N = ball_->radius();
  const int R = target_->radius();
  // a^{*j} is only needed where (p - j) further ball points can bring it into the target.
  for (int j = 2; j <= p_ - 1; ++j) {
    const int radius = std::min(j * N, R + (p_ - j) * N);
    stages_.push_back(Ball::make(ball_->nu(), radius));
  }
}

LatticeField PowerConvolver::apply(const LatticeField& a, Execution exec) const {
  require_same_ball(a.ball(), *ball_, "convolve_p");
  if (p_ == 2 && target_->same_as(*ball_)) return convolve2(a, a, exec);
  LatticeField partial = a;
  for (const auto& stage : stages_) partial = convolve_onto(partial, a, stage, exec);
  return convolve_onto(partial, a, target_, exec);
}

LatticeField convolve_p(const LatticeField& a, int p, Execution exec) {
  return PowerConvolver(a.ball_ptr(), p).apply(a, exec);
}

LatticeField majorant_Em_field(int m, double rho, const BallPtr& ball, const BallPtr& target,
                               Execution exec) {
  if (m < 2) throw PreconditionError("E_m needs m >= 2");
  LatticeField w(ball);
  for (std::size_t i = 0; i < ball->size(); ++i) w[i] = std::exp(-0.5 * rho * ball->norm(i));
  return PowerConvolver(ball, m, target).apply(w, exec);
}

double majorant_Em(int m, double rho, std::span<const int> n, const BallPtr& ball) {
  if (m < 2) throw PreconditionError("E_m needs m >= 2");
  const int norm = l1_norm(n);
  if (norm > m * ball->radius()) return 0.0;
  auto target = Ball::make(ball->nu(), norm);
  auto field = majorant_Em_field(m, rho, ball, target);
  return field.at(n).real();
}

double algebra_ratio(const LatticeField& f, const LatticeField& g, double r, double K,
                     Execution exec) {
  const double nf = norm_Xr(f, r);
  const double ng = norm_Xr(g, r);
  if (nf == 0.0 || ng == 0.0) return 0.0;
  LatticeField af(f.ball_ptr()), ag(g.ball_ptr());
  for (std::size_t i = 0; i < f.size(); ++i) {
    af[i] = std::abs(f[i]);
    ag[i] = std::abs(g[i]);
  }
  const auto conv = convolve2(af, ag, exec);
  return norm_Xr(conv, r) / (K * nf * ng);
}

WeightedConvolutionReport verify_weighted_convolution(double r, int nu, int N, int trials,
                                                      std::uint64_t seed, Execution exec) {
  const auto consts = constants(Polynomial{1.0, r}, nu, 2);
  const double K = consts.polynomial()->K_r_nu;
  auto ball = Ball::make(nu, N);

  WeightedConvolutionReport rep;
  rep.r = r;
  rep.nu = nu;
  rep.N = N;
  rep.K_r_nu = K;
  rep.trials = trials;

  LatticeField w(ball);
  for (std::size_t i = 0; i < ball->size(); ++i) w[i] = std::pow(1.0 + ball->norm(i), -r);
  const auto ww = convolve2(w, w, exec);
  for (std::size_t i = 0; i < ball->size(); ++i) {
    const double ratio = ww[i].real() / (K * w[i].real());
    if (ratio > rep.pointwise_max_ratio) {
      rep.pointwise_max_ratio = ratio;
      rep.pointwise_worst_n = ball->vector(i);
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(0.0, 2.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  for (int t = 0; t < trials; ++t) {
    LatticeField f(ball), g(ball);
    for (std::size_t i = 0; i < ball->size(); ++i) {
      f[i] = std::polar(mag(rng) * w[i].real(), phase(rng));
      g[i] = std::polar(mag(rng) * w[i].real(), phase(rng));
    }
    rep.algebra_max_ratio = std::max(rep.algebra_max_ratio, algebra_ratio(f, g, r, K, exec));
  }
  rep.pointwise_pass = rep.pointwise_max_ratio < 1.0;
  rep.algebra_pass = rep.algebra_max_ratio < 1.0 + 1e-12;
  return rep;
}

namespace reference {

LatticeField convolve2(const LatticeField& a, const LatticeField& b) {
  require_same_ball(a.ball(), b.ball(), "reference::convolve2");
  const Ball& ball = a.ball();
  LatticeField out(a.ball_ptr());
  std::vector<int> diff(static_cast<std::size_t>(ball.nu()));
  for (std::size_t io = 0; io < ball.size(); ++io) {
    const auto n = ball.point(io);
    cplx acc{};
    for (std::size_t i = 0; i < ball.size(); ++i) {
      const auto n1 = ball.point(i);
      for (std::size_t d = 0; d < diff.size(); ++d) diff[d] = n[d] - n1[d];
      const auto j = ball.find(diff);
      if (j != Ball::npos) acc += a[i] * b[j];
    }
    out[io] = acc;
  }
  return out;
}

LatticeField convolve_p(const LatticeField& a, int p) {
  if (p < 2) throw PreconditionError("convolution power must be >= 2");
  const Ball& ball = a.ball();
  const std::size_t nu = static_cast<std::size_t>(ball.nu());
  LatticeField out(a.ball_ptr());
  std::vector<std::size_t> idx(static_cast<std::size_t>(p - 1), 0);
  std::vector<int> last(nu);
  for (std::size_t io = 0; io < ball.size(); ++io) {
    const auto n = ball.point(io);
    std::fill(idx.begin(), idx.end(), 0);
    cplx acc{};
    while (true) {
      cplx prod{1.0, 0.0};
      for (std::size_t d = 0; d < nu; ++d) last[d] = n[d];
      for (auto i : idx) {
        prod *= a[i];
        const auto x = ball.point(i);
        for (std::size_t d = 0; d < nu; ++d) last[d] -= x[d];
      }
      const auto j = ball.find(last);
      if (j != Ball::npos) acc += prod * a[j];
      // odometer over (p-1)-tuples
      std::size_t pos = 0;
      while (pos < idx.size() && ++idx[pos] == ball.size()) idx[pos++] = 0;
      if (pos == idx.size()) break;
    }
    out[io] = acc;
  }
  return out;
}

}  // namespace reference

}  // namespace qpb
