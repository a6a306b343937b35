#include "qpb/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include <fmt/format.h>

namespace qpb {

int l1_norm(std::span<const int> n) {
  int s = 0;
  for (int v : n) s += std::abs(v);
  return s;
}

std::string to_string(std::span<const int> n) {
  return fmt::format("({})", fmt::join(n, ","));
}

FrequencyVector::FrequencyVector(std::initializer_list<double> w)
    : FrequencyVector(std::vector<double>(w)) {}

FrequencyVector::FrequencyVector(std::vector<double> w) : omega_(std::move(w)) {
  if (omega_.empty()) throw PreconditionError("frequency vector must have nu >= 1 entries");
  for (double v : omega_) {
    if (!std::isfinite(v)) throw PreconditionError("frequency vector entries must be finite");
  }
}

double FrequencyVector::max_abs() const {
  double m = 0.0;
  for (double v : omega_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

void enumerate_rec(int nu, int depth, int budget, std::vector<int>& cur,
                   std::vector<int>& out) {
  if (depth == nu) {
    out.insert(out.end(), cur.begin(), cur.end());
    return;
  }
  for (int v = -budget; v <= budget; ++v) {
    cur[depth] = v;
    enumerate_rec(nu, depth + 1, budget - std::abs(v), cur, out);
  }
}

}  // namespace

std::uint64_t ball_cardinality(int nu, int radius) {
  // |ball| = sum_j 2^j C(nu, j) C(N, j)
  std::uint64_t total = 0;
  for (int j = 0; j <= std::min(nu, radius); ++j) {
    std::uint64_t cnu = 1, cn = 1;
    for (int i = 0; i < j; ++i) {
      cnu = cnu * static_cast<std::uint64_t>(nu - i) / static_cast<std::uint64_t>(i + 1);
      cn = cn * static_cast<std::uint64_t>(radius - i) / static_cast<std::uint64_t>(i + 1);
    }
    total += (std::uint64_t{1} << j) * cnu * cn;
  }
  return total;
}

std::shared_ptr<const Ball> Ball::make(int nu, int radius, std::size_t point_cap) {
  if (nu < 1) throw PreconditionError("ball dimension nu must be >= 1");
  if (radius < 0) throw PreconditionError("ball radius N must be >= 0");

  const std::uint64_t count = ball_cardinality(nu, radius);
  double box_slots = std::pow(2.0 * radius + 1.0, nu);
  if (count > point_cap || box_slots > static_cast<double>(point_cap)) {
    throw PreconditionError(fmt::format(
        "truncation ball nu={} N={} has {} points ({} lookup slots), cap is {}", nu,
        radius, count, box_slots, point_cap));
  }

  auto ball = std::shared_ptr<Ball>(new Ball());
  ball->nu_ = nu;
  ball->radius_ = radius;
  ball->coords_.reserve(count * static_cast<std::size_t>(nu));
  std::vector<int> cur(static_cast<std::size_t>(nu), 0);
  enumerate_rec(nu, 0, radius, cur, ball->coords_);

  const std::size_t n_points = ball->coords_.size() / static_cast<std::size_t>(nu);
  ball->strides_.resize(static_cast<std::size_t>(nu));
  std::int64_t stride = 1;
  for (int d = nu - 1; d >= 0; --d) {
    ball->strides_[static_cast<std::size_t>(d)] = stride;
    stride *= 2 * radius + 1;
  }
  ball->box_.assign(static_cast<std::size_t>(stride), 0);
  ball->norms_.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    auto p = ball->point(i);
    ball->norms_[i] = l1_norm(p);
    std::int64_t slot = 0;
    for (int d = 0; d < nu; ++d) slot += (p[d] + radius) * ball->strides_[d];
    ball->box_[static_cast<std::size_t>(slot)] = static_cast<std::uint32_t>(i + 1);
  }
  ball->negated_.resize(n_points);
  std::vector<int> neg(static_cast<std::size_t>(nu));
  for (std::size_t i = 0; i < n_points; ++i) {
    auto p = ball->point(i);
    for (int d = 0; d < nu; ++d) neg[d] = -p[d];
    ball->negated_[i] = ball->find(neg);
  }
  ball->zero_ = ball->find(std::vector<int>(static_cast<std::size_t>(nu), 0));
  return ball;
}

std::size_t Ball::find(std::span<const int> n) const {
  if (static_cast<int>(n.size()) != nu_) return npos;
  std::int64_t slot = 0;
  int norm = 0;
  for (int d = 0; d < nu_; ++d) {
    norm += std::abs(n[d]);
    if (norm > radius_) return npos;
    slot += (n[d] + radius_) * strides_[d];
  }
  const auto v = box_[static_cast<std::size_t>(slot)];
  return v == 0 ? npos : static_cast<std::size_t>(v - 1);
}

double theta(std::span<const int> n, const FrequencyVector& omega) {
  if (static_cast<int>(n.size()) != omega.nu()) {
    throw PreconditionError("lattice vector and frequency vector dimensions differ");
  }
  double s = 0.0;
  for (std::size_t d = 0; d < n.size(); ++d) s += n[d] * omega[d];
  return s;
}

KernelValue kernels_from_theta(double th) {
  KernelValue kv;
  kv.theta = th;
  const double th2 = th * th;
  kv.beta_n = th2 / (1.0 + th2);
  kv.omega_n = std::abs(th) / std::sqrt(1.0 + th2);
  return kv;
}

double propagator_G(const KernelValue& kv, double t) {
  return kv.omega_n == 0.0 ? 1.0 : std::cos(kv.omega_n * t);
}

double propagator_K(const KernelValue& kv, double t) {
  const double x = kv.omega_n * t;
  if (std::abs(x) < 1e-6) {
    const double x2 = x * x;
    return t * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
  }
  return std::sin(x) / kv.omega_n;
}

double propagator_Phi(const KernelValue& kv, double t) {
  if (kv.omega_n == 0.0) return 0.0;
  return kv.omega_n * std::sin(kv.omega_n * t);
}

SmallDivisorReport small_divisor_report(const FrequencyVector& omega, int radius,
                                        double threshold) {
  if (radius < 1) throw PreconditionError("small divisor report needs N >= 1");
  auto ball = Ball::make(omega.nu(), radius);
  SmallDivisorReport rep;
  rep.threshold = threshold;
  for (std::size_t i = 0; i < ball->size(); ++i) {
    if (i == ball->zero_index()) continue;
    const double v = std::abs(theta(ball->point(i), omega));
    if (v < rep.min_abs_theta) {
      rep.min_abs_theta = v;
      rep.argmin = ball->vector(i);
    }
  }
  rep.warning = rep.min_abs_theta < threshold;
  return rep;
}

}  // namespace qpb
