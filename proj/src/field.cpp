#include "qpb/field.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace qpb {

LatticeField::LatticeField(BallPtr ball, std::vector<cplx> values)
    : ball_(std::move(ball)), values_(std::move(values)) {
  if (values_.size() != ball_->size()) {
    throw PreconditionError(fmt::format("field has {} values for a ball of {} points",
                                        values_.size(), ball_->size()));
  }
}

cplx LatticeField::at(std::span<const int> n) const {
  const auto i = ball_->find(n);
  return i == Ball::npos ? cplx{} : values_[i];
}

double LatticeField::hermitian_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    worst = std::max(worst, std::abs(values_[ball_->negated(i)] - std::conj(values_[i])));
  }
  return worst;
}

double LatticeField::sup_norm() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

double LatticeField::l1_norm() const {
  double s = 0.0;
  for (const auto& v : values_) s += std::abs(v);
  return s;
}

void require_same_ball(const Ball& a, const Ball& b, const char* what) {
  if (!a.same_as(b)) {
    throw PreconditionError(fmt::format("{}: ball mismatch (nu={}, N={}) vs (nu={}, N={})",
                                        what, a.nu(), a.radius(), b.nu(), b.radius()));
  }
}

}  // namespace qpb
