#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "qpb/lattice.hpp"

namespace qpb {

using cplx = std::complex<double>;

/// Complex values indexed by the points of a truncation ball.
class LatticeField {
 public:
  LatticeField() = default;
  explicit LatticeField(BallPtr ball)
      : ball_(std::move(ball)), values_(ball_->size(), cplx{0.0, 0.0}) {}
  LatticeField(BallPtr ball, std::vector<cplx> values);

  const BallPtr& ball_ptr() const { return ball_; }
  const Ball& ball() const { return *ball_; }
  std::size_t size() const { return values_.size(); }

  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }
  /// Value at n, zero when n lies outside the ball.
  cplx at(std::span<const int> n) const;
  cplx at(const LatticeVector& n) const { return at(n.coords()); }

  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }

  // Declared symmetry f(-n) = conj(f(n)); see hermitian_defect for the check.
  bool hermitian() const { return hermitian_; }
  void set_hermitian(bool h) { hermitian_ = h; }

  /// max_n |f(-n) - conj(f(n))|.
  double hermitian_defect() const;
  double sup_norm() const;
  double l1_norm() const;

 private:
  BallPtr ball_;
  std::vector<cplx> values_;
  bool hermitian_ = false;
};

void require_same_ball(const Ball& a, const Ball& b, const char* what);

}  // namespace qpb
