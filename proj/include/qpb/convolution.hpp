#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qpb/decay.hpp"
#include "qpb/field.hpp"

namespace qpb {

/// Serial runs fix the reduction order for reproducibility. Parallel runs split
/// independent output points across OpenMP threads; each output keeps the
/// serial summation order, so the two agree bit for bit.
enum class Execution { Serial, Parallel };

/// out(n) = sum_{x in b's ball, n - x in a's ball} a(n - x) b(x) for n in target.
/// Summation runs over x in lexicographic order.
LatticeField convolve_onto(const LatticeField& a, const LatticeField& b, BallPtr target,
                           Execution exec = Execution::Serial);

/// Truncated binary convolution with inputs and output on one ball.
///
/// Pairs (n1, n2) with n1 + n2 = n are visited once each as an unordered pair,
/// n1 <= n2 in ball order, and contribute a(n1) b(n2) + a(n2) b(n1). Swapping
/// a and b therefore reproduces the result exactly.
LatticeField convolve2(const LatticeField& a, const LatticeField& b,
                       Execution exec = Execution::Serial);

/// p-fold self-convolution: sum over p-tuples of ball points adding to n, for n
/// in `target` (default: the input ball). Intermediate partial convolutions
/// live on enlarged balls so that no admissible tuple is dropped.
class PowerConvolver {
 public:
  PowerConvolver(BallPtr ball, int p, BallPtr target = nullptr);

  int power() const { return p_; }
  const BallPtr& target() const { return target_; }
  LatticeField apply(const LatticeField& a, Execution exec = Execution::Serial) const;

 private:
  BallPtr ball_;
  BallPtr target_;
  int p_;
  std::vector<BallPtr> stages_;  // ball for a^{*j}, j = 2 .. p-1
};

LatticeField convolve_p(const LatticeField& a, int p, Execution exec = Execution::Serial);

/// Truncated E_m(n): sum over m-tuples of ball points adding to n of
/// prod_j exp(-(rho/2)|n_j|). Zero when |n| > m N.
double majorant_Em(int m, double rho, std::span<const int> n, const BallPtr& ball);

/// E_m evaluated at every point of `target`.
LatticeField majorant_Em_field(int m, double rho, const BallPtr& ball, const BallPtr& target,
                               Execution exec = Execution::Serial);

struct WeightedConvolutionReport {
  double r = 0.0;
  int nu = 0;
  int N = 0;
  double K_r_nu = 0.0;
  // max_n sum_{n1+n2=n} w(n1) w(n2) / (K w(n)) over the ball
  double pointwise_max_ratio = 0.0;
  LatticeVector pointwise_worst_n;
  // max over trials of sup_n (1+|n|)^r (|f| * |g|)(n) / (K ||f|| ||g||)
  double algebra_max_ratio = 0.0;
  int trials = 0;
  bool pointwise_pass = false;  // ratio < 1
  bool algebra_pass = false;    // ratio < 1 + 1e-12
};

/// Checks the weighted convolution inequality on the truncated lattice, then
/// `trials` seeded random field pairs with X_r norms at most 2.
WeightedConvolutionReport verify_weighted_convolution(double r, int nu, int N, int trials,
                                                      std::uint64_t seed = 20240601,
                                                      Execution exec = Execution::Serial);

/// Algebra ratio for one pair; 0 for zero fields.
double algebra_ratio(const LatticeField& f, const LatticeField& g, double r, double K,
                     Execution exec = Execution::Serial);

namespace reference {

/// Literal definition: out(n) = sum_{n1 in ball, n - n1 in ball} a(n1) b(n - n1).
LatticeField convolve2(const LatticeField& a, const LatticeField& b);

/// Literal definition of the p-fold sum by enumeration of (p-1)-tuples.
LatticeField convolve_p(const LatticeField& a, int p);

}  // namespace reference

}  // namespace qpb
