#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qpb/field.hpp"

namespace qpb {

/// |c(n)|, |d(n)| <= A exp(-rho |n|), 0 < rho <= 1.
struct Exponential {
  double A = 1.0;
  double rho = 1.0;
};

/// |c(n)|, |d(n)| <= A (1 + |n|)^{-r}.
struct Polynomial {
  double A = 1.0;
  double r = 5.0;
};

using DecaySpec = std::variant<Exponential, Polynomial>;

enum class DecayPath {
  Solver,           // existence theory: rho in (0,1] or r > nu + 2
  ConvolutionOnly,  // weighted convolution inequality only: r > nu
};

/// Throws PreconditionError when the decay class is outside the hypotheses of `path`.
void validate(const DecaySpec& spec, int nu, DecayPath path);

double amplitude(const DecaySpec& spec);
std::string describe(const DecaySpec& spec);

/// exp(-rho |n|) or (1 + |n|)^{-r}; the amplitude A is not applied.
double weight_at_norm(const DecaySpec& spec, int norm);
inline double weight(const DecaySpec& spec, std::span<const int> n) {
  return weight_at_norm(spec, l1_norm(n));
}

/// Number of lattice points with |m| = k in Z^nu (exact).
std::uint64_t shell_count(int nu, int k);

/// Monomial coefficients q_i with shell_count(nu, k) = sum_i q_i (k + 1)^i for k >= 1.
std::vector<double> shell_polynomial(int nu);

/// Rigorous bracket [lower, upper] of sum_{j >= a} j^{-s}, s > 1, a >= 1.
struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
};
Bracket power_tail_bracket(double s, double a);

struct LatticeZetaSum {
  double value = 0.0;       // partial sum + midpoint of the tail bracket
  double partial = 0.0;     // sum over |m| <= shells
  double tail_error = 0.0;  // |true - value| <= tail_error
  int shells = 0;
};

/// H(r; nu) = sum_{m in Z^nu} (1 + |m|)^{-r}, certified to rel_tol.
/// Throws PreconditionError if r <= nu, or if rel_tol is not met within max_shells.
LatticeZetaSum lattice_zeta(double r, int nu, double rel_tol = 1e-10,
                            int max_shells = 1 << 20);

struct ExponentialConstants {
  double b_rho = 0.0;        // (6/rho)^nu
  double b_tilde_rho = 0.0;  // (12/rho)^nu
  double M = 0.0;            // max(1, A b_rho), also M_rho for p >= 3
  double B = 0.0;            // 2M, also B_rho
  double L = 0.0;            // 1/(5M)
  std::optional<double> L_p_rho;  // 1/(p 2^{p+3} M^{p-1}), p >= 3 only
  // Partial sums over |m| <= 10^6 of exp(-rho|m|/2) and exp(-rho|m|/4),
  // checked against 6/rho and 12/rho.
  double one_dim_half_sum = 0.0;
  double one_dim_quarter_sum = 0.0;
  bool one_dim_checks_pass = false;
};

struct PolynomialConstants {
  double H_r_nu = 0.0;
  double H_tail_error = 0.0;
  int H_shells = 0;
  double K_r_nu = 0.0;  // 2^{r+1} H
  double M_r = 0.0;     // max(1, A K), also M_{p,r}
  double L_r = 0.0;     // 1/(5 M_r)
  std::optional<double> L_p_r;
};

struct ConstantsReport {
  DecaySpec spec;
  int nu = 0;
  int p = 2;
  std::variant<ExponentialConstants, PolynomialConstants> values;

  const ExponentialConstants* exponential() const {
    return std::get_if<ExponentialConstants>(&values);
  }
  const PolynomialConstants* polynomial() const {
    return std::get_if<PolynomialConstants>(&values);
  }

  /// L, L_r (p = 2) or L_{p,rho}, L_{p,r} (p >= 3).
  double proven_horizon() const;
  /// Uniform bound |c_k(t,n)| <= factor * decay(n): B e^{-rho|n|/2} or 2A (1+|n|)^{-r}.
  double uniform_bound(int norm) const;
};

/// Every explicit constant for the given decay class, dimension and power.
/// Polynomial specs need r > nu; p >= 2.
ConstantsReport constants(const DecaySpec& spec, int nu, int p = 2);

/// Partial sum sum_{|m| <= terms} exp(-s |m|) over Z.
double one_dim_exp_sum(double s, int terms);

/// sup_n (1 + |n|)^r |f(n)| over the ball.
double norm_Xr(const LatticeField& f, double r);
/// sum_n exp(s |n|) |f(n)| over the ball.
double norm_Ys(const LatticeField& f, double s);

/// Smallest A with |f(n)| <= A * weight(n) on the ball (the amplitude of `shape` is ignored).
double fit_decay(const LatticeField& f, const DecaySpec& shape);

/// Upper bound on sum_{|n| > N} A * weight(n) over Z^nu.
/// Throws PreconditionError for a polynomial class with r <= nu.
double tail_bound(const DecaySpec& spec, int nu, double A, int N);

}  // namespace qpb
