#include "qpb/decay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace qpb {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  return c;
}

}  // namespace

void validate(const DecaySpec& spec, int nu, DecayPath path) {
  if (nu < 1) throw PreconditionError("nu must be >= 1");
  std::visit(overloaded{
                 [&](const Exponential& e) {
                   if (!(e.A > 0.0) || !std::isfinite(e.A))
                     throw PreconditionError("exponential class needs A > 0");
                   if (!(e.rho > 0.0 && e.rho <= 1.0))
                     throw PreconditionError(
                         fmt::format("exponential class needs 0 < rho <= 1, got {}", e.rho));
                 },
                 [&](const Polynomial& p) {
                   if (!(p.A > 0.0) || !std::isfinite(p.A))
                     throw PreconditionError("polynomial class needs A > 0");
                   const double need = path == DecayPath::Solver ? nu + 2.0 : double(nu);
                   if (!(p.r > need))
                     throw PreconditionError(fmt::format(
                         "polynomial class needs r > {} here (nu = {}), got r = {}", need, nu,
                         p.r));
                 },
             },
             spec);
}

double amplitude(const DecaySpec& spec) {
  return std::visit([](const auto& s) { return s.A; }, spec);
}

std::string describe(const DecaySpec& spec) {
  return std::visit(overloaded{
                        [](const Exponential& e) {
                          return fmt::format("exponential(A={}, rho={})", e.A, e.rho);
                        },
                        [](const Polynomial& p) {
                          return fmt::format("polynomial(A={}, r={})", p.A, p.r);
                        },
                    },
                    spec);
}

double weight_at_norm(const DecaySpec& spec, int norm) {
  return std::visit(overloaded{
                        [&](const Exponential& e) { return std::exp(-e.rho * norm); },
                        [&](const Polynomial& p) { return std::pow(1.0 + norm, -p.r); },
                    },
                    spec);
}

std::uint64_t shell_count(int nu, int k) {
  if (k == 0) return 1;
  // choose j nonzero coordinates, their signs, and a composition of k into j parts
  std::uint64_t total = 0;
  for (int j = 1; j <= std::min(nu, k); ++j) {
    std::uint64_t cnu = 1, ck = 1;
    for (int i = 0; i < j; ++i)
      cnu = cnu * static_cast<std::uint64_t>(nu - i) / static_cast<std::uint64_t>(i + 1);
    for (int i = 0; i < j - 1; ++i)
      ck = ck * static_cast<std::uint64_t>(k - 1 - i) / static_cast<std::uint64_t>(i + 1);
    total += (std::uint64_t{1} << j) * cnu * ck;
  }
  return total;
}

std::vector<double> shell_polynomial(int nu) {
  // C(k-1, j-1) = prod_{i=0}^{j-2} (x - 2 - i) / (j-1)!  with x = k + 1
  std::vector<double> total(static_cast<std::size_t>(nu), 0.0);
  for (int j = 1; j <= nu; ++j) {
    std::vector<double> poly{1.0};
    for (int i = 0; i <= j - 2; ++i) {
      std::vector<double> next(poly.size() + 1, 0.0);
      for (std::size_t d = 0; d < poly.size(); ++d) {
        next[d + 1] += poly[d];
        next[d] -= (2.0 + i) * poly[d];
      }
      poly = std::move(next);
    }
    double fact = 1.0;
    for (int i = 2; i <= j - 1; ++i) fact *= i;
    const double scale = std::ldexp(binomial(nu, j), j) / fact;
    for (std::size_t d = 0; d < poly.size(); ++d) total[d] += scale * poly[d];
  }
  return total;
}

Bracket power_tail_bracket(double s, double a) {
  if (!(s > 1.0) || !(a >= 1.0)) throw PreconditionError("power tail needs s > 1 and a >= 1");
  // Euler-Maclaurin through the B_2 term; f(x) = x^{-s} is completely monotone,
  // so the remainder lies between the next term and zero.
  const double fa = std::pow(a, -s);
  const double approx = a * fa / (s - 1.0) + 0.5 * fa + s * fa / (12.0 * a);
  const double next = s * (s + 1.0) * (s + 2.0) * fa / (720.0 * a * a * a);
  return {approx - next, approx};
}

LatticeZetaSum lattice_zeta(double r, int nu, double rel_tol, int max_shells) {
  if (nu < 1) throw PreconditionError("nu must be >= 1");
  if (!(r > nu)) {
    throw PreconditionError(
        fmt::format("H(r; nu) diverges for r <= nu (r = {}, nu = {})", r, nu));
  }
  const auto poly = shell_polynomial(nu);
  const double eps = std::numeric_limits<double>::epsilon();

  double partial = 0.0;
  int done = -1;
  for (int shells = 64;; shells *= 2) {
    for (int k = done + 1; k <= shells; ++k) {
      partial += static_cast<double>(shell_count(nu, k)) * std::pow(1.0 + k, -r);
    }
    done = shells;

    double lo = 0.0, hi = 0.0;
    const double a = shells + 2.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      if (poly[i] == 0.0) continue;
      const auto br = power_tail_bracket(r - static_cast<double>(i), a);
      if (poly[i] > 0.0) {
        lo += poly[i] * br.lower;
        hi += poly[i] * br.upper;
      } else {
        lo += poly[i] * br.upper;
        hi += poly[i] * br.lower;
      }
    }
    LatticeZetaSum out;
    out.partial = partial;
    out.value = partial + 0.5 * (lo + hi);
    out.tail_error = 0.5 * (hi - lo) + 4.0 * eps * (shells + poly.size()) * out.value;
    out.shells = shells;
    if (out.tail_error < rel_tol * out.value) return out;
    if (shells >= max_shells) {
      throw PreconditionError(fmt::format(
          "H({}; {}) tail error {} not below {} relative within {} shells; raise the shell cap",
          r, nu, out.tail_error, rel_tol, max_shells));
    }
  }
}

double one_dim_exp_sum(double s, int terms) {
  double sum = 0.0;
  for (int m = terms; m >= 1; --m) sum += std::exp(-s * m);
  return 1.0 + 2.0 * sum;
}

double ConstantsReport::proven_horizon() const {
  if (const auto* e = exponential()) return p >= 3 ? *e->L_p_rho : e->L;
  const auto* q = polynomial();
  return p >= 3 ? *q->L_p_r : q->L_r;
}

double ConstantsReport::uniform_bound(int norm) const {
  if (const auto* e = exponential()) {
    return e->B * std::exp(-0.5 * std::get<Exponential>(spec).rho * norm);
  }
  const auto& poly = std::get<Polynomial>(spec);
  return 2.0 * poly.A * std::pow(1.0 + norm, -poly.r);
}

ConstantsReport constants(const DecaySpec& spec, int nu, int p) {
  if (p < 2) throw PreconditionError("power p must be >= 2");
  validate(spec, nu, DecayPath::ConvolutionOnly);
  ConstantsReport rep;
  rep.spec = spec;
  rep.nu = nu;
  rep.p = p;
  const double p_factor = p * std::ldexp(1.0, p + 3);

  if (const auto* e = std::get_if<Exponential>(&spec)) {
    ExponentialConstants c;
    c.b_rho = std::pow(6.0 / e->rho, nu);
    c.b_tilde_rho = std::pow(12.0 / e->rho, nu);
    c.M = std::max(1.0, e->A * c.b_rho);
    c.B = 2.0 * c.M;
    c.L = 1.0 / (5.0 * c.M);
    if (p >= 3) c.L_p_rho = 1.0 / (p_factor * std::pow(c.M, p - 1));
    c.one_dim_half_sum = one_dim_exp_sum(0.5 * e->rho, 1'000'000);
    c.one_dim_quarter_sum = one_dim_exp_sum(0.25 * e->rho, 1'000'000);
    c.one_dim_checks_pass =
        c.one_dim_half_sum < 6.0 / e->rho && c.one_dim_quarter_sum < 12.0 / e->rho;
    rep.values = c;
  } else {
    const auto& poly = std::get<Polynomial>(spec);
    PolynomialConstants c;
    const auto H = lattice_zeta(poly.r, nu);
    c.H_r_nu = H.value;
    c.H_tail_error = H.tail_error;
    c.H_shells = H.shells;
    c.K_r_nu = std::pow(2.0, poly.r + 1.0) * H.value;
    c.M_r = std::max(1.0, poly.A * c.K_r_nu);
    c.L_r = 1.0 / (5.0 * c.M_r);
    if (p >= 3) c.L_p_r = 1.0 / (p_factor * std::pow(c.M_r, p - 1));
    rep.values = c;
  }
  return rep;
}

double norm_Xr(const LatticeField& f, double r) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    m = std::max(m, std::pow(1.0 + f.ball().norm(i), r) * std::abs(f[i]));
  }
  return m;
}

double norm_Ys(const LatticeField& f, double s) {
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    sum += std::exp(s * f.ball().norm(i)) * std::abs(f[i]);
  }
  return sum;
}

double fit_decay(const LatticeField& f, const DecaySpec& shape) {
  double A = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double mag = std::abs(f[i]);
    if (mag == 0.0) continue;
    A = std::max(A, mag / weight_at_norm(shape, f.ball().norm(i)));
  }
  return A;
}

double tail_bound(const DecaySpec& spec, int nu, double A, int N) {
  if (N < 0) throw PreconditionError("tail bound needs N >= 0");
  if (nu < 1) throw PreconditionError("nu must be >= 1");
  if (A == 0.0) return 0.0;
  const double slack = 1.0 + 1e-12;

  if (const auto* e = std::get_if<Exponential>(&spec)) {
    // Direct shell sum, then a geometric remainder using
    // shell(k+1)/shell(k) <= k/(k-nu+1) for k >= nu.
    double sum = 0.0;
    int k = N + 1;
    for (;; ++k) {
      const double g = static_cast<double>(shell_count(nu, k)) * std::exp(-e->rho * k);
      sum += g;
      if (k >= nu) {
        const double q = std::exp(-e->rho) * k / (k - nu + 1.0);
        if (q < 1.0) {
          const double rem = g * q / (1.0 - q);
          if (rem <= 1e-6 * sum || k > N + 100000) return A * (sum + rem) * slack;
        }
      }
    }
  }

  const auto& poly = std::get<Polynomial>(spec);
  if (!(poly.r > nu)) {
    throw PreconditionError(
        fmt::format("polynomial tail diverges for r <= nu (r = {}, nu = {})", poly.r, nu));
  }
  const auto coeffs = shell_polynomial(nu);
  const double a = N + 2.0;  // shells k >= N+1, j = k + 1
  double hi = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == 0.0) continue;
    const auto br = power_tail_bracket(poly.r - static_cast<double>(i), a);
    hi += coeffs[i] * (coeffs[i] > 0.0 ? br.upper : br.lower);
  }
  return A * hi * slack;
}

}  // namespace qpb
