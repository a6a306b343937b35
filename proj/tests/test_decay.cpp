#include <doctest.h>

#include <cmath>

#include "qpb/decay.hpp"

using namespace qpb;

namespace {

constexpr double kZeta5 = 1.0369277551433699263;

// Count |m| = k in Z^nu by nested loops over the box.
std::uint64_t brute_shell(int nu, int k) {
  std::vector<int> n(static_cast<std::size_t>(nu), -k);
  std::uint64_t count = 0;
  while (true) {
    int s = 0;
    for (int x : n) s += std::abs(x);
    if (s == k) ++count;
    std::size_t d = 0;
    while (d < n.size() && ++n[d] > k) n[d++] = -k;
    if (d == n.size()) break;
  }
  return count;
}

}  // namespace

TEST_CASE("weights") {
  CHECK(weight_at_norm(Exponential{1.0, 1.0}, 0) == 1.0);
  CHECK(weight_at_norm(Exponential{1.0, 1.0}, 2) == doctest::Approx(std::exp(-2.0)));
  CHECK(weight_at_norm(Polynomial{1.0, 5.0}, 1) == doctest::Approx(1.0 / 32.0));
  CHECK(weight(Polynomial{3.0, 2.0}, std::vector<int>{1, -2}) == doctest::Approx(1.0 / 16.0));
}

TEST_CASE("shell counts") {
  for (int nu = 1; nu <= 4; ++nu)
    for (int k = 0; k <= 7; ++k) CHECK(shell_count(nu, k) == brute_shell(nu, k));
  CHECK(shell_count(1, 5) == 2);
  CHECK(shell_count(2, 5) == 20);
  for (int nu = 1; nu <= 4; ++nu) {
    const auto q = shell_polynomial(nu);
    for (int k = 1; k <= 12; ++k) {
      double v = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) v += q[i] * std::pow(k + 1.0, double(i));
      CHECK(v == doctest::Approx(double(shell_count(nu, k))).epsilon(1e-12));
    }
  }
}

TEST_CASE("power tail bracket") {
  // sum_{j>=2} j^{-2} = pi^2/6 - 1
  const auto b = power_tail_bracket(2.0, 2.0);
  const double exact = M_PI * M_PI / 6.0 - 1.0;
  CHECK(b.lower <= exact);
  CHECK(b.upper >= exact);
  CHECK(b.upper - b.lower < 1e-2);
  CHECK_THROWS_AS(power_tail_bracket(1.0, 2.0), PreconditionError);
}

TEST_CASE("exponential constants") {
  const auto rep = constants(Exponential{1.0, 1.0}, 2, 2);
  const auto* e = rep.exponential();
  REQUIRE(e != nullptr);
  CHECK(e->b_rho == doctest::Approx(36.0).epsilon(1e-15));
  CHECK(e->b_tilde_rho == doctest::Approx(144.0).epsilon(1e-15));
  CHECK(e->M == doctest::Approx(36.0).epsilon(1e-15));
  CHECK(e->B == doctest::Approx(72.0).epsilon(1e-15));
  CHECK(e->L == doctest::Approx(1.0 / 180.0).epsilon(1e-15));
  CHECK_FALSE(e->L_p_rho.has_value());
  CHECK(e->one_dim_checks_pass);
  CHECK(rep.proven_horizon() == e->L);
  CHECK(rep.uniform_bound(2) == doctest::Approx(72.0 * std::exp(-1.0)));

  // small amplitude: M clamps at 1
  const auto tiny = constants(Exponential{1e-3, 1.0}, 1, 2);
  CHECK(tiny.exponential()->M == 1.0);
  CHECK(tiny.exponential()->L == doctest::Approx(0.2));

  const auto p3 = constants(Exponential{1.0, 1.0}, 1, 3);
  REQUIRE(p3.exponential()->L_p_rho.has_value());
  CHECK(*p3.exponential()->L_p_rho == doctest::Approx(1.0 / 6912.0).epsilon(1e-14));
  CHECK(p3.proven_horizon() == *p3.exponential()->L_p_rho);
}

TEST_CASE("polynomial constants") {
  SUBCASE("r = 2, nu = 1 via zeta(2)") {
    const double H = M_PI * M_PI / 3.0 - 1.0;
    const auto z = lattice_zeta(2.0, 1);
    CHECK(z.value == doctest::Approx(H).epsilon(1e-10));
    CHECK(z.tail_error <= 1e-10 * z.value);
    CHECK(std::abs(z.value - H) <= z.tail_error + 1e-14);
    const auto rep = constants(Polynomial{1.0, 2.0}, 1, 2);
    CHECK(rep.polynomial()->K_r_nu == doctest::Approx(8.0 * H).epsilon(1e-10));
    CHECK(rep.polynomial()->K_r_nu == doctest::Approx(18.318945).epsilon(1e-7));
  }
  SUBCASE("r = 5, nu = 2 via zeta(4), zeta(5)") {
    const double H = 1.0 + 4.0 * (std::pow(M_PI, 4) / 90.0 - kZeta5);
    const auto rep = constants(Polynomial{1.0, 5.0}, 2, 2);
    const auto* q = rep.polynomial();
    REQUIRE(q != nullptr);
    CHECK(q->H_r_nu == doctest::Approx(H).epsilon(1e-10));
    CHECK(q->K_r_nu == doctest::Approx(64.0 * H).epsilon(1e-10));
    CHECK(q->M_r == doctest::Approx(64.0 * H).epsilon(1e-10));
    CHECK(q->L_r == doctest::Approx(1.0 / (320.0 * H)).epsilon(1e-10));
    CHECK(rep.uniform_bound(1) == doctest::Approx(2.0 / 32.0));
  }
  SUBCASE("partial sums increase to the value") {
    double prev = 0.0;
    double partial = 0.0;
    for (int k = 0; k <= 200; ++k) {
      partial += double(shell_count(2, k)) * std::pow(1.0 + k, -5.0);
      CHECK(partial >= prev);
      prev = partial;
    }
    const auto z = lattice_zeta(5.0, 2);
    CHECK(partial <= z.value + z.tail_error);
  }
  CHECK_THROWS_AS(lattice_zeta(2.0, 2), PreconditionError);
}

TEST_CASE("horizon never exceeds one fifth and falls with amplitude") {
  double prev = 1.0;
  for (double A : {0.001, 0.01, 0.1, 1.0, 10.0}) {
    const double L = constants(Exponential{A, 0.5}, 2, 2).proven_horizon();
    CHECK(L <= 0.2);
    CHECK(L <= prev);
    prev = L;
  }
  prev = 1.0;
  for (double A : {0.001, 0.1, 1.0, 10.0}) {
    const double L = constants(Polynomial{A, 6.0}, 2, 2).proven_horizon();
    CHECK(L <= 0.2);
    CHECK(L <= prev);
    prev = L;
  }
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(validate(Exponential{1.0, 0.0}, 2, DecayPath::Solver), PreconditionError);
  CHECK_THROWS_AS(validate(Exponential{1.0, 1.5}, 2, DecayPath::Solver), PreconditionError);
  CHECK_THROWS_AS(validate(Exponential{0.0, 1.0}, 2, DecayPath::Solver), PreconditionError);
  CHECK_NOTHROW(validate(Exponential{1.0, 1.0}, 2, DecayPath::Solver));
  CHECK_THROWS_AS(validate(Polynomial{1.0, 4.0}, 2, DecayPath::Solver), PreconditionError);
  CHECK_NOTHROW(validate(Polynomial{1.0, 4.0}, 2, DecayPath::ConvolutionOnly));
  CHECK_THROWS_AS(validate(Polynomial{1.0, 2.0}, 2, DecayPath::ConvolutionOnly),
                  PreconditionError);
  CHECK_THROWS_AS(validate(Polynomial{-1.0, 9.0}, 2, DecayPath::ConvolutionOnly),
                  PreconditionError);
}

TEST_CASE("norms and fits") {
  const auto ball = Ball::make(1, 2);
  LatticeField f(ball);
  f[ball->find(LatticeVector{1})] = 1.0;
  f[ball->find(LatticeVector{-1})] = 1.0;
  CHECK(norm_Ys(f, 0.5) == doctest::Approx(2.0 * std::exp(0.5)).epsilon(1e-15));
  CHECK(norm_Xr(f, 3.0) == doctest::Approx(8.0));

  LatticeField g(ball);
  g[ball->find(LatticeVector{2})] = 1.0;
  CHECK(fit_decay(g, Exponential{1.0, 1.0}) == doctest::Approx(std::exp(2.0)).epsilon(1e-15));
  LatticeField h(ball);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = cplx(0.3 * i, -0.1);
  const double base = fit_decay(h, Polynomial{1.0, 3.0});
  CHECK(fit_decay(LatticeField(ball, {h.values().begin(), h.values().end()}),
                  Polynomial{1.0, 3.0}) == base);
  std::vector<cplx> scaled(h.values().begin(), h.values().end());
  for (auto& v : scaled) v *= cplx(0.0, -2.5);
  CHECK(fit_decay(LatticeField(ball, scaled), Polynomial{1.0, 3.0}) ==
        doctest::Approx(2.5 * base).epsilon(1e-14));
  CHECK(fit_decay(LatticeField(ball), Exponential{1.0, 1.0}) == 0.0);
}

TEST_CASE("tail bounds") {
  SUBCASE("exponential nu = 1 geometric oracle") {
    const double exact = 2.0 * std::exp(-4.0) / (1.0 - std::exp(-1.0));
    CHECK(exact == doctest::Approx(0.057941).epsilon(1e-5));
    const double b = tail_bound(Exponential{1.0, 1.0}, 1, 1.0, 3);
    CHECK(b >= exact);
    CHECK(b <= exact * (1.0 + 1e-5));
  }
  SUBCASE("polynomial nu = 1 zeta oracle") {
    const double exact = 2.0 * (kZeta5 - 1.0 - 1.0 / 32.0 - 1.0 / 243.0);
    CHECK(exact == doctest::Approx(0.0031251).epsilon(1e-4));
    const double b = tail_bound(Polynomial{1.0, 5.0}, 1, 1.0, 2);
    CHECK(b >= exact);
    CHECK(b <= exact * 1.01);
  }
  SUBCASE("exponential nu = 2 against a long shell sum") {
    double exact = 0.0;
    for (int k = 6; k < 2000; ++k) exact += double(shell_count(2, k)) * std::exp(-0.5 * k);
    const double b = tail_bound(Exponential{1.0, 0.5}, 2, 3.0, 5);
    CHECK(b >= 3.0 * exact);
    CHECK(b <= 3.0 * exact * (1.0 + 1e-5));
  }
  CHECK(tail_bound(Exponential{1.0, 1.0}, 2, 0.0, 3) == 0.0);
  CHECK_THROWS_AS(tail_bound(Polynomial{1.0, 2.0}, 2, 1.0, 3), PreconditionError);
  CHECK(tail_bound(Exponential{1.0, 1.0}, 2, 1.0, 10) < tail_bound(Exponential{1.0, 1.0}, 2, 1.0, 5));
}
