#include <doctest.h>

#include <cmath>
#include <random>

#include "qpb/convolution.hpp"

using namespace qpb;

namespace {

LatticeField random_field(const BallPtr& ball, std::uint64_t seed, bool hermitian = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  LatticeField f(ball);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = {g(rng), g(rng)};
  if (hermitian) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto j = ball->negated(i);
      if (j == i) f[i] = f[i].real();
      else if (j > i) f[j] = std::conj(f[i]);
    }
    f.set_hermitian(true);
  }
  return f;
}

double max_diff(const LatticeField& a, const LatticeField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool bitwise_equal(const LatticeField& a, const LatticeField& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].real() != b[i].real() || a[i].imag() != b[i].imag()) return false;
  return true;
}

LatticeField delta0(const BallPtr& ball) {
  LatticeField f(ball);
  f[ball->zero_index()] = 1.0;
  return f;
}

}  // namespace

TEST_CASE("binary convolution examples") {
  const auto ball = Ball::make(1, 3);
  const auto d = convolve2(delta0(ball), delta0(ball));
  CHECK(bitwise_equal(d, delta0(ball)));

  LatticeField a(ball);
  a[ball->find(LatticeVector{1})] = 1.0;
  a[ball->find(LatticeVector{-1})] = 1.0;
  const auto out = convolve2(a, a);
  for (std::size_t i = 0; i < ball->size(); ++i) {
    const int n = ball->point(i)[0];
    const double expect = n == 0 ? 2.0 : (std::abs(n) == 2 ? 1.0 : 0.0);
    CHECK(out[i] == cplx(expect, 0.0));
  }
  const auto z = convolve2(random_field(ball, 1), LatticeField(ball));
  CHECK(z.sup_norm() == 0.0);
  CHECK_THROWS_AS(convolve2(a, LatticeField(Ball::make(1, 2))), PreconditionError);
}

TEST_CASE("fast convolution matches the literal definition") {
  for (int nu = 1; nu <= 3; ++nu) {
    const auto ball = Ball::make(nu, nu == 3 ? 3 : 5);
    const auto a = random_field(ball, 10 + nu);
    const auto b = random_field(ball, 20 + nu);
    const auto ref = reference::convolve2(a, b);
    const double scale = std::max(1.0, ref.sup_norm());
    CHECK(max_diff(convolve2(a, b), ref) <= 1e-13 * scale);
    CHECK(max_diff(convolve_onto(a, b, ball), ref) <= 1e-13 * scale);
  }
}

TEST_CASE("algebraic properties") {
  const auto ball = Ball::make(2, 5);
  const auto a = random_field(ball, 1);
  const auto b = random_field(ball, 2);
  const auto c = random_field(ball, 3);
  CHECK(bitwise_equal(convolve2(a, b), convolve2(b, a)));

  const cplx alpha(0.7, -1.3);
  std::vector<cplx> mix(ball->size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = alpha * a[i] + b[i];
  const auto lhs = convolve2(LatticeField(ball, mix), c);
  const auto ac = convolve2(a, c);
  const auto bc = convolve2(b, c);
  double worst = 0.0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    const cplx rhs = alpha * ac[i] + bc[i];
    worst = std::max(worst, std::abs(lhs[i] - rhs) / std::max(1.0, std::abs(rhs)));
  }
  CHECK(worst <= 1e-12);

  const auto h1 = random_field(ball, 4, true);
  const auto h2 = random_field(ball, 5, true);
  REQUIRE(h1.hermitian_defect() == 0.0);
  const auto hc = convolve2(h1, h2);
  CHECK(hc.hermitian_defect() <= 1e-14 * std::max(1.0, hc.sup_norm()));
}

TEST_CASE("p-fold convolution") {
  const auto ball = Ball::make(1, 4);
  for (int p = 2; p <= 5; ++p) CHECK(bitwise_equal(convolve_p(delta0(ball), p), delta0(ball)));

  LatticeField a(ball);
  a[ball->find(LatticeVector{1})] = 1.0;
  a[ball->find(LatticeVector{-1})] = 1.0;
  const auto cube = convolve_p(a, 3);
  for (std::size_t i = 0; i < ball->size(); ++i) {
    const int n = std::abs(ball->point(i)[0]);
    const double expect = n == 1 ? 3.0 : (n == 3 ? 1.0 : 0.0);
    CHECK(cube[i].real() == doctest::Approx(expect).epsilon(1e-15));
    CHECK(cube[i].imag() == 0.0);
  }

  const auto b2 = Ball::make(2, 4);
  const auto f = random_field(b2, 7);
  CHECK(max_diff(convolve_p(f, 2), convolve2(f, f)) <= 1e-14 * std::max(1.0, f.sup_norm()));
  for (int p = 3; p <= 4; ++p) {
    const auto small = Ball::make(2, 3);
    const auto g = random_field(small, 30 + p);
    const auto ref = reference::convolve_p(g, p);
    CHECK(max_diff(convolve_p(g, p), ref) <= 1e-12 * std::max(1.0, ref.sup_norm()));
  }
  CHECK_THROWS_AS(convolve_p(f, 1), PreconditionError);
}

TEST_CASE("serial and parallel agree bit for bit") {
  const auto ball = Ball::make(2, 8);
  const auto a = random_field(ball, 41);
  const auto b = random_field(ball, 42);
  CHECK(bitwise_equal(convolve2(a, b, Execution::Serial), convolve2(a, b, Execution::Parallel)));
  CHECK(bitwise_equal(convolve_p(a, 3, Execution::Serial), convolve_p(a, 3, Execution::Parallel)));
  const auto big = Ball::make(2, 12);
  CHECK(bitwise_equal(convolve_onto(a, b, big, Execution::Serial),
                      convolve_onto(a, b, big, Execution::Parallel)));
  CHECK(bitwise_equal(majorant_Em_field(3, 1.0, ball, ball, Execution::Serial),
                      majorant_Em_field(3, 1.0, ball, ball, Execution::Parallel)));
}

TEST_CASE("majorant sums") {
  const auto b1 = Ball::make(1, 1);
  CHECK(majorant_Em(2, 1.0, std::vector<int>{0}, b1) ==
        doctest::Approx(1.0 + 2.0 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(majorant_Em(2, 1.0, std::vector<int>{3}, b1) == 0.0);
  CHECK(majorant_Em(3, 1.0, std::vector<int>{4}, b1) == 0.0);

  SUBCASE("E_2 is the self-convolution of the weight") {
    const auto ball = Ball::make(2, 4);
    const auto big = Ball::make(2, 8);
    LatticeField w(ball);
    for (std::size_t i = 0; i < ball->size(); ++i) w[i] = std::exp(-0.35 * ball->norm(i));
    const auto conv = convolve_onto(w, w, big);
    for (std::size_t i = 0; i < big->size(); ++i) {
      CHECK(majorant_Em(2, 0.7, big->point(i), ball) ==
            doctest::Approx(conv[i].real()).epsilon(1e-14));
    }
  }

  SUBCASE("E_{k+1} <= btilde^{k+1} exp(-rho|n|/4)") {
    for (double rho : {0.5, 1.0}) {
      const auto ball = Ball::make(1, 3);
      const double bt = 12.0 / rho;
      for (int m = 2; m <= 5; ++m) {
        const auto target = Ball::make(1, 3 * m);
        const auto em = majorant_Em_field(m, rho, ball, target);
        for (std::size_t i = 0; i < target->size(); ++i)
          CHECK(em[i].real() <= std::pow(bt, m) * std::exp(-rho * target->norm(i) / 4.0));
      }
    }
    const auto ball2 = Ball::make(2, 2);
    for (int m = 2; m <= 4; ++m) {
      const auto target = Ball::make(2, 2 * m);
      const auto em = majorant_Em_field(m, 1.0, ball2, target);
      for (std::size_t i = 0; i < target->size(); ++i)
        CHECK(em[i].real() <= std::pow(144.0, m) * std::exp(-target->norm(i) / 4.0));
    }
  }
}

TEST_CASE("weighted convolution inequality") {
  SUBCASE("nu = 1, r = 2 at n = 0 against zeta(4)") {
    const double cap = 1.0 + 2.0 * (std::pow(M_PI, 4) / 90.0 - 1.0);
    CHECK(cap == doctest::Approx(1.164646).epsilon(1e-6));
    for (int N : {2, 10, 50}) {
      const auto ball = Ball::make(1, N);
      LatticeField w(ball);
      for (std::size_t i = 0; i < ball->size(); ++i) w[i] = std::pow(1.0 + ball->norm(i), -2.0);
      const double lhs = convolve2(w, w)[ball->zero_index()].real();
      CHECK(lhs <= cap);
      CHECK(lhs <= 18.318945);
    }
  }
  SUBCASE("reports pass for admissible parameters") {
    const auto rep = verify_weighted_convolution(3.0, 2, 6, 20, 5);
    CHECK(rep.pointwise_pass);
    CHECK(rep.algebra_pass);
    CHECK(rep.pointwise_max_ratio < 1.0);
    CHECK(rep.algebra_max_ratio <= rep.pointwise_max_ratio + 1e-12);
    CHECK(rep.trials == 20);
  }
  SUBCASE("zero fields and the weight itself") {
    const auto ball = Ball::make(1, 6);
    CHECK(algebra_ratio(LatticeField(ball), random_field(ball, 1), 2.0, 18.3) == 0.0);
    LatticeField w(ball);
    for (std::size_t i = 0; i < ball->size(); ++i) w[i] = std::pow(1.0 + ball->norm(i), -2.0);
    const double K = constants(Polynomial{1.0, 2.0}, 1, 2).polynomial()->K_r_nu;
    const double direct = [&] {
      const auto c = convolve2(w, w);
      double m = 0.0;
      for (std::size_t i = 0; i < ball->size(); ++i)
        m = std::max(m, c[i].real() / (K * w[i].real()));
      return m;
    }();
    CHECK(algebra_ratio(w, w, 2.0, K) == doctest::Approx(direct).epsilon(1e-14));
    CHECK(direct < 1.0);
  }
}
