#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "qpb/lattice.hpp"

using namespace qpb;

namespace {

// Independent oracle: count points of [-N, N]^nu with |n| <= N by nested loops.
std::size_t brute_ball_count(int nu, int N) {
  std::vector<int> n(static_cast<std::size_t>(nu), -N);
  std::size_t count = 0;
  while (true) {
    int s = 0;
    for (int x : n) s += std::abs(x);
    if (s <= N) ++count;
    std::size_t d = 0;
    while (d < n.size() && ++n[d] > N) n[d++] = -N;
    if (d == n.size()) break;
  }
  return count;
}

}  // namespace

TEST_CASE("l1 norm") {
  CHECK(l1_norm(LatticeVector{0, 0}) == 0);
  CHECK(l1_norm(LatticeVector{1, -2}) == 3);
  CHECK(l1_norm(LatticeVector{-3, 0, 4}) == 7);
}

TEST_CASE("ball enumeration") {
  auto b21 = Ball::make(2, 1);
  REQUIRE(b21->size() == 5);
  std::set<LatticeVector> pts;
  for (std::size_t i = 0; i < b21->size(); ++i) pts.insert(b21->vector(i));
  CHECK(pts == std::set<LatticeVector>{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}});
  CHECK(Ball::make(2, 2)->size() == 13);
  auto b10 = Ball::make(1, 0);
  REQUIRE(b10->size() == 1);
  CHECK(b10->vector(0) == LatticeVector{0});

  SUBCASE("cardinality matches nested loops") {
    for (int nu = 1; nu <= 3; ++nu) {
      for (int N = 0; N <= 8; ++N) {
        const auto b = Ball::make(nu, N);
        CHECK(b->size() == brute_ball_count(nu, N));
        CHECK(ball_cardinality(nu, N) == brute_ball_count(nu, N));
      }
    }
  }

  SUBCASE("lexicographic order, lookup, negation") {
    const auto b = Ball::make(3, 4);
    for (std::size_t i = 0; i + 1 < b->size(); ++i) CHECK(b->vector(i) < b->vector(i + 1));
    for (std::size_t i = 0; i < b->size(); ++i) {
      CHECK(b->find(b->point(i)) == i);
      CHECK(b->norm(i) == l1_norm(b->point(i)));
      std::vector<int> neg(b->point(i).begin(), b->point(i).end());
      for (int& x : neg) x = -x;
      CHECK(b->negated(i) == b->find(neg));
    }
    CHECK(b->find(LatticeVector{5, 0, 0}) == Ball::npos);
    CHECK(b->find(LatticeVector{2, -2, 1}) == Ball::npos);
    CHECK(b->vector(b->zero_index()) == LatticeVector{0, 0, 0});
  }

  CHECK_THROWS_AS(Ball::make(0, 2), PreconditionError);
  CHECK_THROWS_AS(Ball::make(2, -1), PreconditionError);
  CHECK_THROWS_AS(Ball::make(6, 40, 1000), PreconditionError);
}

TEST_CASE("theta and kernels") {
  const FrequencyVector w{1.0, std::sqrt(2.0)};
  CHECK(theta(LatticeVector{0, 0}, w) == 0.0);
  CHECK(theta(LatticeVector{1, 1}, w) == doctest::Approx(2.414214).epsilon(1e-6));
  CHECK(theta(LatticeVector{2, -1}, w) == doctest::Approx(0.585786).epsilon(1e-6));

  const auto k0 = kernels(LatticeVector{0, 0}, w);
  CHECK(k0.theta == 0.0);
  CHECK(k0.omega_n == 0.0);
  CHECK(k0.beta_n == 0.0);
  const auto k1 = kernels_from_theta(1.0);
  CHECK(k1.omega_n == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(k1.beta_n == doctest::Approx(0.5).epsilon(1e-15));
  double prev = -1.0;
  for (double th = 0.0; th < 50.0; th += 0.25) {
    const double b = kernels_from_theta(th).beta_n;
    CHECK(b > prev);
    CHECK(b < 1.0);
    prev = b;
  }
}

TEST_CASE("propagators") {
  const FrequencyVector w{1.0, std::sqrt(2.0)};
  const LatticeVector zero{0, 0};
  CHECK(propagator_G(zero, w, 2.5) == 1.0);
  CHECK(propagator_K(zero, w, 2.5) == 2.5);
  CHECK(propagator_Phi(zero, w, 2.5) == 0.0);
  const LatticeVector n{1, 2};
  CHECK(propagator_G(n, w, 0.0) == 1.0);
  CHECK(propagator_K(n, w, 0.0) == 0.0);
  CHECK(propagator_Phi(n, w, 0.0) == 0.0);

  const auto kv = kernels_from_theta(1.0);  // Omega = 1/sqrt 2
  const double t = M_PI * std::sqrt(2.0) / 2.0;
  CHECK(std::abs(propagator_G(kv, t)) < 1e-15);
  CHECK(propagator_K(kv, t) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  SUBCASE("basic bounds and evenness") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> coord(-6, 6);
    std::uniform_real_distribution<double> time(0.0, 40.0);
    for (int trial = 0; trial < 2000; ++trial) {
      const LatticeVector m{coord(rng), coord(rng)};
      const LatticeVector neg{-m[0], -m[1]};
      const double s = time(rng);
      CHECK(std::abs(propagator_G(m, w, s)) <= 1.0);
      CHECK(std::abs(propagator_K(m, w, s)) <= s * (1.0 + 1e-15));
      CHECK(std::abs(propagator_Phi(m, w, s)) <= 1.0);
      CHECK(propagator_G(m, w, s) == propagator_G(neg, w, s));
      CHECK(propagator_K(m, w, s) == propagator_K(neg, w, s));
      CHECK(propagator_Phi(m, w, s) == propagator_Phi(neg, w, s));
      CHECK(std::abs(theta(m, w)) <= w.max_abs() * l1_norm(m) + 1e-12);
    }
  }

  SUBCASE("small Omega t series agrees with the closed form in long double") {
    for (double th : {1e-9, 1e-7, 3e-7}) {
      const auto k = kernels_from_theta(th);
      for (double s : {0.5, 1.0, 2.0}) {
        const long double om = k.omega_n;
        const long double ref = std::sin(om * s) / om;
        CHECK(std::abs(propagator_K(k, s) - static_cast<double>(ref)) <= 1e-15 * s);
      }
    }
  }
}

TEST_CASE("small divisor report") {
  // brute force over the ball as the oracle
  auto brute = [](const FrequencyVector& w, int N) {
    const auto b = Ball::make(w.nu(), N);
    double best = INFINITY;
    for (std::size_t i = 0; i < b->size(); ++i) {
      if (b->norm(i) == 0) continue;
      best = std::min(best, std::abs(theta(b->point(i), w)));
    }
    return best;
  };
  const FrequencyVector w{1.0, std::sqrt(2.0)};
  const auto rep = small_divisor_report(w, 2);
  CHECK(rep.min_abs_theta == brute(w, 2));
  CHECK(rep.min_abs_theta == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-14));
  CHECK(l1_norm(rep.argmin) <= 2);
  CHECK_FALSE(rep.warning);

  const auto res = small_divisor_report(FrequencyVector{1.0, 1.0}, 2);
  CHECK(res.min_abs_theta == 0.0);
  CHECK(res.warning);
  CHECK((res.argmin == LatticeVector{1, -1} || res.argmin == LatticeVector{-1, 1}));

  const auto one = small_divisor_report(FrequencyVector{1.0}, 3);
  CHECK(one.min_abs_theta == 1.0);
  CHECK(std::abs(one.argmin[0]) == 1);
}

TEST_CASE("frequency vector validation") {
  CHECK_THROWS_AS(FrequencyVector(std::vector<double>{}), PreconditionError);
  CHECK_THROWS_AS(FrequencyVector({1.0, NAN}), PreconditionError);
  CHECK(FrequencyVector({1.0, -3.0}).max_abs() == 3.0);
}
