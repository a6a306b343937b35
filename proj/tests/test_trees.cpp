#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "qpb/trees.hpp"

using namespace qpb;

namespace {

// Indices recomputed from the structure alone, independent of Tree's cache.
struct Idx {
  int sigma;
  int ell;
  double D;
  int iota;
};

Idx recompute(const Tree& t) {
  if (t.is_leaf()) return {1, t.label() == LeafLabel::D ? 1 : 0, 1.0, 0};
  Idx out{0, 1, 1.0, 1};
  for (const auto& c : t.children()) {
    const Idx s = recompute(*c);
    out.sigma += s.sigma;
    out.ell += s.ell;
    out.D *= s.D;
    out.iota += s.iota;
  }
  out.D *= out.ell;
  return out;
}

const auto C = Tree::leaf(LeafLabel::C);
const auto Dl = Tree::leaf(LeafLabel::D);

double max_diff(const Snapshot& a, const Snapshot& b) {
  double m = 0.0;
  for (int j = 0; j < a.nodes(); ++j)
    for (std::size_t i = 0; i < a.modes(); ++i) m = std::max(m, std::abs(a(j, i) - b(j, i)));
  return m;
}

}  // namespace

TEST_CASE("tree indices") {
  const auto& lc = C->indices();
  CHECK(lc.sigma == 1);
  CHECK(lc.ell == 0);
  CHECK(lc.D == 1);
  CHECK(lc.iota == 0);
  CHECK(Dl->indices().ell == 1);

  const auto cd = Tree::node({C, Dl});
  CHECK(cd->indices().sigma == 2);
  CHECK(cd->indices().ell == 2);
  CHECK(cd->indices().D == 2);
  CHECK(cd->indices().iota == 1);

  const auto ccd = Tree::node({C, C, Dl});
  CHECK(ccd->indices().sigma == 3);
  CHECK(ccd->indices().ell == 2);
  CHECK(ccd->indices().D == 2);
  CHECK(ccd->indices().iota == 1);

  const auto deep = Tree::node({Tree::node({C, C}), Dl});
  // inner: ell 1, D 1; root: ell 1 + 1 + 1 = 3, D = 3
  CHECK(deep->indices().ell == 3);
  CHECK(deep->indices().D == 3);
  CHECK(to_string(*deep) == "((c,c),d)");
  CHECK_THROWS_AS(Tree::node({C}), PreconditionError);

  const TreeIndices parts[] = {cd->indices(), Dl->indices()};
  const auto comb = combine(parts);
  CHECK(comb.sigma == 3);
  CHECK(comb.ell == 4);
  CHECK(comb.D == 8);
}

TEST_CASE("enumeration counts") {
  CHECK(enumerate_trees(0, 2).size() == 2);
  CHECK(enumerate_trees(1, 2).size() == 6);
  CHECK(enumerate_trees(2, 2).size() == 38);
  CHECK(enumerate_trees(3, 2).size() == 1446);
  CHECK(enumerate_trees(1, 3).size() == 10);
  CHECK(enumerate_trees(2, 3).size() == 1002);
  double n = 2.0;
  for (int k = 1; k <= 4; ++k) {
    n = 2.0 + n * n;
    CHECK(tree_count(k, 2) == n);
  }
  CHECK(tree_count(4, 2) == 2.0 + 1446.0 * 1446.0);
  CHECK_THROWS_AS(enumerate_trees(4, 2), PreconditionError);

  SUBCASE("no duplicates and indices agree with the structure") {
    for (auto [k, p] : {std::pair{3, 2}, std::pair{2, 3}}) {
      const auto trees = enumerate_trees(k, p);
      std::set<std::string> names;
      for (const auto& t : trees) {
        names.insert(to_string(*t));
        const Idx r = recompute(*t);
        const auto& ix = t->indices();
        CHECK(ix.sigma == r.sigma);
        CHECK(ix.ell == r.ell);
        CHECK(double(ix.D) == r.D);
        CHECK(ix.iota == r.iota);
        CHECK(ix.sigma == (p - 1) * ix.iota + 1);
        CHECK(ix.iota <= ix.ell);
        CHECK(ix.sigma <= (p - 1) * ix.ell + 1);
      }
      CHECK(names.size() == trees.size());
    }
  }

  SUBCASE("leaf cap equals filtering") {
    const auto all = enumerate_trees(3, 2);
    for (int cap : {1, 2, 3, 5, 8}) {
      std::size_t kept = 0;
      for (const auto& t : all) kept += t->indices().sigma <= cap;
      CHECK(enumerate_trees(3, 2, cap).size() == kept);
      CHECK(tree_count(3, 2, cap) == double(kept));
    }
  }
}

TEST_CASE("tree sums") {
  CHECK(theta_sum_exact(0, 0.3) == doctest::Approx(1.3));
  CHECK(theta_sum_exact(1, 0.2) ==
        doctest::Approx(1.0 + 0.2 + 0.2 + 0.02 + 0.02 + 0.008 / 3.0).epsilon(1e-15));
  CHECK(theta_sum_exact(1, 0.2) == doctest::Approx(1.442667).epsilon(1e-6));
  CHECK(theta_sum_exact(2, 0.0) == 1.0);
  CHECK(theta_sum_upper(1, 0.2) == doctest::Approx(1.488).epsilon(1e-15));
  for (int k = 0; k <= 10; ++k) CHECK(theta_sum_upper(k, 0.0) == 1.0);
  CHECK(theta_sum_upper(50, 0.2) <= 2.0);
  CHECK_THROWS(theta_sum_upper(3, -0.1));

  for (double xi : {0.0, 0.05, 0.1, 0.2}) {
    double prev = 0.0;
    for (int k = 0; k <= 3; ++k) {
      const auto trees = enumerate_trees(k, 2);
      double brute = 0.0;
      for (const auto& t : trees) {
        const Idx r = recompute(*t);
        brute += std::pow(xi, r.ell) / r.D;
      }
      const double ex = theta_sum_exact(k, xi);
      CHECK(ex == doctest::Approx(brute).epsilon(1e-13));
      CHECK(ex <= theta_sum_upper(k, xi) * (1.0 + 1e-15));
      CHECK(ex <= 2.0);
      CHECK(ex >= prev);
      prev = ex;
    }
  }
}

TEST_CASE("streamed level statistics match enumeration") {
  const std::vector<double> xi{0.0, 0.1, 0.2};
  for (auto [k, p] : {std::pair{2, 2}, std::pair{3, 2}, std::pair{2, 3}}) {
    const auto st = level_statistics(k, p, xi);
    const auto trees = enumerate_trees(k, p);
    CHECK(st.count == trees.size());
    int ms = 0, ml = 0, mi = 0;
    for (const auto& t : trees) {
      ms = std::max(ms, t->indices().sigma);
      ml = std::max(ml, t->indices().ell);
      mi = std::max(mi, t->indices().iota);
    }
    CHECK(st.max_sigma == ms);
    CHECK(st.max_ell == ml);
    CHECK(st.max_iota == mi);
    for (std::size_t q = 0; q < xi.size(); ++q)
      CHECK(st.theta_exact[q] == doctest::Approx(theta_sum_exact(k, xi[q], p)).epsilon(1e-13));
  }
  const auto top = level_statistics(4, 2, xi);
  CHECK(top.count == 2090918ULL);
  CHECK(top.leaf_bound_violations == 0);
  CHECK(top.leaf_identity_violations == 0);
  CHECK(top.branching_violations == 0);
  CHECK(top.denominator_violations == 0);
  CHECK(top.max_sigma == 16);
  for (std::size_t q = 0; q < xi.size(); ++q) {
    CHECK(top.theta_exact[q] <= theta_sum_upper(4, xi[q]) * (1.0 + 1e-15));
    CHECK(top.theta_exact[q] >= theta_sum_exact(3, xi[q]));
  }
}

TEST_CASE("flattening") {
  CHECK(flatten(*Dl).labels == std::vector<LeafLabel>{LeafLabel::D});
  const auto cd = flatten(*Tree::node({C, Dl}));
  CHECK(cd.labels == std::vector<LeafLabel>{LeafLabel::C, LeafLabel::D});
  const auto ccd = flatten(*Tree::node({Tree::node({C, C}), Dl}));
  CHECK(ccd.labels == std::vector<LeafLabel>{LeafLabel::C, LeafLabel::C, LeafLabel::D});
  CHECK(ccd.paths == std::vector<std::vector<int>>{{0, 0}, {0, 1}, {1}});
}

TEST_CASE("tree expansion reproduces the Picard iterates") {
  const auto ball = Ball::make(1, 1);
  const FrequencyVector w{1.0};
  const TimeGrid grid(0.1, 8);
  const auto data = qpb::random_data(ball, Exponential{1.0, 1.0}, 5, true);
  const TreeEvaluator ev(data, grid, w);
  const PicardEngine eng(data, grid, w);
  const auto run = iterate(eng, {.max_k = 2, .tol = 0.0, .keep_history = true, .run_all = true});

  CHECK(max_diff(ev.expansion(0, 2), eng.linear()) == 0.0);
  CHECK(max_diff(ev.expansion(1, 2), run.iterate(1)) <= 1e-12);
  CHECK(max_diff(ev.expansion(2, 2), run.iterate(2)) <= 1e-10);

  const TreeEvaluator zero(zero_data(ball), grid, w);
  CHECK(zero.expansion(2, 2).sup_norm() == 0.0);

  const PicardEngine cubic(data, grid, w, {.power = 3});
  const auto crun = iterate(cubic, {.max_k = 1, .tol = 0.0, .keep_history = true, .run_all = true});
  CHECK(max_diff(ev.expansion(1, 3), crun.iterate(1)) <= 1e-12);

  const auto b2 = Ball::make(2, 1);
  const FrequencyVector w2{1.0, std::sqrt(2.0)};
  const auto d2 = qpb::random_data(b2, Exponential{0.8, 1.0}, 8, true);
  const auto run2 =
      iterate(PicardEngine(d2, grid, w2), {.max_k = 2, .tol = 0.0, .keep_history = true, .run_all = true});
  CHECK(max_diff(tree_expansion_eval(2, d2, grid, w2), run2.iterate(2)) <= 1e-10);
}

TEST_CASE("coefficient bounds on individual terms") {
  const double A = 0.9;
  const double rho = 1.0;
  const auto ball = Ball::make(2, 2);
  const FrequencyVector w{1.0, std::sqrt(2.0)};
  const TimeGrid grid(0.4, 8);
  const auto data = qpb::random_data(ball, Exponential{A, rho}, 12, true);
  const TreeEvaluator ev(data, grid, w);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> pick(0, ball->size() - 1);
  std::size_t checked = 0;
  for (const auto& t : enumerate_trees(3, 2, 4)) {
    const auto& ix = t->indices();
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::size_t> modes(static_cast<std::size_t>(ix.sigma));
      int total = 0;
      for (auto& m : modes) {
        m = pick(rng);
        total += ball->norm(m);
      }
      const auto term = ev.term(*t, modes);
      CHECK(std::abs(term.C) <= std::pow(A, ix.sigma) * std::exp(-rho * total) * (1 + 1e-14));
      for (int j = 0; j < grid.nodes(); ++j) {
        const double tj = grid.node(j);
        CHECK(std::abs(term.J[j]) <= std::pow(tj, ix.ell) / double(ix.D) * (1 + 1e-12) + 1e-300);
      }
      ++checked;
    }
  }
  CHECK(checked > 0);
}
