#include "qpb/trees.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace qpb {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw PreconditionError("tree denominator overflows");
  return out;
}

constexpr TreeIndices kLeafC{1, 0, 1, 0};
constexpr TreeIndices kLeafD{1, 1, 1, 0};

// Calls f(tuple) for every p-tuple of indices into a list of size n, first
// position slowest.
template <class F>
void for_each_tuple(std::size_t n, int p, F&& f) {
  if (n == 0) return;
  std::vector<std::size_t> idx(static_cast<std::size_t>(p), 0);
  while (true) {
    f(std::span<const std::size_t>(idx));
    int pos = p - 1;
    while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == n) idx[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
  }
}

void require_level(int k, int p) {
  if (k < 0) throw PreconditionError("tree level k must be >= 0");
  if (p < 2) throw PreconditionError("tree arity p must be >= 2");
}

}  // namespace

Tree::Ptr Tree::leaf(LeafLabel label) {
  auto t = std::shared_ptr<Tree>(new Tree());
  t->label_ = label;
  t->idx_ = label == LeafLabel::C ? kLeafC : kLeafD;
  return t;
}

Tree::Ptr Tree::node(std::vector<Ptr> children) {
  if (children.size() < 2) throw PreconditionError("a tree node needs at least two children");
  auto t = std::shared_ptr<Tree>(new Tree());
  std::vector<TreeIndices> ci;
  ci.reserve(children.size());
  for (const auto& c : children) ci.push_back(c->indices());
  t->idx_ = combine(ci);
  t->children_ = std::move(children);
  return t;
}

TreeIndices combine(std::span<const TreeIndices> children) {
  TreeIndices out{0, 1, 1, 1};
  for (const auto& c : children) {
    out.sigma += c.sigma;
    out.ell += c.ell;
    out.iota += c.iota;
  }
  out.D = static_cast<std::uint64_t>(out.ell);
  for (const auto& c : children) out.D = checked_mul(out.D, c.D);
  return out;
}

TreeIndices indices(const Tree& t) {
  if (t.is_leaf()) return t.label() == LeafLabel::C ? kLeafC : kLeafD;
  std::vector<TreeIndices> ci;
  for (const auto& c : t.children()) ci.push_back(indices(*c));
  return combine(ci);
}

std::string to_string(const Tree& t) {
  if (t.is_leaf()) return t.label() == LeafLabel::C ? "c" : "d";
  std::string s = "(";
  for (std::size_t i = 0; i < t.children().size(); ++i) {
    if (i) s += ',';
    s += to_string(*t.children()[i]);
  }
  return s + ")";
}

namespace {

void flatten_into(const Tree& t, std::vector<int>& path, Flattened& out) {
  if (t.is_leaf()) {
    out.labels.push_back(t.label());
    out.paths.push_back(path);
    return;
  }
  for (std::size_t i = 0; i < t.children().size(); ++i) {
    path.push_back(static_cast<int>(i));
    flatten_into(*t.children()[i], path, out);
    path.pop_back();
  }
}

}  // namespace

Flattened flatten(const Tree& t) {
  Flattened out;
  std::vector<int> path;
  flatten_into(t, path, out);
  return out;
}

double tree_count(int k, int p, int leaf_cap) {
  require_level(k, p);
  if (leaf_cap <= 0) {
    double n = 2.0;
    for (int j = 1; j <= k; ++j) n = 2.0 + std::pow(n, p);
    return n;
  }
  // histogram over sigma = 1..leaf_cap
  const auto cap = static_cast<std::size_t>(leaf_cap);
  std::vector<double> h(cap + 1, 0.0);
  h[1] = 2.0;
  for (int j = 1; j <= k; ++j) {
    std::vector<double> acc = h;
    for (int f = 1; f < p; ++f) {
      std::vector<double> next(cap + 1, 0.0);
      for (std::size_t a = 1; a <= cap; ++a) {
        if (acc[a] == 0.0) continue;
        for (std::size_t b = 1; a + b <= cap; ++b) next[a + b] += acc[a] * h[b];
      }
      acc = std::move(next);
    }
    acc[1] += 2.0;
    h = std::move(acc);
  }
  double total = 0.0;
  for (double v : h) total += v;
  return total;
}

std::vector<Tree::Ptr> enumerate_trees(int k, int p, int leaf_cap, std::size_t count_cap) {
  require_level(k, p);
  const auto c = Tree::leaf(LeafLabel::C);
  const auto d = Tree::leaf(LeafLabel::D);
  std::vector<Tree::Ptr> level{c, d};
  for (int j = 1; j <= k; ++j) {
    const double expected = tree_count(j, p, leaf_cap);
    if (expected > static_cast<double>(count_cap)) {
      throw PreconditionError(fmt::format(
          "T_{}({}) has {:.0f} trees, above the enumeration cap of {}", p, j, expected, count_cap));
    }
    std::vector<Tree::Ptr> next{c, d};
    next.reserve(static_cast<std::size_t>(expected));
    std::vector<Tree::Ptr> kids(static_cast<std::size_t>(p));
    for_each_tuple(level.size(), p, [&](std::span<const std::size_t> idx) {
      int sigma = 0;
      for (std::size_t q = 0; q < idx.size(); ++q) {
        kids[q] = level[idx[q]];
        sigma += kids[q]->indices().sigma;
      }
      if (leaf_cap > 0 && sigma > leaf_cap) return;
      next.push_back(Tree::node(kids));
    });
    level = std::move(next);
  }
  return level;
}

LevelStatistics level_statistics(int k, int p, const std::vector<double>& xi,
                                 std::uint64_t stream_cap) {
  require_level(k, p);
  LevelStatistics st;
  st.k = k;
  st.p = p;
  st.xi = xi;
  st.theta_exact.assign(xi.size(), 0.0);

  auto visit = [&](const TreeIndices& t) {
    ++st.count;
    st.max_sigma = std::max(st.max_sigma, t.sigma);
    st.max_ell = std::max(st.max_ell, t.ell);
    st.max_iota = std::max(st.max_iota, t.iota);
    st.max_D = std::max(st.max_D, t.D);
    if (t.sigma > (p - 1) * t.ell + 1) ++st.leaf_bound_violations;
    if (t.sigma != (p - 1) * t.iota + 1) ++st.leaf_identity_violations;
    if (t.iota > t.ell) ++st.branching_violations;
    if (t.D < 1) ++st.denominator_violations;
    const double D = static_cast<double>(t.D);
    for (std::size_t q = 0; q < xi.size(); ++q) st.theta_exact[q] += std::pow(xi[q], t.ell) / D;
  };

  std::vector<TreeIndices> level{kLeafC, kLeafD};
  if (k == 0) {
    for (const auto& t : level) visit(t);
    return st;
  }
  std::vector<TreeIndices> kids(static_cast<std::size_t>(p));
  for (int j = 1; j < k; ++j) {
    const double expected = tree_count(j, p);
    if (expected > static_cast<double>(kTreeCountCap)) {
      throw PreconditionError(fmt::format(
          "T_{}({}) has {:.0f} trees, above the enumeration cap of {}", p, j, expected,
          kTreeCountCap));
    }
    std::vector<TreeIndices> next{kLeafC, kLeafD};
    for_each_tuple(level.size(), p, [&](std::span<const std::size_t> idx) {
      for (std::size_t q = 0; q < idx.size(); ++q) kids[q] = level[idx[q]];
      next.push_back(combine(kids));
    });
    level = std::move(next);
  }
  if (tree_count(k, p) > static_cast<double>(stream_cap)) {
    throw PreconditionError(fmt::format("T_{}({}) has {:.0f} trees, above the streaming cap of {}",
                                        p, k, tree_count(k, p), stream_cap));
  }
  visit(kLeafC);
  visit(kLeafD);
  for_each_tuple(level.size(), p, [&](std::span<const std::size_t> idx) {
    for (std::size_t q = 0; q < idx.size(); ++q) kids[q] = level[idx[q]];
    visit(combine(kids));
  });
  return st;
}

double theta_sum_exact(int k, double xi, int p) {
  return level_statistics(k, p, {xi}).theta_exact.front();
}

double theta_sum_upper(int k, double xi) {
  if (k < 0) throw PreconditionError("tree level k must be >= 0");
  if (!(xi >= 0.0)) throw PreconditionError("theta_sum_upper needs xi >= 0");
  double v = 1.0 + xi;
  for (int j = 1; j <= k; ++j) v = 1.0 + xi + xi * v * v;
  return v;
}

TreeEvaluator::TreeEvaluator(InitialData data, TimeGrid grid, FrequencyVector omega,
                             QuadratureRule rule)
    : data_(std::move(data)), grid_(grid), omega_(std::move(omega)), quad_(grid_, rule) {
  data_.validate();
  if (ball()->nu() != omega_.nu()) throw PreconditionError("ball and omega dimensions differ");
}

std::vector<double> TreeEvaluator::eval_J(const Tree& tree, std::span<const std::size_t> leaf_modes,
                                          std::size_t& cursor, std::vector<int>& mu,
                                          bool& inside) const {
  const int nodes = grid_.nodes();
  std::vector<double> J(static_cast<std::size_t>(nodes));
  if (tree.is_leaf()) {
    const auto pt = ball()->point(leaf_modes[cursor++]);
    for (std::size_t d = 0; d < mu.size(); ++d) mu[d] = pt[d];
    const auto kv = kernels(pt, omega_);
    for (int j = 0; j < nodes; ++j) {
      J[static_cast<std::size_t>(j)] = tree.label() == LeafLabel::C
                                           ? propagator_G(kv, grid_.node(j))
                                           : propagator_K(kv, grid_.node(j));
    }
    return J;
  }
  std::vector<double> prod(static_cast<std::size_t>(nodes), 1.0);
  std::vector<int> node_mu(mu.size(), 0), child_mu(mu.size());
  for (const auto& child : tree.children()) {
    const auto cj = eval_J(*child, leaf_modes, cursor, child_mu, inside);
    for (int j = 0; j < nodes; ++j) prod[static_cast<std::size_t>(j)] *= cj[static_cast<std::size_t>(j)];
    for (std::size_t d = 0; d < mu.size(); ++d) node_mu[d] += child_mu[d];
  }
  mu = node_mu;
  if (!ball()->contains(mu)) inside = false;
  const auto kv = kernels(mu, omega_);
  std::vector<double> phi(static_cast<std::size_t>(nodes));
  for (int l = 0; l < nodes; ++l) phi[static_cast<std::size_t>(l)] = propagator_Phi(kv, grid_.node(l));
  for (int j = 0; j < nodes; ++j) {
    const auto w = quad_.weights(j);
    double acc = 0.0;
    for (int l = 0; l <= j; ++l) {
      acc += w[static_cast<std::size_t>(l)] * phi[static_cast<std::size_t>(j - l)] *
             prod[static_cast<std::size_t>(l)];
    }
    J[static_cast<std::size_t>(j)] = -acc;
  }
  return J;
}

TreeTerm TreeEvaluator::term(const Tree& tree, std::span<const std::size_t> leaf_modes) const {
  const auto& idx = tree.indices();
  if (leaf_modes.size() != static_cast<std::size_t>(idx.sigma)) {
    throw PreconditionError(fmt::format("tree has {} leaves, {} frequencies given", idx.sigma,
                                        leaf_modes.size()));
  }
  TreeTerm out;
  const auto fl = flatten(tree);
  out.C = cplx{1.0, 0.0};
  for (std::size_t q = 0; q < fl.labels.size(); ++q) {
    out.C *= fl.labels[q] == LeafLabel::C ? data_.position[leaf_modes[q]]
                                          : data_.velocity[leaf_modes[q]];
  }
  std::size_t cursor = 0;
  std::vector<int> mu(static_cast<std::size_t>(ball()->nu()), 0);
  out.J = eval_J(tree, leaf_modes, cursor, mu, out.inside);
  out.mu = LatticeVector(std::move(mu));
  return out;
}

Snapshot TreeEvaluator::expansion(int k, int p, std::uint64_t cost_cap) const {
  const auto trees = enumerate_trees(k, p);
  const double n_modes = static_cast<double>(ball()->size());
  double cost = 0.0;
  for (const auto& t : trees) cost += std::pow(n_modes, t->indices().sigma);
  if (cost > static_cast<double>(cost_cap)) {
    throw PreconditionError(fmt::format(
        "tree expansion needs {:.3g} leaf assignments, above the cap of {}", cost, cost_cap));
  }
  Snapshot out(ball(), grid_.nodes());
  for (const auto& t : trees) {
    const auto sigma = t->indices().sigma;
    std::vector<std::size_t> modes(static_cast<std::size_t>(sigma), 0);
    while (true) {
      const auto tt = term(*t, modes);
      if (tt.inside && tt.C != cplx{0.0, 0.0}) {
        const auto at = ball()->find(tt.mu);
        for (int j = 0; j < grid_.nodes(); ++j) out(j, at) += tt.C * tt.J[static_cast<std::size_t>(j)];
      }
      std::size_t pos = 0;
      while (pos < modes.size() && ++modes[pos] == ball()->size()) modes[pos++] = 0;
      if (pos == modes.size()) break;
    }
  }
  out.set_hermitian(data_.hermitian());
  return out;
}

Snapshot tree_expansion_eval(int k, const InitialData& data, const TimeGrid& grid,
                             const FrequencyVector& omega, int p, QuadratureRule rule) {
  return TreeEvaluator(data, grid, omega, rule).expansion(k, p);
}

}  // namespace qpb
