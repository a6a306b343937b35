#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qpb/lattice.hpp"
#include "qpb/picard.hpp"

namespace qpb {

enum class LeafLabel { C, D };

struct TreeIndices {
  int sigma = 1;        // leaves
  int ell = 0;          // effective time degree
  std::uint64_t D = 1;  // denominator
  int iota = 0;         // branchings
};

/// Leaf (c or d) or a node with p subtrees. Subtrees are shared, immutable.
class Tree {
 public:
  using Ptr = std::shared_ptr<const Tree>;

  static Ptr leaf(LeafLabel label);
  /// Throws PreconditionError if fewer than two children are given, or if the
  /// denominator overflows 64 bits.
  static Ptr node(std::vector<Ptr> children);

  bool is_leaf() const { return children_.empty(); }
  LeafLabel label() const { return label_; }
  const std::vector<Ptr>& children() const { return children_; }
  int arity() const { return static_cast<int>(children_.size()); }
  const TreeIndices& indices() const { return idx_; }

 private:
  Tree() = default;

  LeafLabel label_ = LeafLabel::C;
  std::vector<Ptr> children_;
  TreeIndices idx_;
};

TreeIndices indices(const Tree& t);
/// Node indices from the children's indices.
TreeIndices combine(std::span<const TreeIndices> children);

/// "c", "d", "(c,d)", "((c,c),d)", ...
std::string to_string(const Tree& t);

struct Flattened {
  std::vector<LeafLabel> labels;        // left to right
  std::vector<std::vector<int>> paths;  // child positions from the root to each leaf
};
Flattened flatten(const Tree& t);

constexpr std::size_t kTreeCountCap = 2'000'000;

/// Members of T_p(k) = {c, d} u T_p(k-1)^p with sigma <= leaf_cap (0 = no cap),
/// leaves first, then p-tuples in lexicographic order of the previous level.
/// Throws PreconditionError if the count would exceed count_cap.
std::vector<Tree::Ptr> enumerate_trees(int k, int p, int leaf_cap = 0,
                                       std::size_t count_cap = kTreeCountCap);

/// Number of trees in T_p(k) with sigma <= leaf_cap, computed without enumeration.
double tree_count(int k, int p, int leaf_cap = 0);

struct LevelStatistics {
  int k = 0;
  int p = 2;
  std::uint64_t count = 0;
  int max_sigma = 0;
  int max_ell = 0;
  int max_iota = 0;
  std::uint64_t max_D = 0;
  // Trees violating sigma <= (p-1) ell + 1, sigma = (p-1) iota + 1, iota <= ell, D >= 1.
  std::uint64_t leaf_bound_violations = 0;
  std::uint64_t leaf_identity_violations = 0;
  std::uint64_t branching_violations = 0;
  std::uint64_t denominator_violations = 0;
  std::vector<double> xi;
  std::vector<double> theta_exact;  // sum over the level of xi^ell / D, per xi
};

/// Index statistics of T_p(k). The top level is streamed from the index list
/// of level k - 1, so the trees themselves are never materialized there.
/// Throws PreconditionError when level k - 1 exceeds kTreeCountCap or the
/// streamed level exceeds stream_cap.
LevelStatistics level_statistics(int k, int p, const std::vector<double>& xi,
                                 std::uint64_t stream_cap = 100'000'000);

/// Theta_k(xi) = sum over T_p(k) of xi^ell / D.
double theta_sum_exact(int k, double xi, int p = 2);
/// 1 + xi + xi Theta_{k-1}^2 with Theta_0 = 1 + xi. Throws if xi < 0.
double theta_sum_upper(int k, double xi);

/// C and J of one tree at one assignment of leaf frequencies m_1..m_sigma.
struct TreeTerm {
  cplx C{0.0, 0.0};
  std::vector<double> J;  // J(t_j, m) at every grid node
  LatticeVector mu;       // sum of the leaf frequencies
  bool inside = true;     // every node frequency lies in the ball
};

/// Context shared by tree term evaluations: the data, grid and quadrature rule
/// of a Picard engine.
class TreeEvaluator {
 public:
  TreeEvaluator(InitialData data, TimeGrid grid, FrequencyVector omega,
                QuadratureRule rule = QuadratureRule::Trapezoid);

  const BallPtr& ball() const { return data_.position.ball_ptr(); }
  const TimeGrid& grid() const { return grid_; }

  /// leaf_modes holds ball indices in flattening order (size sigma). Node
  /// frequencies outside the ball are still evaluated, with inside = false.
  TreeTerm term(const Tree& tree, std::span<const std::size_t> leaf_modes) const;

  /// sum over T_p(k) and over leaf tuples in ball^sigma whose node frequencies
  /// all lie in the ball of C J, placed at mu. Throws PreconditionError when
  /// sum over trees of |ball|^sigma exceeds cost_cap.
  Snapshot expansion(int k, int p, std::uint64_t cost_cap = 50'000'000) const;

 private:
  std::vector<double> eval_J(const Tree& tree, std::span<const std::size_t> leaf_modes,
                             std::size_t& cursor, std::vector<int>& mu, bool& inside) const;

  InitialData data_;
  TimeGrid grid_;
  FrequencyVector omega_;
  Quadrature quad_;
};

/// TreeEvaluator(data, grid, omega, rule).expansion(k, p).
Snapshot tree_expansion_eval(int k, const InitialData& data, const TimeGrid& grid,
                             const FrequencyVector& omega, int p = 2,
                             QuadratureRule rule = QuadratureRule::Trapezoid);

}  // namespace qpb
