#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qpb/convolution.hpp"
#include "qpb/decay.hpp"
#include "qpb/field.hpp"
#include "qpb/quadrature.hpp"

namespace qpb {

/// Coefficients c(t_j, n) on every grid node and ball point (node-major).
class Snapshot {
 public:
  Snapshot() = default;
  Snapshot(BallPtr ball, int nodes)
      : ball_(std::move(ball)),
        nodes_(nodes),
        values_(static_cast<std::size_t>(nodes) * ball_->size(), cplx{}) {}

  const BallPtr& ball_ptr() const { return ball_; }
  const Ball& ball() const { return *ball_; }
  int nodes() const { return nodes_; }
  std::size_t modes() const { return ball_->size(); }

  cplx& operator()(int j, std::size_t i) { return values_[index(j, i)]; }
  const cplx& operator()(int j, std::size_t i) const { return values_[index(j, i)]; }

  std::span<cplx> row(int j) { return {values_.data() + index(j, 0), modes()}; }
  std::span<const cplx> row(int j) const { return {values_.data() + index(j, 0), modes()}; }

  LatticeField field(int j) const;
  void set_row(int j, const LatticeField& f);

  bool hermitian() const { return hermitian_; }
  void set_hermitian(bool h) { hermitian_ = h; }

  double sup_norm() const;

 private:
  std::size_t index(int j, std::size_t i) const {
    return static_cast<std::size_t>(j) * ball_->size() + i;
  }

  BallPtr ball_;
  int nodes_ = 0;
  std::vector<cplx> values_;
  bool hermitian_ = false;
};

/// sup_{j,n} |a - b|.
double sup_diff(const Snapshot& a, const Snapshot& b);
/// sup_{j,n} (1 + |n|)^r |a - b|.
double weighted_sup_diff(const Snapshot& a, const Snapshot& b, double r);

/// Initial positions c(n) and velocities d(n) on one ball.
struct InitialData {
  LatticeField position;
  LatticeField velocity;

  /// Throws PreconditionError on a ball mismatch, or when the Hermitian flag
  /// is set on either field and its defect exceeds tol.
  void validate(double tol = 1e-12) const;
  bool hermitian() const { return position.hermitian() && velocity.hermitian(); }
};

/// c(n) = d(n) = A * weight(n) (the class boundary), flagged Hermitian.
InitialData boundary_data(const BallPtr& ball, const DecaySpec& spec);
InitialData zero_data(const BallPtr& ball);
/// Seeded random data with |c(n)|, |d(n)| <= A weight(n). With `hermitian`,
/// values are paired as f(-n) = conj(f(n)) and f(0) is real.
InitialData random_data(const BallPtr& ball, const DecaySpec& spec, std::uint64_t seed,
                        bool hermitian);

struct PicardOptions {
  int power = 2;
  QuadratureRule quadrature = QuadratureRule::Trapezoid;
  Execution execution = Execution::Serial;
  // Largest Duhamel kernel table (entries) kept in memory; beyond it the
  // kernel is re-evaluated per (j, tau) node with the same arithmetic.
  std::size_t kernel_table_cap = std::size_t{1} << 26;
};

/// The discretized fixed-point map
///   (T c)(t_j, n) = c_0(t_j, n) - sum_i w^{(j)}_i Phi_n(t_j - t_i) (c(t_i, .)^{*p})(n).
class PicardEngine {
 public:
  PicardEngine(InitialData data, TimeGrid grid, FrequencyVector omega,
               PicardOptions opts = {});

  const InitialData& data() const { return data_; }
  const TimeGrid& grid() const { return grid_; }
  const FrequencyVector& omega() const { return omega_; }
  const PicardOptions& options() const { return opts_; }
  const Quadrature& quadrature() const { return quad_; }
  const BallPtr& ball() const { return data_.position.ball_ptr(); }
  const KernelValue& kernel(std::size_t mode) const { return kernels_[mode]; }
  bool kernel_table_cached() const { return !phi_table_.empty(); }

  /// Phi_n evaluated at the lag t_{lag}.
  double phi(std::size_t mode, int lag) const;

  /// c_0(t_j, n) = G_n(t_j) c(n) + K_n(t_j) d(n).
  const Snapshot& linear() const { return linear_; }

  /// One application of the fixed-point map.
  Snapshot step(const Snapshot& prev) const;

  /// The p-fold convolution of prev at every node.
  Snapshot nonlinearity(const Snapshot& prev) const;

 private:
  InitialData data_;
  TimeGrid grid_;
  FrequencyVector omega_;
  PicardOptions opts_;
  Quadrature quad_;
  PowerConvolver conv_;
  std::vector<KernelValue> kernels_;
  std::vector<double> phi_table_;  // [mode * nodes + lag]
  Snapshot linear_;
};

Snapshot linear_solution(const InitialData& data, const TimeGrid& grid,
                         const FrequencyVector& omega);
Snapshot picard_step(const Snapshot& prev, const InitialData& data, const TimeGrid& grid,
                     const FrequencyVector& omega, int p,
                     QuadratureRule rule = QuadratureRule::Trapezoid);

struct IterationDiff {
  int k = 0;
  double sup = 0.0;       // sup_{j,n} |c_k - c_{k-1}|
  double weighted = 0.0;  // sup_{j,n} (1+|n|)^r |c_k - c_{k-1}|, r = IterateOptions::diff_r
};

struct IterateOptions {
  int max_k = 12;
  double tol = 1e-12;
  bool keep_history = false;
  double diff_r = 0.0;
  // Perform all max_k steps even after the tolerance is met.
  bool run_all = false;
  // Starting point of the iteration; c_0 when empty.
  std::optional<Snapshot> initial_guess{};
};

struct PicardRun {
  TimeGrid grid;
  int power = 2;
  bool started_from_linear = true;
  bool converged = false;
  int last_k = 0;
  int first_stored = 0;           // iterate index of iterates.front()
  std::vector<Snapshot> iterates;  // all k with history, else the last two
  std::vector<IterationDiff> diffs;

  bool has_iterate(int k) const {
    return k >= first_stored && k - first_stored < static_cast<int>(iterates.size());
  }
  const Snapshot& iterate(int k) const;
  const Snapshot& final() const { return iterates.back(); }
};

/// Repeats the fixed-point map until sup |c_k - c_{k-1}| < tol or k = max_k.
PicardRun iterate(const PicardEngine& engine, const IterateOptions& opts = {});

PicardRun iterate(const InitialData& data, const TimeGrid& grid, const FrequencyVector& omega,
                  int p, int max_k, double tol);

struct BoundCheckReport {
  std::string name;
  bool applicable = true;
  bool passed = true;
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;  // max measured / bound
  int worst_k = -1;
  int worst_j = -1;
  LatticeVector worst_n;
  std::string note;
};

/// |c_k(t_j, n)| <= bound(n) (1 + rel_slack) for every stored k, every node and mode,
/// bound = B e^{-rho|n|/2} (exponential) or 2A (1+|n|)^{-r} (polynomial).
/// Throws PreconditionError when the grid horizon exceeds the proven horizon.
BoundCheckReport check_uniform_bound(const PicardRun& run, const ConstantsReport& consts,
                                     double rel_slack = 1e-6);

/// The p = 2 bound on |c_k(t, n) - c_{k-1}(t, n)| at |n| = norm, k >= 1:
///   exponential: (B b~/2) (2 B b~ t)^k / k! e^{-rho|n|/4}
///   polynomial:  A (4 A K t)^k / k! (1+|n|)^{-r}
double cauchy_bound_value(const ConstantsReport& consts, int k, double t, int norm);

/// Successive-difference bounds. For p = 2, per entry:
///   exponential: (B b~/2) (2 B b~ t)^k / k! e^{-rho|n|/4}
///   polynomial:  A (4 A K t)^k / k! (1+|n|)^{-r}
/// For p >= 3, the contraction of the fixed-point map: sup_t ||c_k - c_{k-1}|| <=
/// ||c_{k-1} - c_{k-2}|| / 16 in Y_{rho/2} (exponential) or X_r (polynomial).
/// Each comparison allows rel_slack plus a few ulps of the compared values.
BoundCheckReport check_cauchy_bound(const PicardRun& run, const ConstantsReport& consts,
                                    double rel_slack = 1e-6);

/// u(t_j, x) = sum_n c(t_j, n) e^{i theta_n x} at each sample x.
std::vector<cplx> reconstruct_u(const Snapshot& snap, const FrequencyVector& omega,
                                int t_index, std::span<const double> x_samples);
std::vector<cplx> reconstruct_u(const LatticeField& f, const FrequencyVector& omega,
                                std::span<const double> x_samples);

}  // namespace qpb
