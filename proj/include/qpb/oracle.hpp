#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpb/convolution.hpp"
#include "qpb/picard.hpp"

namespace qpb {

struct OdeState {
  LatticeField position;  // c(t, n)
  LatticeField velocity;  // c_t(t, n)
};

struct Trajectory {
  std::vector<double> times;
  std::vector<OdeState> states;
  bool aborted = false;        // state became non-finite
  double last_good_time = 0.0;
  std::string message;
};

/// Classical RK4 for c'' = -beta(n) (c + c^{*p}) on the ball (beta = Omega^2),
/// recording every `record_every` steps (t = 0 included). Mode n = 0 evolves
/// as c'' = 0. Throws PreconditionError unless dt > 0 and T / dt is an integer
/// (to 1e-9 relative); stops with aborted = true when the state turns non-finite.
Trajectory rk4_integrate(const InitialData& data, const FrequencyVector& omega, int p, double T,
                         double dt, int record_every = 1, Execution exec = Execution::Serial);

struct OracleComparison {
  double sup_diff = 0.0;
  int worst_j = -1;
  LatticeVector worst_n;
  double tol = 0.0;
  bool passed = false;
};

/// sup over grid nodes and modes of |c(t_j, n) - c_oracle(t_j, n)|.
/// The trajectory must be recorded exactly at the grid nodes.
OracleComparison compare_picard_oracle(const Snapshot& picard, const TimeGrid& grid,
                                       const Trajectory& oracle, double tol);
OracleComparison compare_picard_oracle(const PicardRun& run, const Trajectory& oracle,
                                       double tol);

enum class CttSource {
  OdeRightSide,       // c_tt = -beta (c + c^{*p}); an algebraic consistency check
  CentralDifference,  // second difference over t_{j-1}, t_j, t_{j+1}
};

enum class NonlinearScope {
  Ball,  // c^{*p} truncated to the ball, as in the solver
  Full,  // c^{*p} on the ball of radius p N, as u^p in physical space
};

struct ResidualOptions {
  CttSource ctt = CttSource::OdeRightSide;
  NonlinearScope scope = NonlinearScope::Ball;
};

struct ResidualReport {
  double max_abs = 0.0;  // max over samples of |R(t_j, x)|
  double at_x = 0.0;
  std::vector<double> values;  // |R| per sample
};

/// 65 equispaced points on [0, 2 pi / C_omega].
std::vector<double> default_x_samples(const FrequencyVector& omega, int count = 65);

/// R(t_j, x) = sum_n [(1 + theta^2) c_tt + theta^2 c + theta^2 c^{*p}](n) e^{i theta_n x},
/// the coefficient form of u_tt - u_xx - u_xxtt - (u^p)_xx.
/// CentralDifference needs 0 < t_index < steps.
ResidualReport pde_residual(const Snapshot& snap, const TimeGrid& grid,
                            const FrequencyVector& omega, int p, int t_index,
                            std::span<const double> x_samples, ResidualOptions opts = {});

/// The same residual assembled in physical space from u(t, x) = sum c e^{i theta x}:
/// u_tt by the time second difference, x-derivatives by second differences of
/// step h_x with one Richardson extrapolation, u^p pointwise.
ResidualReport physical_residual(const Snapshot& snap, const TimeGrid& grid,
                                 const FrequencyVector& omega, int p, int t_index,
                                 std::span<const double> x_samples, double h_x);

/// max over stored iterates, nodes of |c_k(t_j, 0) - c(0) - t_j d(0)|.
double zero_mode_error(const PicardRun& run, const InitialData& data);

}  // namespace qpb
