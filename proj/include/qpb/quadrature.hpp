#pragma once

#include <span>
#include <string>
#include <vector>

namespace qpb {

/// Uniform nodes t_j = j T / steps, j = 0..steps.
struct TimeGrid {
  double horizon = 0.0;
  int steps = 0;

  TimeGrid() = default;
  /// Throws PreconditionError unless horizon >= 0 and steps is a positive even integer.
  TimeGrid(double T, int n_steps);

  int nodes() const { return steps + 1; }
  double spacing() const { return horizon / steps; }
  double node(int j) const { return horizon * j / steps; }
};

enum class QuadratureRule { Trapezoid, Simpson };

std::string to_string(QuadratureRule rule);
QuadratureRule parse_quadrature(const std::string& name);

/// Weights for int_0^{t_j} f(tau) dtau ~= sum_{i<=j} w^{(j)}_i f(t_i), every j.
///
/// Trapezoid: composite rule on all j panels. Simpson: composite Simpson for
/// even j; for odd j >= 3, Simpson on [0, t_{j-3}] plus the 3/8 rule on the last
/// three panels; j = 1 falls back to the trapezoid.
class Quadrature {
 public:
  Quadrature(const TimeGrid& grid, QuadratureRule rule);

  QuadratureRule rule() const { return rule_; }
  int steps() const { return steps_; }
  std::span<const double> weights(int j) const {
    return {weights_.data() + offsets_[static_cast<std::size_t>(j)],
            static_cast<std::size_t>(j + 1)};
  }

 private:
  QuadratureRule rule_;
  int steps_;
  std::vector<double> weights_;  // row j has j + 1 entries
  std::vector<std::size_t> offsets_;
};

}  // namespace qpb
