#include "qpb/quadrature.hpp"

#include <cmath>

#include <fmt/format.h>

#include "qpb/lattice.hpp"

namespace qpb {

TimeGrid::TimeGrid(double T, int n_steps) : horizon(T), steps(n_steps) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw PreconditionError("time horizon must be >= 0");
  if (n_steps <= 0 || n_steps % 2 != 0) {
    throw PreconditionError(
        fmt::format("time_steps must be a positive even integer, got {}", n_steps));
  }
}

std::string to_string(QuadratureRule rule) {
  return rule == QuadratureRule::Trapezoid ? "trapezoid" : "simpson";
}

QuadratureRule parse_quadrature(const std::string& name) {
  if (name == "trapezoid") return QuadratureRule::Trapezoid;
  if (name == "simpson") return QuadratureRule::Simpson;
  throw PreconditionError(fmt::format("unknown quadrature '{}'", name));
}

namespace {

void add_trapezoid(std::span<double> w, int from, int to, double h) {
  for (int i = from; i < to; ++i) {
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
}

void add_simpson(std::span<double> w, int from, int to, double h) {
  for (int i = from; i < to; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
}

void add_three_eighths(std::span<double> w, int from, double h) {
  const double c = 3.0 * h / 8.0;
  w[from] += c;
  w[from + 1] += 3.0 * c;
  w[from + 2] += 3.0 * c;
  w[from + 3] += c;
}

}  // namespace

Quadrature::Quadrature(const TimeGrid& grid, QuadratureRule rule)
    : rule_(rule), steps_(grid.steps) {
  const double h = grid.spacing();
  offsets_.resize(static_cast<std::size_t>(steps_) + 1);
  std::size_t total = 0;
  for (int j = 0; j <= steps_; ++j) {
    offsets_[static_cast<std::size_t>(j)] = total;
    total += static_cast<std::size_t>(j) + 1;
  }
  weights_.assign(total, 0.0);
  for (int j = 1; j <= steps_; ++j) {
    std::span<double> w(weights_.data() + offsets_[static_cast<std::size_t>(j)],
                        static_cast<std::size_t>(j) + 1);
    if (rule_ == QuadratureRule::Trapezoid || j == 1) {
      add_trapezoid(w, 0, j, h);
    } else if (j % 2 == 0) {
      add_simpson(w, 0, j, h);
    } else {
      add_simpson(w, 0, j - 3, h);
      add_three_eighths(w, j - 3, h);
    }
  }
}

}  // namespace qpb
