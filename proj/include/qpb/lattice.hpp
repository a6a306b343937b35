#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpb {

/// Raised when an operation is called outside its documented domain.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Integer point n = (n_1, ..., n_nu) of Z^nu.
class LatticeVector {
 public:
  LatticeVector() = default;
  LatticeVector(std::initializer_list<int> coords) : coords_(coords) {}
  explicit LatticeVector(std::vector<int> coords) : coords_(std::move(coords)) {}
  explicit LatticeVector(std::span<const int> coords)
      : coords_(coords.begin(), coords.end()) {}

  int nu() const { return static_cast<int>(coords_.size()); }
  std::span<const int> coords() const { return coords_; }
  int operator[](std::size_t d) const { return coords_[d]; }

  friend bool operator==(const LatticeVector&, const LatticeVector&) = default;
  friend auto operator<=>(const LatticeVector&, const LatticeVector&) = default;

 private:
  std::vector<int> coords_;
};

int l1_norm(std::span<const int> n);
inline int l1_norm(const LatticeVector& n) { return l1_norm(n.coords()); }

std::string to_string(std::span<const int> n);

/// Base frequencies omega in R^nu. Entries must be finite.
class FrequencyVector {
 public:
  FrequencyVector() = default;
  FrequencyVector(std::initializer_list<double> w);
  explicit FrequencyVector(std::vector<double> w);

  int nu() const { return static_cast<int>(omega_.size()); }
  std::span<const double> values() const { return omega_; }
  double operator[](std::size_t d) const { return omega_[d]; }

  /// C_omega = max_j |omega_j|.
  double max_abs() const;

 private:
  std::vector<double> omega_;
};

/// The l1 truncation ball {n in Z^nu : |n| <= N}, points in lexicographic order.
///
/// Points are stored flat (nu ints per point). A dense lookup table over the
/// bounding box [-N, N]^nu maps coordinates back to ball indices, so
/// membership tests cost O(nu).
class Ball {
 public:
  static constexpr std::size_t kDefaultPointCap = 5'000'000;
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  /// Throws PreconditionError if nu < 1, N < 0, or the ball (or its lookup
  /// box) would exceed point_cap entries.
  static std::shared_ptr<const Ball> make(int nu, int radius,
                                          std::size_t point_cap = kDefaultPointCap);

  int nu() const { return nu_; }
  int radius() const { return radius_; }
  std::size_t size() const { return norms_.size(); }

  std::span<const int> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(nu_), static_cast<std::size_t>(nu_)};
  }
  LatticeVector vector(std::size_t i) const { return LatticeVector(point(i)); }
  int norm(std::size_t i) const { return norms_[i]; }

  /// Index of n in the ball, or npos when |n| > N.
  std::size_t find(std::span<const int> n) const;
  std::size_t find(const LatticeVector& n) const { return find(n.coords()); }
  bool contains(std::span<const int> n) const { return find(n) != npos; }

  std::size_t zero_index() const { return zero_; }
  /// Index of -n for the point stored at i.
  std::size_t negated(std::size_t i) const { return negated_[i]; }

  bool same_as(const Ball& other) const {
    return nu_ == other.nu_ && radius_ == other.radius_;
  }

 private:
  Ball() = default;

  int nu_ = 0;
  int radius_ = 0;
  std::vector<int> coords_;
  std::vector<int> norms_;
  std::vector<std::size_t> negated_;
  std::vector<std::int64_t> strides_;
  std::vector<std::uint32_t> box_;  // box slot -> ball index + 1, 0 = absent
  std::size_t zero_ = 0;
};

using BallPtr = std::shared_ptr<const Ball>;

/// Number of lattice points with |n| <= N, by the shell-count formula.
std::uint64_t ball_cardinality(int nu, int radius);

/// theta_n = <n, omega>.
double theta(std::span<const int> n, const FrequencyVector& omega);
inline double theta(const LatticeVector& n, const FrequencyVector& omega) {
  return theta(n.coords(), omega);
}

struct KernelValue {
  double theta = 0.0;
  double omega_n = 0.0;  // Omega(n) = |theta| / sqrt(1 + theta^2)
  double beta_n = 0.0;   // beta(n) = theta^2 / (1 + theta^2)
};

KernelValue kernels_from_theta(double th);
inline KernelValue kernels(std::span<const int> n, const FrequencyVector& omega) {
  return kernels_from_theta(theta(n, omega));
}
inline KernelValue kernels(const LatticeVector& n, const FrequencyVector& omega) {
  return kernels(n.coords(), omega);
}

// Propagators of the linearized mode equation c'' + Omega^2 c = 0.
// Omega = 0 (in particular n = 0) gives G = 1, K = t, Phi = 0.
double propagator_G(const KernelValue& kv, double t);
double propagator_K(const KernelValue& kv, double t);
double propagator_Phi(const KernelValue& kv, double t);

inline double propagator_G(const LatticeVector& n, const FrequencyVector& w, double t) {
  return propagator_G(kernels(n, w), t);
}
inline double propagator_K(const LatticeVector& n, const FrequencyVector& w, double t) {
  return propagator_K(kernels(n, w), t);
}
inline double propagator_Phi(const LatticeVector& n, const FrequencyVector& w, double t) {
  return propagator_Phi(kernels(n, w), t);
}

struct SmallDivisorReport {
  double min_abs_theta = std::numeric_limits<double>::infinity();
  LatticeVector argmin;
  double threshold = 0.0;
  bool warning = false;
};

/// Smallest |<n, omega>| over 0 < |n| <= N. Warns when it falls below threshold.
/// Ties resolve to the lexicographically first point.
SmallDivisorReport small_divisor_report(const FrequencyVector& omega, int radius,
                                        double threshold = 1e-8);

}  // namespace qpb
