#ifndef ATAMG_TYPES_HPP
#define ATAMG_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <limits>

namespace atamg {

using Index = Eigen::Index;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;

/// Relative eigenvalue cutoff used for every pseudo-inverse, kernel and
/// rank decision unless a caller overrides it.
inline constexpr double kRankTol = 1e-10;

/// A nonnegative value extended with +infinity, as returned by the
/// coarsening measures. +infinity compares larger than any finite value.
class ExtendedReal {
public:
  constexpr ExtendedReal() : value_(0.0) {}
  constexpr explicit ExtendedReal(double v) : value_(v) {}

  static constexpr ExtendedReal infinity() {
    return ExtendedReal(std::numeric_limits<double>::infinity());
  }

  constexpr bool is_finite() const { return value_ != std::numeric_limits<double>::infinity(); }
  constexpr double value() const { return value_; }

  friend constexpr bool operator<(ExtendedReal a, ExtendedReal b) { return a.value_ < b.value_; }
  friend constexpr bool operator>(ExtendedReal a, ExtendedReal b) { return b < a; }
  friend constexpr bool operator<=(ExtendedReal a, ExtendedReal b) { return !(b < a); }
  friend constexpr bool operator>=(ExtendedReal a, ExtendedReal b) { return !(a < b); }

  friend constexpr bool operator<(ExtendedReal a, double b) { return a.value_ < b; }
  friend constexpr bool operator>=(ExtendedReal a, double b) { return !(a.value_ < b); }

private:
  double value_;
};

/// Deterministic 64-bit generator (splitmix64). Used for randomized test
/// vectors in diagnostics; identical sequences on every platform.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [-1, 1).
  double uniform_sym() { return 2.0 * uniform() - 1.0; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next() % n; }

private:
  std::uint64_t state_;
};

} // namespace atamg

#endif
