#pragma once

#include <cmath>
#include <stdexcept>

namespace logspiral {

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr double two_pi = 2.0 * pi;

/// Parameters shared by every module: the spiral pitch beta (nonzero, either
/// sign) and the fold symmetry m >= 1.  All angular profiles live on the
/// fundamental domain [0, 2pi/m) and are extended 2pi/m-periodically.
struct SpiralParams {
  double beta = 1.0;
  int m = 1;
};

inline void validate(const SpiralParams& p) {
  if (!std::isfinite(p.beta) || p.beta == 0.0)
    throw std::invalid_argument("SpiralParams: beta must be finite and nonzero");
  if (p.m < 1)
    throw std::invalid_argument("SpiralParams: fold symmetry m must be >= 1");
}

inline double fundamental_period(const SpiralParams& p) {
  return two_pi / static_cast<double>(p.m);
}

/// Reduce an angle into [0, 2pi/m).
inline double reduce_angle(const SpiralParams& p, double theta) {
  const double L = fundamental_period(p);
  double r = theta - L * std::floor(theta / L);
  if (r >= L) r -= L;  // floor rounding can land exactly on the seam
  if (r < 0.0) r += L;
  return r;
}

/// Shortest signed distance between two angles on the reduced circle,
/// in (-pi/m, pi/m].
inline double angular_distance(const SpiralParams& p, double a, double b) {
  const double L = fundamental_period(p);
  double d = reduce_angle(p, a - b);
  if (d > 0.5 * L) d -= L;
  return d;
}

}  // namespace logspiral
