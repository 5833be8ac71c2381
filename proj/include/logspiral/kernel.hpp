#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "logspiral/params.hpp"

// Closed-form evaluation of the 2pi/m-periodic Green's function K of the
// angular operator 4 - 4 beta d/dtheta + (1+beta^2) d^2/dtheta^2.  K is
// analytic inside the fundamental domain (0, 2pi/m) and its derivative jumps
// across theta = 0; boundary values use the averaged one-sided limits.
// Intermediate arithmetic runs in extended precision so that values stay
// accurate near the zeros of K.

namespace logspiral {

enum class AsymptoticRegime { small_beta, large_beta };

struct KernelBoundaryData {
  double k0;         // K(0) = K(2pi/m)
  double kp0;        // averaged derivative limit (K'(0+) + K'((2pi/m)-))/2
  double kp0_right;  // K'(0+)
  double kp0_left;   // K'((2pi/m)-)
  double jump;       // |K'(0+) - K'((2pi/m)-)|
};

struct OddEvenParts {
  double even;       // (K(theta) + K(-theta))/2
  double odd;        // (K(theta) - K(-theta))/2
  double odd_deriv;  // (K'(theta) + K'(-theta))/2, continuous through 0
};

namespace detail {

using cld = std::complex<long double>;

struct KernelFactors {
  cld scale;   // 2(beta - i)/(m(1+beta^2)), multiplies (m theta - pi)
  cld growth;  // d/dtheta of the exponent: 2(beta - i)/(1+beta^2)
  cld csc;     // 1/sin(2pi(1+i beta)/(m(1+beta^2)))
  cld cot;     // cot(2pi(1+i beta)/(m(1+beta^2)))
};

inline KernelFactors kernel_factors(const SpiralParams& p) {
  const long double b = static_cast<long double>(p.beta);
  const long double bb = 1.0L + b * b;
  const long double m = static_cast<long double>(p.m);
  KernelFactors f;
  f.growth = cld(2.0L * b, -2.0L) / bb;
  f.scale = f.growth / m;
  const cld arg = cld(1.0L, b) * (static_cast<long double>(two_pi) / (m * bb));
  const cld s = std::sin(arg);
  f.csc = cld(1.0L, 0.0L) / s;
  f.cot = std::cos(arg) / s;
  return f;
}

/// Reduced angle, rejecting points on the sheet (theta = 0 mod 2pi/m).
inline double kernel_angle(const SpiralParams& p, double theta) {
  const double t = reduce_angle(p, theta);
  if (t == 0.0)
    throw std::domain_error("kernel: theta lies on the sheet (0 mod 2pi/m)");
  return t;
}

inline cld kernel_core(const SpiralParams& p, double theta) {
  const auto f = kernel_factors(p);
  const long double arg = static_cast<long double>(p.m) * static_cast<long double>(theta) -
                          static_cast<long double>(pi);
  return std::exp(f.scale * arg) * f.csc;
}

}  // namespace detail

inline double kernel_eval(const SpiralParams& p, double theta) {
  validate(p);
  const double t = detail::kernel_angle(p, theta);
  return static_cast<double>(0.25L * detail::kernel_core(p, t).real());
}

inline double kernel_deriv(const SpiralParams& p, double theta) {
  validate(p);
  const double t = detail::kernel_angle(p, theta);
  const auto f = detail::kernel_factors(p);
  return static_cast<double>(0.25L * (f.growth * detail::kernel_core(p, t)).real());
}

inline double kernel_second_deriv(const SpiralParams& p, double theta) {
  validate(p);
  const double t = detail::kernel_angle(p, theta);
  const auto f = detail::kernel_factors(p);
  return static_cast<double>(0.25L * (f.growth * f.growth * detail::kernel_core(p, t)).real());
}

inline KernelBoundaryData kernel_boundary(const SpiralParams& p) {
  validate(p);
  const auto f = detail::kernel_factors(p);
  const detail::cld i(0.0L, 1.0L);
  KernelBoundaryData b;
  b.k0 = static_cast<double>(0.25L * f.cot.real());
  b.kp0 = static_cast<double>(0.25L * (f.growth * f.cot).real());
  b.kp0_right = static_cast<double>(0.25L * (f.growth * (f.cot + i)).real());
  b.kp0_left = static_cast<double>(0.25L * (f.growth * (f.cot - i)).real());
  b.jump = std::abs(b.kp0_right - b.kp0_left);
  return b;
}

inline OddEvenParts kernel_odd_even(const SpiralParams& p, double theta) {
  validate(p);
  const double t = reduce_angle(p, theta);
  if (t == 0.0) {
    const auto b = kernel_boundary(p);
    return {b.k0, 0.0, b.kp0};  // limit values through the sheet
  }
  const double L = fundamental_period(p);
  const double kp = kernel_eval(p, t);
  const double km = kernel_eval(p, L - t);
  return {0.5 * (kp + km), 0.5 * (kp - km),
          0.5 * (kernel_deriv(p, t) + kernel_deriv(p, L - t))};
}

/// Leading-order expansion of the single-fold kernel.  The remainder is O(1)
/// in the small-beta regime (the expansion is relative to the 1/beta leading
/// term) and O(beta^-3) in the large-beta regime.
inline double kernel_asymptotic(const SpiralParams& p, double theta, AsymptoticRegime r) {
  validate(p);
  if (p.m != 1)
    throw std::invalid_argument("kernel_asymptotic: expansions are available for m = 1 only");
  const double t = reduce_angle(p, theta);
  if (r == AsymptoticRegime::small_beta) return -std::sin(2.0 * t) / (8.0 * pi * p.beta);
  return 1.0 / (8.0 * pi) + (two_pi - t) * t / (4.0 * pi * p.beta * p.beta);
}

inline double kernel_asymptotic_deriv(const SpiralParams& p, double theta, AsymptoticRegime r) {
  validate(p);
  if (p.m != 1)
    throw std::invalid_argument("kernel_asymptotic_deriv: expansions are available for m = 1 only");
  const double t = reduce_angle(p, theta);
  if (r == AsymptoticRegime::small_beta) return -std::cos(2.0 * t) / (4.0 * pi * p.beta);
  return (pi - t) / (two_pi * p.beta * p.beta);
}

}  // namespace logspiral
