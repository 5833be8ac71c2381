/// @file field.hpp
/// @brief Periodic grid fields on the fundamental domain, the spectral
///        elliptic solve H = K*h, and scalar diagnostics.
///
/// A field samples h at theta_k = 2 pi k / (m n), k = 0..n-1, covering one
/// fundamental period of an m-fold symmetric function.  Reduced mode l of
/// the transform therefore carries underlying wavenumber nu = l m, and the
/// elliptic multiplier is evaluated at nu.  All reported integrals refer to
/// the full circle: quantities computed on the reduced domain are scaled
/// by m.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "logspiral/fft.hpp"
#include "logspiral/params.hpp"

namespace logspiral {

struct AngularField {
  SpiralParams params;
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  double spacing() const { return fundamental_period(params) / size(); }
  double theta(int k) const { return spacing() * k; }
};

struct SpectralField {
  SpiralParams params;
  std::vector<std::complex<double>> coeffs;

  int size() const { return static_cast<int>(coeffs.size()); }
  double wavenumber(int l) const {
    return double(detail::signed_frequency(l, size())) * params.m;
  }
};

inline void validate_field(const AngularField& f) {
  const int n = f.size();
  if (n < 16 || !detail::is_pow2(n))
    throw std::invalid_argument("field grid size must be a power of two, at least 16");
  for (double v : f.values)
    if (!std::isfinite(v)) throw std::invalid_argument("field values must be finite");
}

inline AngularField make_field(const SpiralParams& p, std::vector<double> values) {
  AngularField f{p, std::move(values)};
  validate_field(f);
  return f;
}

template <typename F>
AngularField make_field(const SpiralParams& p, int n, F&& fn) {
  if (n < 16 || !detail::is_pow2(n))
    throw std::invalid_argument("field grid size must be a power of two, at least 16");
  std::vector<double> values(n);
  const double dt = fundamental_period(p) / n;
  for (int k = 0; k < n; ++k) values[k] = fn(dt * k);
  return make_field(p, std::move(values));
}

inline SpectralField transform(const AngularField& f) {
  const int n = f.size();
  std::vector<std::complex<double>> c(f.values.begin(), f.values.end());
  detail::fft_inplace(c, -1);
  for (auto& z : c) z /= double(n);
  return SpectralField{f.params, std::move(c)};
}

inline AngularField inverse_transform(const SpectralField& s) {
  std::vector<std::complex<double>> c = s.coeffs;
  detail::fft_inplace(c, +1);
  std::vector<double> values(c.size());
  for (size_t k = 0; k < c.size(); ++k) values[k] = c[k].real();
  return AngularField{s.params, std::move(values)};
}

inline std::complex<double> elliptic_denominator(const SpiralParams& p, double nu) {
  return {4.0 - (1.0 + p.beta * p.beta) * nu * nu, -4.0 * p.beta * nu};
}

struct EllipticSolution {
  AngularField H;
  AngularField Hp;
};

/// Solves 4H - 4 beta H' + (1+beta^2) H'' = h per mode and returns H with
/// its spectral derivative.  The Nyquist bin is dropped (its derivative is
/// not representable for a real field).  A mode with vanishing denominator
/// (pitch zero, wavenumber +-2) is rejected when its coefficient is present.
inline EllipticSolution solve_elliptic(const AngularField& h) {
  validate_field(h);
  SpectralField spec = transform(h);
  const int n = spec.size();
  double scale = 0.0;
  for (double v : h.values) scale = std::max(scale, std::abs(v));
  std::vector<std::complex<double>> dh(n);
  for (int l = 0; l < n; ++l) {
    if (l == n / 2) {
      spec.coeffs[l] = 0.0;
      dh[l] = 0.0;
      continue;
    }
    const double nu = spec.wavenumber(l);
    const std::complex<double> den = elliptic_denominator(h.params, nu);
    if (std::abs(den) == 0.0) {
      if (std::abs(spec.coeffs[l]) > 1e-12 * scale)
        throw std::invalid_argument("resonant elliptic mode at zero pitch");
      spec.coeffs[l] = 0.0;
      dh[l] = 0.0;
      continue;
    }
    spec.coeffs[l] /= den;
    dh[l] = std::complex<double>(0.0, nu) * spec.coeffs[l];
  }
  AngularField H = inverse_transform(spec);
  AngularField Hp = inverse_transform(SpectralField{h.params, std::move(dh)});
  return {std::move(H), std::move(Hp)};
}

inline AngularField spectral_derivative(const AngularField& f) {
  SpectralField spec = transform(f);
  const int n = spec.size();
  for (int l = 0; l < n; ++l) {
    if (l == n / 2) {
      spec.coeffs[l] = 0.0;
      continue;
    }
    spec.coeffs[l] *= std::complex<double>(0.0, spec.wavenumber(l));
  }
  return inverse_transform(spec);
}

struct Diagnostics {
  double intensity = 0.0;
  double dissipation = 0.0;
  std::vector<std::pair<double, double>> lp_norms;
  double l1_time_integral = 0.0;
};

/// Full-circle intensity integral of h.
inline double intensity(const AngularField& f) {
  double sum = 0.0;
  for (double v : f.values) sum += v;
  return two_pi * sum / f.size();
}

/// Grid L^p norm on the full circle; p = infinity gives the sup.
inline double lp_norm(const AngularField& f, double p) {
  if (std::isinf(p)) {
    double s = 0.0;
    for (double v : f.values) s = std::max(s, std::abs(v));
    return s;
  }
  double sum = 0.0;
  for (double v : f.values) sum += std::pow(std::abs(v), p);
  return std::pow(two_pi * sum / f.size(), 1.0 / p);
}

/// Energy dissipation rate 8 beta int (H')^2 dtheta over the full circle,
/// computed mode by mode from the elliptic multiplier.
inline double dissipation_rate(const AngularField& h) {
  const SpectralField spec = transform(h);
  const int n = spec.size();
  double acc = 0.0;
  for (int l = 1; l < n; ++l) {
    if (l == n / 2) continue;
    const double nu = spec.wavenumber(l);
    const std::complex<double> den = elliptic_denominator(h.params, nu);
    if (std::abs(den) == 0.0) continue;
    acc += nu * nu * std::norm(spec.coeffs[l] / den);
  }
  return 8.0 * h.params.beta * two_pi * acc;
}

inline Diagnostics diagnostics(const AngularField& h,
                               const std::vector<double>& ps = {
                                   1.0, 2.0, std::numeric_limits<double>::infinity()}) {
  Diagnostics d;
  d.intensity = intensity(h);
  d.dissipation = dissipation_rate(h);
  d.lp_norms.reserve(ps.size());
  for (double p : ps) d.lp_norms.emplace_back(p, lp_norm(h, p));
  return d;
}

/// Negative-index Sobolev norm (sum over modes of (1+nu^2)^{-a} |h_nu|^2)^{1/2}.
inline double hminus_norm(const AngularField& h, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("hminus_norm requires a > 0");
  const SpectralField spec = transform(h);
  double acc = 0.0;
  for (int l = 0; l < spec.size(); ++l) {
    const double nu = spec.wavenumber(l);
    acc += std::pow(1.0 + nu * nu, -a) * std::norm(spec.coeffs[l]);
  }
  return std::sqrt(acc);
}

}  // namespace logspiral
