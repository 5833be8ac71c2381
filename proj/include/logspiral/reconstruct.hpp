#pragma once

/// Lifts reduced angular states to the plane.  A state h determines the 2D
/// fields through the spiral argument theta - beta ln r:
///
///   omega = h,   u^r = -r H',   u^theta = 2 r H - beta r H',   Psi = r^2 H,
///
/// together with the circulation over centered disks, the angular pressure
/// profile (p = r^2 P), and the spiral curves supporting atom
/// configurations.  Angular evaluation is band-limited interpolation of the
/// grid data (the Nyquist bin is dropped, as everywhere else).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "logspiral/dirac.hpp"
#include "logspiral/field.hpp"
#include "logspiral/params.hpp"

namespace logspiral {

/// Point evaluator for the plane fields of one angular state.  Holds the
/// line spectra of h, H, H' ordered by frequency so one phasor sweep per
/// point yields all three values.
class PlaneSampler {
 public:
  struct Values {
    double h = 0.0;
    double H = 0.0;
    double Hp = 0.0;
  };

  explicit PlaneSampler(const AngularField& h) : params_(h.params) {
    const SpectralField spec = transform(h);
    const int n = spec.size();
    double scale = 0.0;
    for (double v : h.values) scale = std::max(scale, std::abs(v));
    for (int f = -n / 2 + 1; f <= n / 2 - 1; ++f) {
      const int l = f < 0 ? f + n : f;
      const double nu = spec.wavenumber(l);
      const std::complex<double> den = elliptic_denominator(params_, nu);
      if (std::abs(den) == 0.0) {
        if (std::abs(spec.coeffs[l]) > 1e-12 * scale)
          throw std::invalid_argument("resonant elliptic mode at zero pitch");
        continue;
      }
      ch_.push_back(spec.coeffs[l]);
      cH_.push_back(spec.coeffs[l] / den);
      cHp_.push_back(std::complex<double>(0.0, nu) * cH_.back());
    }
    nu_front_ = double(-n / 2 + 1) * params_.m;
  }

  /// Evaluate at a raw spiral argument phi = theta - beta ln r.
  Values eval(double phi) const {
    std::complex<double> p = std::polar(1.0, nu_front_ * phi);
    const std::complex<double> w = std::polar(1.0, double(params_.m) * phi);
    Values v;
    for (size_t i = 0; i < ch_.size(); ++i) {
      v.h += (ch_[i] * p).real();
      v.H += (cH_[i] * p).real();
      v.Hp += (cHp_[i] * p).real();
      p *= w;
    }
    return v;
  }

  double omega(double r, double theta) const { return eval(arg(r, theta)).h; }
  double u_r(double r, double theta) const { return -r * eval(arg(r, theta)).Hp; }
  double u_theta(double r, double theta) const {
    const Values v = eval(arg(r, theta));
    return 2.0 * r * v.H - params_.beta * r * v.Hp;
  }
  double psi(double r, double theta) const { return r * r * eval(arg(r, theta)).H; }

  double arg(double r, double theta) const {
    if (!(r > 0.0) || !std::isfinite(r))
      throw std::invalid_argument("plane fields are sampled at positive radii only");
    return theta - params_.beta * std::log(r);
  }

  const SpiralParams& params() const { return params_; }

 private:
  SpiralParams params_;
  double nu_front_ = 0.0;
  std::vector<std::complex<double>> ch_, cH_, cHp_;
};

enum class PlaneField { omega, u_r, u_theta, psi };

struct PlaneGridSpec {
  double r_min = 0.25;
  double r_max = 4.0;
  int n_r = 64;
  int n_theta = 256;
};

struct PlaneGrid {
  std::vector<double> r;                // log-uniform radii
  std::vector<double> theta;            // uniform over the full circle
  std::vector<PlaneField> fields;
  std::vector<double> values;           // [field][radius][angle]

  double at(int field, int ir, int it) const {
    return values[(size_t(field) * r.size() + size_t(ir)) * theta.size() + size_t(it)];
  }
};

inline std::vector<double> log_uniform(double lo, double hi, int n) {
  std::vector<double> out(n);
  const double step = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = lo * std::exp(step * i);
  out.front() = lo;
  out.back() = hi;
  return out;
}

inline PlaneGrid sample_plane(const AngularField& h, const PlaneGridSpec& spec,
                              const std::vector<PlaneField>& fields) {
  if (!(spec.r_min > 0.0) || !(spec.r_max > spec.r_min))
    throw std::invalid_argument("sample_plane: need 0 < r_min < r_max");
  if (spec.n_r < 2 || spec.n_theta < 8)
    throw std::invalid_argument("sample_plane: grid too small");
  if (fields.empty()) throw std::invalid_argument("sample_plane: no fields requested");
  for (size_t i = 0; i < fields.size(); ++i)
    for (size_t j = i + 1; j < fields.size(); ++j)
      if (fields[i] == fields[j]) throw std::invalid_argument("sample_plane: duplicate field");

  const PlaneSampler s(h);
  PlaneGrid grid;
  grid.fields = fields;
  grid.r = log_uniform(spec.r_min, spec.r_max, spec.n_r);
  grid.theta.resize(spec.n_theta);
  for (int j = 0; j < spec.n_theta; ++j) grid.theta[j] = two_pi * j / spec.n_theta;
  grid.values.resize(fields.size() * size_t(spec.n_r) * size_t(spec.n_theta));

  for (int i = 0; i < spec.n_r; ++i) {
    const double r = grid.r[i];
    for (int j = 0; j < spec.n_theta; ++j) {
      const PlaneSampler::Values v = s.eval(s.arg(r, grid.theta[j]));
      for (size_t f = 0; f < fields.size(); ++f) {
        double val = 0.0;
        switch (fields[f]) {
          case PlaneField::omega: val = v.h; break;
          case PlaneField::u_r: val = -r * v.Hp; break;
          case PlaneField::u_theta: val = 2.0 * r * v.H - h.params.beta * r * v.Hp; break;
          case PlaneField::psi: val = r * r * v.H; break;
        }
        grid.values[(f * size_t(spec.n_r) + size_t(i)) * size_t(spec.n_theta) + size_t(j)] = val;
      }
    }
  }
  return grid;
}

/// Circulation of the reconstructed flow over the centered disk of radius R.
inline double circulation(const AngularField& h, double R) {
  if (!(R > 0.0) || !std::isfinite(R))
    throw std::invalid_argument("circulation: radius must be positive");
  return R * R / 2.0 * intensity(h);
}

/// Angular pressure profile P with p = r^2 P, from the cancellation-reduced
/// combination
///
///   2P = -2 beta K(8 beta - 3(1+beta^2) d)[ (H')^2 ]
///        + 4 (1+beta^2) K(3 - beta d)[ (H')^2 ]
///        - H' (2 beta H - beta^2 H'),
///
/// where K is the elliptic solve and d the angular derivative.  Both
/// smoothing operators act on the same square, so one elliptic solve of
/// (H')^2 provides K[(H')^2] and its derivative for the two combinations.
/// The additive constant is fixed by zero mean.
inline AngularField pressure_profile(const AngularField& h) {
  const double b = h.params.beta;
  const double b2 = b * b;
  const EllipticSolution es = solve_elliptic(h);
  std::vector<double> q(h.values.size());
  for (size_t k = 0; k < q.size(); ++k) q[k] = es.Hp.values[k] * es.Hp.values[k];
  const EllipticSolution kq = solve_elliptic(AngularField{h.params, std::move(q)});

  AngularField P{h.params, std::vector<double>(h.values.size())};
  double mean = 0.0;
  for (size_t k = 0; k < P.values.size(); ++k) {
    const double smoothed = -2.0 * b * (8.0 * b * kq.H.values[k] - 3.0 * (1.0 + b2) * kq.Hp.values[k]) +
                            4.0 * (1.0 + b2) * (3.0 * kq.H.values[k] - b * kq.Hp.values[k]);
    const double local = -es.Hp.values[k] * (2.0 * b * es.H.values[k] - b2 * es.Hp.values[k]);
    P.values[k] = 0.5 * (smoothed + local);
    mean += P.values[k];
  }
  mean /= double(P.values.size());
  for (double& v : P.values) v -= mean;
  return P;
}

struct SpiralCurve {
  int atom = 0;
  int copy = 0;
  std::vector<double> r;
  std::vector<double> theta;
};

/// The 2D support of each atom: theta - beta ln r == theta_j modulo the
/// fold, giving m congruent spirals per atom.  Angles are left unwrapped so
/// each polyline is a continuous branch.
inline std::vector<SpiralCurve> spiral_support_curves(const DiracConfig& cfg, double r_min,
                                                      double r_max, int n_points = 129) {
  validate_config(cfg);
  if (!(r_min > 0.0) || !(r_max > r_min))
    throw std::invalid_argument("spiral_support_curves: need 0 < r_min < r_max");
  if (n_points < 2) throw std::invalid_argument("spiral_support_curves: need at least 2 points");

  const std::vector<double> radii = log_uniform(r_min, r_max, n_points);
  std::vector<SpiralCurve> curves;
  for (size_t j = 0; j < cfg.atoms.size(); ++j) {
    for (int c = 0; c < cfg.params.m; ++c) {
      SpiralCurve curve;
      curve.atom = static_cast<int>(j);
      curve.copy = c;
      curve.r = radii;
      curve.theta.resize(radii.size());
      for (size_t i = 0; i < radii.size(); ++i)
        curve.theta[i] =
            cfg.atoms[j].theta + two_pi * c / cfg.params.m + cfg.params.beta * std::log(radii[i]);
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

}  // namespace logspiral
