#pragma once

/// Finite collections of vortex sheets ("atoms") carrying signed intensities
/// at distinct angles.  The angular field of such data is a finite kernel
/// sum, so the evolution closes into an ODE for the intensities and angles:
///
///   dI_j/dt     = 2 H'(theta_j) I_j
///   dtheta_j/dt = 2 H(theta_j)
///
/// with H(theta_j) = sum_l I_l K(theta_j - theta_l) and the diagonal terms
/// taken as the boundary values K(0) and the averaged derivative limit.
/// Atoms keep unwrapped angles so secular drift is observable; distances are
/// always measured on the reduced circle.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "logspiral/kernel.hpp"
#include "logspiral/params.hpp"

namespace logspiral {

struct DiracAtom {
  double I = 0.0;
  double theta = 0.0;
};

struct DiracConfig {
  SpiralParams params;
  std::vector<DiracAtom> atoms;
};

inline double min_gap(const DiracConfig& cfg) {
  double g = fundamental_period(cfg.params);
  for (size_t j = 0; j < cfg.atoms.size(); ++j)
    for (size_t l = j + 1; l < cfg.atoms.size(); ++l)
      g = std::min(g, std::abs(angular_distance(cfg.params, cfg.atoms[j].theta,
                                                cfg.atoms[l].theta)));
  return g;
}

inline void validate_config(const DiracConfig& cfg) {
  validate(cfg.params);
  if (cfg.atoms.empty()) throw std::invalid_argument("DiracConfig: no atoms");
  for (const auto& a : cfg.atoms)
    if (!std::isfinite(a.I) || !std::isfinite(a.theta))
      throw std::invalid_argument("DiracConfig: nonfinite atom data");
  if (cfg.atoms.size() > 1 && min_gap(cfg) <= 0.0)
    throw std::invalid_argument(
        "DiracConfig: atom angles must be distinct modulo the fundamental period");
}

struct SheetVelocity {
  double H = 0.0;
  double Hp = 0.0;
};

/// Velocity data seen by atom j: the kernel sum over all atoms, with the
/// self term contributed by the kernel boundary values.
inline SheetVelocity sheet_velocity(const DiracConfig& cfg, int j) {
  const auto b = kernel_boundary(cfg.params);
  SheetVelocity v;
  for (size_t l = 0; l < cfg.atoms.size(); ++l) {
    if (static_cast<int>(l) == j) {
      v.H += cfg.atoms[l].I * b.k0;
      v.Hp += cfg.atoms[l].I * b.kp0;
    } else {
      const double d = cfg.atoms[j].theta - cfg.atoms[l].theta;
      v.H += cfg.atoms[l].I * kernel_eval(cfg.params, d);
      v.Hp += cfg.atoms[l].I * kernel_deriv(cfg.params, d);
    }
  }
  return v;
}

struct DiracRates {
  std::vector<double> dI;
  std::vector<double> dtheta;
};

inline DiracRates rhs(const DiracConfig& cfg) {
  const int N = static_cast<int>(cfg.atoms.size());
  DiracRates r{std::vector<double>(N), std::vector<double>(N)};
  for (int j = 0; j < N; ++j) {
    const auto v = sheet_velocity(cfg, j);
    r.dI[j] = 2.0 * v.Hp * cfg.atoms[j].I;
    r.dtheta[j] = 2.0 * v.H;
  }
  return r;
}

struct IntensityRate {
  double from_ode = 0.0;          // sum of the intensity equations
  double from_dissipation = 0.0;  // -8 beta int (H')^2 in closed form
};

/// d/dt sum I_j by two routes.  The dissipation route expands int (H')^2
/// into pairwise kernel-derivative integrals, each evaluated in closed form
/// through the quadratic kernel identities; what remains is the symmetrised
/// double sum below, with 2 K'(0) on the diagonal.
inline IntensityRate total_intensity_rate(const DiracConfig& cfg) {
  const auto b = kernel_boundary(cfg.params);
  const int N = static_cast<int>(cfg.atoms.size());
  IntensityRate r;
  for (int j = 0; j < N; ++j) {
    const auto v = sheet_velocity(cfg, j);
    r.from_ode += 2.0 * v.Hp * cfg.atoms[j].I;
  }
  for (int j = 0; j < N; ++j)
    for (int l = 0; l < N; ++l) {
      const double II = cfg.atoms[j].I * cfg.atoms[l].I;
      if (j == l) {
        r.from_dissipation += II * 2.0 * b.kp0;
      } else {
        const double d = cfg.atoms[j].theta - cfg.atoms[l].theta;
        r.from_dissipation += II * (kernel_deriv(cfg.params, d) + kernel_deriv(cfg.params, -d));
      }
    }
  return r;
}

enum class DiracEventType { none, collision, riccati_escape, overflow, stiff };

inline const char* to_string(DiracEventType t) {
  switch (t) {
    case DiracEventType::none: return "none";
    case DiracEventType::collision: return "collision";
    case DiracEventType::riccati_escape: return "riccati_escape";
    case DiracEventType::overflow: return "overflow";
    case DiracEventType::stiff: return "stiff";
  }
  return "unknown";
}

struct DiracEvent {
  DiracEventType type = DiracEventType::none;
  double t = 0.0;
  double fitted_Tstar = std::numeric_limits<double>::quiet_NaN();
};

struct IntegrateOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  int n_samples = 200;           // uniform sample grid over [0, t_end]
  double gap_tol = 1e-6;         // collision threshold, radians
  double escape_factor = 1e3;    // riccati_escape when beta*sum I < -this*(1+|sum I(0)|)
  double overflow_factor = 1e8;  // overflow when max |I_j| exceeds this times its start
};

struct DiracTrajectory {
  std::vector<double> times;
  std::vector<DiracConfig> states;
  std::vector<double> sum_intensity;
  DiracEvent event;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
inline constexpr double dp_b[7] = {35.0 / 384,     0.0,       500.0 / 1113, 125.0 / 192,
                                   -2187.0 / 6784, 11.0 / 84, 0.0};
inline constexpr double dp_e[7] = {71.0 / 57600,       0.0,        -71.0 / 16695, 71.0 / 1920,
                                   -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

inline DiracConfig unpack(const SpiralParams& p, const std::vector<double>& y) {
  const int N = static_cast<int>(y.size() / 2);
  DiracConfig cfg{p, std::vector<DiracAtom>(N)};
  for (int j = 0; j < N; ++j) cfg.atoms[j] = {y[j], y[N + j]};
  return cfg;
}

inline std::vector<double> dirac_f(const SpiralParams& p, const std::vector<double>& y) {
  const auto cfg = unpack(p, y);
  const auto r = rhs(cfg);
  const int N = static_cast<int>(cfg.atoms.size());
  std::vector<double> f(2 * N);
  for (int j = 0; j < N; ++j) {
    f[j] = r.dI[j];
    f[N + j] = r.dtheta[j];
  }
  return f;
}

/// Least-squares affine fit y = c0 + c1 x, returning the root -c0/c1.
inline double affine_root(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double c1 = (n * sxy - sx * sy) / det;
  const double c0 = (sy * sxx - sx * sxy) / det;
  if (c1 == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return -c0 / c1;
}

}  // namespace detail

/// Adaptive fifth-order integration with embedded error control.  Steps are
/// clipped to land exactly on the uniform sample grid, so recorded states
/// carry no interpolation error.  Terminates early with an event record when
/// sheets collide (reduced gap below gap_tol), the signed total intensity
/// escapes against the pitch (certified blow-up direction), an intensity
/// overflows, or the step size underflows.  For escape and overflow events
/// the blow-up time is estimated by an affine fit of 1/|sum I| over the last
/// accepted steps.
inline DiracTrajectory integrate(const DiracConfig& cfg0, double t_end,
                                 const IntegrateOptions& opts = {}) {
  validate_config(cfg0);
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw std::invalid_argument("integrate: t_end must be positive and finite");
  if (opts.n_samples < 1) throw std::invalid_argument("integrate: n_samples must be >= 1");

  const SpiralParams p = cfg0.params;
  const int N = static_cast<int>(cfg0.atoms.size());
  std::vector<double> y(2 * N);
  double sum0 = 0.0, scale0 = 0.0;
  for (int j = 0; j < N; ++j) {
    y[j] = cfg0.atoms[j].I;
    y[N + j] = cfg0.atoms[j].theta;
    sum0 += cfg0.atoms[j].I;
    scale0 = std::max(scale0, std::abs(cfg0.atoms[j].I));
  }
  if (scale0 == 0.0) scale0 = 1.0;

  DiracTrajectory traj;
  auto record = [&](double t, const std::vector<double>& yy) {
    traj.times.push_back(t);
    traj.states.push_back(detail::unpack(p, yy));
    double s = 0.0;
    for (int j = 0; j < N; ++j) s += yy[j];
    traj.sum_intensity.push_back(s);
  };
  record(0.0, y);

  // blow-up fit window: (t, 1/|sum I|) at recent accepted steps
  std::vector<double> fit_t, fit_v;
  auto push_fit = [&](double t, const std::vector<double>& yy) {
    double s = 0.0;
    for (int j = 0; j < N; ++j) s += yy[j];
    if (s == 0.0) return;
    fit_t.push_back(t);
    fit_v.push_back(1.0 / std::abs(s));
    if (fit_t.size() > 24) {
      fit_t.erase(fit_t.begin());
      fit_v.erase(fit_v.begin());
    }
  };
  push_fit(0.0, y);

  auto finish_event = [&](DiracEventType type, double t, const std::vector<double>& yy) {
    traj.event.type = type;
    traj.event.t = t;
    if (type == DiracEventType::riccati_escape || type == DiracEventType::overflow)
      traj.event.fitted_Tstar = detail::affine_root(fit_t, fit_v);
    if (traj.times.back() != t) record(t, yy);
  };

  auto check_events = [&](double t, const std::vector<double>& yy) {
    const auto cfg = detail::unpack(p, yy);
    for (int j = 0; j < N; ++j)
      if (!std::isfinite(yy[j]) || !std::isfinite(yy[N + j])) {
        finish_event(DiracEventType::overflow, t, yy);
        return true;
      }
    if (N > 1 && min_gap(cfg) < opts.gap_tol) {
      finish_event(DiracEventType::collision, t, yy);
      return true;
    }
    double s = 0.0, amax = 0.0;
    for (int j = 0; j < N; ++j) {
      s += yy[j];
      amax = std::max(amax, std::abs(yy[j]));
    }
    if (p.beta * s < -opts.escape_factor * (1.0 + std::abs(sum0))) {
      finish_event(DiracEventType::riccati_escape, t, yy);
      return true;
    }
    if (amax > opts.overflow_factor * scale0) {
      finish_event(DiracEventType::overflow, t, yy);
      return true;
    }
    return false;
  };

  if (check_events(0.0, y)) return traj;

  double t = 0.0;
  int sample = 1;
  double next_sample = t_end / opts.n_samples;

  auto f0 = detail::dirac_f(p, y);
  double fmag = 0.0;
  for (double v : f0) fmag = std::max(fmag, std::abs(v));
  double dt = std::min(t_end / opts.n_samples, 0.1 / (1.0 + fmag));

  std::vector<double> k[7], ytmp(2 * N), y5(2 * N);
  k[0] = f0;

  while (t < t_end) {
    const double dt_step = std::min(dt, next_sample - t);
    bool collided = false;
    double err = 0.0;
    try {
      for (int s = 1; s < 7; ++s) {
        for (int i = 0; i < 2 * N; ++i) {
          double acc = 0.0;
          for (int q = 0; q < s; ++q) acc += detail::dp_a[s][q] * k[q][i];
          ytmp[i] = y[i] + dt_step * acc;
        }
        k[s] = detail::dirac_f(p, ytmp);
      }
      for (int i = 0; i < 2 * N; ++i) {
        double acc = 0.0, eacc = 0.0;
        for (int s = 0; s < 7; ++s) {
          acc += detail::dp_b[s] * k[s][i];
          eacc += detail::dp_e[s] * k[s][i];
        }
        y5[i] = y[i] + dt_step * acc;
        const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
        const double w = dt_step * eacc / sc;
        err += w * w;
      }
      err = std::sqrt(err / (2 * N));
    } catch (const std::domain_error&) {
      // a stage evaluation landed two atoms on top of each other
      collided = true;
    }

    if (collided) {
      finish_event(DiracEventType::collision, t, y);
      return traj;
    }

    if (err <= 1.0) {
      t += dt_step;
      y = y5;
      k[0] = detail::dirac_f(p, y);
      push_fit(t, y);
      if (check_events(t, y)) return traj;
      if (t >= next_sample - 1e-14 * t_end) {
        record(next_sample, y);
        ++sample;
        next_sample = (sample >= opts.n_samples) ? t_end
                                                 : t_end * sample / opts.n_samples;
        if (t >= t_end - 1e-14 * t_end) break;
      }
    }

    const double gain = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
    dt = dt_step * std::min(5.0, std::max(0.2, gain));
    if (dt < 1e-13 * std::max(1.0, t)) {
      finish_event(DiracEventType::stiff, t, y);
      return traj;
    }
  }
  return traj;
}

}  // namespace logspiral
