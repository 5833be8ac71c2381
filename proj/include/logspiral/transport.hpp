/// @file transport.hpp
/// @brief Time integration of the transport equation dh/dt + 2H dh/dtheta = 0
///        with the elliptic velocity H = K*h recomputed every step.
///
/// Two steppers are provided.  The default is semi-Lagrangian: departure
/// points from a midpoint characteristic solve (velocity extrapolated to the
/// half step from the previous field inside run()), values by cell-range
/// limited cubic interpolation, which keeps every new value inside the range
/// of the old ones.  The spectral stepper is classical RK4 on the
/// collocation form with two-thirds dealiasing and serves as the accuracy
/// cross-check on smooth data.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "logspiral/field.hpp"
#include "logspiral/params.hpp"

namespace logspiral {

enum class Method { semi_lagrangian, spectral_rk4 };
enum class Outcome { completed, blowup_suspected, homogenized };

struct CflViolation : std::runtime_error {
  double admissible;
  explicit CflViolation(double adm)
      : std::runtime_error("time step exceeds the admissible bound " + std::to_string(adm)),
        admissible(adm) {}
};

struct EvolutionConfig {
  double dt = 1e9;          // upper cap; the CFL bound usually binds first
  double t_end = 0.0;
  double cfl = 0.5;
  int record_every = 1;     // record once every this many steps
  Method method = Method::semi_lagrangian;
  double l1_guard_ratio = 50.0;   // stop when the L1 time integral exceeds
                                  // this multiple of its first-unit-time value
  double sup_guard_ratio = 1e6;   // stop when max|h| exceeds this multiple
                                  // of its initial value

  void validate() const {
    if (!(dt > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("dt and t_end must be positive");
    if (!(cfl > 0.0) || cfl > 1.0) throw std::invalid_argument("cfl must lie in (0, 1]");
    if (record_every < 1) throw std::invalid_argument("record_every must be at least 1");
    if (!(l1_guard_ratio > 1.0) || !(sup_guard_ratio > 1.0))
      throw std::invalid_argument("guard ratios must exceed 1");
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<AngularField> states;
  std::vector<Diagnostics> diag;
  Outcome outcome = Outcome::completed;
  std::string stop_reason;  // empty, "l1_guard", "sup_guard" or "nonfinite"
};

namespace detail {

// Periodic cubic Hermite interpolant with prescribed node slopes.  With
// limited = true every value is clipped to the range of the two cell
// endpoints, so no point of the interpolant escapes the data range.
struct HermiteTable {
  double spacing = 0.0;
  double period = 0.0;
  std::vector<double> y;
  std::vector<double> d;
  bool limited = false;

  double eval(double theta) const {
    const int n = static_cast<int>(y.size());
    double x = theta - period * std::floor(theta / period);
    int k = static_cast<int>(x / spacing);
    if (k >= n) k = n - 1;
    const double s = (x - k * spacing) / spacing;
    const int k1 = (k + 1) % n;
    const double s2 = s * s, s3 = s2 * s;
    double v = y[k] * (2 * s3 - 3 * s2 + 1) + y[k1] * (3 * s2 - 2 * s3) +
               spacing * (d[k] * (s3 - 2 * s2 + s) + d[k1] * (s3 - s2));
    if (limited) v = std::clamp(v, std::min(y[k], y[k1]), std::max(y[k], y[k1]));
    return v;
  }
};

inline HermiteTable monotone_table(const AngularField& f) {
  return {f.spacing(), fundamental_period(f.params), f.values,
          spectral_derivative(f).values, true};
}

// Velocity interpolant: 2H with exact spectral slopes 2H', no limiting.
inline HermiteTable velocity_table(const AngularField& H, const AngularField& Hp) {
  HermiteTable t{H.spacing(), fundamental_period(H.params), H.values, Hp.values};
  for (double& v : t.y) v *= 2.0;
  for (double& v : t.d) v *= 2.0;
  return t;
}

inline AngularField step_semi_lagrangian(const AngularField& h, const AngularField& H,
                                         const AngularField& Hp, double dt) {
  const HermiteTable vel = velocity_table(H, Hp);
  const HermiteTable interp = monotone_table(h);
  AngularField out = h;
  for (int k = 0; k < h.size(); ++k) {
    const double theta = h.theta(k);
    const double mid = theta - 0.5 * dt * 2.0 * H.values[k];
    out.values[k] = interp.eval(theta - dt * vel.eval(mid));
  }
  return out;
}

// Zeroes modes above the two-thirds cutoff so quadratic products stay
// alias-free on the collocation grid.
inline void dealias(SpectralField& s) {
  const int n = s.size();
  const int keep = n / 3;
  for (int l = 0; l < n; ++l)
    if (std::abs(signed_frequency(l, n)) > keep) s.coeffs[l] = 0.0;
}

inline AngularField transport_rhs(const AngularField& h) {
  SpectralField spec = transform(h);
  dealias(spec);
  const AngularField hf = inverse_transform(spec);
  const EllipticSolution sol = solve_elliptic(hf);
  const AngularField hp = spectral_derivative(hf);
  AngularField r = h;
  for (int k = 0; k < h.size(); ++k) r.values[k] = -2.0 * sol.H.values[k] * hp.values[k];
  SpectralField rs = transform(r);
  dealias(rs);
  return inverse_transform(rs);
}

inline AngularField step_spectral_rk4(const AngularField& h, double dt) {
  auto axpy = [](const AngularField& a, double c, const AngularField& b) {
    AngularField r = a;
    for (int k = 0; k < a.size(); ++k) r.values[k] += c * b.values[k];
    return r;
  };
  const AngularField k1 = transport_rhs(h);
  const AngularField k2 = transport_rhs(axpy(h, 0.5 * dt, k1));
  const AngularField k3 = transport_rhs(axpy(h, 0.5 * dt, k2));
  const AngularField k4 = transport_rhs(axpy(h, dt, k3));
  AngularField out = h;
  for (int k = 0; k < h.size(); ++k)
    out.values[k] += dt / 6.0 * (k1.values[k] + 2 * k2.values[k] + 2 * k3.values[k] + k4.values[k]);
  return out;
}

inline double max_speed(const AngularField& H) {
  double v = 0.0;
  for (double x : H.values) v = std::max(v, std::abs(2.0 * x));
  return v;
}

}  // namespace detail

/// Admissible step for unit Courant number, spacing / max|2H|.
inline double admissible_dt(const AngularField& h) {
  const double v = detail::max_speed(solve_elliptic(h).H);
  return v > 0.0 ? h.spacing() / v : 1e300;
}

/// One step with velocity frozen at the current state.  Throws CflViolation
/// (carrying the admissible step) when dt exceeds spacing / max|2H|.
inline AngularField step(const AngularField& h, double dt, Method method) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  const EllipticSolution sol = solve_elliptic(h);
  const double vmax = detail::max_speed(sol.H);
  if (vmax > 0.0 && dt > h.spacing() / vmax * (1.0 + 1e-9))
    throw CflViolation(h.spacing() / vmax);
  if (method == Method::semi_lagrangian)
    return detail::step_semi_lagrangian(h, sol.H, sol.Hp, dt);
  return detail::step_spectral_rk4(h, dt);
}

/// Integrates to cfg.t_end with dt = min(cfg.dt, cfl * spacing / max|2H|),
/// recording diagnostics at the configured cadence (first and last states
/// always included).  Stops early with outcome blowup_suspected when the
/// accumulated integral of ||h||_L1 exceeds l1_guard_ratio times its value
/// over the first unit of time, when max|h| exceeds sup_guard_ratio times
/// its initial value, or when the state stops being finite.
inline Trajectory run(const AngularField& h0, const EvolutionConfig& cfg) {
  cfg.validate();
  validate_field(h0);

  Trajectory traj;
  AngularField h = h0;
  double t = 0.0;
  double l1_acc = 0.0;
  double l1_prev = lp_norm(h, 1.0);
  double l1_baseline = -1.0;  // set once t passes 1
  const double sup0 = lp_norm(h0, std::numeric_limits<double>::infinity());

  AngularField H_prev = h0;  // holds the previous step's H once available
  double dt_prev = 0.0;

  auto record = [&](void) {
    traj.times.push_back(t);
    traj.states.push_back(h);
    Diagnostics d = diagnostics(h);
    d.l1_time_integral = l1_acc;
    traj.diag.push_back(d);
  };
  record();

  long step_index = 0;
  while (t < cfg.t_end * (1.0 - 1e-14)) {
    const EllipticSolution sol = solve_elliptic(h);
    const double vmax = detail::max_speed(sol.H);
    double dt = std::min(cfg.dt, cfg.t_end - t);
    if (vmax > 0.0) dt = std::min(dt, cfg.cfl * h.spacing() / vmax);

    if (cfg.method == Method::semi_lagrangian) {
      AngularField He = sol.H, Hpe = sol.Hp;
      if (dt_prev > 0.0) {
        // velocity extrapolated to t + dt/2 for a second-order step
        const double a = 0.5 * dt / dt_prev;
        for (int k = 0; k < h.size(); ++k)
          He.values[k] += a * (sol.H.values[k] - H_prev.values[k]);
        Hpe = sol.Hp;  // slope correction is higher order; grid slopes suffice
      }
      AngularField next = detail::step_semi_lagrangian(h, He, Hpe, dt);
      H_prev = sol.H;
      dt_prev = dt;
      h = std::move(next);
    } else {
      h = detail::step_spectral_rk4(h, dt);
    }
    t += dt;
    ++step_index;

    bool finite = true;
    for (double v : h.values)
      if (!std::isfinite(v)) finite = false;
    if (!finite) {
      traj.outcome = Outcome::blowup_suspected;
      traj.stop_reason = "nonfinite";
      record();
      return traj;
    }

    const double l1_now = lp_norm(h, 1.0);
    l1_acc += 0.5 * dt * (l1_prev + l1_now);
    l1_prev = l1_now;
    if (l1_baseline < 0.0 && t >= 1.0) l1_baseline = l1_acc;
    if (l1_baseline > 0.0 && l1_acc > cfg.l1_guard_ratio * l1_baseline) {
      traj.outcome = Outcome::blowup_suspected;
      traj.stop_reason = "l1_guard";
      record();
      return traj;
    }
    if (lp_norm(h, std::numeric_limits<double>::infinity()) > cfg.sup_guard_ratio * sup0) {
      traj.outcome = Outcome::blowup_suspected;
      traj.stop_reason = "sup_guard";
      record();
      return traj;
    }

    if (step_index % cfg.record_every == 0 || t >= cfg.t_end * (1.0 - 1e-14)) record();
  }

  if (traj.times.back() < t) record();

  double lo = h.values[0], hi = h.values[0], mean = 0.0;
  for (double v : h.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    mean += v;
  }
  mean /= h.size();
  traj.outcome = (hi - lo <= 1e-6 * (1.0 + std::abs(mean))) ? Outcome::homogenized
                                                            : Outcome::completed;
  return traj;
}

enum class LongTimeClass { converged, finite_blowup, infinite_blowup, undecided };

struct LongTimeReport {
  LongTimeClass kind = LongTimeClass::undecided;
  double I_plus = 0.0;
};

/// Reads the end of a trajectory: guard trips map to the blow-up classes,
/// and a completed run counts as converged only when the final state sits
/// within conv_tol of its mean in the negative-index norm.  Everything else
/// stays undecided.
inline LongTimeReport classify_longtime(const Trajectory& traj, double hminus_a = 0.5,
                                        double conv_tol = 1e-3, double growth_factor = 100.0) {
  LongTimeReport rep;
  if (traj.states.empty()) return rep;
  rep.I_plus = traj.diag.back().intensity;

  if (traj.stop_reason == "l1_guard") {
    rep.kind = LongTimeClass::finite_blowup;
    return rep;
  }
  if (traj.stop_reason == "sup_guard") {
    rep.kind = LongTimeClass::infinite_blowup;
    return rep;
  }
  if (traj.outcome == Outcome::blowup_suspected) return rep;

  const double sup_first = lp_norm(traj.states.front(), std::numeric_limits<double>::infinity());
  const double sup_last = lp_norm(traj.states.back(), std::numeric_limits<double>::infinity());
  if (sup_last > growth_factor * (sup_first + 1e-300)) {
    rep.kind = LongTimeClass::infinite_blowup;
    return rep;
  }

  AngularField fluct = traj.states.back();
  const double mean = rep.I_plus / two_pi;
  for (double& v : fluct.values) v -= mean;
  if (hminus_norm(fluct, hminus_a) < conv_tol) rep.kind = LongTimeClass::converged;
  return rep;
}

}  // namespace logspiral
