#pragma once

/// Self-similar sheet configurations: intensities proportional to 1/t with
/// frozen gaps.  Plugging that ansatz into the atom ODE turns evolution into
/// algebra: per-sheet amplitude equations plus equal-drift conditions.  For
/// two sheets the system condenses to a scalar residual F(beta, d) in the
/// gap; its interior zeros are the non-symmetric branches, and the pitch at
/// which they disappear is bracketed by a continuation scan.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "logspiral/kernel.hpp"
#include "logspiral/params.hpp"

namespace logspiral {

/// Evaluation of a closed-form orbit at or past its pole.
struct PoleError : std::domain_error {
  double pole_time;
  explicit PoleError(double T)
      : std::domain_error("closed-form orbit evaluated at or past its pole"), pole_time(T) {}
};

struct ClosedFormOrbit {
  double I = 0.0;
  double theta_shift = 0.0;
};

/// Exact solution of the single-orbit intensity equation dI/dt = 2K'(0)I^2
/// together with the angular drift it induces.  When 2K'(0)I0 > 0 the orbit
/// has a pole at T* = 1/(2K'(0)I0) and evaluation there is rejected.
inline ClosedFormOrbit mfold_closed_form(double I0, double t, const SpiralParams& p) {
  validate(p);
  if (!std::isfinite(I0) || !std::isfinite(t))
    throw std::invalid_argument("mfold_closed_form: nonfinite input");
  const auto b = kernel_boundary(p);
  const double lambda = 2.0 * b.kp0 * I0;
  const double arg = 1.0 - lambda * t;
  if (arg <= 0.0) throw PoleError(1.0 / lambda);
  ClosedFormOrbit o;
  o.I = I0 / arg;
  o.theta_shift = -(b.k0 / b.kp0) * std::log(arg);
  return o;
}

struct TwoDiracResidual {
  double F = 0.0;
  double A1 = 0.0;
  double A2 = 0.0;
  bool solvable = false;
};

/// Scalar compatibility residual for two sheets a gap d apart (the sheet
/// labelled 1 sits at angle d above sheet 2), together with the amplitudes
/// from the 2x2 linear system
///   -1 = 2 A1 K'(0) + 2 A2 K'(d)
///   -1 = 2 A2 K'(0) + 2 A1 K'(-d)
/// which is solvable when (K'(0))^2 - K'(d)K'(-d) != 0.
inline TwoDiracResidual two_dirac_residual(const SpiralParams& p, double d) {
  validate(p);
  if (p.m != 1) throw std::invalid_argument("two_dirac_residual: requires m = 1");
  if (!(d > 0.0) || d > pi) throw std::invalid_argument("two_dirac_residual: d must lie in (0, pi]");
  const auto b = kernel_boundary(p);
  const double Kd = kernel_eval(p, d), Kmd = kernel_eval(p, -d);
  const double Kpd = kernel_deriv(p, d), Kpmd = kernel_deriv(p, -d);
  TwoDiracResidual r;
  r.F = b.k0 * (Kpmd - Kpd) + Kd * (b.kp0 - Kpmd) + Kmd * (Kpd - b.kp0);
  const double det = b.kp0 * b.kp0 - Kpd * Kpmd;
  const double scale = b.kp0 * b.kp0 + std::abs(Kpd * Kpmd);
  if (std::abs(det) > 1e-14 * scale) {
    r.solvable = true;
    r.A1 = -(b.kp0 - Kpd) / (2.0 * det);
    r.A2 = -(b.kp0 - Kpmd) / (2.0 * det);
  }
  return r;
}

struct TwoDiracRoot {
  double d = 0.0;
  double A1 = 0.0;
  double A2 = 0.0;
};

/// Interior zeros of F on [d_lo, d_hi] by sign-change bracketing on a
/// uniform seed grid followed by bisection.  The antipodal gap d = pi solves
/// F identically, so a window of width 1e-6 around it is excluded unless
/// include_pi is set, in which case it is appended explicitly.
inline std::vector<TwoDiracRoot> find_roots(const SpiralParams& p, double d_lo, double d_hi,
                                            int n_seeds, bool include_pi = false) {
  validate(p);
  if (!(d_lo > 0.0) || !(d_hi <= pi) || !(d_lo < d_hi))
    throw std::invalid_argument("find_roots: need 0 < d_lo < d_hi <= pi");
  if (n_seeds < 2) throw std::invalid_argument("find_roots: n_seeds must be >= 2");
  constexpr double pi_window = 1e-6;
  const double hi = std::min(d_hi, pi - pi_window);
  std::vector<TwoDiracRoot> roots;
  auto Fat = [&](double d) { return two_dirac_residual(p, d).F; };
  double x0 = d_lo, f0 = Fat(x0);
  for (int i = 1; i <= n_seeds; ++i) {
    const double x1 = d_lo + (hi - d_lo) * i / n_seeds;
    const double f1 = Fat(x1);
    if (f0 == 0.0 || (f0 < 0.0) != (f1 < 0.0)) {
      double a = x0, b = x1, fa = f0;
      for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = Fat(mid);
        if (fm == 0.0 || (fa < 0.0) == (fm < 0.0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      const double d = 0.5 * (a + b);
      const auto res = two_dirac_residual(p, d);
      roots.push_back({d, res.A1, res.A2});
    }
    x0 = x1;
    f0 = f1;
  }
  if (include_pi && d_hi >= pi) {
    const auto res = two_dirac_residual(p, pi);
    roots.push_back({pi, res.A1, res.A2});
  }
  return roots;
}

struct BifurcationRow {
  double beta = 0.0;
  int root_count = 0;
  double d_root = std::numeric_limits<double>::quiet_NaN();
  double A1 = std::numeric_limits<double>::quiet_NaN();
  double A2 = std::numeric_limits<double>::quiet_NaN();
};

struct BifurcationScan {
  std::vector<BifurcationRow> rows;
  double beta0_est = 0.0;  // largest pitch with an interior root
  double beta1_est = 0.0;  // smallest pitch without one
};

namespace detail {

inline BifurcationRow scan_row(double beta, double warm_d) {
  const SpiralParams p{beta, 1};
  BifurcationRow row;
  row.beta = beta;
  std::vector<TwoDiracRoot> roots;
  if (std::isfinite(warm_d)) {
    // warm-started local bracket around the previous branch point
    const double lo = std::max(1e-4, warm_d - 0.2);
    const double hi = std::min(pi, warm_d + 0.2);
    if (lo < hi) roots = find_roots(p, lo, hi, 64);
  }
  if (roots.empty()) roots = find_roots(p, 1e-4, pi, 400);
  row.root_count = static_cast<int>(roots.size());
  if (!roots.empty()) {
    row.d_root = roots.front().d;
    row.A1 = roots.front().A1;
    row.A2 = roots.front().A2;
  }
  return row;
}

}  // namespace detail

/// Continuation in pitch over an increasing grid: per-beta interior root
/// count with the branch gap d(beta), warm-starting each search from the
/// previous root.  The transition is then tightened by halving in log-pitch
/// until the bracket [beta0_est, beta1_est] is within a few percent.
inline BifurcationScan bifurcation_scan(std::vector<double> beta_grid) {
  if (beta_grid.size() < 2) throw std::invalid_argument("bifurcation_scan: grid too small");
  std::sort(beta_grid.begin(), beta_grid.end());
  for (double b : beta_grid)
    if (!(b > 0.0)) throw std::invalid_argument("bifurcation_scan: pitches must be positive");
  BifurcationScan scan;
  double warm = std::numeric_limits<double>::quiet_NaN();
  for (double beta : beta_grid) {
    auto row = detail::scan_row(beta, warm);
    warm = row.d_root;
    scan.rows.push_back(row);
  }
  double b_with = 0.0, b_without = 0.0, warm_with = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : scan.rows)
    if (row.root_count > 0 && row.beta > b_with) {
      b_with = row.beta;
      warm_with = row.d_root;
    }
  for (const auto& row : scan.rows)
    if (row.root_count == 0 && row.beta > b_with && (b_without == 0.0 || row.beta < b_without))
      b_without = row.beta;
  if (b_with > 0.0 && b_without > 0.0) {
    while (b_without / b_with > 1.04) {
      const double mid = std::sqrt(b_with * b_without);
      const auto row = detail::scan_row(mid, warm_with);
      if (row.root_count > 0) {
        b_with = mid;
        warm_with = row.d_root;
      } else {
        b_without = mid;
      }
    }
  }
  scan.beta0_est = b_with;
  scan.beta1_est = b_without;
  return scan;
}

/// Residual of the general M-sheet self-similar system under the gauge
/// theta_1 = 0: M amplitude equations -1 = 2 sum_l A_l K'(theta_j - theta_l)
/// with the averaged derivative on the diagonal, followed by the M-1
/// equal-drift conditions relative to the first sheet.
inline std::vector<double> general_m_residual(const SpiralParams& p,
                                              const std::vector<double>& A,
                                              const std::vector<double>& theta) {
  validate(p);
  if (p.m != 1) throw std::invalid_argument("general_m_residual: requires m = 1");
  const int M = static_cast<int>(A.size());
  if (M < 2 || theta.size() != A.size())
    throw std::invalid_argument("general_m_residual: need M >= 2 matching amplitudes/positions");
  const auto b = kernel_boundary(p);
  std::vector<double> R(2 * M - 1, 0.0);
  std::vector<double> drift(M, 0.0);
  for (int j = 0; j < M; ++j) {
    double hp = 0.0;
    for (int l = 0; l < M; ++l) {
      if (l == j) {
        hp += A[l] * b.kp0;
        drift[j] += A[l] * b.k0;
      } else {
        hp += A[l] * kernel_deriv(p, theta[j] - theta[l]);
        drift[j] += A[l] * kernel_eval(p, theta[j] - theta[l]);
      }
    }
    R[j] = 1.0 + 2.0 * hp;
  }
  for (int j = 1; j < M; ++j) R[M + j - 1] = drift[j] - drift[0];
  return R;
}

/// Amplitudes solving the linear M x M system -1 = 2 sum_l A_l K'(theta_jl)
/// at frozen positions; a convenient Newton seed.
inline std::vector<double> amplitude_solve(const SpiralParams& p,
                                           const std::vector<double>& theta) {
  validate(p);
  const int M = static_cast<int>(theta.size());
  if (M < 1) throw std::invalid_argument("amplitude_solve: empty positions");
  const auto b = kernel_boundary(p);
  std::vector<std::vector<double>> J(M, std::vector<double>(M + 1, 0.0));
  for (int j = 0; j < M; ++j) {
    for (int l = 0; l < M; ++l)
      J[j][l] = 2.0 * (l == j ? b.kp0 : kernel_deriv(p, theta[j] - theta[l]));
    J[j][M] = -1.0;
  }
  // gaussian elimination with partial pivoting
  for (int c = 0; c < M; ++c) {
    int piv = c;
    for (int r = c + 1; r < M; ++r)
      if (std::abs(J[r][c]) > std::abs(J[piv][c])) piv = r;
    std::swap(J[c], J[piv]);
    if (std::abs(J[c][c]) < 1e-300)
      throw std::runtime_error("amplitude_solve: singular amplitude system");
    for (int r = 0; r < M; ++r) {
      if (r == c) continue;
      const double f = J[r][c] / J[c][c];
      for (int k = c; k <= M; ++k) J[r][k] -= f * J[c][k];
    }
  }
  std::vector<double> A(M);
  for (int j = 0; j < M; ++j) A[j] = J[j][M] / J[j][j];
  return A;
}

struct GeneralMSolution {
  std::vector<double> A;
  std::vector<double> theta;
  double residual_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool singular_jacobian = false;
  int iterations = 0;
};

namespace detail {

/// Dense Gaussian elimination solve of J dx = -R; returns false on a
/// (numerically) singular matrix.
inline bool solve_dense(std::vector<std::vector<double>> J, std::vector<double> R,
                        std::vector<double>& dx) {
  const int n = static_cast<int>(R.size());
  double scale = 0.0;
  for (const auto& row : J)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return false;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(J[r][c]) > std::abs(J[piv][c])) piv = r;
    if (std::abs(J[piv][c]) < 1e-14 * scale) return false;
    std::swap(J[c], J[piv]);
    std::swap(R[c], R[piv]);
    for (int r = c + 1; r < n; ++r) {
      const double f = J[r][c] / J[c][c];
      for (int k = c; k < n; ++k) J[r][k] -= f * J[c][k];
      R[r] -= f * R[c];
    }
  }
  dx.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = -R[r];
    for (int k = r + 1; k < n; ++k) acc -= J[r][k] * dx[k];
    dx[r] = acc / J[r][r];
  }
  return true;
}

inline double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace detail

/// Damped Newton iteration on the general M-sheet system with the analytic
/// Jacobian (kernel derivatives up to second order).  The first position is
/// gauge-fixed to its seed value; unknowns are the M amplitudes and the M-1
/// remaining positions.  Armijo backtracking halves the step until the
/// residual norm decreases; a singular Jacobian is reported, not guessed
/// around.
inline GeneralMSolution solve_general_m(const SpiralParams& p, std::vector<double> A,
                                        std::vector<double> theta, double tol = 1e-12,
                                        int max_iter = 80) {
  validate(p);
  const int M = static_cast<int>(A.size());
  if (M < 2 || theta.size() != A.size())
    throw std::invalid_argument("solve_general_m: need M >= 2 matching amplitudes/positions");
  const auto b = kernel_boundary(p);
  GeneralMSolution sol;
  sol.A = A;
  sol.theta = theta;

  auto residual = [&](const std::vector<double>& a, const std::vector<double>& th) {
    return general_m_residual(p, a, th);
  };
  std::vector<double> R = residual(A, theta);
  double rn = detail::norm2(R);

  const int n = 2 * M - 1;
  for (int it = 0; it < max_iter; ++it) {
    if (rn < tol) break;
    // analytic Jacobian; unknown order: A_0..A_{M-1}, theta_1..theta_{M-1}
    std::vector<std::vector<double>> J(n, std::vector<double>(n, 0.0));
    for (int j = 0; j < M; ++j) {
      for (int l = 0; l < M; ++l)
        J[j][l] = 2.0 * (l == j ? b.kp0 : kernel_deriv(p, theta[j] - theta[l]));
      for (int q = 1; q < M; ++q) {
        double v = 0.0;
        if (q == j) {
          for (int l = 0; l < M; ++l)
            if (l != j) v += 2.0 * A[l] * kernel_second_deriv(p, theta[j] - theta[l]);
        } else {
          v = -2.0 * A[q] * kernel_second_deriv(p, theta[j] - theta[q]);
        }
        J[j][M + q - 1] = v;
      }
    }
    for (int j = 1; j < M; ++j) {
      const int row = M + j - 1;
      for (int l = 0; l < M; ++l) {
        const double Kjl = (l == j) ? b.k0 : kernel_eval(p, theta[j] - theta[l]);
        const double K0l = (l == 0) ? b.k0 : kernel_eval(p, theta[0] - theta[l]);
        J[row][l] = Kjl - K0l;
      }
      for (int q = 1; q < M; ++q) {
        double v = 0.0;
        if (q == j) {
          for (int l = 0; l < M; ++l)
            if (l != j) v += A[l] * kernel_deriv(p, theta[j] - theta[l]);
        } else {
          v = -A[q] * kernel_deriv(p, theta[j] - theta[q]);
        }
        v += A[q] * kernel_deriv(p, theta[0] - theta[q]);
        J[row][M + q - 1] = v;
      }
    }

    std::vector<double> dx;
    if (!detail::solve_dense(J, R, dx)) {
      sol.singular_jacobian = true;
      break;
    }

    double lambda = 1.0;
    bool accepted = false;
    while (lambda >= 1e-6) {
      std::vector<double> At = A, tht = theta;
      for (int l = 0; l < M; ++l) At[l] += lambda * dx[l];
      for (int q = 1; q < M; ++q) tht[q] += lambda * dx[M + q - 1];
      bool ok = true;
      std::vector<double> Rt;
      try {
        Rt = residual(At, tht);
      } catch (const std::domain_error&) {
        ok = false;  // a trial step collided two sheets
      }
      if (ok && detail::norm2(Rt) < (1.0 - 1e-4 * lambda) * rn) {
        A = At;
        theta = tht;
        R = Rt;
        rn = detail::norm2(R);
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    ++sol.iterations;
    if (!accepted) break;
  }

  sol.A = A;
  sol.theta = theta;
  sol.residual_norm = rn;
  sol.converged = rn < tol;
  return sol;
}

struct PrandtlParameters {
  double g = 0.0;
  double mu = 0.0;
};

/// Similarity scale g and log-rotation rate mu of the single-orbit
/// self-similar solution: -4 g K'(0) = 1 and g K(0) = -beta mu.
inline PrandtlParameters prandtl_parameters(const SpiralParams& p) {
  validate(p);
  const auto b = kernel_boundary(p);
  if (b.kp0 == 0.0) throw std::runtime_error("prandtl_parameters: vanishing K'(0)");
  PrandtlParameters pr;
  pr.g = -1.0 / (4.0 * b.kp0);
  pr.mu = -pr.g * b.k0 / p.beta;
  return pr;
}

struct SelfSimilarSolution {
  SpiralParams params;
  std::vector<double> amplitudes;
  std::vector<double> gaps;  // consecutive position differences, M-1 of them
  double residual_norm = 0.0;
  double mu = 0.0;  // common log-rotation rate of the configuration
};

/// Package a solved configuration: positions are sorted, gaps extracted and
/// checked, and the common angular drift coefficient recorded.
inline SelfSimilarSolution make_selfsimilar_solution(const SpiralParams& p,
                                                     std::vector<double> A,
                                                     std::vector<double> theta,
                                                     double residual_norm) {
  validate(p);
  const int M = static_cast<int>(A.size());
  if (M < 1 || theta.size() != A.size())
    throw std::invalid_argument("make_selfsimilar_solution: size mismatch");
  std::vector<int> idx(M);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int c) { return theta[a] < theta[c]; });
  SelfSimilarSolution s;
  s.params = p;
  s.residual_norm = residual_norm;
  for (int i : idx) s.amplitudes.push_back(A[i]);
  double span = 0.0;
  for (int i = 1; i < M; ++i) {
    const double gap = theta[idx[i]] - theta[idx[i - 1]];
    if (!(gap > 0.0)) throw std::invalid_argument("make_selfsimilar_solution: positions coincide");
    span += gap;
    s.gaps.push_back(gap);
  }
  if (span >= two_pi)
    throw std::invalid_argument("make_selfsimilar_solution: positions span a full turn");
  const auto b = kernel_boundary(p);
  for (int l = 0; l < M; ++l)
    s.mu += 2.0 * s.amplitudes[l] *
            (l == 0 ? b.k0 : kernel_eval(p, theta[idx[0]] - theta[idx[l]]));
  return s;
}

}  // namespace logspiral
