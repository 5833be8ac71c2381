/// @file test_transport.cpp
/// @brief Transport module tests.  The two stepping methods are checked
///        against each other, against Richardson self-convergence, against
///        the monotone circulation rate from the diagnostics series, and
///        against the closed-form blow-up time of a concentrated spike.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "logspiral/field.hpp"
#include "logspiral/kernel.hpp"
#include "logspiral/transport.hpp"

using namespace logspiral;

namespace {

AngularField cosine_field(const SpiralParams& p, int n) {
  return make_field(p, n, [&](double t) { return std::cos(p.m * t); });
}

// Raised-cosine spike of total mass I and half-width eps centered at c.
AngularField spike_field(const SpiralParams& p, int n, double I, double c, double eps) {
  return make_field(p, n, [&](double t) {
    const double x = angular_distance(p, c, t);
    if (std::abs(x) >= eps) return 0.0;
    return I / eps * 0.5 * (1.0 + std::cos(pi * x / eps));
  });
}

double l2_difference(const AngularField& a, const AngularField& b) {
  double acc = 0.0;
  for (int k = 0; k < a.size(); ++k) {
    const double d = a.values[k] - b.values[k];
    acc += d * d;
  }
  return std::sqrt(two_pi * acc / a.size());
}

}  // namespace

TEST_CASE("evolution config validation") {
  EvolutionConfig cfg;
  cfg.t_end = 1.0;
  REQUIRE_NOTHROW(cfg.validate());
  cfg.cfl = 1.5;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.cfl = 0.5;
  cfg.t_end = -1.0;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.t_end = 1.0;
  cfg.record_every = 0;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("constants are steady states") {
  const SpiralParams p{1.0, 1};
  const auto h = make_field(p, 32, [](double) { return 0.4; });
  for (Method m : {Method::semi_lagrangian, Method::spectral_rk4}) {
    const auto h1 = step(h, 0.1, m);
    for (int k = 0; k < h.size(); ++k) REQUIRE(h1.values[k] == Catch::Approx(0.4).margin(1e-14));
  }
  EvolutionConfig cfg;
  cfg.t_end = 2.0;
  const auto traj = run(h, cfg);
  REQUIRE(traj.outcome == Outcome::homogenized);
  for (const auto& s : traj.states)
    for (double v : s.values) REQUIRE(std::abs(v - 0.4) < 1e-12);
  const auto cls = classify_longtime(traj);
  REQUIRE(cls.kind == LongTimeClass::converged);
  REQUIRE(std::abs(cls.I_plus - 0.4 * two_pi) < 1e-10);
}

TEST_CASE("time steps beyond the admissible bound are rejected") {
  const SpiralParams p{1.0, 1};
  const auto h = cosine_field(p, 128);
  const auto sol = solve_elliptic(h);
  double vmax = 0.0;
  for (double v : sol.H.values) vmax = std::max(vmax, std::abs(2.0 * v));
  const double admissible = h.spacing() / vmax;
  REQUIRE_THROWS_AS(step(h, 10.0 * admissible, Method::semi_lagrangian), CflViolation);
  try {
    step(h, 10.0 * admissible, Method::spectral_rk4);
    FAIL("expected CflViolation");
  } catch (const CflViolation& e) {
    REQUIRE(e.admissible == Catch::Approx(admissible).epsilon(1e-9));
  }
  REQUIRE_NOTHROW(step(h, 0.9 * admissible, Method::semi_lagrangian));
}

TEST_CASE("one step strictly dissipates intensity") {
  const SpiralParams p{1.0, 1};
  const auto h = cosine_field(p, 256);
  const double dt = 0.01;
  for (Method m : {Method::semi_lagrangian, Method::spectral_rk4}) {
    const double I1 = intensity(step(h, dt, m));
    REQUIRE(I1 < intensity(h) + 1e-6 * dt);
    REQUIRE(I1 < intensity(h));
  }
}

TEST_CASE("intensity drops at the dissipation rate") {
  // I(t_{k+1}) - I(t_k) = -dt * (average dissipation) + higher order when
  // the rate is averaged over the two endpoints.
  const SpiralParams p{1.0, 1};
  auto worst_residual = [&](Method m, int n, double dt, int steps) {
    auto h = cosine_field(p, n);
    double worst = 0.0;
    for (int s = 0; s < steps; ++s) {
      const auto next = step(h, dt, m);
      const double drop = intensity(next) - intensity(h);
      const double rate = 0.5 * (dissipation_rate(h) + dissipation_rate(next));
      worst = std::max(worst, std::abs(drop + dt * rate));
      h = next;
    }
    return worst;
  };
  const double rate0 = dissipation_rate(cosine_field(p, 256));
  for (Method m : {Method::spectral_rk4, Method::semi_lagrangian})
    REQUIRE(worst_residual(m, 1024, 0.01, 4) < 2e-4 * 0.01 * rate0);
  // the trapezoid-averaged residual is O(dt^3) for the spectral stepper
  const double rc = worst_residual(Method::spectral_rk4, 256, 0.01, 4);
  const double rf = worst_residual(Method::spectral_rk4, 256, 0.005, 8);
  REQUIRE(rf < 0.2 * rc);
}

TEST_CASE("one step versus two half steps, semi-Lagrangian") {
  const SpiralParams p{0.8, 1};
  const auto h = make_field(p, 256, [](double t) { return std::exp(std::cos(t)); });
  std::vector<double> diffs;
  for (double dt : {0.016, 0.008, 0.004}) {
    const auto one = step(h, dt, Method::semi_lagrangian);
    const auto two = step(step(h, 0.5 * dt, Method::semi_lagrangian), 0.5 * dt, Method::semi_lagrangian);
    diffs.push_back(l2_difference(one, two));
  }
  REQUIRE(diffs[0] < 1e-3);
  REQUIRE(diffs[1] < diffs[0] / 3.0);
  REQUIRE(diffs[2] < diffs[1] / 3.0);
}

TEST_CASE("fixed-horizon self-convergence, spectral") {
  const SpiralParams p{0.8, 1};
  const auto h0 = make_field(p, 64, [](double t) { return std::exp(std::cos(t)); });
  auto advance = [&](int steps) {
    auto h = h0;
    const double dt = 0.4 / steps;
    for (int s = 0; s < steps; ++s) h = step(h, dt, Method::spectral_rk4);
    return h;
  };
  const double d1 = l2_difference(advance(8), advance(16));
  const double d2 = l2_difference(advance(16), advance(32));
  REQUIRE(d1 < 1e-5);
  REQUIRE(d2 < d1 / 12.0);  // fourth order gives 16
}

TEST_CASE("semi-Lagrangian steps respect the max principle") {
  const SpiralParams p{1.0, 1};
  std::mt19937 gen(99);
  std::uniform_real_distribution<double> dist(-1.0, 2.0);
  std::vector<double> vals(256);
  for (double& v : vals) v = dist(gen);
  auto h = make_field(p, vals);
  double lo = 1e300, hi = -1e300;
  for (double v : h.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EvolutionConfig cfg;
  cfg.t_end = 2.0;
  cfg.record_every = 20;
  const auto traj = run(h, cfg);
  for (const auto& s : traj.states)
    for (double v : s.values) {
      REQUIRE(v >= lo - 1e-8);
      REQUIRE(v <= hi + 1e-8);
    }
}

TEST_CASE("grid norms grow no faster than the stretching bound") {
  // d/dt ||h||_p <= (2/p) sup|H'| ||h||_p, checked per recorded step.
  const SpiralParams p{-0.9, 1};
  const auto h0 = make_field(p, 256, [](double t) { return 1.0 + 0.8 * std::sin(t); });
  EvolutionConfig cfg;
  cfg.t_end = 1.0;
  const auto traj = run(h0, cfg);
  for (size_t i = 0; i + 1 < traj.times.size(); ++i) {
    const double dt = traj.times[i + 1] - traj.times[i];
    const auto sol = solve_elliptic(traj.states[i]);
    double hp = 0.0;
    for (double v : sol.Hp.values) hp = std::max(hp, std::abs(v));
    for (size_t q = 0; q < 2; ++q) {
      const double pw = traj.diag[i].lp_norms[q].first;
      const double before = traj.diag[i].lp_norms[q].second;
      const double after = traj.diag[i + 1].lp_norms[q].second;
      REQUIRE(after <= before * std::exp(2.0 / pw * hp * dt) * (1.0 + 1e-6) + 50.0 * dt * dt);
    }
  }
}

TEST_CASE("the two methods agree on smooth data") {
  const SpiralParams p{1.0, 1};
  const auto h0 = make_field(p, 1024, [](double t) { return std::exp(std::cos(t)); });
  EvolutionConfig cfg;
  cfg.t_end = 1.0;
  cfg.record_every = 1 << 30;  // first and last only
  cfg.method = Method::semi_lagrangian;
  const auto a = run(h0, cfg);
  cfg.method = Method::spectral_rk4;
  const auto b = run(h0, cfg);
  REQUIRE(a.outcome == Outcome::completed);
  REQUIRE(b.outcome == Outcome::completed);
  REQUIRE(l2_difference(a.states.back(), b.states.back()) < 1e-4);
}

TEST_CASE("long runs relax toward a homogeneous state") {
  const SpiralParams p{1.0, 1};
  const auto h0 = cosine_field(p, 512);
  EvolutionConfig cfg;
  cfg.t_end = 30.0;
  cfg.record_every = 10;
  const auto traj = run(h0, cfg);
  REQUIRE(traj.outcome != Outcome::blowup_suspected);

  // intensity decreasing along the recorded series
  for (size_t i = 0; i + 1 < traj.diag.size(); ++i)
    REQUIRE(traj.diag[i + 1].intensity < traj.diag[i].intensity + 1e-10);

  // total drop accounted for by the time-integrated dissipation
  double dissipated = 0.0;
  for (size_t i = 0; i + 1 < traj.times.size(); ++i)
    dissipated += 0.5 * (traj.diag[i].dissipation + traj.diag[i + 1].dissipation) *
                  (traj.times[i + 1] - traj.times[i]);
  const double drop = traj.diag.front().intensity - traj.diag.back().intensity;
  REQUIRE(std::abs(drop - dissipated) < 0.02 * std::abs(drop));

  // dissipation has decayed and the state has mixed toward its mean
  REQUIRE(traj.diag.back().dissipation < 0.05 * traj.diag.front().dissipation);
  const double mean0 = traj.diag.front().intensity / two_pi;
  const double meanT = traj.diag.back().intensity / two_pi;
  auto fluct = [&](const AngularField& f, double mean) {
    auto g = f;
    for (double& v : g.values) v -= mean;
    return hminus_norm(g, 0.5);
  };
  REQUIRE(fluct(traj.states.back(), meanT) < fluct(traj.states.front(), mean0) / 3.0);
}

TEST_CASE("negative pitch drives the indicator upward") {
  const SpiralParams p{-1.0, 1};
  const auto h0 = make_field(p, 512, [&](double t) {
    const double x = angular_distance(p, 1.5, t);
    return std::abs(x) < 1.0 ? 0.5 * (1.0 + std::cos(pi * x)) : 0.0;
  });
  EvolutionConfig cfg;
  cfg.t_end = 8.0;
  cfg.record_every = 50;
  const auto traj = run(h0, cfg);
  for (size_t i = 0; i + 1 < traj.diag.size(); ++i)
    REQUIRE(traj.diag[i + 1].intensity > traj.diag[i].intensity - 1e-10);
  REQUIRE(traj.diag.back().intensity > traj.diag.front().intensity + 0.05);
  REQUIRE(traj.diag.back().intensity < two_pi * 1.0 + 1e-6);
}

TEST_CASE("concentrated negative spike trips the mass guard near the sheet blow-up time") {
  // A single sheet of intensity -1 at beta = 1 blows up at
  // T* = 1/(2 K'(0)) = 2 / coth(pi) = 1.9926; the run should stop from the
  // accumulated-L1 guard shortly after, once the spike has fattened to O(1).
  const SpiralParams p{1.0, 1};
  const auto h0 = spike_field(p, 512, -1.0, pi, 0.15);
  EvolutionConfig cfg;
  cfg.t_end = 20.0;
  cfg.record_every = 100;
  const auto traj = run(h0, cfg);
  REQUIRE(traj.outcome == Outcome::blowup_suspected);
  REQUIRE(traj.stop_reason == "l1_guard");
  REQUIRE(traj.times.back() > 1.2);
  REQUIRE(traj.times.back() < 8.0);
  REQUIRE(classify_longtime(traj).kind == LongTimeClass::finite_blowup);
}

TEST_CASE("long-time classification branches") {
  const SpiralParams p{1.0, 1};
  const auto h = cosine_field(p, 64);

  Trajectory synth;
  synth.times = {0.0, 1.0};
  synth.states = {h, h};
  synth.diag = {diagnostics(h), diagnostics(h)};
  synth.outcome = Outcome::blowup_suspected;
  synth.stop_reason = "l1_guard";
  REQUIRE(classify_longtime(synth).kind == LongTimeClass::finite_blowup);

  synth.stop_reason = "sup_guard";
  REQUIRE(classify_longtime(synth).kind == LongTimeClass::infinite_blowup);

  // completed but still far from its mean: honest undecided
  synth.outcome = Outcome::completed;
  synth.stop_reason.clear();
  REQUIRE(classify_longtime(synth).kind == LongTimeClass::undecided);
}
