#pragma once

/// Command-line application: subcommand parsing, validation, dispatch, and
/// structured artifact output.  Every invocation writes its data files plus
/// a manifest.json; all files share a run id derived from the resolved
/// scientific settings and the seed, so reruns with the same configuration
/// are byte-identical (the manifest's wall time is the one exception).
///
///   kernel       tabulate the elliptic kernel and its boundary data
///   evolve       advect a grid state and record diagnostics
///   dirac        integrate an atom configuration
///   selfsimilar  two-sheet roots, branch scan, flat-pitch parameters
///   sheetlimit   mollified-atom convergence study
///   reconstruct  plane fields, pressure profile, support curves
///
/// Exit codes: 0 ok, 2 configuration error, 3 numerical event, 4 internal.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "logspiral/config.hpp"
#include "logspiral/dirac.hpp"
#include "logspiral/field.hpp"
#include "logspiral/io.hpp"
#include "logspiral/kernel.hpp"
#include "logspiral/params.hpp"
#include "logspiral/reconstruct.hpp"
#include "logspiral/selfsimilar.hpp"
#include "logspiral/sheet_limit.hpp"
#include "logspiral/transport.hpp"
#include "logspiral/version.hpp"

namespace logspiral::app {

struct RunContext {
  std::filesystem::path out_dir;
  unsigned long long seed = 0;
  int threads = 1;
  std::string subcommand;
  std::map<std::string, std::string> echo;  // resolved scientific settings
  std::string run_id;
  std::vector<std::string> files;

  void note(const std::string& key, const std::string& value) { echo[key] = value; }
  void note(const std::string& key, double value) { echo[key] = format_g17(value); }
  void note(const std::string& key, int value) { echo[key] = std::to_string(value); }

  void finalize_run_id() {
    std::string blob = std::string(version) + "|" + subcommand + "|" + std::to_string(seed);
    for (const auto& [k, v] : echo) blob += "|" + k + "=" + v;
    run_id = hex64(fnv1a64(blob));
  }

  void write(const std::string& name, const std::string& content) {
    atomic_write(out_dir / name, content);
    files.push_back(name);
  }

  void write_csv(const std::string& name, CsvBuilder& csv) {
    write(name, csv.str());
  }

  void write_json(const std::string& name, nlohmann::json j) {
    j["run_id"] = run_id;
    write(name, j.dump(2) + "\n");
  }
};

struct HandlerResult {
  int exit_code = 0;
  std::string outcome = "completed";
};

namespace detail {

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::completed: return "completed";
    case Outcome::blowup_suspected: return "blowup_suspected";
    case Outcome::homogenized: return "homogenized";
  }
  return "unknown";
}

inline CsvBuilder make_csv(const RunContext& ctx, std::vector<std::string> columns) {
  CsvBuilder csv(std::move(columns));
  csv.comment("run_id=" + ctx.run_id);
  return csv;
}

}  // namespace detail

// ---------------------------------------------------------------- kernel --

struct KernelOptions {
  double beta = 1.0;
  int m = 1;
  int n = 512;
};

inline HandlerResult run_kernel(RunContext& ctx, const KernelOptions& o) {
  const SpiralParams p{o.beta, o.m};
  validate(p);
  if (o.n < 2) throw std::invalid_argument("kernel: need at least 2 sample points");
  ctx.note("beta", o.beta);
  ctx.note("m", o.m);
  ctx.note("n", o.n);
  ctx.finalize_run_id();

  const double L = fundamental_period(p);
  auto csv = detail::make_csv(ctx, {"theta", "K", "Kp", "Kpp"});
  for (int i = 0; i < o.n; ++i) {
    const double th = (i + 0.5) * L / o.n;  // interior midpoints avoid the sheet point
    csv.begin_row()
        .add(th)
        .add(kernel_eval(p, th))
        .add(kernel_deriv(p, th))
        .add(kernel_second_deriv(p, th));
  }
  ctx.write_csv("kernel.csv", csv);

  const KernelBoundaryData b = kernel_boundary(p);
  nlohmann::json j;
  j["k0"] = b.k0;
  j["kp0"] = b.kp0;
  j["kp0_right"] = b.kp0_right;
  j["kp0_left"] = b.kp0_left;
  j["jump"] = b.jump;
  ctx.write_json("summary.json", j);
  return {};
}

// ---------------------------------------------------------------- evolve --

struct EvolveOptions {
  double beta = 1.0;
  int m = 1;
  int n = 256;
  std::string ic;
  double t_end = 1.0;
  double cfl = 0.5;
  double dt_cap = 1e9;
  int record_every = 16;
  std::string method = "sl";
  double l1_guard = 50.0;
  double sup_guard = 1e6;
};

inline HandlerResult run_evolve(RunContext& ctx, const EvolveOptions& o) {
  const SpiralParams p{o.beta, o.m};
  validate(p);
  const AngularField h0 = parse_initial_condition(o.ic, p, o.n);

  EvolutionConfig ecfg;
  ecfg.t_end = o.t_end;
  ecfg.cfl = o.cfl;
  ecfg.dt = o.dt_cap;
  ecfg.record_every = o.record_every;
  ecfg.l1_guard_ratio = o.l1_guard;
  ecfg.sup_guard_ratio = o.sup_guard;
  if (o.method == "sl" || o.method == "semi_lagrangian")
    ecfg.method = Method::semi_lagrangian;
  else if (o.method == "spectral" || o.method == "spectral_rk4")
    ecfg.method = Method::spectral_rk4;
  else
    throw std::invalid_argument("evolve: method '" + o.method + "' (expected sl or spectral)");
  ecfg.validate();

  ctx.note("beta", o.beta);
  ctx.note("m", o.m);
  ctx.note("n", o.n);
  ctx.note("ic", o.ic);
  ctx.note("t_end", o.t_end);
  ctx.note("cfl", o.cfl);
  ctx.note("dt_cap", o.dt_cap);
  ctx.note("record_every", o.record_every);
  ctx.note("method", o.method);
  ctx.note("l1_guard", o.l1_guard);
  ctx.note("sup_guard", o.sup_guard);
  ctx.finalize_run_id();

  const Trajectory traj = run(h0, ecfg);

  auto csv = detail::make_csv(
      ctx, {"t", "intensity", "dissipation", "l1", "l2", "linf", "l1_time_integral"});
  for (size_t k = 0; k < traj.times.size(); ++k) {
    const Diagnostics& d = traj.diag[k];
    csv.begin_row()
        .add(traj.times[k])
        .add(d.intensity)
        .add(d.dissipation)
        .add(d.lp_norms[0].second)
        .add(d.lp_norms[1].second)
        .add(d.lp_norms[2].second)
        .add(d.l1_time_integral);
  }
  ctx.write_csv("diagnostics.csv", csv);

  const AngularField& hf = traj.states.back();
  auto state = detail::make_csv(ctx, {"theta", "h"});
  for (int k = 0; k < hf.size(); ++k) state.begin_row().add(hf.theta(k)).add(hf.values[k]);
  ctx.write_csv("final_state.csv", state);

  HandlerResult r;
  r.outcome = detail::to_string(traj.outcome);
  if (!traj.stop_reason.empty()) r.outcome += ":" + traj.stop_reason;
  if (traj.outcome == Outcome::blowup_suspected) r.exit_code = 3;
  return r;
}

// ----------------------------------------------------------------- dirac --

struct DiracOptions {
  double beta = 1.0;
  int m = 1;
  std::string atoms;
  double t_end = 1.0;
  double rtol = 1e-9;
  double atol = 1e-12;
  int n_samples = 200;
};

inline HandlerResult run_dirac(RunContext& ctx, const DiracOptions& o) {
  const SpiralParams p{o.beta, o.m};
  const DiracConfig cfg{p, parse_atoms(o.atoms)};
  validate_config(cfg);
  if (!(o.t_end > 0.0)) throw std::invalid_argument("dirac: t_end must be positive");

  ctx.note("beta", o.beta);
  ctx.note("m", o.m);
  ctx.note("atoms", o.atoms);
  ctx.note("t_end", o.t_end);
  ctx.note("rtol", o.rtol);
  ctx.note("atol", o.atol);
  ctx.note("n_samples", o.n_samples);
  ctx.finalize_run_id();

  IntegrateOptions iopts;
  iopts.rtol = o.rtol;
  iopts.atol = o.atol;
  iopts.n_samples = o.n_samples;
  const DiracTrajectory traj = integrate(cfg, o.t_end, iopts);

  const size_t M = cfg.atoms.size();
  std::vector<std::string> cols{"t", "sum_intensity"};
  for (size_t j = 0; j < M; ++j) cols.push_back("I" + std::to_string(j));
  for (size_t j = 0; j < M; ++j) cols.push_back("theta" + std::to_string(j));
  auto csv = detail::make_csv(ctx, cols);
  for (size_t k = 0; k < traj.times.size(); ++k) {
    csv.begin_row().add(traj.times[k]).add(traj.sum_intensity[k]);
    for (size_t j = 0; j < M; ++j) csv.add(traj.states[k].atoms[j].I);
    for (size_t j = 0; j < M; ++j) csv.add(traj.states[k].atoms[j].theta);
  }
  ctx.write_csv("trajectory.csv", csv);

  nlohmann::json j;
  j["event_type"] = to_string(traj.event.type);
  if (traj.event.type != DiracEventType::none) {
    j["event_t"] = traj.event.t;
    if (std::isfinite(traj.event.fitted_Tstar)) j["fitted_Tstar"] = traj.event.fitted_Tstar;
  }
  j["t_final"] = traj.times.back();
  j["sum_intensity_final"] = traj.sum_intensity.back();
  ctx.write_json("summary.json", j);

  HandlerResult r;
  if (traj.event.type != DiracEventType::none) {
    r.exit_code = 3;
    r.outcome = std::string("event:") + to_string(traj.event.type);
  }
  return r;
}

// ----------------------------------------------------------- selfsimilar --

struct SelfsimilarOptions {
  double beta = 1.0;
  int m = 1;
  double d_lo = 1e-3;
  double d_hi = pi;
  int seeds = 200;
  bool include_pi = false;
  std::string beta_grid;  // nonempty switches to the branch scan
};

inline HandlerResult run_selfsimilar(RunContext& ctx, const SelfsimilarOptions& o) {
  if (o.m != 1)
    throw std::invalid_argument("selfsimilar: the two-sheet analysis is defined for m = 1");

  if (!o.beta_grid.empty()) {
    std::vector<double> grid;
    for (const auto& tok : split(o.beta_grid, ','))
      grid.push_back(parse_double(tok, "beta grid entry"));
    ctx.note("beta_grid", o.beta_grid);
    ctx.finalize_run_id();

    const BifurcationScan scan = bifurcation_scan(grid);
    auto csv = detail::make_csv(ctx, {"beta", "root_count", "d_root", "A1", "A2"});
    for (const auto& row : scan.rows)
      csv.begin_row()
          .add(row.beta)
          .add(double(row.root_count))
          .add(row.d_root)
          .add(row.A1)
          .add(row.A2);
    ctx.write_csv("branch.csv", csv);

    nlohmann::json j;
    j["beta0_est"] = scan.beta0_est;
    j["beta1_est"] = scan.beta1_est;
    ctx.write_json("summary.json", j);
    return {};
  }

  const SpiralParams p{o.beta, o.m};
  validate(p);
  ctx.note("beta", o.beta);
  ctx.note("d_lo", o.d_lo);
  ctx.note("d_hi", o.d_hi);
  ctx.note("seeds", o.seeds);
  ctx.note("include_pi", o.include_pi ? 1 : 0);
  ctx.finalize_run_id();

  const auto roots = find_roots(p, o.d_lo, o.d_hi, o.seeds, o.include_pi);
  auto csv = detail::make_csv(ctx, {"d", "A1", "A2"});
  for (const auto& r : roots) csv.begin_row().add(r.d).add(r.A1).add(r.A2);
  ctx.write_csv("roots.csv", csv);

  const PrandtlParameters pr = prandtl_parameters(p);
  nlohmann::json j;
  j["root_count"] = roots.size();
  j["prandtl_g"] = pr.g;
  j["prandtl_mu"] = pr.mu;
  ctx.write_json("summary.json", j);
  return {};
}

// ------------------------------------------------------------ sheetlimit --

struct SheetlimitOptions {
  double beta = 1.0;
  int m = 1;
  std::string atoms;
  std::string eps_list = "0.1,0.05,0.025";
  double t_end = 0.5;
  std::string shape = "smooth_bump";
  int n_samples = 10;
  double cfl = 0.4;
};

inline HandlerResult run_sheetlimit(RunContext& ctx, const SheetlimitOptions& o) {
  const SpiralParams p{o.beta, o.m};
  const DiracConfig cfg{p, parse_atoms(o.atoms)};
  validate_config(cfg);
  std::vector<double> eps;
  for (const auto& tok : split(o.eps_list, ','))
    eps.push_back(parse_double(tok, "eps list entry"));

  StudyOptions sopts;
  sopts.shape = parse_shape(o.shape);
  sopts.n_samples = o.n_samples;
  sopts.cfl = o.cfl;

  ctx.note("beta", o.beta);
  ctx.note("m", o.m);
  ctx.note("atoms", o.atoms);
  ctx.note("eps_list", o.eps_list);
  ctx.note("t_end", o.t_end);
  ctx.note("shape", o.shape);
  ctx.note("n_samples", o.n_samples);
  ctx.note("cfl", o.cfl);
  ctx.finalize_run_id();

  const ConvergenceStudy study = convergence_study(cfg, eps, o.t_end, sopts);
  auto csv = detail::make_csv(ctx, {"eps", "n", "err_theta", "err_I"});
  for (const auto& row : study.rows)
    csv.begin_row().add(row.eps).add(double(row.n)).add(row.err_theta).add(row.err_I);
  ctx.write_csv("errors.csv", csv);

  nlohmann::json j;
  j["q_theta"] = study.q_theta;
  j["q_I"] = study.q_I;
  j["r2_theta"] = study.r2_theta;
  j["r2_I"] = study.r2_I;
  j["mass_defect_max"] = study.mass_defect_max;
  ctx.write_json("rates.json", j);
  return {};
}

// ----------------------------------------------------------- reconstruct --

struct ReconstructOptions {
  double beta = 1.0;
  int m = 1;
  int n = 256;
  std::string ic;
  double r_min = 0.25;
  double r_max = 4.0;
  int n_r = 64;
  int n_theta = 256;
  std::string fields = "omega,u_r,u_theta,psi";
  std::string format = "csv";
  bool pressure = false;
  double circulation_radius = 0.0;
  std::string curve_atoms;
};

inline HandlerResult run_reconstruct(RunContext& ctx, const ReconstructOptions& o) {
  const SpiralParams p{o.beta, o.m};
  validate(p);
  const AngularField h = parse_initial_condition(o.ic, p, o.n);

  std::vector<PlaneField> fields;
  std::vector<std::string> field_names;
  for (const auto& tok : split(o.fields, ',')) {
    if (tok == "omega") fields.push_back(PlaneField::omega);
    else if (tok == "u_r") fields.push_back(PlaneField::u_r);
    else if (tok == "u_theta") fields.push_back(PlaneField::u_theta);
    else if (tok == "psi") fields.push_back(PlaneField::psi);
    else throw std::invalid_argument("reconstruct: unknown field '" + tok + "'");
    field_names.push_back(tok);
  }
  if (o.format != "csv" && o.format != "binary")
    throw std::invalid_argument("reconstruct: format '" + o.format + "' (expected csv or binary)");

  ctx.note("beta", o.beta);
  ctx.note("m", o.m);
  ctx.note("n", o.n);
  ctx.note("ic", o.ic);
  ctx.note("r_min", o.r_min);
  ctx.note("r_max", o.r_max);
  ctx.note("n_r", o.n_r);
  ctx.note("n_theta", o.n_theta);
  ctx.note("fields", o.fields);
  ctx.note("format", o.format);
  ctx.note("pressure", o.pressure ? 1 : 0);
  ctx.note("circulation_radius", o.circulation_radius);
  if (!o.curve_atoms.empty()) ctx.note("curve_atoms", o.curve_atoms);
  ctx.finalize_run_id();

  const PlaneGridSpec spec{o.r_min, o.r_max, o.n_r, o.n_theta};
  const PlaneGrid grid = sample_plane(h, spec, fields);

  if (o.format == "csv") {
    std::vector<std::string> cols{"r", "theta"};
    cols.insert(cols.end(), field_names.begin(), field_names.end());
    auto csv = detail::make_csv(ctx, cols);
    for (size_t i = 0; i < grid.r.size(); ++i)
      for (size_t j = 0; j < grid.theta.size(); ++j) {
        csv.begin_row().add(grid.r[i]).add(grid.theta[j]);
        for (size_t f = 0; f < fields.size(); ++f)
          csv.add(grid.at(int(f), int(i), int(j)));
      }
    ctx.write_csv("plane.csv", csv);
  } else {
    std::string blob(reinterpret_cast<const char*>(grid.values.data()),
                     grid.values.size() * sizeof(double));
    ctx.write("grid.bin", blob);
    nlohmann::json j;
    j["n_r"] = o.n_r;
    j["n_theta"] = o.n_theta;
    j["r_min"] = o.r_min;
    j["r_max"] = o.r_max;
    j["radii"] = "log_uniform";
    j["theta_start"] = 0.0;
    j["theta_period"] = two_pi;
    j["fields"] = field_names;
    j["layout"] = "field, then radius, then angle; row-major";
    j["dtype"] = "float64";
    j["byte_order"] = "little";
    j["count"] = grid.values.size();
    ctx.write_json("grid_header.json", j);
  }

  if (o.pressure) {
    const AngularField P = pressure_profile(h);
    auto csv = detail::make_csv(ctx, {"theta", "P"});
    for (int k = 0; k < P.size(); ++k) csv.begin_row().add(P.theta(k)).add(P.values[k]);
    ctx.write_csv("pressure.csv", csv);
  }

  if (o.circulation_radius > 0.0) {
    nlohmann::json j;
    j["radius"] = o.circulation_radius;
    j["circulation"] = circulation(h, o.circulation_radius);
    ctx.write_json("circulation.json", j);
  }

  if (!o.curve_atoms.empty()) {
    const DiracConfig cfg{p, parse_atoms(o.curve_atoms)};
    const auto curves = spiral_support_curves(cfg, o.r_min, o.r_max, o.n_r);
    auto csv = detail::make_csv(ctx, {"atom", "copy", "r", "theta"});
    for (const auto& c : curves)
      for (size_t i = 0; i < c.r.size(); ++i)
        csv.begin_row().add(double(c.atom)).add(double(c.copy)).add(c.r[i]).add(c.theta[i]);
    ctx.write_csv("curves.csv", csv);
  }
  return {};
}

// ------------------------------------------------------------------ main --

inline int run_app(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App cli{"numerical laboratory for logarithmic-spiral vorticity dynamics"};
  cli.require_subcommand(1);
  cli.set_config("--config", "", "flat key = value settings, [subcommand] sections; flags win");

  RunContext ctx;
  std::string out_dir = "out";
  cli.add_option("--out-dir", out_dir, "output directory (created if missing)")
      ->capture_default_str();
  cli.add_option("--seed", ctx.seed, "seed recorded for randomized ensembles")
      ->capture_default_str();
  cli.add_option("--threads", ctx.threads, "reserved; runs are currently sequential")
      ->capture_default_str();

  KernelOptions ko;
  auto* kernel_cmd = cli.add_subcommand("kernel", "tabulate the elliptic kernel");
  kernel_cmd->add_option("--beta", ko.beta, "spiral pitch (nonzero)")->capture_default_str();
  kernel_cmd->add_option("--m", ko.m, "fold symmetry")->capture_default_str();
  kernel_cmd->add_option("--n", ko.n, "sample count")->capture_default_str();

  EvolveOptions eo;
  auto* evolve_cmd = cli.add_subcommand("evolve", "advect a grid state");
  evolve_cmd->add_option("--beta", eo.beta, "spiral pitch (nonzero)")->capture_default_str();
  evolve_cmd->add_option("--m", eo.m, "fold symmetry")->capture_default_str();
  evolve_cmd->add_option("--n", eo.n, "grid size (power of two)")->capture_default_str();
  evolve_cmd->add_option("--ic", eo.ic, "initial condition spec")->required();
  evolve_cmd->add_option("--t-end", eo.t_end, "horizon")->capture_default_str();
  evolve_cmd->add_option("--cfl", eo.cfl, "CFL number in (0,1]")->capture_default_str();
  evolve_cmd->add_option("--dt-cap", eo.dt_cap, "upper bound on the step")->capture_default_str();
  evolve_cmd->add_option("--record-every", eo.record_every, "recording cadence in steps")
      ->capture_default_str();
  evolve_cmd->add_option("--method", eo.method, "sl or spectral")->capture_default_str();
  evolve_cmd->add_option("--l1-guard", eo.l1_guard, "blow-up guard ratio")->capture_default_str();
  evolve_cmd->add_option("--sup-guard", eo.sup_guard, "sup guard ratio")->capture_default_str();

  DiracOptions dto;
  auto* dirac_cmd = cli.add_subcommand("dirac", "integrate an atom configuration");
  dirac_cmd->add_option("--beta", dto.beta, "spiral pitch (nonzero)")->capture_default_str();
  dirac_cmd->add_option("--m", dto.m, "fold symmetry")->capture_default_str();
  dirac_cmd->add_option("--atoms", dto.atoms, "I:THETA,I:THETA,...")->required();
  dirac_cmd->add_option("--t-end", dto.t_end, "horizon")->capture_default_str();
  dirac_cmd->add_option("--rtol", dto.rtol, "relative tolerance")->capture_default_str();
  dirac_cmd->add_option("--atol", dto.atol, "absolute tolerance")->capture_default_str();
  dirac_cmd->add_option("--n-samples", dto.n_samples, "recorded sample count")
      ->capture_default_str();

  SelfsimilarOptions so;
  auto* selfsimilar_cmd = cli.add_subcommand("selfsimilar", "two-sheet roots and branch scan");
  selfsimilar_cmd->add_option("--beta", so.beta, "spiral pitch (nonzero)")->capture_default_str();
  selfsimilar_cmd->add_option("--m", so.m, "fold symmetry (must be 1)")->capture_default_str();
  selfsimilar_cmd->add_option("--d-lo", so.d_lo, "gap search lower end")->capture_default_str();
  selfsimilar_cmd->add_option("--d-hi", so.d_hi, "gap search upper end")->capture_default_str();
  selfsimilar_cmd->add_option("--seeds", so.seeds, "bisection seed count")->capture_default_str();
  selfsimilar_cmd->add_flag("--include-pi", so.include_pi, "append the antipodal root");
  selfsimilar_cmd->add_option("--beta-grid", so.beta_grid,
                              "comma list of beta values; switches to the branch scan");

  SheetlimitOptions sho;
  auto* sheetlimit_cmd = cli.add_subcommand("sheetlimit", "mollified-atom convergence study");
  sheetlimit_cmd->add_option("--beta", sho.beta, "spiral pitch (nonzero)")->capture_default_str();
  sheetlimit_cmd->add_option("--m", sho.m, "fold symmetry")->capture_default_str();
  sheetlimit_cmd->add_option("--atoms", sho.atoms, "I:THETA,I:THETA,...")->required();
  sheetlimit_cmd->add_option("--eps-list", sho.eps_list, "decreasing widths")
      ->capture_default_str();
  sheetlimit_cmd->add_option("--t-end", sho.t_end, "horizon")->capture_default_str();
  sheetlimit_cmd->add_option("--shape", sho.shape, "patch or smooth_bump")
      ->capture_default_str();
  sheetlimit_cmd->add_option("--n-samples", sho.n_samples, "comparison sample count")
      ->capture_default_str();
  sheetlimit_cmd->add_option("--cfl", sho.cfl, "CFL number in (0,1]")->capture_default_str();

  ReconstructOptions ro;
  auto* reconstruct_cmd = cli.add_subcommand("reconstruct", "lift a state to the plane");
  reconstruct_cmd->add_option("--beta", ro.beta, "spiral pitch (nonzero)")->capture_default_str();
  reconstruct_cmd->add_option("--m", ro.m, "fold symmetry")->capture_default_str();
  reconstruct_cmd->add_option("--n", ro.n, "state grid size (power of two)")
      ->capture_default_str();
  reconstruct_cmd->add_option("--ic", ro.ic, "state spec")->required();
  reconstruct_cmd->add_option("--r-min", ro.r_min, "inner radius (> 0)")->capture_default_str();
  reconstruct_cmd->add_option("--r-max", ro.r_max, "outer radius")->capture_default_str();
  reconstruct_cmd->add_option("--n-r", ro.n_r, "radial resolution")->capture_default_str();
  reconstruct_cmd->add_option("--n-theta", ro.n_theta, "angular resolution")
      ->capture_default_str();
  reconstruct_cmd->add_option("--fields", ro.fields, "subset of omega,u_r,u_theta,psi")
      ->capture_default_str();
  reconstruct_cmd->add_option("--format", ro.format, "csv or binary")->capture_default_str();
  reconstruct_cmd->add_flag("--pressure", ro.pressure, "also write the pressure profile");
  reconstruct_cmd->add_option("--circulation-radius", ro.circulation_radius,
                              "if positive, write circulation over that disk")
      ->capture_default_str();
  reconstruct_cmd->add_option("--curve-atoms", ro.curve_atoms,
                              "atoms whose support curves to write");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("logspiral");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    cli.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << cli.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << cli.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  HandlerResult result;
  try {
    ctx.out_dir = out_dir;
    std::filesystem::create_directories(ctx.out_dir);
    if (kernel_cmd->parsed()) {
      ctx.subcommand = "kernel";
      result = run_kernel(ctx, ko);
    } else if (evolve_cmd->parsed()) {
      ctx.subcommand = "evolve";
      result = run_evolve(ctx, eo);
    } else if (dirac_cmd->parsed()) {
      ctx.subcommand = "dirac";
      result = run_dirac(ctx, dto);
    } else if (selfsimilar_cmd->parsed()) {
      ctx.subcommand = "selfsimilar";
      result = run_selfsimilar(ctx, so);
    } else if (sheetlimit_cmd->parsed()) {
      ctx.subcommand = "sheetlimit";
      result = run_sheetlimit(ctx, sho);
    } else if (reconstruct_cmd->parsed()) {
      ctx.subcommand = "reconstruct";
      result = run_reconstruct(ctx, ro);
    }
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 4;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::json manifest;
  manifest["run_id"] = ctx.run_id;
  manifest["subcommand"] = ctx.subcommand;
  manifest["config"] = ctx.echo;
  manifest["seed"] = ctx.seed;
  manifest["threads"] = ctx.threads;
  manifest["versions"] = {{"logspiral", std::string(version)}, {"compiler", __VERSION__}};
  manifest["outcome"] = result.outcome;
  manifest["files"] = ctx.files;
  manifest["wall_time_s"] = wall;
  atomic_write(ctx.out_dir / "manifest.json", manifest.dump(2) + "\n");

  out << ctx.subcommand << ": " << result.outcome << " (run " << ctx.run_id << ", "
      << ctx.files.size() << " artifacts in " << ctx.out_dir.string() << ")\n";
  return result.exit_code;
}

}  // namespace logspiral::app
