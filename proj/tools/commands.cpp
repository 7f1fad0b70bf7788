#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "chb6/io.hpp"
#include "chb6/verify.hpp"

#ifndef CHB6_VERSION
#define CHB6_VERSION "unknown"
#endif

namespace chb6::cli {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path output_dir(const RunConfig& cfg, const std::string& command) {
  if (!cfg.options.out.empty()) return cfg.options.out;
  const char* root = std::getenv("CHB6_OUT");
  return fs::path(root && *root ? root : "runs") / command;
}

namespace {

json metadata(const RunConfig& cfg, const std::string& command) {
  json m;
  m["command"] = command;
  m["version"] = CHB6_VERSION;
  m["fft_backend"] = fft_backend_version();
  m["seed"] = cfg.options.seed;
  m["threads"] = cfg.options.threads;
  m["config"] = cfg.source;
  return m;
}

void write_metadata(const fs::path& dir, const RunConfig& cfg, const std::string& command) {
  io::write_text(dir / "metadata.json", metadata(cfg, command).dump(2) + "\n");
}

json cost_json(const CostBreakdown& c) {
  return {{"tracking_v", c.tracking_v}, {"tracking_phi", c.tracking_phi}, {"terminal", c.terminal},
          {"tikhonov", c.tikhonov},     {"sparsity", c.sparsity},         {"total", c.total()}};
}

json sparsity_json(const OptimizeReport& rep, const SparsityReport& sp, const ControlParams& cp) {
  json j;
  j["kappa"] = cp.kappa;
  j["M"] = cp.M;
  j["termination"] = to_string(rep.termination);
  j["iterations"] = rep.iterates.size() - 1;
  j["forward_solves"] = rep.forward_solves;
  j["final_residual"] = rep.final_residual;
  j["final_cost"] = cost_json(rep.final_cost);
  j["control_norm"] = rep.control.norm();
  j["sparsity_fraction"] = sp.sparsity_fraction;
  j["v_adj_norm"] = sp.v_adj_norm;
  j["v_adj_below_kappa"] = sp.pointwise_below_kappa;
  j["control_is_zero"] = sp.control_is_zero;
  j["zero_control_criterion_checked"] = sp.criterion_checked;
  j["zero_control_criterion_pass"] = sp.criterion_pass;
  j["stationarity_residual"] = sp.stationarity_residual;
  return j;
}

OptimalControlProblem problem_of(const RunConfig& cfg, double kappa) {
  OptimalControlProblem p;
  p.phi0 = cfg.phi0;
  p.params = cfg.physics;
  p.scheme = cfg.scheme;
  p.control = cfg.control;
  p.control.kappa = kappa;
  p.targets = cfg.targets;
  return p;
}

OptimizeOptions optimize_options(const RunConfig& cfg) {
  OptimizeOptions o;
  o.tol_rel = cfg.options.tol;
  o.max_iter = cfg.options.max_iter;
  o.max_halvings = cfg.options.max_halvings;
  o.alpha0 = cfg.options.alpha0;
  return o;
}

// Writes one optimization result into dir; returns false on line-search failure.
bool write_optimize_run(const fs::path& dir, const OptimizeReport& rep, const ControlParams& cp) {
  fs::create_directories(dir);
  io::write_optimize_csv(dir / "optimize.csv", rep);
  io::write_control(dir / "control", rep.control);
  const SparsityReport sp = sparsity_report(rep.control, rep.v_adj, cp);
  io::write_text(dir / "sparsity.json", sparsity_json(rep, sp, cp).dump(2) + "\n");
  io::write_text(dir / "plots.gp", io::optimize_plot_script());
  std::printf("kappa=%g: %s after %zu iterations, residual %.3e, cost %.6g, sparsity %.4f\n", cp.kappa,
              to_string(rep.termination).c_str(), rep.iterates.size() - 1, rep.final_residual,
              rep.final_cost.total(), sp.sparsity_fraction);
  if (rep.termination == Termination::MaxIterations)
    std::fprintf(stderr, "warning: kappa=%g stopped at the iteration limit\n", cp.kappa);
  return rep.termination != Termination::LineSearchFailed;
}

}  // namespace

int run_simulate(const RunConfig& cfg) {
  const fs::path dir = output_dir(cfg, "simulate");
  fs::create_directories(dir);
  const Control g = cfg.g0;
  const StateTrajectory traj = solve_state(g, cfg.phi0, cfg.physics, cfg.scheme);
  const Diagnostics d = diagnostics(traj);
  io::write_series_csv(dir / "series.csv", d);
  io::write_snapshots(dir / "snapshots", traj, cfg.options.snapshot_every);
  io::write_text(dir / "plots.gp", io::simulate_plot_script());
  write_metadata(dir, cfg, "simulate");
  if (d.range_warning)
    std::fprintf(stderr, "warning: max|phi| exceeded %.2f; the potential's convexity bounds no longer hold\n",
                 kPhaseRangeWarning);
  std::printf("simulate: %d steps, energy %.6g -> %.6g, mean %.6g -> %.6g, output %s\n", traj.time.n_steps,
              d.energy.front(), d.energy.back(), d.mean.front(), d.mean.back(), dir.string().c_str());
  return kExitOk;
}

int run_optimize(const RunConfig& cfg) {
  if (cfg.kappas.size() > 1) return run_sweep_kappa(cfg);
  const fs::path dir = output_dir(cfg, "optimize");
  const OptimalControlProblem p = problem_of(cfg, cfg.kappas.front());
  const OptimizeReport rep = optimize(cfg.g0, p, optimize_options(cfg));
  const bool ok = write_optimize_run(dir, rep, p.control);
  write_metadata(dir, cfg, "optimize");
  return ok ? kExitOk : kExitOptimizer;
}

int run_sweep_kappa(const RunConfig& cfg) {
  const fs::path dir = output_dir(cfg, "sweep-kappa");
  fs::create_directories(dir);
  const OptimalControlProblem base = problem_of(cfg, 0.0);
  const auto rows = kappa_sweep(cfg.g0, base, cfg.kappas, optimize_options(cfg));
  bool ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "kappa_%02zu", i);
    ControlParams cp = base.control;
    cp.kappa = rows[i].kappa;
    ok = write_optimize_run(dir / name, rows[i].report, cp) && ok;
  }
  io::write_text(dir / "sparsity.csv", kappa_table_csv(rows));
  write_metadata(dir, cfg, "sweep-kappa");
  std::printf("%s", kappa_table_csv(rows).c_str());
  return ok ? kExitOk : kExitOptimizer;
}

int run_verify(const RunConfig& cfg, const VerifyFlags& flags) {
  verify::VerifyConfig vc = cfg.verify;
  vc.only = flags.only;
  vc.mutate = flags.mutate;
  const fs::path dir = output_dir(cfg, "verify");
  fs::create_directories(dir);
  bool all = true;
  const auto results = verify::run_battery(vc, [&](const verify::CheckResult& r) {
    all = all && r.pass;
    std::printf("[%s] %-14s value=%-12.5g threshold=%-10.3g %6.1fs  %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                r.value, r.threshold, r.seconds, r.detail.c_str());
    std::fflush(stdout);
  });
  io::write_text(dir / "verify.csv", verify::to_csv(results));
  io::write_text(dir / "verify.json", verify::to_json(results, vc));
  write_metadata(dir, cfg, "verify");
  return all ? kExitOk : kExitVerifyFailed;
}

}  // namespace chb6::cli
