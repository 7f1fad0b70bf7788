#include "chb6/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chb6/io.hpp"

namespace chb6 {

CostBreakdown evaluate_cost(const StateTrajectory& traj, const Control& g, const Targets& targets,
                            const ControlParams& cp) {
  targets.validate(traj.grid, traj.time);
  if (g.steps() != traj.time.n_steps) throw std::invalid_argument("evaluate_cost: control and trajectory differ");
  const int N = traj.time.n_steps;
  const double dt = traj.time.dt();
  CostBreakdown c;
  for (int n = 0; n < N; ++n) {
    if (cp.beta[0] != 0.0) {
      const double d = norm(traj.v[n] - targets.v_Q[n]);
      c.tracking_v += 0.5 * cp.beta[0] * dt * d * d;
    }
    if (cp.beta[1] != 0.0) {
      const double d = norm(traj.phi[n] - targets.phi_Q[n]);
      c.tracking_phi += 0.5 * cp.beta[1] * dt * d * d;
    }
  }
  if (cp.beta[2] != 0.0) {
    const double d = norm(traj.phi[N] - targets.phi_T);
    c.terminal = 0.5 * cp.beta[2] * d * d;
  }
  const double gn = g.norm();
  c.tikhonov = 0.5 * cp.beta[3] * gn * gn;
  if (cp.kappa != 0.0) c.sparsity = cp.kappa * g.l1_norm();
  return c;
}

Control prox_sparsity(const Control& z, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("prox_sparsity: tau must be nonnegative");
  Control out = z;
  if (tau == 0.0) return out;
  for (int n = 0; n < out.steps(); ++n) {
    VectorField& v = out[n];
    const Field mag = v.magnitude();
    for (std::size_t i = 0; i < mag.size(); ++i) {
      const double scale = mag[i] > tau ? 1.0 - tau / mag[i] : 0.0;
      for (std::size_t a = 0; a < v.dim(); ++a) v[a][i] *= scale;
    }
  }
  return out;
}

Control project_ball(const Control& z, double M) {
  if (!(M > 0.0)) throw std::invalid_argument("project_ball: M must be positive");
  const double n = z.norm();
  if (n <= M) return z;
  return (M / n) * z;
}

Control subgradient_select(const Control& g, const Control& v_adj, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("subgradient_select: kappa must be positive");
  Control s(g.grid_ptr(), g.time());
  for (int n = 0; n < g.steps(); ++n) {
    const Field gm = g[n].magnitude();
    const Field am = v_adj[n].magnitude();
    for (std::size_t i = 0; i < gm.size(); ++i) {
      for (std::size_t a = 0; a < g[n].dim(); ++a) {
        if (gm[i] > 0.0) {
          s[n][a][i] = g[n][a][i] / gm[i];
        } else {
          const double r = am[i] / kappa;
          s[n][a][i] = v_adj[n][a][i] / kappa / std::max(1.0, r);
        }
      }
    }
  }
  return s;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::LineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

double sparsity_fraction(const Control& g) {
  std::size_t zeros = 0;
  std::size_t total = 0;
  for (const auto& v : g.values()) {
    const Field m = v.magnitude();
    for (std::size_t i = 0; i < m.size(); ++i) zeros += (m[i] <= kZeroControl) ? 1 : 0;
    total += m.size();
  }
  return total ? static_cast<double>(zeros) / static_cast<double>(total) : 0.0;
}

ReducedEvaluation evaluate_reduced(const OptimalControlProblem& problem, const Control& g) {
  ReducedEvaluation ev;
  ev.traj = solve_state(g, problem.phi0, problem.params, problem.scheme);
  ev.adj = solve_adjoint(ev.traj, problem.targets, problem.control);
  ev.cost = evaluate_cost(ev.traj, g, problem.targets, problem.control);
  ev.gradient = reduced_gradient_smooth(g, ev.adj, problem.control.beta[3]);
  return ev;
}

namespace {

Control prox_grad_map(const Control& g, const Control& grad, double alpha, const ControlParams& cp) {
  Control z = g;
  z.axpy(-alpha, grad);
  return project_ball(prox_sparsity(z, alpha * cp.kappa), cp.M);
}

double fixed_point_residual(const Control& g, const Control& t) {
  const double gn = g.norm();
  const double d = (g - t).norm();
  if (gn > 0.0) return d / gn;
  return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

OptimizeReport optimize(const Control& g0, const OptimalControlProblem& problem, const OptimizeOptions& options) {
  const ControlParams& cp = problem.control;
  cp.validate();
  const double alpha0 = options.alpha0 > 0.0 ? options.alpha0 : 1.0 / cp.beta[3];

  OptimizeReport report;
  Control g = project_ball(g0, cp.M);
  ReducedEvaluation ev = evaluate_reduced(problem, g);
  report.forward_solves = 1;
  double last_alpha = 0.0;

  for (int k = 0;; ++k) {
    const Control t = prox_grad_map(g, ev.gradient, alpha0, cp);
    const double res = fixed_point_residual(g, t);
    report.iterates.push_back({k, ev.cost, res, last_alpha, sparsity_fraction(g)});
    report.final_residual = res;
    if (res <= options.tol_rel) {
      report.termination = Termination::Converged;
      break;
    }
    if (k >= options.max_iter) {
      report.termination = Termination::MaxIterations;
      break;
    }

    const double slack = 1e-12 * std::max(1.0, std::abs(ev.cost.total()));
    double alpha = alpha0;
    bool accepted = false;
    Control candidate;
    StateTrajectory traj;
    CostBreakdown cost;
    for (int h = 0; h <= options.max_halvings; ++h) {
      candidate = (h == 0) ? t : prox_grad_map(g, ev.gradient, alpha, cp);
      traj = solve_state(candidate, problem.phi0, problem.params, problem.scheme);
      ++report.forward_solves;
      cost = evaluate_cost(traj, candidate, problem.targets, cp);
      const Control d = candidate - g;
      const double dn = d.norm();
      const bool model_ok =
          cost.smooth() <= ev.cost.smooth() + ev.gradient.inner(d) + dn * dn / (2.0 * alpha) + slack;
      const bool total_ok = cost.total() <= ev.cost.total() + slack;
      if (model_ok && total_ok) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      report.termination = Termination::LineSearchFailed;
      break;
    }
    last_alpha = alpha;
    g = std::move(candidate);
    ev.adj = solve_adjoint(traj, problem.targets, cp);
    ev.traj = std::move(traj);
    ev.cost = cost;
    ev.gradient = reduced_gradient_smooth(g, ev.adj, cp.beta[3]);
  }

  report.control = g;
  report.v_adj = ev.adj.velocity(g.time());
  report.final_cost = ev.cost;
  return report;
}

SparsityReport sparsity_report(const Control& g, const Control& v_adj, const ControlParams& cp) {
  SparsityReport r;
  r.sparsity_fraction = sparsity_fraction(g);
  r.v_adj_norm = v_adj.norm();
  r.control_is_zero = (r.sparsity_fraction == 1.0);

  std::size_t below = 0;
  std::size_t total = 0;
  for (const auto& v : v_adj.values()) {
    const Field m = v.magnitude();
    for (std::size_t i = 0; i < m.size(); ++i) below += (m[i] <= cp.kappa) ? 1 : 0;
    total += m.size();
  }
  r.pointwise_below_kappa = total ? static_cast<double>(below) / static_cast<double>(total) : 0.0;

  const double b4 = cp.beta[3];
  Control residual = b4 * g;
  residual -= v_adj;
  if (cp.kappa > 0.0) {
    residual.axpy(cp.kappa, subgradient_select(g, v_adj, cp.kappa));
    if (r.control_is_zero) {
      r.criterion_checked = true;
      r.criterion_pass = r.v_adj_norm <= cp.kappa * (1.0 + 1e-8);
    }
  }
  Control step = g;
  step.axpy(-1.0 / b4, residual);
  const Control t = project_ball(step, cp.M);
  const double scale = std::max(g.norm(), r.v_adj_norm / b4);
  const double d = (g - t).norm();
  r.stationarity_residual = scale > 0.0 ? d / scale : d;
  return r;
}

std::vector<KappaSweepRow> kappa_sweep(const Control& g0, const OptimalControlProblem& problem,
                                       const std::vector<double>& kappas, const OptimizeOptions& options) {
  std::vector<KappaSweepRow> rows;
  for (double kappa : kappas) {
    OptimalControlProblem p = problem;
    p.control.kappa = kappa;
    KappaSweepRow row;
    row.kappa = kappa;
    row.report = optimize(g0, p, options);
    row.sparsity = sparsity_report(row.report.control, row.report.v_adj, p.control);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string kappa_table_csv(const std::vector<KappaSweepRow>& rows) {
  std::ostringstream os;
  os << "kappa,sparsity_fraction,control_norm,v_adj_norm,v_adj_below_kappa,residual,iterations,termination\n";
  for (const auto& r : rows) {
    os << io::format_double(r.kappa) << ',' << io::format_double(r.sparsity.sparsity_fraction) << ','
       << io::format_double(r.report.control.norm()) << ',' << io::format_double(r.sparsity.v_adj_norm) << ','
       << io::format_double(r.sparsity.pointwise_below_kappa) << ',' << io::format_double(r.report.final_residual)
       << ',' << r.report.iterates.size() - 1 << ',' << to_string(r.report.termination) << '\n';
  }
  return os.str();
}

}  // namespace chb6
