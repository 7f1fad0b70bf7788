// Cost evaluation, proximal and projection operators, the proximal-projected
// gradient loop and the optimality/sparsity report.
#pragma once

#include <string>
#include <vector>

#include "chb6/sensitivity.hpp"
#include "chb6/state.hpp"

namespace chb6 {

struct CostBreakdown {
  double tracking_v = 0.0;
  double tracking_phi = 0.0;
  double terminal = 0.0;
  double tikhonov = 0.0;
  double sparsity = 0.0;

  double smooth() const { return tracking_v + tracking_phi + terminal + tikhonov; }
  double total() const { return smooth() + sparsity; }
};

/// J = b1/2 int_Q |v - v_Q|^2 + b2/2 int_Q |phi - phi_Q|^2 + b3/2 int |phi(T) - phi_T|^2
///   + b4/2 int_Q |g|^2, plus kappa int_Q |g|.
CostBreakdown evaluate_cost(const StateTrajectory& traj, const Control& g, const Targets& targets,
                            const ControlParams& cp);

/// Pointwise vector soft threshold max(0, 1 - tau/|z|) z.
Control prox_sparsity(const Control& z, double tau);

/// Radial projection onto the L2(Q) ball of radius M.
Control project_ball(const Control& z, double M);

/// Subgradient selection for the L1 term: g/|g| where g != 0, otherwise
/// v^a / kappa clamped into the pointwise unit ball. Throws for kappa <= 0.
Control subgradient_select(const Control& g, const Control& v_adj, double kappa);

struct OptimalControlProblem {
  Field phi0;
  PhysParams params;
  SchemeParams scheme;
  ControlParams control;
  Targets targets;
};

struct OptimizeOptions {
  double tol_rel = 1e-4;
  int max_iter = 500;
  int max_halvings = 40;
  /// Initial step; unset means 1 / beta4.
  double alpha0 = 0.0;
};

struct OptimizeIterate {
  int iter = 0;
  CostBreakdown cost;
  double residual = 0.0;
  double alpha = 0.0;
  double sparsity_fraction = 0.0;
};

enum class Termination { Converged, MaxIterations, LineSearchFailed };

std::string to_string(Termination t);

struct OptimizeReport {
  std::vector<OptimizeIterate> iterates;
  Control control;
  Control v_adj;
  CostBreakdown final_cost;
  double final_residual = 0.0;
  Termination termination = Termination::MaxIterations;
  int forward_solves = 0;
};

/// Smooth reduced cost and its gradient at g: one forward and one adjoint solve.
struct ReducedEvaluation {
  StateTrajectory traj;
  AdjointTrajectory adj;
  CostBreakdown cost;
  Control gradient;  // beta4 g - v^a
};

ReducedEvaluation evaluate_reduced(const OptimalControlProblem& problem, const Control& g);

/// Proximal-projected gradient:
///   z = g - alpha (beta4 g - v^a);  g+ = project_ball(prox_sparsity(z, alpha kappa), M)
/// Stops when ||g - T(g)|| <= tol ||g||, T the map above at alpha0.
OptimizeReport optimize(const Control& g0, const OptimalControlProblem& problem, const OptimizeOptions& options = {});

/// Threshold below which |g(x,t)| counts as zero.
inline constexpr double kZeroControl = 1e-14;

double sparsity_fraction(const Control& g);

struct SparsityReport {
  double sparsity_fraction = 0.0;
  double v_adj_norm = 0.0;
  /// Fraction of space-time points with |v^a(x,t)| <= kappa.
  double pointwise_below_kappa = 0.0;
  bool control_is_zero = false;
  bool criterion_checked = false;
  bool criterion_pass = true;
  /// ||g - P_M(g - (beta4 g + kappa s - v^a)/beta4)|| / scale with s the
  /// selected subgradient (kappa = 0 uses s = 0).
  double stationarity_residual = 0.0;
};

SparsityReport sparsity_report(const Control& g, const Control& v_adj, const ControlParams& cp);

struct KappaSweepRow {
  double kappa = 0.0;
  OptimizeReport report;
  SparsityReport sparsity;
};

/// One optimization per kappa, each started from g0.
std::vector<KappaSweepRow> kappa_sweep(const Control& g0, const OptimalControlProblem& problem,
                                       const std::vector<double>& kappas, const OptimizeOptions& options = {});

/// kappa,sparsity_fraction,control_norm,v_adj_norm,v_adj_below_kappa,residual,iterations,termination
std::string kappa_table_csv(const std::vector<KappaSweepRow>& rows);

}  // namespace chb6
