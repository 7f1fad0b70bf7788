// Tangent (linearized) solve of the discrete forward map and its exact
// algebraic transpose.
//
// The tangent differentiates each forward step term by term around a stored
// trajectory:
//   xi_n    = -lap psi_n + P[f'(phi_n) psi_n]
//   theta_n = -lap xi_n + P[f''(phi_n) w_n psi_n + f'(phi_n) xi_n] + nu xi_n
//   wv_n    = K_n^{-1} LP[theta_n grad phi_n + mu_n grad psi_n + u_n - lambda'(phi_n) psi_n v_n]
//   psi_{n+1} = P D^{-1}[psi_n + dt(lap theta_n - lap^3 psi_n + ks lap^2 psi_n
//                 - wv_n . grad phi_n - v_n . grad psi_n + S'(phi_n) psi_n)]
//
// The adjoint sweep runs the transposed blocks backward in time. With the
// cost seeds it produces (v^a, phi^a, mu^a, w^a) such that the Riesz
// representative of the smooth reduced cost derivative is beta4 g - v^a.
#pragma once

#include <vector>

#include "chb6/spectral.hpp"
#include "chb6/state.hpp"

namespace chb6 {

struct LinearizedTrajectory {
  std::vector<Field> psi;          // n_steps + 1, psi[0] == 0
  std::vector<VectorField> w_vel;  // n_steps
  std::vector<Field> theta;        // n_steps
  std::vector<Field> xi;           // n_steps
};

LinearizedTrajectory solve_linearized(const StateTrajectory& traj, const Control& u);

/// Linear functional on tangent trajectories,
///   l(w, psi) = sum_n <dv_n, w_n>_Omega + sum_n <dphi_n, psi_n>_Omega,
/// given by plain (not dt-weighted) spatial inner products.
struct TangentFunctional {
  std::vector<VectorField> dv;  // n_steps
  std::vector<Field> dphi;      // n_steps + 1 (entry 0 only feeds the phi0 sensitivity)

  static TangentFunctional zero(const StateTrajectory& traj);
  double apply(const LinearizedTrajectory& lin) const;
  double norm() const;
};

struct SweepOptions {
  /// Negative-control fixture: flips the sign of the lap(b) contribution to
  /// the theta block. Only the verification battery sets it.
  bool corrupt_transpose = false;
};

/// Raw transpose output: l(L u) = sum_n <control_sensitivity_n, u_n>_Omega.
struct SweepResult {
  std::vector<VectorField> control_sensitivity;  // n_steps
  std::vector<Field> phi_sensitivity;            // n_steps + 1, a_n
  std::vector<Field> theta_sensitivity;          // n_steps
  std::vector<Field> xi_sensitivity;             // n_steps
};

SweepResult adjoint_sweep(const StateTrajectory& traj, const TangentFunctional& seed,
                          const SweepOptions& options = {});

struct AdjointTrajectory {
  std::vector<VectorField> v_adj;  // n_steps, divergence-free
  std::vector<Field> phi_adj;      // n_steps + 1
  std::vector<Field> mu_adj;       // n_steps
  std::vector<Field> w_adj;        // n_steps

  Control velocity(const TimeGrid& time) const { return Control(time, v_adj); }
};

/// Targets of the tracking cost: one entry per time interval for v_Q and
/// phi_Q, plus the terminal target.
struct Targets {
  std::vector<VectorField> v_Q;
  std::vector<Field> phi_Q;
  Field phi_T;

  static Targets zero(const GridPtr& grid, const TimeGrid& time);
  void validate(const GridPtr& grid, const TimeGrid& time) const;
};

struct ControlParams {
  double M = 1.0;
  std::array<double, 4> beta{0.0, 0.0, 0.0, 1.0};
  double kappa = 0.0;

  void validate() const;
};

/// Derivative of the tracking part of the cost (beta1..beta3) with respect to
/// the stored states, as a tangent functional. The phi tracking term uses the
/// left-endpoint rule on phi_0..phi_{N-1}.
TangentFunctional cost_state_derivative(const StateTrajectory& traj, const Targets& targets,
                                        const ControlParams& cp);

AdjointTrajectory solve_adjoint(const StateTrajectory& traj, const Targets& targets, const ControlParams& cp,
                                const SweepOptions& options = {});

/// Converts a sweep into adjoint fields with the sign conventions of the
/// continuous adjoint system (phi^a(T) = -beta3 (phi(T) - phi_T)).
AdjointTrajectory to_adjoint(const SweepResult& sweep, double dt);

/// beta4 g - v^a.
Control reduced_gradient_smooth(const Control& g, const AdjointTrajectory& adj, double beta4);

}  // namespace chb6
