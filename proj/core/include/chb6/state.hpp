// Forward solver: quasi-static Brinkman velocity per time node and a
// first-order IMEX step of the sixth-order phase equation.
//
// One step, n -> n+1:
//   (w_n, mu_n) = chemical_potential(phi_n)
//   v_n         = K(phi_n)^{-1} LP[mu_n grad phi_n + g_n]
//   phi_{n+1}   = P D^{-1} [phi_n + dt (R(phi_n) - P[v_n . grad phi_n] + P[S(phi_n)])]
// with L the Leray projector, P the 2/3 mask, D = 1 + dt(|k|^6 + ks |k|^4) and
//   R(phi) = lap(mu) - lap^3(phi) + ks lap^2(phi)
// the explicit remainder. K = eta|k|^2 + lam_bar + LP (lambda(phi) - lam_bar),
// symmetric positive definite on divergence-free, dealiased fields.
#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chb6/model.hpp"
#include "chb6/spectral.hpp"

namespace chb6 {

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::ptrdiff_t step = -1)
      : std::runtime_error(step >= 0 ? what + " (step " + std::to_string(step) + ")" : what), step_(step) {}
  std::ptrdiff_t step() const { return step_; }

 private:
  std::ptrdiff_t step_;
};

struct TimeGrid {
  double T = 1.0;
  int n_steps = 1;

  void validate() const;
  double dt() const { return T / n_steps; }
  double t(int n) const { return T * n / n_steps; }
  bool operator==(const TimeGrid&) const = default;
};

struct SchemeParams {
  /// Implicit |k|^4 damping constant; unset means max(nu, 0) + 2.
  std::optional<double> stabilization;
  double picard_tol = 1e-12;
  int picard_max_iter = 200;

  double resolved_stabilization(const PhysParams& p) const;
};

/// Space-time control g, piecewise constant on (t_n, t_{n+1}].
class Control {
 public:
  Control() = default;
  Control(GridPtr grid, TimeGrid time, double value = 0.0);
  Control(TimeGrid time, std::vector<VectorField> values);

  const TimeGrid& time() const { return time_; }
  const GridPtr& grid_ptr() const { return values_.front().grid_ptr(); }
  int steps() const { return static_cast<int>(values_.size()); }
  VectorField& operator[](std::size_t n) { return values_[n]; }
  const VectorField& operator[](std::size_t n) const { return values_[n]; }
  const std::vector<VectorField>& values() const { return values_; }

  bool all_finite() const;
  /// dt-weighted L2(Q) inner product.
  double inner(const Control& other) const;
  double norm() const;
  /// int_Q |g| with the pointwise Euclidean norm.
  double l1_norm() const;

  Control& operator+=(const Control& other);
  Control& operator-=(const Control& other);
  Control& operator*=(double s);
  Control& axpy(double s, const Control& other);

 private:
  TimeGrid time_;
  std::vector<VectorField> values_;
};

Control operator+(Control a, const Control& b);
Control operator-(Control a, const Control& b);
Control operator*(double s, Control a);

struct StateTrajectory {
  GridPtr grid;
  TimeGrid time;
  PhysParams params;
  SchemeParams scheme;
  double stabilization = 0.0;

  std::vector<Field> phi;       // n_steps + 1
  std::vector<VectorField> v;   // n_steps, at step inputs
  std::vector<Field> mu;        // n_steps
  std::vector<Field> w;         // n_steps
  int max_picard_iterations = 0;
};

struct BrinkmanStats {
  int iterations = 0;
  double last_update = 0.0;
};

/// The Brinkman operator frozen at one phase field.
class BrinkmanOperator {
 public:
  BrinkmanOperator(const Field& phi, const PhysParams& params, const SchemeParams& scheme);

  /// K^{-1} LP rhs. Throws SolverError when Picard does not converge.
  VectorField solve(const VectorField& rhs, BrinkmanStats* stats = nullptr) const;
  /// ||eta(-lap)v + LP[lambda(phi) v] - LP rhs|| / ||LP rhs||.
  double relative_residual(const VectorField& v, const VectorField& rhs) const;

  const Field& drag() const { return drag_; }
  const Field& drag_prime() const { return drag_prime_; }

 private:
  GridPtr grid_;
  double eta_;
  double lam_bar_;
  bool constant_;
  double tol_;
  int max_iter_;
  Field drag_;
  Field drag_prime_;
  std::vector<double> inv_a_;  // mask / (eta |k|^2 + lam_bar)
};

VectorField solve_brinkman(const Field& phi, const Field& mu, const VectorField& g_n, const PhysParams& params,
                           const SchemeParams& scheme = {});

/// phi_{n+1} from phi_n with velocity v_n (chemical potential computed here).
Field step_phase(const Field& phi_n, const VectorField& v_n, double dt, const PhysParams& params,
                 const SchemeParams& scheme = {});

/// Same step with a precomputed chemical potential mu_n.
Field step_phase(const Field& phi_n, const Field& mu_n, const VectorField& v_n, double dt,
                 const PhysParams& params, double stabilization);

/// Throws SolverError (with step index) on non-finite values or Picard
/// failure; std::invalid_argument on inconsistent inputs.
StateTrajectory solve_state(const Control& g, const Field& phi0, const PhysParams& params,
                            const SchemeParams& scheme = {});

/// Implicit multiplier 1 / (1 + dt(|k|^6 + ks|k|^4)) times the dealias mask.
std::vector<double> implicit_multiplier(const Grid& grid, double dt, double stabilization);

struct Diagnostics {
  std::vector<double> t;
  std::vector<double> energy;     // n_steps + 1
  std::vector<double> mean;       // n_steps + 1
  std::vector<double> max_abs_phi;
  std::vector<double> v_norm;     // n_steps (NaN at the final node)
  std::vector<double> mean_ode_residual;
  /// |(mean phi_{n+1} - mean phi_n)/dt - mean S(phi_n)|, n < n_steps.
  bool range_warning = false;
};

Diagnostics diagnostics(const StateTrajectory& traj);

/// Dissipation rate ||grad mu_n||^2 + eta||grad v_n||^2 + int lambda(phi_n)|v_n|^2.
double dissipation_rate(const StateTrajectory& traj, int n);

}  // namespace chb6
