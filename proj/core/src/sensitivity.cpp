#include "chb6/sensitivity.hpp"

#include <cmath>

namespace chb6 {

namespace {

struct NodalCoefficients {
  Field fp;   // f'(phi)
  Field fpp;  // f''(phi)
  Field sp;   // S'(phi)
};

NodalCoefficients coefficients(const Field& phi, const PhysParams& p) {
  return {map_values(phi, [&](double s) { return p.fp(s); }),
          map_values(phi, [&](double s) { return p.fpp(s); }),
          map_values(phi, [&](double s) { return p.source_prime(s); })};
}

// -lap^3 b + ks lap^2 b, transposed onto itself.
std::vector<double> stiff_multiplier(const Grid& grid, double ks) {
  const auto k2 = grid.k_squared();
  std::vector<double> m(k2.size());
  for (std::size_t i = 0; i < k2.size(); ++i) m[i] = k2[i] * k2[i] * k2[i] + ks * k2[i] * k2[i];
  return m;
}

}  // namespace

LinearizedTrajectory solve_linearized(const StateTrajectory& traj, const Control& u) {
  const int N = traj.time.n_steps;
  if (u.steps() != N || !(u.time() == traj.time)) throw std::invalid_argument("solve_linearized: time grids differ");
  if (!(u.grid_ptr()->spec() == traj.grid->spec())) throw GridMismatch("solve_linearized: grids differ");

  const PhysParams& p = traj.params;
  const double dt = traj.time.dt();
  const double ks = traj.stabilization;
  const auto imp = implicit_multiplier(*traj.grid, dt, ks);
  const auto stiff = stiff_multiplier(*traj.grid, ks);

  LinearizedTrajectory lin;
  lin.psi.reserve(N + 1);
  lin.psi.emplace_back(traj.grid, 0.0);
  for (int n = 0; n < N; ++n) {
    const Field& phi = traj.phi[n];
    const Field& psi = lin.psi.back();
    const auto c = coefficients(phi, p);

    Field xi = dealias(multiply(c.fp, psi));
    xi.axpy(-1.0, laplacian(psi));
    Field theta = dealias(multiply(multiply(c.fpp, traj.w[n]), psi) + multiply(c.fp, xi));
    theta.axpy(-1.0, laplacian(xi));
    theta.axpy(p.nu, xi);

    const VectorField grad_phi = gradient(phi);
    const VectorField grad_psi = gradient(psi);
    const BrinkmanOperator brinkman(phi, p, traj.scheme);
    VectorField force = multiply(theta, grad_phi);
    force += multiply(traj.mu[n], grad_psi);
    force += u[n];
    force.axpy(-1.0, multiply(multiply(brinkman.drag_prime(), psi), traj.v[n]));
    VectorField wv;
    try {
      wv = brinkman.solve(force);
    } catch (const SolverError& e) {
      throw SolverError(e.what(), n);
    }

    // explicit terms, masked by the implicit multiplier
    Field expl = multiply(c.sp, psi);
    expl.axpy(-1.0, dot(wv, grad_phi));
    expl.axpy(-1.0, dot(traj.v[n], grad_psi));
    const Spectrum s_psi = psi.spectrum();
    const Spectrum s_theta = theta.spectrum();
    const Spectrum s_expl = expl.spectrum();
    const auto k2 = traj.grid->k_squared();
    Spectrum next(s_psi.size());
    for (std::size_t i = 0; i < next.size(); ++i)
      next[i] = imp[i] * (s_psi[i] + dt * (-k2[i] * s_theta[i] + stiff[i] * s_psi[i] + s_expl[i]));

    lin.xi.push_back(std::move(xi));
    lin.theta.push_back(std::move(theta));
    lin.w_vel.push_back(std::move(wv));
    lin.psi.push_back(Field::from_spectrum(traj.grid, next));
  }
  return lin;
}

// ---------------------------------------------------------------------------

TangentFunctional TangentFunctional::zero(const StateTrajectory& traj) {
  TangentFunctional t;
  const int N = traj.time.n_steps;
  t.dv.assign(N, VectorField(traj.grid));
  t.dphi.assign(N + 1, Field(traj.grid));
  return t;
}

double TangentFunctional::apply(const LinearizedTrajectory& lin) const {
  double s = 0.0;
  for (std::size_t n = 0; n < dv.size(); ++n) s += inner_product(dv[n], lin.w_vel[n]);
  for (std::size_t n = 0; n < dphi.size(); ++n) s += inner_product(dphi[n], lin.psi[n]);
  return s;
}

double TangentFunctional::norm() const {
  double s = 0.0;
  for (const auto& v : dv) s += inner_product(v, v);
  for (const auto& f : dphi) s += inner_product(f, f);
  return std::sqrt(s);
}

SweepResult adjoint_sweep(const StateTrajectory& traj, const TangentFunctional& seed, const SweepOptions& options) {
  const int N = traj.time.n_steps;
  if (static_cast<int>(seed.dv.size()) != N || static_cast<int>(seed.dphi.size()) != N + 1)
    throw std::invalid_argument("adjoint_sweep: seed does not match the trajectory");

  const PhysParams& p = traj.params;
  const double dt = traj.time.dt();
  const double ks = traj.stabilization;
  const auto imp = implicit_multiplier(*traj.grid, dt, ks);
  const auto stiff = stiff_multiplier(*traj.grid, ks);
  const auto k2 = traj.grid->k_squared();
  const double theta_sign = options.corrupt_transpose ? -1.0 : 1.0;

  SweepResult out;
  out.control_sensitivity.resize(N);
  out.phi_sensitivity.resize(N + 1);
  out.theta_sensitivity.resize(N);
  out.xi_sensitivity.resize(N);

  Field a = seed.dphi[N];
  out.phi_sensitivity[N] = a;
  for (int n = N - 1; n >= 0; --n) {
    const Field& phi = traj.phi[n];
    const auto c = coefficients(phi, p);

    // b = P D^{-1} a; the psi_n path through the implicit step
    const Spectrum s_a = a.spectrum();
    Spectrum s_b(s_a.size());
    for (std::size_t i = 0; i < s_b.size(); ++i) s_b[i] = imp[i] * s_a[i];
    const Field b = Field::from_spectrum(traj.grid, s_b);

    Spectrum s_psi(s_b.size());
    Spectrum s_theta(s_b.size());
    for (std::size_t i = 0; i < s_b.size(); ++i) {
      s_psi[i] = s_b[i] * (1.0 + dt * stiff[i]);
      s_theta[i] = theta_sign * dt * (-k2[i]) * s_b[i];
    }
    Field a_psi = Field::from_spectrum(traj.grid, s_psi);
    Field a_theta = Field::from_spectrum(traj.grid, s_theta);

    // -P[v . grad psi]  ->  div(v b);   P[S' psi]  ->  S' b
    a_psi.axpy(dt, divergence(multiply(b, traj.v[n])));
    a_psi.axpy(dt, multiply(c.sp, b));

    // velocity block: -P[wv . grad phi] plus the seed
    const VectorField grad_phi = gradient(phi);
    VectorField c_v = seed.dv[n];
    c_v.axpy(-dt, multiply(b, grad_phi));
    const BrinkmanOperator brinkman(phi, p, traj.scheme);
    VectorField y;
    try {
      y = brinkman.solve(c_v);
    } catch (const SolverError& e) {
      throw SolverError(e.what(), n);
    }

    // force = theta grad phi + mu grad psi + u - lambda' psi v
    a_theta += dot(grad_phi, y);
    a_psi.axpy(-1.0, divergence(multiply(traj.mu[n], y)));
    a_psi.axpy(-1.0, multiply(brinkman.drag_prime(), dot(traj.v[n], y)));

    // theta = -lap xi + P[f'' w psi + f' xi] + nu xi
    const Field pa_theta = dealias(a_theta);
    Field a_xi = multiply(c.fp, pa_theta);
    a_xi.axpy(-1.0, laplacian(a_theta));
    a_xi.axpy(p.nu, a_theta);
    a_psi += multiply(multiply(c.fpp, traj.w[n]), pa_theta);

    // xi = -lap psi + P[f' psi]
    a_psi.axpy(-1.0, laplacian(a_xi));
    a_psi += multiply(c.fp, dealias(a_xi));

    a_psi += seed.dphi[n];
    out.control_sensitivity[n] = std::move(y);
    out.theta_sensitivity[n] = std::move(a_theta);
    out.xi_sensitivity[n] = std::move(a_xi);
    out.phi_sensitivity[n] = a_psi;
    a = std::move(a_psi);
  }
  return out;
}

// ---------------------------------------------------------------------------

Targets Targets::zero(const GridPtr& grid, const TimeGrid& time) {
  Targets t;
  t.v_Q.assign(time.n_steps, VectorField(grid));
  t.phi_Q.assign(time.n_steps, Field(grid));
  t.phi_T = Field(grid);
  return t;
}

void Targets::validate(const GridPtr& grid, const TimeGrid& time) const {
  if (static_cast<int>(v_Q.size()) != time.n_steps || static_cast<int>(phi_Q.size()) != time.n_steps)
    throw std::invalid_argument("targets: need one entry per time interval");
  if (phi_T.empty()) throw std::invalid_argument("targets: missing terminal target");
  require_same_grid(phi_T, Field(grid));
  for (const auto& v : v_Q) require_same_grid(v[0], phi_T);
  for (const auto& f : phi_Q) require_same_grid(f, phi_T);
}

void ControlParams::validate() const {
  if (!(M > 0.0)) throw std::invalid_argument("control: M must be positive");
  for (double b : beta)
    if (!(b >= 0.0)) throw std::invalid_argument("control: beta entries must be nonnegative");
  if (!(beta[3] > 0.0)) throw std::invalid_argument("control: beta4 must be positive");
  if (!(kappa >= 0.0)) throw std::invalid_argument("control: kappa must be nonnegative");
}

TangentFunctional cost_state_derivative(const StateTrajectory& traj, const Targets& targets, const ControlParams& cp) {
  const int N = traj.time.n_steps;
  const double dt = traj.time.dt();
  TangentFunctional seed = TangentFunctional::zero(traj);
  for (int n = 0; n < N; ++n) {
    if (cp.beta[0] != 0.0) seed.dv[n] = (dt * cp.beta[0]) * (traj.v[n] - targets.v_Q[n]);
    if (cp.beta[1] != 0.0 && n > 0) seed.dphi[n] = (dt * cp.beta[1]) * (traj.phi[n] - targets.phi_Q[n]);
  }
  if (cp.beta[2] != 0.0) seed.dphi[N] = cp.beta[2] * (traj.phi[N] - targets.phi_T);
  return seed;
}

AdjointTrajectory to_adjoint(const SweepResult& sweep, double dt) {
  AdjointTrajectory adj;
  const std::size_t N = sweep.control_sensitivity.size();
  for (std::size_t n = 0; n < N; ++n) {
    adj.v_adj.push_back((-1.0 / dt) * sweep.control_sensitivity[n]);
    adj.mu_adj.push_back((1.0 / dt) * sweep.theta_sensitivity[n]);
    adj.w_adj.push_back((1.0 / dt) * sweep.xi_sensitivity[n]);
  }
  for (const auto& a : sweep.phi_sensitivity) adj.phi_adj.push_back(-1.0 * a);
  return adj;
}

AdjointTrajectory solve_adjoint(const StateTrajectory& traj, const Targets& targets, const ControlParams& cp,
                                const SweepOptions& options) {
  targets.validate(traj.grid, traj.time);
  const TangentFunctional seed = cost_state_derivative(traj, targets, cp);
  return to_adjoint(adjoint_sweep(traj, seed, options), traj.time.dt());
}

Control reduced_gradient_smooth(const Control& g, const AdjointTrajectory& adj, double beta4) {
  Control grad = beta4 * g;
  for (int n = 0; n < grad.steps(); ++n) grad[n] -= adj.v_adj[n];
  return grad;
}

}  // namespace chb6
