#include "chb6/state.hpp"

#include <algorithm>
#include <cmath>

namespace chb6 {

void TimeGrid::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("time: T must be positive");
  if (n_steps < 1) throw std::invalid_argument("time: n_steps must be >= 1");
}

double SchemeParams::resolved_stabilization(const PhysParams& p) const {
  return stabilization.value_or(std::max(p.nu, 0.0) + 2.0);
}

// ---------------------------------------------------------------------------
// Control

Control::Control(GridPtr grid, TimeGrid time, double value) : time_(time) {
  time_.validate();
  values_.reserve(time_.n_steps);
  for (int n = 0; n < time_.n_steps; ++n) values_.emplace_back(grid, value);
}

Control::Control(TimeGrid time, std::vector<VectorField> values) : time_(time), values_(std::move(values)) {
  time_.validate();
  if (static_cast<int>(values_.size()) != time_.n_steps)
    throw std::invalid_argument("control: need one vector field per time interval");
}

bool Control::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](const VectorField& v) { return v.all_finite(); });
}

namespace {

void require_same_time(const Control& a, const Control& b) {
  if (!(a.time() == b.time())) throw std::invalid_argument("control: time grids differ");
}

}  // namespace

double Control::inner(const Control& other) const {
  require_same_time(*this, other);
  double s = 0.0;
  for (int n = 0; n < steps(); ++n) s += inner_product(values_[n], other.values_[n]);
  return s * time_.dt();
}

double Control::norm() const { return std::sqrt(std::max(0.0, inner(*this))); }

double Control::l1_norm() const {
  double s = 0.0;
  for (const auto& v : values_) {
    const Field m = v.magnitude();
    for (std::size_t i = 0; i < m.size(); ++i) s += m[i];
  }
  return s * grid_ptr()->cell_volume() * time_.dt();
}

Control& Control::operator+=(const Control& other) {
  require_same_time(*this, other);
  for (int n = 0; n < steps(); ++n) values_[n] += other.values_[n];
  return *this;
}

Control& Control::operator-=(const Control& other) {
  require_same_time(*this, other);
  for (int n = 0; n < steps(); ++n) values_[n] -= other.values_[n];
  return *this;
}

Control& Control::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

Control& Control::axpy(double s, const Control& other) {
  require_same_time(*this, other);
  for (int n = 0; n < steps(); ++n) values_[n].axpy(s, other.values_[n]);
  return *this;
}

Control operator+(Control a, const Control& b) { return a += b; }
Control operator-(Control a, const Control& b) { return a -= b; }
Control operator*(double s, Control a) { return a *= s; }

// ---------------------------------------------------------------------------
// Brinkman

BrinkmanOperator::BrinkmanOperator(const Field& phi, const PhysParams& params, const SchemeParams& scheme)
    : grid_(phi.grid_ptr()),
      eta_(params.eta),
      lam_bar_(0.5 * (params.drag_min() + params.drag_max())),
      constant_(params.constant_drag()),
      tol_(scheme.picard_tol),
      max_iter_(scheme.picard_max_iter),
      drag_(map_values(phi, [&](double s) { return params.drag(s); })),
      drag_prime_(map_values(phi, [&](double s) { return params.drag_prime(s); })) {
  if (grid_->dim() < 2) throw std::invalid_argument("brinkman: needs dim >= 2");
  const auto k2 = grid_->k_squared();
  const auto mask = grid_->dealias_mask();
  inv_a_.resize(k2.size());
  for (std::size_t i = 0; i < k2.size(); ++i) inv_a_[i] = mask[i] / (eta_ * k2[i] + lam_bar_);
}

VectorField BrinkmanOperator::solve(const VectorField& rhs, BrinkmanStats* stats) const {
  const VectorField base = leray_project_scaled(rhs, inv_a_);
  if (constant_) {
    if (stats) *stats = {0, 0.0};
    return base;
  }
  Field deviation = drag_;
  for (std::size_t i = 0; i < deviation.size(); ++i) deviation[i] -= lam_bar_;

  VectorField v = base;
  for (int it = 1; it <= max_iter_; ++it) {
    VectorField next = base;
    next.axpy(-1.0, leray_project_scaled(multiply(deviation, v), inv_a_));
    const double scale = norm(next);
    const double update = norm(next - v);
    v = std::move(next);
    if (update <= tol_ * scale || scale == 0.0) {
      if (stats) *stats = {it, scale > 0.0 ? update / scale : 0.0};
      return v;
    }
    if (!std::isfinite(update)) break;
  }
  throw SolverError("brinkman: Picard iteration did not converge, residual " +
                    std::to_string(relative_residual(v, rhs)));
}

double BrinkmanOperator::relative_residual(const VectorField& v, const VectorField& rhs) const {
  const auto mask = grid_->dealias_mask();
  const VectorField target = leray_project_scaled(rhs, mask);
  VectorField r = leray_project_scaled(multiply(drag_, v) - rhs, mask);
  const auto k2 = grid_->k_squared();
  std::vector<double> visc(k2.size());
  for (std::size_t i = 0; i < k2.size(); ++i) visc[i] = eta_ * k2[i];
  for (std::size_t a = 0; a < v.dim(); ++a) r[a] += apply_multiplier(v[a], visc);
  const double denom = norm(target);
  return denom > 0.0 ? norm(r) / denom : norm(r);
}

VectorField solve_brinkman(const Field& phi, const Field& mu, const VectorField& g_n, const PhysParams& params,
                           const SchemeParams& scheme) {
  const BrinkmanOperator op(phi, params, scheme);
  VectorField rhs = multiply(mu, gradient(phi));
  rhs += g_n;
  return op.solve(rhs);
}

// ---------------------------------------------------------------------------
// Phase step

std::vector<double> implicit_multiplier(const Grid& grid, double dt, double stabilization) {
  const auto k2 = grid.k_squared();
  const auto mask = grid.dealias_mask();
  std::vector<double> m(k2.size());
  for (std::size_t i = 0; i < k2.size(); ++i) {
    const double k4 = k2[i] * k2[i];
    m[i] = mask[i] / (1.0 + dt * (k4 * k2[i] + stabilization * k4));
  }
  return m;
}

namespace {

// phi_{n+1} given mu_n, grad phi_n and the nodal explicit terms.
Field advance(const Field& phi, const Field& mu, const Field& explicit_nodal, double dt, double ks,
              std::span<const double> imp) {
  const Grid& grid = phi.grid();
  const auto k2 = grid.k_squared();
  const Spectrum sp = phi.spectrum();
  const Spectrum sm = mu.spectrum();
  const Spectrum sn = explicit_nodal.spectrum();
  Spectrum out(sp.size());
  for (std::size_t i = 0; i < sp.size(); ++i) {
    const double q = k2[i];
    const Complex r = -q * sm[i] + (q * q * q + ks * q * q) * sp[i];
    out[i] = imp[i] * (sp[i] + dt * (r + sn[i]));
  }
  return Field::from_spectrum(phi.grid_ptr(), out);
}

}  // namespace

Field step_phase(const Field& phi_n, const Field& mu_n, const VectorField& v_n, double dt, const PhysParams& params,
                 double stabilization) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_phase: dt must be positive");
  Field expl = map_values(phi_n, [&](double s) { return params.source(s); });
  expl.axpy(-1.0, dot(v_n, gradient(phi_n)));
  const auto imp = implicit_multiplier(phi_n.grid(), dt, stabilization);
  Field next = advance(phi_n, mu_n, expl, dt, stabilization, imp);
  if (!next.all_finite()) throw SolverError("step_phase: non-finite phase field");
  return next;
}

Field step_phase(const Field& phi_n, const VectorField& v_n, double dt, const PhysParams& params,
                 const SchemeParams& scheme) {
  const auto cp = chemical_potential(phi_n, params);
  return step_phase(phi_n, cp.mu, v_n, dt, params, scheme.resolved_stabilization(params));
}

StateTrajectory solve_state(const Control& g, const Field& phi0, const PhysParams& params,
                            const SchemeParams& scheme) {
  params.validate();
  g.time().validate();
  if (phi0.empty()) throw std::invalid_argument("solve_state: missing initial datum");
  if (phi0.grid().dim() < 2) throw std::invalid_argument("solve_state: needs dim >= 2");
  if (!(g.grid_ptr()->spec() == phi0.grid().spec()))
    throw GridMismatch("solve_state: control and initial datum on different grids");
  if (!phi0.all_finite()) throw std::invalid_argument("solve_state: initial datum is not finite");

  StateTrajectory traj;
  traj.grid = phi0.grid_ptr();
  traj.time = g.time();
  traj.params = params;
  traj.scheme = scheme;
  traj.stabilization = scheme.resolved_stabilization(params);

  const int N = traj.time.n_steps;
  const double dt = traj.time.dt();
  const auto imp = implicit_multiplier(*traj.grid, dt, traj.stabilization);
  traj.phi.reserve(N + 1);
  traj.v.reserve(N);
  traj.mu.reserve(N);
  traj.w.reserve(N);
  traj.phi.push_back(phi0);

  for (int n = 0; n < N; ++n) {
    const Field& phi = traj.phi.back();
    auto cp = chemical_potential(phi, params);
    const VectorField grad_phi = gradient(phi);
    VectorField force = multiply(cp.mu, grad_phi);
    force += g[n];

    BrinkmanStats stats;
    VectorField v;
    try {
      v = BrinkmanOperator(phi, params, scheme).solve(force, &stats);
    } catch (const SolverError& e) {
      throw SolverError(e.what(), n);
    }
    traj.max_picard_iterations = std::max(traj.max_picard_iterations, stats.iterations);

    Field expl = map_values(phi, [&](double s) { return params.source(s); });
    expl.axpy(-1.0, dot(v, grad_phi));
    Field next = advance(phi, cp.mu, expl, dt, traj.stabilization, imp);
    if (!next.all_finite() || !v.all_finite()) throw SolverError("solve_state: non-finite values", n);

    traj.v.push_back(std::move(v));
    traj.mu.push_back(std::move(cp.mu));
    traj.w.push_back(std::move(cp.w));
    traj.phi.push_back(std::move(next));
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Diagnostics

Diagnostics diagnostics(const StateTrajectory& traj) {
  Diagnostics d;
  const int N = traj.time.n_steps;
  const double dt = traj.time.dt();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int n = 0; n <= N; ++n) {
    const Field& phi = traj.phi[n];
    d.t.push_back(traj.time.t(n));
    d.energy.push_back(energy(phi, traj.params));
    d.mean.push_back(phi.mean());
    d.max_abs_phi.push_back(phi.max_abs());
    if (d.max_abs_phi.back() > kPhaseRangeWarning) d.range_warning = true;
    if (n < N) {
      d.v_norm.push_back(norm(traj.v[n]));
      const double rate = (traj.phi[n + 1].mean() - phi.mean()) / dt;
      d.mean_ode_residual.push_back(std::abs(rate - source_eval(phi, traj.params).mean()));
    } else {
      d.v_norm.push_back(nan);
      d.mean_ode_residual.push_back(nan);
    }
  }
  return d;
}

double dissipation_rate(const StateTrajectory& traj, int n) {
  const VectorField gmu = gradient(traj.mu[n]);
  double rate = inner_product(gmu, gmu);
  const VectorField& v = traj.v[n];
  for (std::size_t a = 0; a < v.dim(); ++a) {
    const VectorField gv = gradient(v[a]);
    rate += traj.params.eta * inner_product(gv, gv);
  }
  const Field lam = map_values(traj.phi[n], [&](double s) { return traj.params.drag(s); });
  rate += inner_product(multiply(lam, v[0]), v[0]);
  for (std::size_t a = 1; a < v.dim(); ++a) rate += inner_product(multiply(lam, v[a]), v[a]);
  return rate;
}

}  // namespace chb6
