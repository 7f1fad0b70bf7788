#include <doctest.h>

#include "chb6/control.hpp"
#include "chb6/verify.hpp"
#include "helpers.hpp"

using namespace chb6;

namespace {

TimeGrid tg(double T, int n) {
  TimeGrid t;
  t.T = T;
  t.n_steps = n;
  return t;
}

struct Fixture {
  GridPtr grid = testing::grid2(16, 16);
  TimeGrid time = tg(0.2, 8);
  std::mt19937_64 rng{41};
  PhysParams params = testing::nonlinear();
  Field phi0 = random_smooth_field(grid, rng, 0.5, 0.1);
  Control g = random_control(grid, time, rng, 0.5);
  StateTrajectory traj = solve_state(g, phi0, params);

  TangentFunctional random_functional() {
    TangentFunctional p = TangentFunctional::zero(traj);
    for (auto& v : p.dv) v = random_smooth_vector(grid, rng, 1.0);
    for (auto& f : p.dphi) f = random_smooth_field(grid, rng, 1.0);
    return p;
  }
};

double lin_distance(const LinearizedTrajectory& a, const LinearizedTrajectory& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.w_vel.size(); ++n) s += std::pow(norm(a.w_vel[n] - b.w_vel[n]), 2);
  for (std::size_t n = 0; n < a.psi.size(); ++n) s += std::pow(norm(a.psi[n] - b.psi[n]), 2);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("tangent solve is linear") {
  Fixture fx;
  const Control zero(fx.grid, fx.time);
  const auto l0 = solve_linearized(fx.traj, zero);
  for (const Field& psi : l0.psi) CHECK(psi.max_abs() == 0.0);
  for (const VectorField& w : l0.w_vel) CHECK(norm(w) == 0.0);

  const Control u1 = random_control(fx.grid, fx.time, fx.rng, 1.0);
  const Control u2 = random_control(fx.grid, fx.time, fx.rng, 1.0);
  const auto a = solve_linearized(fx.traj, u1);
  const auto b = solve_linearized(fx.traj, u2);
  const auto ab = solve_linearized(fx.traj, 2.0 * u1 + (-3.0) * u2);
  LinearizedTrajectory combo = a;
  for (std::size_t n = 0; n < combo.psi.size(); ++n) combo.psi[n] = 2.0 * a.psi[n] - 3.0 * b.psi[n];
  for (std::size_t n = 0; n < combo.w_vel.size(); ++n)
    combo.w_vel[n] = 2.0 * a.w_vel[n] - 3.0 * b.w_vel[n];
  CHECK(lin_distance(ab, combo) <= 1e-11 * lin_distance(ab, solve_linearized(fx.traj, zero)));
}

TEST_CASE("tangent matches finite differences") {
  Fixture fx;
  const Control u = random_control(fx.grid, fx.time, fx.rng, 1.0);
  const auto r = verify::taylor_test(fx.g, u, fx.phi0, fx.params, {1e-1, 5e-2, 2.5e-2, 1.25e-2, 6.25e-3});
  CHECK(r.slope >= verify::kTaylorSlopeLo);
  CHECK(r.slope <= verify::kTaylorSlopeHi);
  for (std::size_t i = 1; i < r.remainder.size(); ++i) CHECK(r.remainder[i] < r.remainder[i - 1]);
  CHECK_THROWS_AS(verify::taylor_test(fx.g, u, fx.phi0, fx.params, {1e-2}), std::invalid_argument);
}

TEST_CASE("linear configuration has an exact tangent") {
  const auto grid = testing::grid2(16, 16);
  const TimeGrid time = tg(0.2, 8);
  std::mt19937_64 rng(43);
  const PhysParams p = testing::linear_config(2.0);
  // constant phi0 stays constant, so the control-to-state map is affine
  const Field phi0(grid, 0.3);
  const Control g = random_control(grid, time, rng, 0.5);
  const Control u = random_control(grid, time, rng, 1.0);
  const auto r = verify::taylor_test(g, u, phi0, p, {1e-1, 1e-2, 1e-3});
  for (double rem : r.remainder) CHECK(rem <= 1e-12);
}

TEST_CASE("transpose identity") {
  Fixture fx;
  const Control u = random_control(fx.grid, fx.time, fx.rng, 1.0);
  const TangentFunctional p = fx.random_functional();
  const double gap = verify::duality_gap(fx.traj, u, p);
  CHECK(gap <= 1e-10);

  SweepOptions bad;
  bad.corrupt_transpose = true;
  CHECK(verify::duality_gap(fx.traj, u, p, bad) > 1e4 * std::max(gap, 1e-16));

  const Control zero(fx.grid, fx.time);
  const TangentFunctional z = TangentFunctional::zero(fx.traj);
  CHECK(z.norm() == 0.0);
  const SweepResult s = adjoint_sweep(fx.traj, z);
  for (const auto& c : s.control_sensitivity) CHECK(norm(c) == 0.0);
}

TEST_CASE("adjoint terminal condition and zero seeds") {
  Fixture fx;
  ControlParams cp;
  cp.beta = {0.0, 0.0, 0.0, 1.0};
  const Targets zero_targets = Targets::zero(fx.grid, fx.time);
  const AdjointTrajectory none = solve_adjoint(fx.traj, zero_targets, cp);
  for (const auto& v : none.v_adj) CHECK(norm(v) == 0.0);
  const Control grad = reduced_gradient_smooth(fx.g, none, 1.0);
  CHECK((grad - fx.g).norm() == 0.0);

  cp.beta = {0.0, 0.0, 2.0, 1.0};
  Targets t = zero_targets;
  t.phi_T = Field(fx.grid, 0.3);
  const AdjointTrajectory adj = solve_adjoint(fx.traj, t, cp);
  const Field expected = -2.0 * (fx.traj.phi.back() - t.phi_T);
  CHECK(testing::max_diff(adj.phi_adj.back(), expected) <= 1e-14);
  for (const auto& v : adj.v_adj) CHECK(norm(divergence(v)) <= 1e-10 * std::max(1.0, norm(v, Norm::H1)));
}

TEST_CASE("dense oracle on small problems") {
  SUBCASE("4x4, one step") {
    const auto grid = testing::grid2(4, 4);
    std::mt19937_64 rng(47);
    OptimalControlProblem p;
    p.params = testing::nonlinear();
    p.phi0 = random_smooth_field(grid, rng, 0.5);
    p.control.beta = {1.0, 1.0, 1.0, 0.5};
    const TimeGrid time = tg(0.1, 1);
    p.targets = Targets::zero(grid, time);
    p.targets.phi_T = Field(grid, 0.2);
    const auto r = verify::dense_oracle_compare(p, random_control(grid, time, rng, 0.5));
    CHECK(r.relative_error <= 1e-11);
    CHECK(r.cols == 4 * 4 * 2);
  }
  SUBCASE("8x8, three steps") {
    const auto grid = testing::grid2(8, 8);
    std::mt19937_64 rng(53);
    OptimalControlProblem p;
    p.params = testing::nonlinear();
    p.phi0 = random_smooth_field(grid, rng, 0.5);
    p.control.beta = {1.0, 0.5, 1.0, 0.5};
    const TimeGrid time = tg(0.3, 3);
    p.targets = Targets::zero(grid, time);
    for (auto& v : p.targets.v_Q) v = random_smooth_vector(grid, rng, 0.3);
    const auto r = verify::dense_oracle_compare(p, random_control(grid, time, rng, 0.5));
    CHECK(r.relative_error <= verify::kDenseOracle);
  }
}

TEST_CASE("velocity block of the linear configuration") {
  const auto grid = testing::grid2(8, 8);
  CHECK(verify::linear_block_identity(grid, tg(0.2, 2), testing::linear_config(2.0), 0.3) <= 1e-10);
}

TEST_CASE("tangent stays bounded under time refinement") {
  const auto grid = testing::grid2(16, 16);
  std::mt19937_64 rng(59);
  const PhysParams p = testing::nonlinear();
  const Field phi0 = random_smooth_field(grid, rng, 0.4);
  const auto profile = random_control_profile(grid, rng, 1.0, 0.4);
  std::vector<double> finals;
  for (int n : {8, 16, 32, 64}) {
    const TimeGrid time = tg(0.4, n);
    const Control u = sample_control(grid, time, profile);
    const auto traj = solve_state(Control(grid, time), phi0, p);
    finals.push_back(norm(solve_linearized(traj, u).psi.back()) / u.norm());
  }
  CHECK(finals[0] > 0.0);
  const auto [lo, hi] = std::minmax_element(finals.begin(), finals.end());
  CHECK(*hi <= 1.5 * *lo);
}
