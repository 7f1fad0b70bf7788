#include <doctest.h>

#include <limits>

#include "helpers.hpp"

using namespace chb6;

namespace {

TimeGrid tg(double T, int n) {
  TimeGrid t;
  t.T = T;
  t.n_steps = n;
  return t;
}

}  // namespace

TEST_CASE("time grid") {
  CHECK(tg(2.0, 8).dt() == 0.25);
  CHECK(tg(2.0, 8).t(8) == 2.0);
  CHECK_THROWS_AS(tg(0.0, 8).validate(), std::invalid_argument);
  CHECK_THROWS_AS(tg(1.0, 0).validate(), std::invalid_argument);
}

TEST_CASE("Brinkman solve") {
  const auto g = testing::grid2(16, 16);
  const PhysParams lin = testing::linear_config(2.0);
  SUBCASE("zero forcing gives zero velocity") {
    const VectorField v = solve_brinkman(Field(g, 0.3), Field(g), VectorField(g), testing::nonlinear());
    CHECK(norm(v) == 0.0);
  }
  SUBCASE("constant forcing keeps the mean mode") {
    VectorField force(g);
    force[0] = Field(g, 0.8);
    force[1] = Field(g, -0.4);
    const VectorField v = solve_brinkman(Field(g, 0.0), Field(g), force, lin);
    CHECK(testing::max_diff(v[0], Field(g, 0.4)) <= 1e-15);
    CHECK(testing::max_diff(v[1], Field(g, -0.2)) <= 1e-15);
  }
  SUBCASE("variable drag residual") {
    std::mt19937_64 rng(21);
    const PhysParams p = testing::nonlinear();
    const Field phi = random_smooth_field(g, rng, 1.0);
    const VectorField rhs = random_smooth_vector(g, rng, 1.0);
    const BrinkmanOperator K(phi, p, SchemeParams{});
    BrinkmanStats stats;
    const VectorField v = K.solve(rhs, &stats);
    CHECK(stats.iterations >= 1);
    CHECK(K.relative_residual(v, rhs) <= 1e-10);
    CHECK(norm(divergence(v)) <= 1e-11 * norm(v, Norm::H1));
  }
  SUBCASE("one-dimensional grids are rejected") {
    const auto g1 = testing::grid1(16, 1.0);
    CHECK_THROWS_AS(BrinkmanOperator(Field(g1), lin, SchemeParams{}), std::invalid_argument);
  }
}

TEST_CASE("constant states") {
  const auto g = testing::grid2(16, 16);
  const TimeGrid time = tg(0.5, 10);
  SUBCASE("equilibrium without source") {
    PhysParams p = testing::nonlinear();
    p.sigma = 0.0;
    p.h = ZeroSource{};
    const auto traj = solve_state(Control(g, time), Field(g, 0.4), p);
    for (const Field& phi : traj.phi) CHECK(testing::max_diff(phi, Field(g, 0.4)) <= 1e-15);
  }
  SUBCASE("linear source gives the mean recursion") {
    PhysParams p = testing::nonlinear();
    p.sigma = 0.3;
    p.h = ZeroSource{};
    const auto traj = solve_state(Control(g, time), Field(g, 0.4), p);
    double c = 0.4;
    for (int n = 1; n <= time.n_steps; ++n) {
      c *= 1.0 - p.sigma * time.dt();
      CHECK(testing::max_diff(traj.phi[n], Field(g, c)) <= 1e-14);
    }
  }
  SUBCASE("pure phase is steady") {
    PhysParams p;
    const auto traj = solve_state(Control(g, time), Field(g, 1.0), p);
    CHECK(traj.phi.back().max_abs() == 1.0);
    CHECK(testing::max_diff(traj.phi.back(), Field(g, 1.0)) == 0.0);
    const Diagnostics d = diagnostics(traj);
    for (double e : d.energy) CHECK(e == 0.0);
  }
}

TEST_CASE("linear decay multiplier") {
  const double L = 2.0 * std::numbers::pi;
  const auto g = testing::grid2(16, 16, L, L);
  const TimeGrid time = tg(0.2, 4);
  PhysParams p = testing::linear_config(1.0);
  SchemeParams s;
  s.stabilization = 2.5;
  const double k2 = 4.0;  // mode (2, 0)
  const double dt = time.dt();
  const double ks = *s.stabilization;
  const double m = (1.0 + dt * (ks - p.nu) * k2 * k2) / (1.0 + dt * (k2 * k2 * k2 + ks * k2 * k2));
  const Field phi0 = mode_field(g, 0.0, 0.1, {2, 0, 0});
  const auto traj = solve_state(Control(g, time), phi0, p, s);
  double amp = 1.0;
  for (int n = 1; n <= time.n_steps; ++n) {
    amp *= m;
    CHECK(testing::max_diff(traj.phi[n], amp * phi0) <= 1e-12 * phi0.max_abs());
  }
  CHECK(s.resolved_stabilization(p) == 2.5);
  CHECK(SchemeParams{}.resolved_stabilization(p) == doctest::Approx(2.5));
  p.nu = -1.0;
  CHECK(SchemeParams{}.resolved_stabilization(p) == 2.0);
}

TEST_CASE("nonlinear trajectory invariants") {
  const auto g = testing::grid2(32, 32);
  const TimeGrid time = tg(0.2, 20);
  std::mt19937_64 rng(31);
  PhysParams p = testing::nonlinear();
  p.sigma = 0.0;
  p.h = ZeroSource{};
  const Field phi0 = random_smooth_field(g, rng, 0.5, 0.1);
  const Control ctrl = random_control(g, time, rng, 0.5);
  const auto traj = solve_state(ctrl, phi0, p);

  REQUIRE(traj.phi.size() == 21);
  REQUIRE(traj.v.size() == 20);
  CHECK(testing::max_diff(traj.phi[0], phi0) == 0.0);
  for (const Field& phi : traj.phi) CHECK(std::abs(phi.mean() - phi0.mean()) <= 1e-11);
  for (const VectorField& v : traj.v) CHECK(norm(divergence(v)) <= 1e-10 * std::max(1.0, norm(v, Norm::H1)));

  const auto unforced = solve_state(Control(g, time), phi0, p);
  const Diagnostics d = diagnostics(unforced);
  for (std::size_t n = 1; n < d.energy.size(); ++n) CHECK(d.energy[n] <= d.energy[n - 1] + 1e-12);
  CHECK(std::isnan(d.v_norm.back()));
  CHECK(d.energy.size() == 21);
}

TEST_CASE("mean ODE residual with a nonlinear source") {
  const auto g = testing::grid2(16, 16);
  const TimeGrid time = tg(0.5, 10);
  std::mt19937_64 rng(37);
  const PhysParams p = testing::nonlinear();
  const auto traj = solve_state(random_control(g, time, rng, 0.3), random_smooth_field(g, rng, 0.4), p);
  const Diagnostics d = diagnostics(traj);
  for (int n = 0; n < time.n_steps; ++n) CHECK(d.mean_ode_residual[n] <= 1e-10);
  CHECK(!d.range_warning);
}

TEST_CASE("failures carry the step index") {
  const auto g = testing::grid2(16, 16);
  const TimeGrid time = tg(0.5, 5);
  Control ctrl(g, time);
  ctrl[2][0][3] = std::numeric_limits<double>::quiet_NaN();
  try {
    solve_state(ctrl, Field(g, 0.2), testing::nonlinear());
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.step() == 2);
    CHECK(std::string(e.what()).find("step 2") != std::string::npos);
  }
  Field bad(g, 0.0);
  bad[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(solve_state(Control(g, time), bad, testing::nonlinear()), std::invalid_argument);
  CHECK_THROWS_AS(solve_state(Control(testing::grid2(8, 8), time), Field(g), testing::nonlinear()), GridMismatch);
}

TEST_CASE("control algebra") {
  const auto g = testing::grid2(8, 8, 2.0, 3.0);
  const TimeGrid time = tg(2.0, 4);
  const Control c(g, time, 1.0);
  // |g| = sqrt(2) everywhere on a 6-area domain over time 2
  CHECK(c.norm() == doctest::Approx(std::sqrt(2.0 * 6.0 * 2.0)));
  CHECK(c.l1_norm() == doctest::Approx(std::sqrt(2.0) * 12.0));
  CHECK((c - c).norm() == 0.0);
  CHECK((2.0 * c).inner(c) == doctest::Approx(2.0 * c.inner(c)));
  CHECK_THROWS_AS(c + Control(g, tg(2.0, 3)), std::invalid_argument);
}
