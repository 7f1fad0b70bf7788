#include <doctest.h>

#include <set>

#include "chb6/verify.hpp"
#include "helpers.hpp"

using namespace chb6;

TEST_CASE("battery names") {
  const auto& names = verify::check_names();
  CHECK(names.size() == 11);
  CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());
  CHECK_THROWS_AS(verify::run_check("no_such_check", verify::VerifyConfig{}), std::invalid_argument);
}

TEST_CASE("single checks run and serialize") {
  verify::VerifyConfig vc;
  vc.grid_size = 16;
  vc.n_steps = 10;
  vc.only = {"mass", "ball"};
  std::vector<std::string> seen;
  const auto results = verify::run_battery(vc, [&](const verify::CheckResult& r) { seen.push_back(r.name); });
  REQUIRE(results.size() == 2);
  CHECK(seen == std::vector<std::string>{"mass", "ball"});
  for (const auto& r : results) CHECK(r.pass);
  const std::string csv = verify::to_csv(results);
  CHECK(csv.find("mass") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(verify::to_json(results, vc).find("\"ball\"") != std::string::npos);
}

TEST_CASE("mutated transpose is detected") {
  verify::VerifyConfig vc;
  vc.grid_size = 16;
  vc.n_steps = 10;
  vc.mutate = true;
  const auto r = verify::run_check("duality", vc);
  CHECK(!r.pass);
}

TEST_CASE("trajectory distance") {
  const auto grid = testing::grid2(8, 8);
  TimeGrid time;
  time.T = 0.4;
  time.n_steps = 4;
  std::mt19937_64 rng(89);
  const Field phi0 = random_smooth_field(grid, rng, 0.3);
  const auto a = solve_state(Control(grid, time), phi0, testing::nonlinear());
  CHECK(verify::trajectory_distance(a, a) == 0.0);
  const auto b = solve_state(Control(grid, time), phi0 + Field(grid, 0.1), testing::nonlinear());
  CHECK(verify::trajectory_distance(a, b) > 0.0);
}

TEST_CASE("energy slack and variational violation") {
  const auto grid = testing::grid2(16, 16);
  TimeGrid time;
  time.T = 0.2;
  time.n_steps = 10;
  // pure phase: no energy, no dissipation
  const auto pure = solve_state(Control(grid, time), Field(grid, 1.0), PhysParams{});
  CHECK(verify::energy_slack(pure) == 0.0);

  std::mt19937_64 rng(97);
  ControlParams cp;
  cp.beta = {0.0, 0.0, 0.0, 1.0};
  cp.M = 1.0;
  const Control zero(grid, time);
  // g = 0 with v^a = 0 is optimal for the Tikhonov term alone
  CHECK(verify::variational_violation(zero, zero, cp, 20, rng) <= 1e-15);
  // g far from the minimizer violates the inequality
  const Control g = random_control(grid, time, rng, 0.5);
  CHECK(verify::variational_violation(g, zero, cp, 20, rng) > 1e-3);
}

TEST_CASE("lipschitz probe") {
  const auto grid = testing::grid2(8, 8);
  std::mt19937_64 rng(101);
  const auto p1 = random_control_profile(grid, rng, 0.5, 0.4);
  const auto p2 = random_control_profile(grid, rng, 0.5, 0.4);
  const auto r = verify::lipschitz_probe([&](const TimeGrid& t) { return sample_control(grid, t, p1); },
                                         [&](const TimeGrid& t) { return sample_control(grid, t, p2); },
                                         random_smooth_field(grid, rng, 0.3), testing::nonlinear(), 0.4, {4, 8});
  REQUIRE(r.size() == 2);
  CHECK(r[0] > 0.0);
  CHECK(std::max(r[0], r[1]) / std::min(r[0], r[1]) <= verify::kLipschitzSpread);
  CHECK_THROWS(verify::lipschitz_probe([&](const TimeGrid& t) { return sample_control(grid, t, p1); },
                                       [&](const TimeGrid& t) { return sample_control(grid, t, p1); },
                                       Field(grid), testing::nonlinear(), 0.4, {4}));
}
