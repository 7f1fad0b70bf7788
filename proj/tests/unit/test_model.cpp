#include <doctest.h>

#include "chb6/model.hpp"
#include "helpers.hpp"

using namespace chb6;

TEST_CASE("quartic potential values") {
  const Potential F = Potential::quartic();
  for (double s : {-1.0, 1.0}) {
    CHECK(F.eval(s, 0) == 0.0);
    CHECK(F.eval(s, 1) == 0.0);
  }
  CHECK(F.eval(0.0, 1) == 0.0);
  CHECK(F.eval(0.0, 2) == -1.0);
  CHECK(F.eval(0.3, 3) == doctest::Approx(1.8));
  CHECK(potential_derivatives(F, 2.0, 1) == doctest::Approx(6.0));

  const double d = 1e-4;
  const double fd = (F.eval(0.3 + d, 0) - F.eval(0.3 - d, 0)) / (2 * d);
  CHECK(std::abs(fd - F.eval(0.3, 1)) <= 1e-8);
}

TEST_CASE("derivative chain by central differences") {
  const Potential F = Potential::quartic();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const double d = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const double s = u(rng);
    for (int order = 0; order < 3; ++order) {
      const double fd = (F.eval(s + d, order) - F.eval(s - d, order)) / (2 * d);
      const double exact = F.eval(s, order + 1);
      CHECK(std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST_CASE("drag stays within its bounds") {
  PhysParams p;
  p.lambda = SmoothDrag{0.5, 4.0};
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const double l = p.drag(u(rng));
    CHECK(l >= 0.5);
    CHECK(l <= 4.0);
  }
  CHECK(p.drag(0.0) == doctest::Approx(2.25));
  const double d = 1e-6;
  CHECK(p.drag_prime(0.4) == doctest::Approx((p.drag(0.4 + d) - p.drag(0.4 - d)) / (2 * d)).epsilon(1e-8));
  p.lambda = ConstantDrag{3.0};
  CHECK(p.drag(1.7) == 3.0);
  CHECK(p.drag_prime(1.7) == 0.0);
}

TEST_CASE("parameter validation") {
  PhysParams p;
  CHECK_NOTHROW(p.validate());
  p.eta = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = PhysParams{};
  p.lambda = SmoothDrag{2.0, 1.0};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.lambda = SmoothDrag{0.0, 1.0};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = PhysParams{};
  p.potential = Potential({0.0, 0.0, 0.0, 1.0});  // odd degree: f' unbounded below
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.potential = Potential({0.0, 0.0, 0.0, 0.0, -1.0});
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.potential = Potential::zero();
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("source evaluation") {
  const auto g = testing::grid2(8, 8);
  PhysParams p;
  p.sigma = 0.0;
  CHECK(source_eval(Field(g, 0.7), p).max_abs() == 0.0);
  p.sigma = 0.3;
  CHECK(testing::max_diff(source_eval(Field(g, 2.0), p), Field(g, -0.6)) <= 1e-15);
  p.sigma = 1.0;
  p.h = TanhSource{1.0};
  CHECK(testing::max_diff(source_eval(Field(g, 0.5), p), Field(g, -0.5 + std::tanh(0.5))) <= 1e-15);
  CHECK(std::abs(p.h_eval(100.0)) <= 1.0);
}

TEST_CASE("chemical potential on constants") {
  const auto g = testing::grid2(8, 8);
  PhysParams p;
  p.nu = 1.0;
  const auto pure = chemical_potential(Field(g, 1.0), p);
  CHECK(pure.w.max_abs() == 0.0);
  CHECK(pure.mu.max_abs() == 0.0);

  // w = f(c), mu = (f'(c) + nu) f(c): c = 0.5 gives w = -0.375 and
  // mu = 0.75 * -0.375 = -0.28125
  const auto half = chemical_potential(Field(g, 0.5), p);
  CHECK(testing::max_diff(half.w, Field(g, -0.375)) <= 1e-15);
  CHECK(testing::max_diff(half.mu, Field(g, -0.28125)) <= 1e-15);
}

TEST_CASE("chemical potential linearizes about the pure phase") {
  const double L = 2.0 * std::numbers::pi;
  const auto g = testing::grid2(16, 16, L, L);
  PhysParams p;
  p.nu = 0.7;
  const double a = 1e-4;
  const double k2 = 1.0;
  const Field phi = mode_field(g, 1.0, a, {1, 0, 0});
  const Field c = mode_field(g, 0.0, 1.0, {1, 0, 0});
  // f(1) = 0, f'(1) = 2: w ~ a (k^2 + 2) cos, mu ~ a (k^2 + 2)(k^2 + 2 + nu) cos
  const auto cp = chemical_potential(phi, p);
  const Field w_lin = (a * (k2 + 2.0)) * c;
  const Field mu_lin = (a * (k2 + 2.0) * (k2 + 2.0 + p.nu)) * c;
  CHECK(testing::max_diff(cp.w, w_lin) <= 10.0 * a * a);
  CHECK(testing::max_diff(cp.mu, mu_lin) <= 100.0 * a * a);
  CHECK(testing::max_diff(cp.mu, mu_lin) > 0.0);
}

TEST_CASE("energy") {
  const double L = 3.0;
  const auto g = testing::grid2(8, 8, L, L);
  PhysParams p;
  p.nu = 1.5;
  CHECK(energy(Field(g, 1.0), p) == 0.0);
  CHECK(energy(Field(g, 0.0), p) == doctest::Approx(p.nu * L * L / 4.0));
  p.nu = -0.5;
  CHECK(energy(Field(g, 0.0), p) < 0.0);

  p.nu = 0.2;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 5; ++i) CHECK(energy(random_smooth_field(g, rng, 0.8), p) >= 0.0);

  // first variation: dE(phi)[psi] = <mu, psi>
  const auto g16 = testing::grid2(16, 16);
  const Field phi = random_smooth_field(g16, rng, 0.4);
  const Field psi = random_smooth_field(g16, rng, 1.0);
  const double e = 1e-6;
  const double fd = (energy(phi + e * psi, p) - energy(phi - e * psi, p)) / (2 * e);
  CHECK(testing::rel(fd, inner_product(chemical_potential(phi, p).mu, psi)) <= 1e-6);
}
