#include <doctest.h>

#include "helpers.hpp"

using namespace chb6;
using testing::grid2;

TEST_CASE("grid spec validation") {
  GridSpec s;
  s.dim = 2;
  s.sizes = {8, 8, 1};
  s.lengths = {1.0, 1.0, 1.0};
  CHECK_NOTHROW(s.validate());
  auto bad = s;
  bad.sizes[0] = 7;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = s;
  bad.sizes[1] = 2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = s;
  bad.lengths[0] = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = s;
  bad.dim = 4;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = s;
  bad.dim = 3;
  bad.sizes = {512, 512, 512};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK(s.points() == 64);
  CHECK(s.volume() == doctest::Approx(1.0));
}

TEST_CASE("transform round trip on random data") {
  const auto g = grid2(32, 16, 3.0, 2.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  Field f(g);
  for (double& x : f.values()) x = n(rng);
  const Field back = Field::from_spectrum(g, f.spectrum());
  CHECK(testing::max_diff(back, f) <= 1e-12 * f.max_abs());
  // real field: the mean coefficient has no imaginary part
  CHECK(std::abs(f.spectrum()[0].imag()) == 0.0);
}

TEST_CASE("polyharmonic operator on eigenfunctions") {
  const double L = 3.0;
  const auto g = grid2(16, 8, L, 2.0);
  const Field c(g, 2.5);
  CHECK(laplacian(c).max_abs() <= 1e-14);
  const Field f = mode_field(g, 0.0, 1.0, {1, 0, 0});
  const double k2 = std::pow(2.0 * std::numbers::pi / L, 2);
  CHECK(testing::max_diff(polyharmonic_apply(f, 1), -k2 * f) <= 1e-12);
  CHECK(testing::max_diff(polyharmonic_apply(f, 3), -(k2 * k2 * k2) * f) <= 1e-10 * k2 * k2 * k2);
  CHECK(testing::max_diff(polyharmonic_apply(f, 2, -1), -(k2 * k2) * f) <= 1e-11 * k2 * k2);
  CHECK_THROWS(polyharmonic_apply(f, 4));

  std::mt19937_64 rng(5);
  const Field r = random_smooth_field(g, rng, 1.0, 0.7);
  for (int m = 1; m <= 3; ++m) CHECK(std::abs(polyharmonic_apply(r, m).mean()) <= 1e-12);
}

TEST_CASE("gradient and divergence") {
  const double L = 2.0;
  const auto g = grid2(16, 16, L, L);
  const VectorField gc = gradient(Field(g, 4.0));
  CHECK(gc[0].max_abs() <= 1e-14);
  CHECK(gc[1].max_abs() <= 1e-14);

  std::mt19937_64 rng(7);
  Field f(g);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& x : f.values()) x = n(rng);
  const Field lap = laplacian(f);
  CHECK(norm(divergence(gradient(f)) - lap) <= 1e-11 * norm(lap));

  const double k = 2.0 * std::numbers::pi / L;
  const Field s = mode_field(g, 0.0, 1.0, {1, 0, 0}, -0.5 * std::numbers::pi);  // sin(kx)
  const VectorField gs = gradient(s);
  CHECK(testing::max_diff(gs[0], k * mode_field(g, 0.0, 1.0, {1, 0, 0})) <= 1e-12);
  CHECK(gs[1].max_abs() <= 1e-14);
}

TEST_CASE("derivative is skew-adjoint") {
  const auto g = grid2(16, 8);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  Field a(g), b(g);
  for (double& x : a.values()) x = n(rng);
  for (double& x : b.values()) x = n(rng);
  for (int axis = 0; axis < 2; ++axis) {
    const double lhs = inner_product(derivative(a, axis), b);
    const double rhs = -inner_product(a, derivative(b, axis));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * norm(a) * norm(b) * 10.0);
  }
}

TEST_CASE("Leray projection") {
  const auto g = grid2(16, 16);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0.0, 1.0);
  VectorField u(g);
  for (std::size_t a = 0; a < 2; ++a)
    for (double& x : u[a].values()) x = n(rng);

  const VectorField pu = leray_project(u);
  CHECK(norm(divergence(pu)) <= 1e-11 * norm(u, Norm::H1));
  CHECK(norm(leray_project(pu) - pu) <= 1e-12 * norm(pu));

  Field q(g);
  for (double& x : q.values()) x = n(rng);
  const VectorField gq = gradient(q);
  CHECK(norm(leray_project(gq)) <= 1e-12 * norm(gq));
  CHECK(std::abs(inner_product(pu, gq)) <= 1e-10 * norm(pu) * norm(gq));

  VectorField c(g);
  c[0] = Field(g, 1.5);
  c[1] = Field(g, -0.5);
  const VectorField pc = leray_project(c);
  CHECK(norm(pc - c) <= 1e-14);

  CHECK_THROWS_AS(leray_project(VectorField(testing::grid1(8, 1.0))), std::invalid_argument);
}

TEST_CASE("inner products") {
  const double L = 3.0;
  const double Ly = 2.0;
  const auto g = grid2(16, 8, L, Ly);
  const Field c = mode_field(g, 0.0, 1.0, {1, 0, 0});
  CHECK(inner_product(c, c) == doctest::Approx(L / 2.0 * Ly).epsilon(1e-13));
  CHECK(inner_product(Field(g), Field(g)) == 0.0);

  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  Field a(g), b(g);
  for (double& x : a.values()) x = n(rng);
  for (double& x : b.values()) x = n(rng);
  CHECK(inner_product(a, a) > 0.0);
  CHECK(testing::rel(spectral_inner_product(a, b), inner_product(a, b)) <= 1e-11);
  CHECK(testing::rel(spectral_inner_product(a, a), inner_product(a, a)) <= 1e-11);

  const double h1 = inner_product(c, c, Norm::H1);
  const double k2 = std::pow(2.0 * std::numbers::pi / L, 2);
  CHECK(h1 == doctest::Approx((1.0 + k2) * L / 2.0 * Ly).epsilon(1e-12));

  const auto other = grid2(8, 8, L, Ly);
  CHECK_THROWS_AS(inner_product(a, Field(other)), GridMismatch);
}

TEST_CASE("dealias mask keeps the two-thirds band") {
  const auto g = grid2(12, 12);
  const Field low = mode_field(g, 0.0, 1.0, {3, 0, 0});   // 3*3 < 12
  const Field high = mode_field(g, 0.0, 1.0, {4, 0, 0});  // 3*4 == 12
  CHECK(testing::max_diff(dealias(low), low) <= 1e-14);
  CHECK(dealias(high).max_abs() <= 1e-14);
}
