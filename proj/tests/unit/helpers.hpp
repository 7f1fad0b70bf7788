#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "chb6/spectral.hpp"
#include "chb6/state.hpp"
#include "chb6/synthetic.hpp"

namespace testing {

inline chb6::GridPtr grid2(int nx, int ny, double lx = 2.0 * std::numbers::pi, double ly = 2.0 * std::numbers::pi) {
  chb6::GridSpec s;
  s.dim = 2;
  s.sizes = {nx, ny, 1};
  s.lengths = {lx, ly, 1.0};
  return chb6::Grid::make(s);
}

inline chb6::GridPtr grid1(int n, double l) {
  chb6::GridSpec s;
  s.dim = 1;
  s.sizes = {n, 1, 1};
  s.lengths = {l, 1.0, 1.0};
  return chb6::Grid::make(s);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double max_diff(const chb6::Field& a, const chb6::Field& b) { return (a - b).max_abs(); }

inline chb6::PhysParams nonlinear() {
  chb6::PhysParams p;
  p.lambda = chb6::SmoothDrag{1.0, 3.0};
  p.nu = 0.5;
  p.sigma = 0.1;
  p.h = chb6::TanhSource{0.05};
  return p;
}

inline chb6::PhysParams linear_config(double lambda0 = 2.0) {
  chb6::PhysParams p;
  p.lambda = chb6::ConstantDrag{lambda0};
  p.nu = 0.5;
  p.potential = chb6::Potential::zero();
  return p;
}

}  // namespace testing
