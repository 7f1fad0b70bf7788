#include "chb6/synthetic.hpp"

#include <cmath>
#include <numbers>

namespace chb6 {

Field mode_field(const GridPtr& grid, double offset, double amplitude, std::array<int, 3> modes, double phase) {
  const auto& spec = grid->spec();
  return Field::from_function(grid, [&](const std::array<double, 3>& x) {
    double arg = phase;
    for (int a = 0; a < spec.dim; ++a) arg += 2.0 * std::numbers::pi * modes[a] * x[a] / spec.lengths[a];
    return offset + amplitude * std::cos(arg);
  });
}

VectorField shear_mode(const GridPtr& grid, double amplitude, int mode) {
  if (grid->dim() < 2) throw std::invalid_argument("shear_mode: needs dim >= 2");
  VectorField v(grid);
  const double L = grid->spec().lengths[1];
  v[0] = Field::from_function(
      grid, [&](const std::array<double, 3>& x) { return amplitude * std::sin(2.0 * std::numbers::pi * mode * x[1] / L); });
  return v;
}

Field random_smooth_field(const GridPtr& grid, std::mt19937_64& rng, double rms, double mean) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Field noise(grid);
  for (double& x : noise.values()) x = normal(rng);

  const auto k2 = grid->k_squared();
  const auto mask = grid->dealias_mask();
  std::vector<double> filter(k2.size());
  for (std::size_t i = 0; i < k2.size(); ++i) filter[i] = mask[i] / ((1.0 + k2[i]) * (1.0 + k2[i]));
  filter[0] = 0.0;
  Field f = apply_multiplier(noise, filter);

  double ss = 0.0;
  for (double x : f.values()) ss += x * x;
  const double current = std::sqrt(ss / static_cast<double>(f.size()));
  if (current > 0.0) f *= rms / current;
  for (double& x : f.values()) x += mean;
  return f;
}

VectorField random_smooth_vector(const GridPtr& grid, std::mt19937_64& rng, double rms) {
  VectorField v(grid);
  for (std::size_t a = 0; a < v.dim(); ++a) v[a] = random_smooth_field(grid, rng, rms);
  return v;
}

Control sample_control(const GridPtr& grid, const TimeGrid& time, const std::function<VectorField(double)>& profile) {
  std::vector<VectorField> values;
  values.reserve(time.n_steps);
  for (int n = 0; n < time.n_steps; ++n) {
    VectorField v = profile(0.5 * (time.t(n) + time.t(n + 1)));
    require_same_grid(v[0], Field(grid));
    values.push_back(std::move(v));
  }
  return Control(time, std::move(values));
}

std::function<VectorField(double)> random_control_profile(const GridPtr& grid, std::mt19937_64& rng, double rms,
                                                          double T) {
  VectorField a = random_smooth_vector(grid, rng, rms);
  VectorField b = random_smooth_vector(grid, rng, rms);
  return [a = std::move(a), b = std::move(b), T](double t) {
    const double s = std::numbers::pi * t / T;
    VectorField v = std::cos(s) * a;
    v.axpy(std::sin(s), b);
    return v;
  };
}

Control random_control(const GridPtr& grid, const TimeGrid& time, std::mt19937_64& rng, double norm_value) {
  Control g = sample_control(grid, time, random_control_profile(grid, rng, 1.0, time.T));
  const double n = g.norm();
  if (n > 0.0) g *= norm_value / n;
  return g;
}

}  // namespace chb6
