// Synthetic fields for tests, verification and configs without data files:
// constants, single Fourier modes and band-limited random fields.
#pragma once

#include <array>
#include <functional>
#include <random>

#include "chb6/spectral.hpp"
#include "chb6/state.hpp"

namespace chb6 {

/// offset + amplitude * cos(2 pi m . x / L + phase), m integer per axis.
Field mode_field(const GridPtr& grid, double offset, double amplitude, std::array<int, 3> modes,
                 double phase = 0.0);

/// Divergence-free single-mode velocity: amplitude * (sin(2 pi m y / L_y), 0, ...)
/// for dim >= 2 (the shear flow along axis 0 driven by axis 1).
VectorField shear_mode(const GridPtr& grid, double amplitude, int mode);

/// Gaussian field with spectral amplitude (1 + |k|^2)^-2, restricted to the
/// dealiased band, scaled to the requested root-mean-square about its mean.
/// The mean is `mean`.
Field random_smooth_field(const GridPtr& grid, std::mt19937_64& rng, double rms, double mean = 0.0);
VectorField random_smooth_vector(const GridPtr& grid, std::mt19937_64& rng, double rms);

/// Piecewise-constant control sampled at interval midpoints.
Control sample_control(const GridPtr& grid, const TimeGrid& time, const std::function<VectorField(double)>& profile);

/// Smooth-in-time random profile a(x) cos(pi t/T) + b(x) sin(pi t/T); the same
/// rng state yields the same profile for every time grid with the same T.
std::function<VectorField(double)> random_control_profile(const GridPtr& grid, std::mt19937_64& rng, double rms,
                                                          double T);

/// Random control with L2(Q) norm `norm_value`.
Control random_control(const GridPtr& grid, const TimeGrid& time, std::mt19937_64& rng, double norm_value);

}  // namespace chb6
