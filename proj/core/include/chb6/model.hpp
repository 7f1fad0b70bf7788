// Model constants and nonlinearities of the Brinkman / sixth-order
// Cahn-Hilliard system, the chemical-potential pipeline and the free energy.
//
//   w  = -lap(phi) + f(phi)
//   mu = -lap(w) + f'(phi) w + nu w
//   E  = 1/2 int w^2 + nu int (1/2 |grad phi|^2 + F(phi))
//
// Interface width is fixed to 1 and mobility to 1.
#pragma once

#include <variant>
#include <vector>

#include "chb6/spectral.hpp"

namespace chb6 {

/// Polynomial free-energy density F(s) = sum_i c_i s^i. The zero polynomial
/// is the linear test configuration (f == 0).
class Potential {
 public:
  Potential() = default;
  explicit Potential(std::vector<double> coefficients);

  /// F(s) = (s^2 - 1)^2 / 4.
  static Potential quartic();
  static Potential zero() { return Potential(std::vector<double>{}); }

  /// order 0 -> F, 1 -> f, 2 -> f', 3 -> f''.
  double eval(double s, int order) const;
  const std::vector<double>& coefficients() const { return coeffs_; }
  bool is_quartic() const;

 private:
  std::vector<double> coeffs_;
};

/// Free function form used by callers that only need the quartic.
double potential_derivatives(const Potential& potential, double s, int order);

struct ConstantDrag {
  double value = 1.0;
};

/// lambda(s) = lo + (hi - lo) (1 + tanh s) / 2, bounded in [lo, hi].
struct SmoothDrag {
  double lo = 1.0;
  double hi = 2.0;
};

using DragSpec = std::variant<ConstantDrag, SmoothDrag>;

struct ZeroSource {};
/// h(s) = amplitude * tanh(s), so |h| <= amplitude.
struct TanhSource {
  double amplitude = 1.0;
};
using SourceSpec = std::variant<ZeroSource, TanhSource>;

struct PhysParams {
  double eta = 1.0;
  DragSpec lambda = ConstantDrag{1.0};
  double nu = 1.0;
  double sigma = 0.0;
  SourceSpec h = ZeroSource{};
  Potential potential = Potential::quartic();

  /// Throws std::invalid_argument when eta <= 0, a drag bound is not
  /// positive, lo > hi, or the potential's growth makes f' unbounded below.
  void validate() const;

  bool constant_drag() const { return std::holds_alternative<ConstantDrag>(lambda); }
  double drag(double s) const;
  double drag_prime(double s) const;
  double drag_min() const;
  double drag_max() const;

  double h_eval(double s) const;
  double h_prime(double s) const;
  /// S(s) = -sigma s + h(s)
  double source(double s) const { return -sigma * s + h_eval(s); }
  double source_prime(double s) const { return -sigma + h_prime(s); }

  double F(double s) const { return potential.eval(s, 0); }
  double f(double s) const { return potential.eval(s, 1); }
  double fp(double s) const { return potential.eval(s, 2); }
  double fpp(double s) const { return potential.eval(s, 3); }
};

/// Nodal -sigma phi + h(phi), dealiased.
Field source_eval(const Field& phi, const PhysParams& params);

struct ChemicalPotential {
  Field w;
  Field mu;
};

/// Nonlinear products are dealiased.
ChemicalPotential chemical_potential(const Field& phi, const PhysParams& params);

double energy(const Field& phi, const PhysParams& params);

/// Range above which the quartic's convexity assumptions are considered
/// violated by the max|phi| monitor.
inline constexpr double kPhaseRangeWarning = 1.5;

}  // namespace chb6
