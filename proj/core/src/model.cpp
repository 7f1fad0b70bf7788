#include "chb6/model.hpp"

#include <cmath>
#include <stdexcept>

namespace chb6 {

Potential::Potential(std::vector<double> coefficients) : coeffs_(std::move(coefficients)) {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

Potential Potential::quartic() { return Potential({0.25, 0.0, -0.5, 0.0, 0.25}); }

bool Potential::is_quartic() const { return coeffs_ == quartic().coeffs_; }

double Potential::eval(double s, int order) const {
  if (order < 0 || order > 3) throw std::invalid_argument("potential: derivative order must be 0..3");
  // Horner on the order-th derivative.
  double acc = 0.0;
  for (int i = static_cast<int>(coeffs_.size()) - 1; i >= order; --i) {
    double c = coeffs_[i];
    for (int j = 0; j < order; ++j) c *= (i - j);
    acc = acc * s + c;
  }
  return acc;
}

double potential_derivatives(const Potential& potential, double s, int order) {
  return potential.eval(s, order);
}

void PhysParams::validate() const {
  if (!(eta > 0.0)) throw std::invalid_argument("physics: eta must be positive");
  if (const auto* c = std::get_if<ConstantDrag>(&lambda)) {
    if (!(c->value > 0.0)) throw std::invalid_argument("physics: lambda must be positive");
  } else {
    const auto& s = std::get<SmoothDrag>(lambda);
    if (!(s.lo > 0.0)) throw std::invalid_argument("physics: lambda min must be positive");
    if (!(s.lo <= s.hi)) throw std::invalid_argument("physics: lambda min must not exceed max");
  }
  if (const auto* t = std::get_if<TanhSource>(&h)) {
    if (!(t->amplitude >= 0.0) || !std::isfinite(t->amplitude))
      throw std::invalid_argument("physics: h amplitude must be finite and nonnegative");
  }
  const auto& c = potential.coefficients();
  if (!c.empty()) {
    const std::size_t degree = c.size() - 1;
    if (degree < 2 || degree % 2 != 0 || !(c.back() > 0.0))
      throw std::invalid_argument(
          "physics: potential must be zero or of even degree >= 2 with positive leading coefficient");
  }
  if (!std::isfinite(nu) || !std::isfinite(sigma)) throw std::invalid_argument("physics: nu and sigma must be finite");
}

double PhysParams::drag(double s) const {
  if (const auto* c = std::get_if<ConstantDrag>(&lambda)) return c->value;
  const auto& d = std::get<SmoothDrag>(lambda);
  return d.lo + (d.hi - d.lo) * 0.5 * (1.0 + std::tanh(s));
}

double PhysParams::drag_prime(double s) const {
  if (std::holds_alternative<ConstantDrag>(lambda)) return 0.0;
  const auto& d = std::get<SmoothDrag>(lambda);
  const double t = std::tanh(s);
  return (d.hi - d.lo) * 0.5 * (1.0 - t * t);
}

double PhysParams::drag_min() const {
  if (const auto* c = std::get_if<ConstantDrag>(&lambda)) return c->value;
  return std::get<SmoothDrag>(lambda).lo;
}

double PhysParams::drag_max() const {
  if (const auto* c = std::get_if<ConstantDrag>(&lambda)) return c->value;
  return std::get<SmoothDrag>(lambda).hi;
}

double PhysParams::h_eval(double s) const {
  if (const auto* t = std::get_if<TanhSource>(&h)) return t->amplitude * std::tanh(s);
  return 0.0;
}

double PhysParams::h_prime(double s) const {
  if (const auto* t = std::get_if<TanhSource>(&h)) {
    const double th = std::tanh(s);
    return t->amplitude * (1.0 - th * th);
  }
  return 0.0;
}

Field source_eval(const Field& phi, const PhysParams& params) {
  return dealias(map_values(phi, [&](double s) { return params.source(s); }));
}

ChemicalPotential chemical_potential(const Field& phi, const PhysParams& params) {
  Field w = dealias(map_values(phi, [&](double s) { return params.f(s); }));
  w.axpy(-1.0, laplacian(phi));
  const Field fp = map_values(phi, [&](double s) { return params.fp(s); });
  Field mu = dealias(multiply(fp, w));
  mu.axpy(-1.0, laplacian(w));
  mu.axpy(params.nu, w);
  return {std::move(w), std::move(mu)};
}

double energy(const Field& phi, const PhysParams& params) {
  Field w = dealias(map_values(phi, [&](double s) { return params.f(s); }));
  w.axpy(-1.0, laplacian(phi));
  double e = 0.5 * inner_product(w, w);
  if (params.nu != 0.0) {
    const VectorField g = gradient(phi);
    const Field F = map_values(phi, [&](double s) { return params.F(s); });
    double bulk = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i) bulk += F[i];
    bulk *= phi.grid().cell_volume();
    e += params.nu * (0.5 * inner_product(g, g) + bulk);
  }
  return e;
}

}  // namespace chb6
