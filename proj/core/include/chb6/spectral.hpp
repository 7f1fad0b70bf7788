// Periodic pseudospectral infrastructure: grids, real transforms, Fourier
// multipliers, Leray projection and quadrature-exact inner products.
//
// Conventions
//   * Nodal data is row-major over (axis 0, axis 1, axis 2).
//   * Spectral data uses FFTW's real-to-complex half storage; the last axis
//     keeps N/2+1 modes.
//   * The forward transform is unnormalized, the inverse divides by N.
//   * First-derivative wavenumbers vanish on Nyquist modes, and every even
//     multiplier is built from the same wavenumbers. This keeps
//     div(grad f) == lap(f) exactly and makes d/dx exactly skew-symmetric.
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chb6 {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

/// Version string of the FFT backend.
std::string fft_backend_version();

/// Upper bound on nodal points per grid (memory guard for desk-scale runs).
inline constexpr std::size_t kMaxGridPoints = std::size_t{1} << 24;

struct GridSpec {
  int dim = 2;
  std::array<int, 3> sizes{1, 1, 1};
  std::array<double, 3> lengths{1.0, 1.0, 1.0};

  /// Throws std::invalid_argument on dim outside {1,2,3}, odd or < 4 sizes,
  /// non-positive lengths, or more than kMaxGridPoints points.
  void validate() const;

  std::size_t points() const;
  double cell_volume() const;
  double volume() const;

  bool operator==(const GridSpec&) const = default;
};

/// Owns FFTW plans and the per-grid multiplier tables. Immutable after
/// construction; transforms use FFTW's new-array execute and are safe to call
/// concurrently.
class Grid {
 public:
  explicit Grid(const GridSpec& spec);
  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  static std::shared_ptr<const Grid> make(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }
  std::size_t size() const { return n_nodal_; }
  std::size_t spectral_size() const { return n_spectral_; }
  double cell_volume() const { return spec_.cell_volume(); }
  double volume() const { return spec_.volume(); }

  void forward(std::span<const double> nodal, std::span<Complex> spectral) const;
  void inverse(std::span<const Complex> spectral, std::span<double> nodal) const;

  /// Per-mode wavenumber along `axis` (zero on that axis' Nyquist mode).
  std::span<const double> wavenumber(int axis) const { return k_[axis]; }
  /// Sum of squared wavenumbers.
  std::span<const double> k_squared() const { return k2_; }
  /// 2/3-rule mask (1 kept, 0 removed).
  std::span<const double> dealias_mask() const { return mask_; }
  /// Multiplicity of each stored mode in the full Hermitian spectrum (1 or 2).
  std::span<const double> hermitian_weight() const { return herm_; }

  /// Physical coordinates of nodal point `index`.
  std::array<double, 3> node(std::size_t index) const;

 private:
  GridSpec spec_;
  std::size_t n_nodal_ = 0;
  std::size_t n_spectral_ = 0;
  void* plan_forward_ = nullptr;
  void* plan_inverse_ = nullptr;
  std::array<std::vector<double>, 3> k_;
  std::vector<double> k2_;
  std::vector<double> mask_;
  std::vector<double> herm_;
};

using GridPtr = std::shared_ptr<const Grid>;

class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Real scalar field stored by nodal values; spectral coefficients are
/// computed on demand.
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid, double value = 0.0);
  Field(GridPtr grid, std::vector<double> values);

  template <class Fn>
  static Field from_function(GridPtr grid, Fn&& fn) {
    Field out(grid);
    for (std::size_t i = 0; i < out.size(); ++i) out.values_[i] = fn(grid->node(i));
    return out;
  }
  static Field from_spectrum(GridPtr grid, std::span<const Complex> spectrum);

  Spectrum spectrum() const;

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  bool empty() const { return !grid_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double mean() const;
  double max_abs() const;
  bool all_finite() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);
  /// this += s * other
  Field& axpy(double s, const Field& other);

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);
Field operator*(Field a, double s);
/// Pointwise product.
Field multiply(const Field& a, const Field& b);
/// Pointwise map.
template <class Fn>
Field map_values(const Field& f, Fn&& fn) {
  Field out(f.grid_ptr());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = fn(f[i]);
  return out;
}

void require_same_grid(const Field& a, const Field& b);

/// `dim` scalar components on one grid.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(GridPtr grid, double value = 0.0);
  explicit VectorField(std::vector<Field> components);

  std::size_t dim() const { return comp_.size(); }
  Field& operator[](std::size_t i) { return comp_[i]; }
  const Field& operator[](std::size_t i) const { return comp_[i]; }
  const GridPtr& grid_ptr() const { return comp_.front().grid_ptr(); }
  const Grid& grid() const { return comp_.front().grid(); }
  bool empty() const { return comp_.empty(); }

  bool all_finite() const;
  /// Pointwise Euclidean magnitude.
  Field magnitude() const;

  VectorField& operator+=(const VectorField& other);
  VectorField& operator-=(const VectorField& other);
  VectorField& operator*=(double s);
  VectorField& axpy(double s, const VectorField& other);

 private:
  std::vector<Field> comp_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);
/// Pointwise scalar times vector.
VectorField multiply(const Field& s, const VectorField& v);
/// Pointwise dot product.
Field dot(const VectorField& a, const VectorField& b);

// ---------------------------------------------------------------------------
// Operators

/// Applies a real, even Fourier multiplier (one value per stored mode).
Field apply_multiplier(const Field& f, std::span<const double> multiplier);

/// sign * lap^order f via the multiplier (-|k|^2)^order; order in {1,2,3}.
Field polyharmonic_apply(const Field& f, int order, int sign = +1);
inline Field laplacian(const Field& f) { return polyharmonic_apply(f, 1, +1); }

Field derivative(const Field& f, int axis);
VectorField gradient(const Field& f);
Field divergence(const VectorField& v);

/// 2/3-rule truncation.
Field dealias(const Field& f);
VectorField dealias(const VectorField& v);

/// L2-orthogonal projection onto divergence-free fields; the mean mode is
/// kept. Throws std::invalid_argument for dim == 1.
VectorField leray_project(const VectorField& v);

/// Leray projection followed by a scalar per-mode multiplier, in a single
/// transform pair per component.
VectorField leray_project_scaled(const VectorField& v, std::span<const double> multiplier);

enum class Norm { L2, H1 };

/// Quadrature inner product (cell volume times nodal sum); H1 adds the
/// gradient term. Throws GridMismatch on grids of different shape.
double inner_product(const Field& a, const Field& b, Norm norm = Norm::L2);
double inner_product(const VectorField& a, const VectorField& b, Norm norm = Norm::L2);
double norm(const Field& f, Norm n = Norm::L2);
double norm(const VectorField& v, Norm n = Norm::L2);

/// L2 inner product evaluated on spectral coefficients (Parseval route).
double spectral_inner_product(const Field& a, const Field& b);

}  // namespace chb6
