#include "chb6/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

namespace chb6 {

std::string fft_backend_version() { return fftw_version; }


namespace {

// The FFTW planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

// ---------------------------------------------------------------------------
// GridSpec

void GridSpec::validate() const {
  if (dim < 1 || dim > 3) throw std::invalid_argument("grid: dim must be 1, 2 or 3");
  for (int a = 0; a < dim; ++a) {
    if (sizes[a] < 4 || sizes[a] % 2 != 0)
      throw std::invalid_argument("grid: sizes must be even and >= 4 (axis " +
                                  std::to_string(a) + ")");
    if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a]))
      throw std::invalid_argument("grid: lengths must be positive (axis " + std::to_string(a) +
                                  ")");
  }
  if (points() > kMaxGridPoints) throw std::invalid_argument("grid: too many points");
}

std::size_t GridSpec::points() const {
  std::size_t n = 1;
  for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(sizes[a]);
  return n;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= lengths[a] / sizes[a];
  return v;
}

double GridSpec::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= lengths[a];
  return v;
}

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  for (int a = spec_.dim; a < 3; ++a) {
    spec_.sizes[a] = 1;
    spec_.lengths[a] = 1.0;
  }
  const int d = spec_.dim;
  n_nodal_ = spec_.points();

  std::array<int, 3> sdims{1, 1, 1};
  for (int a = 0; a < d; ++a) sdims[a] = spec_.sizes[a];
  sdims[d - 1] = spec_.sizes[d - 1] / 2 + 1;
  n_spectral_ = 1;
  for (int a = 0; a < d; ++a) n_spectral_ *= static_cast<std::size_t>(sdims[a]);

  for (auto& k : k_) k.assign(n_spectral_, 0.0);
  k2_.assign(n_spectral_, 0.0);
  mask_.assign(n_spectral_, 1.0);
  herm_.assign(n_spectral_, 1.0);

  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t idx = 0; idx < n_spectral_; ++idx) {
    std::size_t rem = idx;
    std::array<int, 3> i{0, 0, 0};
    for (int a = d - 1; a >= 0; --a) {
      i[a] = static_cast<int>(rem % static_cast<std::size_t>(sdims[a]));
      rem /= static_cast<std::size_t>(sdims[a]);
    }
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const int n = spec_.sizes[a];
      const int m = (a == d - 1) ? i[a] : (i[a] <= n / 2 ? i[a] : i[a] - n);
      const bool nyquist = (std::abs(m) * 2 == n);
      const double k = nyquist ? 0.0 : two_pi * m / spec_.lengths[a];
      k_[a][idx] = k;
      k2 += k * k;
      if (3 * std::abs(m) >= n) mask_[idx] = 0.0;
    }
    k2_[idx] = k2;
    const int last = i[d - 1];
    if (last > 0 && 2 * last < spec_.sizes[d - 1]) herm_[idx] = 2.0;
  }

  std::vector<double> rbuf(n_nodal_);
  std::vector<Complex> cbuf(n_spectral_);
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plan_forward_ = fftw_plan_dft_r2c(d, spec_.sizes.data(), rbuf.data(), as_fftw(cbuf.data()), flags);
  plan_inverse_ = fftw_plan_dft_c2r(d, spec_.sizes.data(), as_fftw(cbuf.data()), rbuf.data(), flags);
  if (!plan_forward_ || !plan_inverse_) throw std::runtime_error("grid: FFTW planning failed");
}

Grid::~Grid() {
  std::lock_guard lock(planner_mutex());
  if (plan_forward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  if (plan_inverse_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inverse_));
}

std::shared_ptr<const Grid> Grid::make(const GridSpec& spec) { return std::make_shared<const Grid>(spec); }

void Grid::forward(std::span<const double> nodal, std::span<Complex> spectral) const {
  // r2c leaves its input intact, the const_cast only satisfies the C signature.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_forward_), const_cast<double*>(nodal.data()),
                       as_fftw(spectral.data()));
}

void Grid::inverse(std::span<const Complex> spectral, std::span<double> nodal) const {
  std::vector<Complex> work(spectral.begin(), spectral.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inverse_), as_fftw(work.data()), nodal.data());
  const double scale = 1.0 / static_cast<double>(n_nodal_);
  for (double& x : nodal) x *= scale;
}

std::array<double, 3> Grid::node(std::size_t index) const {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = spec_.dim - 1; a >= 0; --a) {
    const auto n = static_cast<std::size_t>(spec_.sizes[a]);
    x[a] = static_cast<double>(index % n) * spec_.lengths[a] / static_cast<double>(n);
    index /= n;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Field

Field::Field(GridPtr grid, double value) : grid_(std::move(grid)), values_(grid_->size(), value) {}

Field::Field(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size()) throw GridMismatch("field: value count does not match grid");
}

Field Field::from_spectrum(GridPtr grid, std::span<const Complex> spectrum) {
  Field out(grid);
  grid->inverse(spectrum, out.values_);
  return out;
}

Spectrum Field::spectrum() const {
  Spectrum s(grid_->spectral_size());
  grid_->forward(values_, s);
  return s;
}

double Field::mean() const {
  double s = 0.0;
  for (double x : values_) s += x;
  return s / static_cast<double>(values_.size());
}

double Field::max_abs() const {
  double m = 0.0;
  for (double x : values_) m = std::max(m, std::abs(x));
  return m;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

void require_same_grid(const Field& a, const Field& b) {
  if (a.grid_ptr() == b.grid_ptr()) return;
  if (!a.grid_ptr() || !b.grid_ptr() || !(a.grid().spec() == b.grid().spec()))
    throw GridMismatch("fields live on different grids");
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& x : values_) x *= s;
  return *this;
}

Field& Field::axpy(double s, const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }
Field operator*(Field a, double s) { return a *= s; }

Field multiply(const Field& a, const Field& b) {
  require_same_grid(a, b);
  Field out(a.grid_ptr());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

// ---------------------------------------------------------------------------
// VectorField

VectorField::VectorField(GridPtr grid, double value) {
  const int d = grid->dim();
  comp_.reserve(d);
  for (int a = 0; a < d; ++a) comp_.emplace_back(grid, value);
}

VectorField::VectorField(std::vector<Field> components) : comp_(std::move(components)) {
  for (const auto& c : comp_) require_same_grid(c, comp_.front());
}

bool VectorField::all_finite() const {
  return std::all_of(comp_.begin(), comp_.end(), [](const Field& c) { return c.all_finite(); });
}

Field VectorField::magnitude() const {
  Field out(grid_ptr());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (const auto& c : comp_) s += c[i] * c[i];
    out[i] = std::sqrt(s);
  }
  return out;
}

VectorField& VectorField::operator+=(const VectorField& other) {
  for (std::size_t a = 0; a < comp_.size(); ++a) comp_[a] += other.comp_[a];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
  for (std::size_t a = 0; a < comp_.size(); ++a) comp_[a] -= other.comp_[a];
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (auto& c : comp_) c *= s;
  return *this;
}

VectorField& VectorField::axpy(double s, const VectorField& other) {
  for (std::size_t a = 0; a < comp_.size(); ++a) comp_[a].axpy(s, other.comp_[a]);
  return *this;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

VectorField multiply(const Field& s, const VectorField& v) {
  std::vector<Field> comps;
  comps.reserve(v.dim());
  for (std::size_t a = 0; a < v.dim(); ++a) comps.push_back(multiply(s, v[a]));
  return VectorField(std::move(comps));
}

Field dot(const VectorField& a, const VectorField& b) {
  Field out(a.grid_ptr());
  for (std::size_t c = 0; c < a.dim(); ++c) out.axpy(1.0, multiply(a[c], b[c]));
  return out;
}

// ---------------------------------------------------------------------------
// Operators

Field apply_multiplier(const Field& f, std::span<const double> multiplier) {
  Spectrum s = f.spectrum();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= multiplier[i];
  return Field::from_spectrum(f.grid_ptr(), s);
}

Field polyharmonic_apply(const Field& f, int order, int sign) {
  if (order < 1 || order > 3) throw std::invalid_argument("polyharmonic_apply: order must be 1, 2 or 3");
  const auto k2 = f.grid().k_squared();
  Spectrum s = f.spectrum();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= sign * std::pow(-k2[i], order);
  return Field::from_spectrum(f.grid_ptr(), s);
}

Field derivative(const Field& f, int axis) {
  const auto k = f.grid().wavenumber(axis);
  Spectrum s = f.spectrum();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= Complex(0.0, k[i]);
  return Field::from_spectrum(f.grid_ptr(), s);
}

VectorField gradient(const Field& f) {
  const Grid& g = f.grid();
  const Spectrum s = f.spectrum();
  std::vector<Field> comps;
  Spectrum work(s.size());
  for (int a = 0; a < g.dim(); ++a) {
    const auto k = g.wavenumber(a);
    for (std::size_t i = 0; i < s.size(); ++i) work[i] = s[i] * Complex(0.0, k[i]);
    comps.push_back(Field::from_spectrum(f.grid_ptr(), work));
  }
  return VectorField(std::move(comps));
}

Field divergence(const VectorField& v) {
  const Grid& g = v.grid();
  Spectrum acc(g.spectral_size(), Complex(0.0, 0.0));
  for (int a = 0; a < g.dim(); ++a) {
    const Spectrum s = v[a].spectrum();
    const auto k = g.wavenumber(a);
    for (std::size_t i = 0; i < s.size(); ++i) acc[i] += s[i] * Complex(0.0, k[i]);
  }
  return Field::from_spectrum(v.grid_ptr(), acc);
}

Field dealias(const Field& f) { return apply_multiplier(f, f.grid().dealias_mask()); }

VectorField dealias(const VectorField& v) {
  std::vector<Field> comps;
  for (std::size_t a = 0; a < v.dim(); ++a) comps.push_back(dealias(v[a]));
  return VectorField(std::move(comps));
}

VectorField leray_project_scaled(const VectorField& v, std::span<const double> multiplier) {
  const Grid& g = v.grid();
  const int d = g.dim();
  if (d < 2) throw std::invalid_argument("leray_project: needs dim >= 2");
  std::vector<Spectrum> s;
  for (int a = 0; a < d; ++a) s.push_back(v[a].spectrum());
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    const double k2 = g.k_squared()[i];
    if (k2 > 0.0) {
      Complex kdotu(0.0, 0.0);
      for (int a = 0; a < d; ++a) kdotu += g.wavenumber(a)[i] * s[a][i];
      for (int a = 0; a < d; ++a) s[a][i] -= g.wavenumber(a)[i] * kdotu / k2;
    }
    for (int a = 0; a < d; ++a) s[a][i] *= multiplier[i];
  }
  std::vector<Field> comps;
  for (int a = 0; a < d; ++a) comps.push_back(Field::from_spectrum(v.grid_ptr(), s[a]));
  return VectorField(std::move(comps));
}

VectorField leray_project(const VectorField& v) {
  const std::vector<double> ones(v.grid().spectral_size(), 1.0);
  return leray_project_scaled(v, ones);
}

double inner_product(const Field& a, const Field& b, Norm norm) {
  require_same_grid(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  s *= a.grid().cell_volume();
  if (norm == Norm::H1) s += inner_product(gradient(a), gradient(b), Norm::L2);
  return s;
}

double inner_product(const VectorField& a, const VectorField& b, Norm norm) {
  if (a.dim() != b.dim()) throw GridMismatch("vector fields have different dimension");
  double s = 0.0;
  for (std::size_t c = 0; c < a.dim(); ++c) s += inner_product(a[c], b[c], norm);
  return s;
}

double norm(const Field& f, Norm n) { return std::sqrt(std::max(0.0, inner_product(f, f, n))); }
double norm(const VectorField& v, Norm n) { return std::sqrt(std::max(0.0, inner_product(v, v, n))); }

double spectral_inner_product(const Field& a, const Field& b) {
  require_same_grid(a, b);
  const Spectrum sa = a.spectrum();
  const Spectrum sb = b.spectrum();
  const auto w = a.grid().hermitian_weight();
  double s = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) s += w[i] * (sa[i] * std::conj(sb[i])).real();
  return s * a.grid().cell_volume() / static_cast<double>(a.size());
}

}  // namespace chb6
