#include "chb6/io.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace chb6::io {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

namespace {

fs::path with_suffix(const fs::path& stem, const char* ext) {
  fs::path p = stem;
  p += ext;
  return p;
}

void write_header(const fs::path& stem, const GridSpec& spec, std::size_t components) {
  json h;
  h["dim"] = spec.dim;
  h["sizes"] = std::vector<int>(spec.sizes.begin(), spec.sizes.begin() + spec.dim);
  h["lengths"] = std::vector<double>(spec.lengths.begin(), spec.lengths.begin() + spec.dim);
  h["dtype"] = "f64le";
  h["components"] = components;
  write_text(with_suffix(stem, ".json"), h.dump(2) + "\n");
}

void write_payload(std::ofstream& os, std::span<const double> values) {
  for (double x : values) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

struct RawHeader {
  GridSpec spec;
  std::size_t components = 1;
};

RawHeader read_header(const fs::path& stem) {
  const json h = json::parse(read_text(with_suffix(stem, ".json")));
  if (h.at("dtype").get<std::string>() != "f64le") throw std::runtime_error("raw field: unsupported dtype");
  RawHeader r;
  r.spec.dim = h.at("dim").get<int>();
  const auto sizes = h.at("sizes").get<std::vector<int>>();
  const auto lengths = h.at("lengths").get<std::vector<double>>();
  if (static_cast<int>(sizes.size()) != r.spec.dim || static_cast<int>(lengths.size()) != r.spec.dim)
    throw std::runtime_error("raw field: header sizes/lengths do not match dim");
  for (int a = 0; a < r.spec.dim; ++a) {
    r.spec.sizes[a] = sizes[a];
    r.spec.lengths[a] = lengths[a];
  }
  r.components = h.value("components", std::size_t{1});
  return r;
}

std::vector<Field> read_components(const fs::path& stem, GridPtr grid) {
  const RawHeader h = read_header(stem);
  if (!grid) {
    grid = Grid::make(h.spec);
  } else if (!(grid->spec() == Grid(h.spec).spec())) {
    throw GridMismatch("raw field: header does not match the run grid");
  }
  std::ifstream is(with_suffix(stem, ".bin"), std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + with_suffix(stem, ".bin").string());
  std::vector<Field> out;
  for (std::size_t c = 0; c < h.components; ++c) {
    Field f(grid);
    for (double& x : f.values()) {
      std::uint64_t bits = 0;
      if (!is.read(reinterpret_cast<char*>(&bits), sizeof bits)) throw std::runtime_error("raw field: short payload");
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      x = std::bit_cast<double>(bits);
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

void write_field_raw(const fs::path& stem, const Field& f) {
  write_header(stem, f.grid().spec(), 1);
  std::ofstream os(with_suffix(stem, ".bin"), std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + with_suffix(stem, ".bin").string());
  write_payload(os, f.values());
}

void write_field_raw(const fs::path& stem, const VectorField& v) {
  write_header(stem, v.grid().spec(), v.dim());
  std::ofstream os(with_suffix(stem, ".bin"), std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + with_suffix(stem, ".bin").string());
  for (std::size_t a = 0; a < v.dim(); ++a) write_payload(os, v[a].values());
}

Field read_field_raw(const fs::path& stem, GridPtr grid) {
  auto comps = read_components(stem, std::move(grid));
  if (comps.size() != 1) throw std::runtime_error("raw field: expected a scalar field");
  return std::move(comps.front());
}

VectorField read_vector_field_raw(const fs::path& stem, GridPtr grid) {
  auto comps = read_components(stem, std::move(grid));
  if (static_cast<int>(comps.size()) != comps.front().grid().dim())
    throw std::runtime_error("raw field: component count does not match dim");
  return VectorField(std::move(comps));
}

// ---------------------------------------------------------------------------

void write_series_csv(std::ostream& os, const Diagnostics& d) {
  os << "step,t,energy,mean,max_abs_phi,v_norm,mean_ode_residual\n";
  for (std::size_t n = 0; n < d.t.size(); ++n) {
    os << n << ',' << format_double(d.t[n]) << ',' << format_double(d.energy[n]) << ','
       << format_double(d.mean[n]) << ',' << format_double(d.max_abs_phi[n]) << ',' << format_double(d.v_norm[n])
       << ',' << format_double(d.mean_ode_residual[n]) << '\n';
  }
}

void write_series_csv(const fs::path& path, const Diagnostics& d) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_series_csv(os, d);
}

void write_optimize_csv(std::ostream& os, const OptimizeReport& r) {
  os << "iter,cost_total,tracking_v,tracking_phi,terminal,tikhonov,sparsity,residual,alpha,sparsity_fraction\n";
  for (const auto& it : r.iterates) {
    os << it.iter << ',' << format_double(it.cost.total()) << ',' << format_double(it.cost.tracking_v) << ','
       << format_double(it.cost.tracking_phi) << ',' << format_double(it.cost.terminal) << ','
       << format_double(it.cost.tikhonov) << ',' << format_double(it.cost.sparsity) << ','
       << format_double(it.residual) << ',' << format_double(it.alpha) << ',' << format_double(it.sparsity_fraction)
       << '\n';
  }
}

void write_optimize_csv(const fs::path& path, const OptimizeReport& r) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_optimize_csv(os, r);
}

namespace {

std::string indexed(const char* prefix, int n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04d", prefix, n);
  return buf;
}

}  // namespace

void write_control(const fs::path& dir, const Control& g) {
  fs::create_directories(dir);
  json index;
  index["T"] = g.time().T;
  index["n_steps"] = g.time().n_steps;
  index["files"] = json::array();
  for (int n = 0; n < g.steps(); ++n) {
    const std::string name = indexed("g", n);
    write_field_raw(dir / name, g[n]);
    index["files"].push_back({{"interval", n}, {"t0", g.time().t(n)}, {"t1", g.time().t(n + 1)}, {"stem", name}});
  }
  write_text(dir / "index.json", index.dump(2) + "\n");
}

Control read_control(const fs::path& dir, GridPtr grid) {
  const json index = json::parse(read_text(dir / "index.json"));
  TimeGrid time{index.at("T").get<double>(), index.at("n_steps").get<int>()};
  std::vector<VectorField> values;
  for (const auto& entry : index.at("files")) {
    values.push_back(read_vector_field_raw(dir / entry.at("stem").get<std::string>(), grid));
    if (!grid) grid = values.back().grid_ptr();
  }
  return Control(time, std::move(values));
}

void write_snapshots(const fs::path& dir, const StateTrajectory& traj, int every) {
  if (every <= 0) return;
  fs::create_directories(dir);
  for (int n = 0; n <= traj.time.n_steps; n += every) write_field_raw(dir / indexed("phi", n), traj.phi[n]);
}

std::string simulate_plot_script() {
  return R"(# gnuplot script: gnuplot -p plots.gp
set datafile separator ','
set key autotitle columnhead
set multiplot layout 2,2
set title 'free energy'
plot 'series.csv' using 2:3 with lines
set title 'mean(phi)'
plot 'series.csv' using 2:4 with lines
set title 'max |phi|'
plot 'series.csv' using 2:5 with lines
set title '||v||'
plot 'series.csv' using 2:6 with lines
unset multiplot
# field slices: snapshots/phi_XXXX.bin (f64le, row-major), e.g.
# plot 'snapshots/phi_0000.bin' binary format='%float64' array=(NX,NY) with image
)";
}

std::string optimize_plot_script() {
  return R"(# gnuplot script: gnuplot -p plots.gp
set datafile separator ','
set key autotitle columnhead
set multiplot layout 1,3
set logscale y
set title 'total cost'
plot 'optimize.csv' using 1:2 with linespoints
set title 'stationarity residual'
plot 'optimize.csv' using 1:8 with linespoints
unset logscale y
set title 'sparsity fraction'
plot 'optimize.csv' using 1:10 with linespoints
unset multiplot
)";
}

}  // namespace chb6::io
