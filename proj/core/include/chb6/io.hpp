// Persistence: raw field snapshots, CSV series, control dumps and gnuplot
// scripts.
//
// Raw snapshot = "<stem>.json" header {dim, sizes, lengths, dtype: "f64le",
// components} + "<stem>.bin" payload: little-endian float64, row-major over
// the axes, one block per component.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "chb6/control.hpp"
#include "chb6/spectral.hpp"
#include "chb6/state.hpp"

namespace chb6::io {

namespace fs = std::filesystem;

/// Shortest round-trip decimal form ("%.17g").
std::string format_double(double x);

void write_field_raw(const fs::path& stem, const Field& f);
void write_field_raw(const fs::path& stem, const VectorField& v);
/// The grid is rebuilt from the header unless `grid` is given, in which case
/// the header must match it.
Field read_field_raw(const fs::path& stem, GridPtr grid = nullptr);
VectorField read_vector_field_raw(const fs::path& stem, GridPtr grid = nullptr);

/// step,t,energy,mean,max_abs_phi,v_norm,mean_ode_residual
void write_series_csv(std::ostream& os, const Diagnostics& d);
void write_series_csv(const fs::path& path, const Diagnostics& d);

/// iter,cost_total,tracking_v,tracking_phi,terminal,tikhonov,sparsity,residual,alpha,sparsity_fraction
void write_optimize_csv(std::ostream& os, const OptimizeReport& r);
void write_optimize_csv(const fs::path& path, const OptimizeReport& r);

/// One raw file per interval (g_0000 ...) plus index.json.
void write_control(const fs::path& dir, const Control& g);
Control read_control(const fs::path& dir, GridPtr grid = nullptr);

/// Phase snapshots every `every` steps (0 disables) into dir/phi_XXXX.
void write_snapshots(const fs::path& dir, const StateTrajectory& traj, int every);

std::string simulate_plot_script();
std::string optimize_plot_script();

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace chb6::io
