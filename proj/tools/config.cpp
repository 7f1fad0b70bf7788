#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "chb6/io.hpp"
#include "chb6/synthetic.hpp"

namespace chb6::cli {

using nlohmann::json;

namespace {

// A JSON object with a path prefix and a closed key set.
class Section {
 public:
  Section(const json* j, std::string path, std::vector<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j_) return;
    if (!j_->is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    for (const auto& [key, value] : j_->items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw ConfigError(key_path(key), "unknown key");
    }
  }

  bool present() const { return j_ != nullptr; }
  bool has(const std::string& key) const { return j_ && j_->contains(key) && !(*j_)[key].is_null(); }
  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& require(const std::string& key) const {
    if (!has(key)) throw ConfigError(key_path(key), "missing required key");
    return (*j_)[key];
  }
  const json* find(const std::string& key) const { return has(key) ? &(*j_)[key] : nullptr; }

  double number(const std::string& key) const { return as_number(require(key), key); }
  double number_or(const std::string& key, double def) const { return has(key) ? number(key) : def; }
  int integer(const std::string& key) const { return as_integer(require(key), key); }
  int integer_or(const std::string& key, int def) const { return has(key) ? integer(key) : def; }
  std::string string(const std::string& key) const {
    const json& v = require(key);
    if (!v.is_string()) throw ConfigError(key_path(key), "expected a string");
    return v.get<std::string>();
  }

  double as_number(const json& v, const std::string& key) const {
    if (!v.is_number()) throw ConfigError(key_path(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(key_path(key), "expected a finite number");
    return x;
  }
  int as_integer(const json& v, const std::string& key) const {
    if (!v.is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
    return v.get<int>();
  }

  Section child(const std::string& key, std::vector<std::string> allowed, bool required) const {
    if (!has(key)) {
      if (required) throw ConfigError(key_path(key), "missing required key");
      return Section(nullptr, key_path(key), {});
    }
    return Section(&(*j_)[key], key_path(key), std::move(allowed));
  }

  const std::string& path() const { return path_; }

 private:
  const json* j_;
  std::string path_;
};

std::mt19937_64 rng_for(std::uint64_t seed, const std::string& key) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : key) h = (h ^ c) * 16777619u;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), h};
  return std::mt19937_64(seq);
}

std::array<int, 3> modes_of(const Section& s, const std::string& key, int dim) {
  const json& v = s.require(key);
  if (!v.is_array() || static_cast<int>(v.size()) != dim)
    throw ConfigError(s.key_path(key), "expected one integer per axis");
  std::array<int, 3> m{0, 0, 0};
  for (int a = 0; a < dim; ++a) m[a] = s.as_integer(v[a], key);
  return m;
}

std::mt19937_64 spec_rng(const Section& s, std::uint64_t global_seed) {
  if (s.has("seed")) {
    const int seed = s.integer("seed");
    if (seed < 0) throw ConfigError(s.key_path("seed"), "seed must be nonnegative");
    return rng_for(static_cast<std::uint64_t>(seed), s.path());
  }
  return rng_for(global_seed, s.path());
}

// {"type": "constant" | "mode" | "random" | "file", ...}
Field parse_field(const Section& parent, const std::string& key, const GridPtr& grid, std::uint64_t seed) {
  const json& raw = parent.require(key);
  if (raw.is_number()) return Field(grid, parent.number(key));
  const Section type_only(&raw, parent.key_path(key),
                          {"type", "value", "offset", "amplitude", "modes", "phase", "rms", "mean", "seed", "path"});
  const std::string type = type_only.string("type");
  if (type == "constant") {
    const Section s(&raw, parent.key_path(key), {"type", "value"});
    return Field(grid, s.number("value"));
  }
  if (type == "mode") {
    const Section s(&raw, parent.key_path(key), {"type", "offset", "amplitude", "modes", "phase"});
    return mode_field(grid, s.number_or("offset", 0.0), s.number("amplitude"), modes_of(s, "modes", grid->dim()),
                      s.number_or("phase", 0.0));
  }
  if (type == "random") {
    const Section s(&raw, parent.key_path(key), {"type", "rms", "mean", "seed"});
    const double rms = s.number("rms");
    if (!(rms >= 0.0)) throw ConfigError(s.key_path("rms"), "rms must be nonnegative");
    auto rng = spec_rng(s, seed);
    return random_smooth_field(grid, rng, rms, s.number_or("mean", 0.0));
  }
  if (type == "file") {
    const Section s(&raw, parent.key_path(key), {"type", "path"});
    try {
      return io::read_field_raw(s.string("path"), grid);
    } catch (const std::exception& e) {
      throw ConfigError(s.key_path("path"), e.what());
    }
  }
  throw ConfigError(type_only.key_path("type"), "unknown field type '" + type + "'");
}

// {"type": "zero" | "constant" | "shear" | "random" | "file", ...}
VectorField parse_vector(const Section& parent, const std::string& key, const GridPtr& grid, std::uint64_t seed) {
  const json& raw = parent.require(key);
  const Section type_only(&raw, parent.key_path(key), {"type", "value", "amplitude", "mode", "rms", "seed", "path"});
  const std::string type = type_only.string("type");
  if (type == "zero") {
    const Section s(&raw, parent.key_path(key), {"type"});
    return VectorField(grid);
  }
  if (type == "constant") {
    const Section s(&raw, parent.key_path(key), {"type", "value"});
    const json& v = s.require("value");
    if (!v.is_array() || static_cast<int>(v.size()) != grid->dim())
      throw ConfigError(s.key_path("value"), "expected one number per axis");
    VectorField out(grid);
    for (int a = 0; a < grid->dim(); ++a) out[a] = Field(grid, s.as_number(v[a], "value"));
    return out;
  }
  if (type == "shear") {
    const Section s(&raw, parent.key_path(key), {"type", "amplitude", "mode"});
    if (grid->dim() < 2) throw ConfigError(s.key_path("type"), "shear needs dim >= 2");
    return shear_mode(grid, s.number("amplitude"), s.integer_or("mode", 1));
  }
  if (type == "random") {
    const Section s(&raw, parent.key_path(key), {"type", "rms", "seed"});
    auto rng = spec_rng(s, seed);
    return random_smooth_vector(grid, rng, s.number("rms"));
  }
  if (type == "file") {
    const Section s(&raw, parent.key_path(key), {"type", "path"});
    try {
      return io::read_vector_field_raw(s.string("path"), grid);
    } catch (const std::exception& e) {
      throw ConfigError(s.key_path("path"), e.what());
    }
  }
  throw ConfigError(type_only.key_path("type"), "unknown vector field type '" + type + "'");
}

GridPtr parse_grid(const Section& root) {
  const Section s = root.child("grid", {"dim", "sizes", "lengths"}, true);
  GridSpec spec;
  spec.dim = s.integer("dim");
  if (spec.dim < 1 || spec.dim > 3) throw ConfigError(s.key_path("dim"), "dim must be 1, 2 or 3");
  const json& sizes = s.require("sizes");
  const json& lengths = s.require("lengths");
  if (!sizes.is_array() || static_cast<int>(sizes.size()) != spec.dim)
    throw ConfigError(s.key_path("sizes"), "expected one size per axis");
  if (!lengths.is_array() || static_cast<int>(lengths.size()) != spec.dim)
    throw ConfigError(s.key_path("lengths"), "expected one length per axis");
  for (int a = 0; a < spec.dim; ++a) {
    spec.sizes[a] = s.as_integer(sizes[a], "sizes");
    spec.lengths[a] = s.as_number(lengths[a], "lengths");
    if (spec.sizes[a] < 4 || spec.sizes[a] % 2 != 0)
      throw ConfigError(s.key_path("sizes"), "sizes must be even and at least 4");
    if (!(spec.lengths[a] > 0.0)) throw ConfigError(s.key_path("lengths"), "lengths must be positive");
  }
  if (spec.points() > kMaxGridPoints) throw ConfigError(s.key_path("sizes"), "grid exceeds the point limit");
  return Grid::make(spec);
}

TimeGrid parse_time(const Section& root) {
  const Section s = root.child("time", {"T", "n_steps"}, true);
  TimeGrid t{s.number("T"), s.integer("n_steps")};
  if (!(t.T > 0.0)) throw ConfigError(s.key_path("T"), "T must be positive");
  if (t.n_steps < 1) throw ConfigError(s.key_path("n_steps"), "n_steps must be at least 1");
  return t;
}

void parse_physics(const Section& root, RunConfig& cfg) {
  const Section s = root.child(
      "physics", {"eta", "lambda", "nu", "sigma", "h", "potential", "stabilization", "picard_tol", "picard_max_iter"},
      false);
  PhysParams& p = cfg.physics;
  p.eta = s.number_or("eta", p.eta);
  if (!(p.eta > 0.0)) throw ConfigError(s.key_path("eta"), "eta must be positive");
  p.nu = s.number_or("nu", p.nu);
  p.sigma = s.number_or("sigma", p.sigma);

  if (const json* lam = s.find("lambda")) {
    if (lam->is_number()) {
      p.lambda = ConstantDrag{s.number("lambda")};
    } else {
      const Section l(lam, s.key_path("lambda"), {"type", "value", "lo", "hi"});
      const std::string type = l.string("type");
      if (type == "constant") {
        p.lambda = ConstantDrag{l.number("value")};
      } else if (type == "smooth") {
        p.lambda = SmoothDrag{l.number("lo"), l.number("hi")};
      } else {
        throw ConfigError(l.key_path("type"), "unknown drag type '" + type + "'");
      }
    }
    if (!(p.drag_min() > 0.0)) throw ConfigError(s.key_path("lambda"), "drag must be positive");
    if (p.drag_min() > p.drag_max()) throw ConfigError(s.key_path("lambda"), "lo must not exceed hi");
  }

  if (const json* h = s.find("h")) {
    const Section hs(h, s.key_path("h"), {"type", "amplitude"});
    const std::string type = hs.string("type");
    if (type == "zero") {
      p.h = ZeroSource{};
    } else if (type == "tanh") {
      p.h = TanhSource{hs.number("amplitude")};
    } else {
      throw ConfigError(hs.key_path("type"), "unknown source type '" + type + "'");
    }
  }

  if (const json* pot = s.find("potential")) {
    if (pot->is_string()) {
      const std::string name = pot->get<std::string>();
      if (name == "quartic") {
        p.potential = Potential::quartic();
      } else if (name == "zero") {
        p.potential = Potential::zero();
      } else {
        throw ConfigError(s.key_path("potential"), "unknown potential '" + name + "'");
      }
    } else if (pot->is_array()) {
      std::vector<double> c;
      for (const auto& x : *pot) c.push_back(s.as_number(x, "potential"));
      p.potential = Potential(std::move(c));
    } else {
      throw ConfigError(s.key_path("potential"), "expected a name or a coefficient list");
    }
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.key_path("potential"), e.what());
  }

  if (s.has("stabilization")) {
    const double ks = s.number("stabilization");
    if (!(ks >= 0.0)) throw ConfigError(s.key_path("stabilization"), "stabilization must be nonnegative");
    cfg.scheme.stabilization = ks;
  }
  cfg.scheme.picard_tol = s.number_or("picard_tol", cfg.scheme.picard_tol);
  if (!(cfg.scheme.picard_tol > 0.0)) throw ConfigError(s.key_path("picard_tol"), "must be positive");
  cfg.scheme.picard_max_iter = s.integer_or("picard_max_iter", cfg.scheme.picard_max_iter);
  if (cfg.scheme.picard_max_iter < 1) throw ConfigError(s.key_path("picard_max_iter"), "must be at least 1");
}

void parse_options(const Section& root, const Overrides& ov, Options& o) {
  const Section s = root.child(
      "options", {"seed", "out", "snapshot_every", "threads", "tol", "max_iter", "max_halvings", "alpha0"}, false);
  if (s.has("seed")) {
    const int seed = s.integer("seed");
    if (seed < 0) throw ConfigError(s.key_path("seed"), "seed must be nonnegative");
    o.seed = static_cast<std::uint64_t>(seed);
  }
  if (s.has("out")) o.out = s.string("out");
  o.snapshot_every = s.integer_or("snapshot_every", o.snapshot_every);
  if (o.snapshot_every < 0) throw ConfigError(s.key_path("snapshot_every"), "must be nonnegative");
  o.threads = s.integer_or("threads", o.threads);
  o.tol = s.number_or("tol", o.tol);
  if (!(o.tol > 0.0)) throw ConfigError(s.key_path("tol"), "must be positive");
  o.max_iter = s.integer_or("max_iter", o.max_iter);
  if (o.max_iter < 0) throw ConfigError(s.key_path("max_iter"), "must be nonnegative");
  o.max_halvings = s.integer_or("max_halvings", o.max_halvings);
  if (o.max_halvings < 0) throw ConfigError(s.key_path("max_halvings"), "must be nonnegative");
  o.alpha0 = s.number_or("alpha0", o.alpha0);
  if (!(o.alpha0 >= 0.0)) throw ConfigError(s.key_path("alpha0"), "must be nonnegative");

  if (ov.seed) o.seed = *ov.seed;
  if (ov.out) o.out = *ov.out;
  if (ov.threads) o.threads = *ov.threads;
  if (o.threads < 1) throw ConfigError("options.threads", "threads must be at least 1");
}

void parse_control(const Section& root, RunConfig& cfg, bool required) {
  const Section s = root.child("control", {"M", "beta", "kappa", "initial"}, required);
  cfg.has_control = s.present();
  ControlParams& cp = cfg.control;
  if (s.present()) {
    cp.M = s.number_or("M", cp.M);
    if (!(cp.M > 0.0)) throw ConfigError(s.key_path("M"), "M must be positive");
    if (s.has("beta")) {
      const json& b = s.require("beta");
      if (!b.is_array() || b.size() != 4) throw ConfigError(s.key_path("beta"), "expected four weights");
      for (int i = 0; i < 4; ++i) {
        cp.beta[i] = s.as_number(b[i], "beta");
        if (!(cp.beta[i] >= 0.0)) throw ConfigError(s.key_path("beta"), "weights must be nonnegative");
      }
    }
    if (required && !(cp.beta[3] > 0.0)) throw ConfigError(s.key_path("beta"), "beta4 must be positive");
    if (const json* k = s.find("kappa")) {
      if (k->is_array()) {
        if (k->empty()) throw ConfigError(s.key_path("kappa"), "kappa list is empty");
        for (const auto& x : *k) cfg.kappas.push_back(s.as_number(x, "kappa"));
      } else {
        cfg.kappas.push_back(s.number("kappa"));
      }
      for (double x : cfg.kappas)
        if (!(x >= 0.0)) throw ConfigError(s.key_path("kappa"), "kappa must be nonnegative");
      cp.kappa = cfg.kappas.front();
    }
  }
  if (cfg.kappas.empty()) cfg.kappas.push_back(cp.kappa);

  cfg.g0 = Control(cfg.grid, cfg.time);
  if (s.has("initial")) {
    const Section init(&s.require("initial"), s.key_path("initial"),
                       {"type", "value", "amplitude", "mode", "rms", "seed", "path"});
    if (init.string("type") == "control") {
      const Section c(&s.require("initial"), s.key_path("initial"), {"type", "path"});
      try {
        cfg.g0 = io::read_control(c.string("path"), cfg.grid);
      } catch (const std::exception& e) {
        throw ConfigError(c.key_path("path"), e.what());
      }
      if (!(cfg.g0.time() == cfg.time)) throw ConfigError(c.key_path("path"), "control time grid differs");
    } else {
      const VectorField v = parse_vector(s, "initial", cfg.grid, cfg.options.seed);
      cfg.g0 = Control(cfg.time, std::vector<VectorField>(cfg.time.n_steps, v));
    }
  }
}

void parse_targets(const Section& root, RunConfig& cfg, bool required) {
  const Section s = root.child("targets", {"v_Q", "phi_Q", "phi_T"}, required);
  cfg.has_targets = s.present();
  cfg.targets = Targets::zero(cfg.grid, cfg.time);
  if (!s.present()) return;
  const std::uint64_t seed = cfg.options.seed;
  if (s.has("v_Q")) {
    const VectorField v = parse_vector(s, "v_Q", cfg.grid, seed);
    for (auto& x : cfg.targets.v_Q) x = v;
  }
  if (s.has("phi_Q")) {
    const Field f = parse_field(s, "phi_Q", cfg.grid, seed);
    for (auto& x : cfg.targets.phi_Q) x = f;
  }
  if (s.has("phi_T")) cfg.targets.phi_T = parse_field(s, "phi_T", cfg.grid, seed);
}

void parse_verify(const Section& root, RunConfig& cfg, const Overrides& ov, bool seed_given) {
  const Section s = root.child("verify", {"grid_size", "T", "n_steps"}, false);
  verify::VerifyConfig& v = cfg.verify;
  v.grid_size = s.integer_or("grid_size", v.grid_size);
  if (v.grid_size < 8 || v.grid_size % 2 != 0) throw ConfigError(s.key_path("grid_size"), "must be even and >= 8");
  v.T = s.number_or("T", v.T);
  if (!(v.T > 0.0)) throw ConfigError(s.key_path("T"), "T must be positive");
  v.n_steps = s.integer_or("n_steps", v.n_steps);
  if (v.n_steps < 1) throw ConfigError(s.key_path("n_steps"), "must be at least 1");
  if (seed_given || ov.seed) v.seed = cfg.options.seed;
}

}  // namespace

RunConfig parse_config(const json& doc, Command command, const Overrides& overrides) {
  RunConfig cfg;
  cfg.source = doc;
  const Section root(&cfg.source, "",
                     {"grid", "time", "physics", "initial", "control", "targets", "options", "verify"});
  parse_options(root, overrides, cfg.options);
  if (overrides.seed) cfg.source["options"]["seed"] = *overrides.seed;
  if (overrides.out) cfg.source["options"]["out"] = *overrides.out;
  if (overrides.threads) cfg.source["options"]["threads"] = *overrides.threads;

  if (command == Command::Verify) {
    const bool seed_given = doc.is_object() && doc.contains("options") && doc["options"].contains("seed");
    parse_verify(root, cfg, overrides, seed_given);
    return cfg;
  }

  cfg.grid = parse_grid(root);
  cfg.time = parse_time(root);
  parse_physics(root, cfg);
  cfg.phi0 = parse_field(root, "initial", cfg.grid, cfg.options.seed);
  const bool optimizing = command == Command::Optimize || command == Command::SweepKappa;
  parse_control(root, cfg, optimizing);
  parse_targets(root, cfg, optimizing);
  if (command == Command::SweepKappa && cfg.kappas.size() < 2)
    throw ConfigError("control.kappa", "sweep-kappa needs a list of at least two values");
  return cfg;
}

RunConfig load_config(const std::string& path, Command command, const Overrides& overrides) {
  json doc = json::object();
  if (!path.empty()) {
    std::ifstream is(path);
    if (!is) throw ConfigError("--config", "cannot open '" + path + "'");
    try {
      doc = json::parse(is);
    } catch (const json::parse_error& e) {
      throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
  }
  return parse_config(doc, command, overrides);
}

}  // namespace chb6::cli
