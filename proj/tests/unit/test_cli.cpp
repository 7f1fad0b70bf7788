#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "chb6/io.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "helpers.hpp"

using namespace chb6;
using cli::Command;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({
    "grid": {"dim": 2, "sizes": [16, 16], "lengths": [6.283185307179586, 6.283185307179586]},
    "time": {"T": 0.2, "n_steps": 4},
    "physics": {"eta": 1.0, "lambda": 1.0, "nu": 0.5, "sigma": 0.0, "potential": "quartic"},
    "initial": 1.0
  })");
}

std::string error_key(const json& doc, Command c) {
  try {
    cli::parse_config(doc, c);
  } catch (const cli::ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal simulate config") {
  const auto cfg = cli::parse_config(minimal(), Command::Simulate);
  CHECK(cfg.grid->spec().sizes[0] == 16);
  CHECK(cfg.time.n_steps == 4);
  CHECK(cfg.physics.constant_drag());
  CHECK(testing::max_diff(cfg.phi0, Field(cfg.grid, 1.0)) == 0.0);
  CHECK(cfg.g0.norm() == 0.0);
  CHECK(cfg.options.seed == 1);
}

TEST_CASE("errors name the key") {
  json d = minimal();
  d["time"].erase("n_steps");
  CHECK(error_key(d, Command::Simulate) == "time.n_steps");

  d = minimal();
  d["physics"]["etaa"] = 1.0;
  CHECK(error_key(d, Command::Simulate) == "physics.etaa");

  d = minimal();
  d["time"]["T"] = "one";
  CHECK(error_key(d, Command::Simulate) == "time.T");

  d = minimal();
  d["grid"]["sizes"] = json::array({15, 16});
  CHECK(error_key(d, Command::Simulate).rfind("grid", 0) == 0);

  d = minimal();
  CHECK(error_key(d, Command::Optimize) == "control");

  d = minimal();
  d["control"] = {{"M", 1.0}, {"beta", {1.0, 0.0, 0.0, 0.0}}};
  CHECK(error_key(d, Command::Optimize) == "control.beta");
}

TEST_CASE("kappa lists and overrides") {
  json d = minimal();
  d["control"] = {{"M", 1.0}, {"beta", {1.0, 0.0, 0.0, 0.5}}, {"kappa", {0.0, 0.1, 0.3}}};
  d["targets"] = json::object();
  const auto cfg = cli::parse_config(d, Command::SweepKappa);
  CHECK(cfg.kappas == std::vector<double>{0.0, 0.1, 0.3});

  d["control"]["kappa"] = 0.2;
  CHECK(error_key(d, Command::SweepKappa) == "control.kappa");
  d["control"]["kappa"] = -0.2;
  CHECK(error_key(d, Command::Optimize) == "control.kappa");

  cli::Overrides o;
  o.seed = 99;
  o.out = "/tmp/x";
  const auto c2 = cli::parse_config(minimal(), Command::Simulate, o);
  CHECK(c2.options.seed == 99);
  CHECK(c2.options.out == "/tmp/x");
}

TEST_CASE("random initial data depends only on the seed") {
  json d = minimal();
  d["initial"] = {{"type", "random"}, {"rms", 0.3}};
  cli::Overrides o;
  o.seed = 5;
  const auto a = cli::parse_config(d, Command::Simulate, o);
  const auto b = cli::parse_config(d, Command::Simulate, o);
  CHECK(testing::max_diff(a.phi0, b.phi0) == 0.0);
  o.seed = 6;
  const auto c = cli::parse_config(d, Command::Simulate, o);
  CHECK(testing::max_diff(a.phi0, c.phi0) > 0.0);
}

TEST_CASE("output directory resolution") {
  auto cfg = cli::parse_config(minimal(), Command::Simulate);
  ::setenv("CHB6_OUT", "/tmp/chb6_root", 1);
  CHECK(cli::output_dir(cfg, "simulate") == std::filesystem::path("/tmp/chb6_root/simulate"));
  ::unsetenv("CHB6_OUT");
  CHECK(cli::output_dir(cfg, "simulate") == std::filesystem::path("runs/simulate"));
  cfg.options.out = "/tmp/explicit";
  CHECK(cli::output_dir(cfg, "simulate") == std::filesystem::path("/tmp/explicit"));
}

TEST_CASE("simulate writes its outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "chb6_unit_sim";
  std::filesystem::remove_all(dir);
  cli::Overrides o;
  o.out = dir.string();
  json d = minimal();
  d["physics"]["sigma"] = 0.5;
  d["initial"] = 0.4;
  const auto cfg = cli::parse_config(d, Command::Simulate, o);
  CHECK(cli::run_simulate(cfg) == cli::kExitOk);
  for (const char* f : {"series.csv", "plots.gp", "metadata.json"}) CHECK(std::filesystem::exists(dir / f));
  const json meta = json::parse(io::read_text(dir / "metadata.json"));
  CHECK(meta.at("command") == "simulate");

  std::ifstream is(dir / "series.csv");
  std::string line;
  std::getline(is, line);
  double expected = 0.4;
  const double dt = 0.05;
  int n = 0;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string cell;
    for (int i = 0; i < 4; ++i) std::getline(ls, cell, ',');
    CHECK(std::stod(cell) == doctest::Approx(expected).epsilon(1e-13));
    expected *= 1.0 - 0.5 * dt;
    ++n;
  }
  CHECK(n == 5);
}
