// chb6: simulate | optimize | verify | sweep-kappa
#include <CLI11.hpp>

#include <cstdio>
#include <sstream>

#include "chb6/state.hpp"
#include "commands.hpp"
#include "config.hpp"

namespace {

using namespace chb6::cli;

struct Common {
  std::string config;
  std::string out;
  std::int64_t seed = -1;
  int threads = 0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON run configuration");
  sub->add_option("--out", c.out, "output directory (default $CHB6_OUT/<command> or runs/<command>)");
  sub->add_option("--seed", c.seed, "seed for synthetic random fields")->check(CLI::NonNegativeNumber);
  sub->add_option("--threads", c.threads, "worker count (computations run on one thread)")
      ->check(CLI::PositiveNumber);
}

Overrides overrides_of(const Common& c) {
  Overrides o;
  if (c.seed >= 0) o.seed = static_cast<std::uint64_t>(c.seed);
  if (!c.out.empty()) o.out = c.out;
  if (c.threads > 0) o.threads = c.threads;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brinkman / sixth-order Cahn-Hilliard forward solver, adjoint and sparse optimal control"};
  app.require_subcommand(1);

  Common simulate_opts, optimize_opts, sweep_opts, verify_opts;
  CLI::App* simulate = app.add_subcommand("simulate", "run the forward model");
  add_common(simulate, simulate_opts);
  CLI::App* optimize = app.add_subcommand("optimize", "proximal-projected gradient on the control problem");
  add_common(optimize, optimize_opts);
  CLI::App* sweep = app.add_subcommand("sweep-kappa", "optimize for each kappa in control.kappa");
  add_common(sweep, sweep_opts);
  CLI::App* verify = app.add_subcommand("verify", "run the verification battery");
  add_common(verify, verify_opts);
  VerifyFlags vflags;
  verify->add_option("--only", vflags.only, "run only the named checks")->delimiter(',');
  verify->add_flag("--mutate-transpose", vflags.mutate, "corrupt the adjoint transpose (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (simulate->parsed()) {
      return run_simulate(load_config(simulate_opts.config, Command::Simulate, overrides_of(simulate_opts)));
    }
    if (optimize->parsed()) {
      return run_optimize(load_config(optimize_opts.config, Command::Optimize, overrides_of(optimize_opts)));
    }
    if (sweep->parsed()) {
      return run_sweep_kappa(load_config(sweep_opts.config, Command::SweepKappa, overrides_of(sweep_opts)));
    }
    if (verify->parsed()) {
      return run_verify(load_config(verify_opts.config, Command::Verify, overrides_of(verify_opts)), vflags);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const chb6::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return kExitSolver;
  }
  return kExitOk;
}
