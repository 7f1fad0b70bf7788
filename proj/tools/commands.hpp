#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace chb6::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitOptimizer = 4,
};

struct VerifyFlags {
  std::vector<std::string> only;
  bool mutate = false;
};

/// --out, else options.out, else $CHB6_OUT/<command>, else runs/<command>.
std::filesystem::path output_dir(const RunConfig& cfg, const std::string& command);

int run_simulate(const RunConfig& cfg);
int run_optimize(const RunConfig& cfg);
int run_sweep_kappa(const RunConfig& cfg);
int run_verify(const RunConfig& cfg, const VerifyFlags& flags);

}  // namespace chb6::cli
