// Run configuration: one JSON document, validated up front. Unknown keys are
// errors, and every error names the offending key.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chb6/control.hpp"
#include "chb6/state.hpp"
#include "chb6/verify.hpp"

namespace chb6::cli {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error("config: " + message + " (key '" + key + "')"), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct Options {
  std::uint64_t seed = 1;
  std::string out;  // empty: derived from CHB6_OUT / the command name
  int snapshot_every = 0;
  int threads = 1;
  double tol = 1e-4;
  int max_iter = 500;
  int max_halvings = 40;
  double alpha0 = 0.0;
};

struct RunConfig {
  nlohmann::json source;  // the document as given (after flag overrides)

  GridPtr grid;
  TimeGrid time;
  PhysParams physics;
  SchemeParams scheme;
  Field phi0;

  bool has_control = false;
  ControlParams control;
  std::vector<double> kappas;  // more than one entry: kappa sweep
  Control g0;

  bool has_targets = false;
  Targets targets;

  Options options;
  verify::VerifyConfig verify;
};

enum class Command { Simulate, Optimize, Verify, SweepKappa };

/// Flag overrides applied on top of the document before validation.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

/// Parses and validates everything the command needs. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& doc, Command command, const Overrides& overrides = {});
RunConfig load_config(const std::string& path, Command command, const Overrides& overrides = {});

}  // namespace chb6::cli
