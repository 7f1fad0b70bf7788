// Verification battery: each check measures one property of the discrete
// forward map, its tangent/transpose pair or the optimizer and compares it
// against a fixed threshold.
#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "chb6/control.hpp"
#include "chb6/sensitivity.hpp"
#include "chb6/state.hpp"

namespace chb6::verify {

// Thresholds. Each check reads its pass bound from here and nowhere else.
inline constexpr double kTaylorSlopeLo = 1.9;
inline constexpr double kTaylorSlopeHi = 2.1;
inline constexpr double kDualityGap = 1e-9;
inline constexpr double kMutationGap = 1e-3;
inline constexpr double kDenseOracle = 1e-9;
inline constexpr double kGradientFd = 1e-5;
inline constexpr double kGradientFdEps = 1e-4;
inline constexpr double kMassConserved = 1e-11;
inline constexpr double kMassRecursion = 1e-10;
inline constexpr double kEnergySlackRatio = 3.0;
inline constexpr double kOptimalityResidual = 1e-4;
inline constexpr int kOptimalityMaxIter = 500;
inline constexpr double kVariationalViolation = 1e-6;
inline constexpr double kBallTolerance = 1e-8;
inline constexpr double kLipschitzSpread = 2.0;

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

struct VerifyConfig {
  std::uint64_t seed = 20240611;
  int grid_size = 32;
  double length = 6.283185307179586;
  double T = 1.0;
  int n_steps = 50;
  /// Runs the duality check against the corrupted transpose instead; the
  /// battery must then fail.
  bool mutate = false;
  /// Empty runs everything.
  std::vector<std::string> only;
};

/// Check names in battery order.
const std::vector<std::string>& check_names();

/// Runs one named check. Throws std::invalid_argument for unknown names.
CheckResult run_check(const std::string& name, const VerifyConfig& config);

/// Runs the selected checks in order; `on_result` is called after each.
std::vector<CheckResult> run_battery(const VerifyConfig& config,
                                     const std::function<void(const CheckResult&)>& on_result = {});

std::string to_csv(const std::vector<CheckResult>& results);
std::string to_json(const std::vector<CheckResult>& results, const VerifyConfig& config);

// ---------------------------------------------------------------------------
// Building blocks, exposed for the unit tests.

/// Discrete solution-space norm: sqrt(sum_n dt (||v_n||^2 + ||phi_{n+1}||^2)).
double trajectory_distance(const StateTrajectory& a, const StateTrajectory& b);

struct TaylorResult {
  std::vector<double> eps;
  std::vector<double> remainder;
  double slope = 0.0;
};

/// Remainders ||S(g + eps u) - S(g) - eps S'(g) u|| over the ladder and the
/// least-squares slope of log r against log eps. u is normalized to 1.
TaylorResult taylor_test(const Control& g, Control u, const Field& phi0, const PhysParams& params,
                         const std::vector<double>& eps_ladder, const SchemeParams& scheme = {});

/// |<L u, p> - <u, L^T p>| / (||u|| ||p||) with plain spatial inner products.
double duality_gap(const StateTrajectory& traj, const Control& u, const TangentFunctional& p,
                   const SweepOptions& options = {});

struct DenseOracleResult {
  double relative_error = 0.0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Largest dense tangent matrix the oracle agrees to assemble (doubles).
inline constexpr std::size_t kDenseOracleMaxEntries = std::size_t{1} << 24;

/// Assembles the tangent matrix by unit-vector probing and compares the
/// matrix-transpose reduced gradient with the sweep gradient.
DenseOracleResult dense_oracle_compare(const OptimalControlProblem& problem, const Control& g);

/// Linear configuration only (zero potential, constant drag, no source,
/// constant phi0): compares the probed velocity block with the closed-form
/// K^{-1} LP block; returns the max relative entry error.
double linear_block_identity(const GridPtr& grid, const TimeGrid& time, const PhysParams& params,
                             double phi0_value);

/// Solution-difference over control-difference ratios, one per time grid.
std::vector<double> lipschitz_probe(const std::function<Control(const TimeGrid&)>& g1,
                                    const std::function<Control(const TimeGrid&)>& g2, const Field& phi0,
                                    const PhysParams& params, double T, const std::vector<int>& n_steps);

/// Max_n |dQ_n| for Q = E + accumulated dissipation.
double energy_slack(const StateTrajectory& traj);

/// Largest violation of <beta4 g - v^a, h - g> >= 0 over random admissible h,
/// relative to ||h - g|| max(beta4 ||g||, ||v^a||).
double variational_violation(const Control& g, const Control& v_adj, const ControlParams& cp, int samples,
                             std::mt19937_64& rng);

}  // namespace chb6::verify
