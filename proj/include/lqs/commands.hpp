#pragma once

// Command implementations behind the `lqs` executable. Each returns a
// RunResult; nothing is printed here.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lqs/problem_io.hpp"
#include "lqs/swarm.hpp"

namespace lqs {

enum class ToleranceProfile { Default, Printed };

struct CommandOptions {
  std::string problemPath;
  std::string caseName;  ///< reproduce only
  std::optional<std::uint64_t> seed;
  std::optional<int> particles;
  std::optional<int> iterations;
  PsoConfig pso;  ///< swarmSize / maxIters are taken from the two fields above
  ToleranceProfile profile = ToleranceProfile::Default;
  double T = 50.0;
  double dt = 1e-3;
  int sampleEvery = 1;     ///< simulate: keep every k-th state
  bool stochastic = false; ///< simulate: Euler-Maruyama instead of the exact propagator
  int paths = 0;           ///< simulate: Monte Carlo cost paths (0 = skip)
  double burnFraction = 0.5;
  bool runOptimizer = false;  ///< reproduce: also run the swarm
};

/// Bundled case names accepted by `reproduce`.
const std::vector<std::string>& benchmark_cases();
std::string benchmark_path(const std::string& caseName);

/// check | evaluate | optimize | simulate | reproduce.
RunResult run_command(const std::string& command, const CommandOptions& options);

}  // namespace lqs
