#pragma once

// Two-stage constrained particle swarm over topology-masked gain weights.
// Stage I drives the semistabilizability rank deficit h1 to zero; Stage II
// minimizes the cost under the feasibility rules.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lqs/matcore.hpp"
#include "lqs/netmodel.hpp"
#include "lqs/semistab.hpp"

namespace lqs {

enum class OmegaSet {
  Unit,  ///< r ~ U[0, 1]
  Grid,  ///< r uniform over {0.01k : k = 1..100}
};

enum class PsoMode {
  Default,      ///< h2 = psd test with tolerance, plus the closed-loop spectrum
  Strict,  ///< h2 = strict Cholesky indicator, no warm start
};

struct StageExit {
  double spread = 1e-6;  ///< stop when every particle is this close to the best
  int stagnation = 0;    ///< stop after this many iterations without improvement; 0 = off
};

struct PsoConfig {
  int swarmSize = 30;
  int maxIters = 100;  ///< per stage
  double a = 0.7298;
  double b1 = 1.4962;
  double b2 = 1.4962;
  double theta = 100.0;
  double eps = 1e-6;
  OmegaSet omega = OmegaSet::Unit;
  std::uint64_t seed = 0;
  StageExit exit;
  PsoMode mode = PsoMode::Default;
  /// Warm-start particle from feasible_seed_gain; unset = on unless strict.
  std::optional<bool> seedParticle;
  double seedScale = -1.0;  ///< c_j used for the warm start
  int workers = 1;
  FrequencyOptions frequency;
  ToleranceConfig tol;

  bool seeding_enabled() const {
    return seedParticle.value_or(mode != PsoMode::Strict);
  }
  /// Throws on invalid settings; returns advisory warnings.
  std::vector<std::string> validate() const;
};

/// Free gain coordinates: one per gain-pattern pair (row-major over (i, j)),
/// each expanded into its q x q block elements (row-major).
class GainCoding {
 public:
  explicit GainCoding(const NetworkTopology& topology);

  int size() const { return static_cast<int>(pairs_.size()) * q_ * q_; }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

  Vector encode(const WeightSet& gains) const;
  WeightSet decode(const Vector& position) const;
  /// decode followed by assemble_system.
  Matrix gain_matrix(const Vector& position) const;

 private:
  NetworkTopology topology_;
  int q_;
  std::vector<std::pair<int, int>> pairs_;
};

struct FeasibilityReport {
  int h1 = 0;                  ///< semistabilizability rank deficit
  int h2 = 0;                  ///< definiteness indicator
  double h3residual = 0.0;     ///< relative residual of ÃS + SÃ^T + DD^T = 0
  double s = 0.0;              ///< violation sum
  double J = std::numeric_limits<double>::infinity();
  double eps = 1e-6;

  bool feasible() const { return h1 == 0 && h2 == 0 && h3residual <= eps; }
};

/// Σ max(0, |h| - ε) over {h1, h2, h3residual}.
double violation_sum(int h1, int h2, double h3residual, double eps);

FeasibilityReport evaluate_constraints(const Vector& position,
                                       const NetworkProblem& problem,
                                       const GainCoding& coding,
                                       const PsoConfig& config);

/// True when the challenger r2 should replace the incumbent r1.
/// Both feasible: lower J; both infeasible: lower s; mixed: the feasible one.
/// Ties keep the incumbent.
bool challenger_wins(const FeasibilityReport& r1, const FeasibilityReport& r2);

enum class Preference { First, Second };
Preference compare_candidates(const FeasibilityReport& r1,
                              const FeasibilityReport& r2);

enum class Stage { One = 1, Two = 2 };

/// Stage-aware replacement rule. Stage I only looks at h1.
bool stage_prefers(Stage stage, const FeasibilityReport& incumbent,
                   const FeasibilityReport& challenger);

struct Particle {
  Vector position;
  Vector velocity;
  FeasibilityReport report;
  Vector bestPosition;  ///< p_{1,k}
  FeasibilityReport bestReport;
};

struct SwarmState {
  std::vector<Particle> particles;
  int globalBest = 0;  ///< index of the particle whose personal best is p_2
  int iteration = 0;   ///< completed update steps

  const Vector& best_position() const { return particles[globalBest].bestPosition; }
  const FeasibilityReport& best_report() const {
    return particles[globalBest].bestReport;
  }
  /// max_k ||x_k - p_2||_inf.
  double spread() const;
};

using Evaluator = std::function<FeasibilityReport(const Vector&)>;

/// Counter-based uniform draws: the value depends only on the arguments.
double hashed_uniform(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t a, std::uint64_t b);

/// r1, r2 for one particle at one iteration, drawn from the configured Ω.
std::pair<double, double> swarm_coefficients(const PsoConfig& config,
                                             int iteration, int particle);

/// Evaluates every position, in parallel when workers > 1. Results are
/// stored by index, so the outcome does not depend on scheduling.
std::vector<FeasibilityReport> evaluate_batch(const std::vector<Vector>& positions,
                                              const Evaluator& eval, int workers);

/// Initial swarm: U(-θ, θ) positions, zero velocities, optional warm start in
/// slot 0, evaluated and ranked for `stage`.
SwarmState initialize_swarm(int dimension, const Evaluator& eval,
                            const PsoConfig& config, Stage stage,
                            const std::optional<Vector>& warmStart = std::nullopt);

/// The update equations for one particle with given coefficients:
/// v' = a v + b1 r1 (p1 - x) + b2 r2 (p2 - x), x' = x + v'. Returns (x', v').
std::pair<Vector, Vector> particle_update(const Vector& x, const Vector& v, const Vector& p1,
                                          const Vector& p2, double r1, double r2,
                                          const PsoConfig& config);

/// One update: v <- a v + b1 r1 (p1 - x) + b2 r2 (p2 - x), x <- x + v, then
/// evaluation and best bookkeeping under the stage's comparison rule.
void swarm_step(SwarmState& state, const Evaluator& eval, const PsoConfig& config,
                Stage stage);

/// Re-selects the global best from the personal bests under `stage`.
void rerank(SwarmState& state, Stage stage);

struct TraceRecord {
  int iteration = 0;
  int stage = 1;
  double bestJ = std::numeric_limits<double>::infinity();
  double bestS = 0.0;
  double spread = 0.0;
};

struct OptimizeResult {
  bool feasible = false;  ///< false = infeasible run, best is least violating
  Matrix bestGain;
  Vector bestPosition;
  FeasibilityReport bestReport;
  std::vector<TraceRecord> trace;
  int stageOneIterations = 0;
  int stageTwoIterations = 0;
  std::vector<std::string> warnings;
};

OptimizeResult optimize(const NetworkProblem& problem, const PsoConfig& config);

}  // namespace lqs
