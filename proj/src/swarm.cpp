#include "lqs/swarm.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <tuple>

#include "lqs/error.hpp"
#include "lqs/perf.hpp"

namespace lqs {

namespace {

constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamR1 = 2;
constexpr std::uint64_t kStreamR2 = 3;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

FeasibilityReport hopeless(int dim, double eps) {
  FeasibilityReport r;
  r.eps = eps;
  r.h1 = dim;
  r.h2 = dim;
  r.h3residual = std::numeric_limits<double>::infinity();
  r.s = std::numeric_limits<double>::infinity();
  return r;
}

// Modes that keep lim e^{Ãt} from existing.
int non_semistable_modes(const StabilityVerdict& v, Eigen::Index n) {
  const SpectralReport& s = v.spectrum;
  int bad = s.count(EigenClass::Unstable) + s.count(EigenClass::PureImaginary);
  const int nullity = static_cast<int>(n) - s.rank;
  if (!s.zeroSemisimple || s.count(EigenClass::Zero) != nullity) ++bad;
  return bad;
}

}  // namespace

std::vector<std::string> PsoConfig::validate() const {
  if (swarmSize < 2) throw Error(ErrorKind::InvalidArgument, "swarm size must be >= 2");
  if (maxIters < 0) throw Error(ErrorKind::InvalidArgument, "iterations must be >= 0");
  if (!(theta > 0.0)) throw Error(ErrorKind::InvalidArgument, "theta must be > 0");
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be > 0");
  if (workers < 0) throw Error(ErrorKind::InvalidArgument, "workers must be >= 0");
  if (exit.stagnation < 0 || !(exit.spread >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "invalid stage exit settings");
  }
  if (frequency.mode == FrequencyMode::Grid && frequency.frequencies.empty()) {
    throw Error(ErrorKind::InvalidArgument, "grid frequency mode needs frequencies");
  }
  if (seeding_enabled() && seedScale == 0.0) {
    throw Error(ErrorKind::InvalidArgument, "warm-start scale must be nonzero");
  }
  tol.validate();
  std::vector<std::string> warnings;
  if (!(a > 0.0 && a < 1.0)) {
    warnings.push_back("inertia weight a outside (0, 1); the swarm may diverge");
  }
  return warnings;
}

GainCoding::GainCoding(const NetworkTopology& topology)
    : topology_(topology), q_(topology.block_dim()) {
  for (int i = 0; i < topology.nodes(); ++i) {
    for (int j = 0; j < topology.nodes(); ++j) {
      if (topology.in_gain_pattern(i, j)) pairs_.emplace_back(i, j);
    }
  }
}

Vector GainCoding::encode(const WeightSet& gains) const {
  if (gains.block_dim() != q_) {
    throw Error(ErrorKind::InvalidArgument, "encode: block size mismatch");
  }
  Vector x = Vector::Zero(size());
  Eigen::Index at = 0;
  for (const auto& [i, j] : pairs_) {
    const Matrix* w = gains.find(i, j);
    for (int r = 0; r < q_; ++r) {
      for (int c = 0; c < q_; ++c) x(at++) = w ? (*w)(r, c) : 0.0;
    }
  }
  return x;
}

WeightSet GainCoding::decode(const Vector& position) const {
  if (position.size() != size()) {
    throw Error(ErrorKind::InvalidArgument,
                "decode: expected " + std::to_string(size()) + " coordinates, got " +
                    std::to_string(position.size()));
  }
  WeightSet out(WeightKind::Gain, q_);
  Eigen::Index at = 0;
  for (const auto& [i, j] : pairs_) {
    Matrix block(q_, q_);
    for (int r = 0; r < q_; ++r) {
      for (int c = 0; c < q_; ++c) block(r, c) = position(at++);
    }
    out.set(i, j, std::move(block));
  }
  return out;
}

Matrix GainCoding::gain_matrix(const Vector& position) const {
  return assemble_system(topology_, decode(position));
}

double violation_sum(int h1, int h2, double h3residual, double eps) {
  auto term = [eps](double h) { return std::max(0.0, std::abs(h) - eps); };
  return term(h1) + term(h2) + term(h3residual);
}

FeasibilityReport evaluate_constraints(const Vector& position,
                                       const NetworkProblem& problem,
                                       const GainCoding& coding,
                                       const PsoConfig& config) {
  const int nq = problem.topology.state_dim();
  if (!position.allFinite()) return hopeless(nq, config.eps);
  const Matrix gain = coding.gain_matrix(position);
  const Matrix at = problem.plant + gain;
  const Matrix ddt = problem.noise * problem.noise.transpose();
  const ToleranceConfig& tol = config.tol;

  FeasibilityReport r;
  r.eps = config.eps;
  try {
    r.h1 = semistabilizability_deficit(at, problem.noise, tol, config.frequency);

    LyapunovLeastSquares ls = lyapunov_least_squares(at, ddt, tol);
    r.h3residual = ls.residual;
    Matrix s = std::move(ls.solution);
    const StabilityVerdict verdict = is_semistable(at, tol);
    if (verdict.semistable && verdict.spectrum.rank < nq) {
      const Matrix proj = limit_projector(at, tol);
      s -= proj * s * proj.transpose();
    }
    s = 0.5 * (s + s.transpose()).eval();

    if (!s.allFinite()) {
      r.h2 = nq;
    } else if (config.mode == PsoMode::Strict) {
      r.h2 = definiteness_test(s, Definiteness::PositiveDefinite, tol).indicator;
    } else {
      r.h2 = definiteness_test(s, Definiteness::PositiveSemidefinite, tol).indicator +
             non_semistable_modes(verdict, nq);
    }

    if (r.feasible()) {
      const CostReport cost =
          lqs_cost(SystemRealization::close(problem, gain), tol);
      if (cost.feasible) {
        r.J = cost.J;
      } else {
        // The constraints passed at tolerance but the cost route refused.
        r.h2 += 1;
      }
    }
  } catch (const Error&) {
    return hopeless(nq, config.eps);
  }
  r.s = violation_sum(r.h1, r.h2, r.h3residual, r.eps);
  return r;
}

bool challenger_wins(const FeasibilityReport& r1, const FeasibilityReport& r2) {
  const bool f1 = r1.feasible();
  const bool f2 = r2.feasible();
  if (f1 && f2) return r2.J < r1.J;
  if (!f1 && !f2) return r2.s < r1.s;
  return f2;
}

Preference compare_candidates(const FeasibilityReport& r1,
                              const FeasibilityReport& r2) {
  return challenger_wins(r1, r2) ? Preference::Second : Preference::First;
}

bool stage_prefers(Stage stage, const FeasibilityReport& incumbent,
                   const FeasibilityReport& challenger) {
  if (stage == Stage::Two) return challenger_wins(incumbent, challenger);
  return challenger.h1 < incumbent.h1;
}

double SwarmState::spread() const {
  const Vector& g = best_position();
  double out = 0.0;
  for (const Particle& p : particles) {
    if (p.position.size() == 0) continue;
    out = std::max(out, (p.position - g).cwiseAbs().maxCoeff());
  }
  return out;
}

double hashed_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t a,
                      std::uint64_t b) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::pair<double, double> swarm_coefficients(const PsoConfig& config, int iteration,
                                             int particle) {
  const auto it = static_cast<std::uint64_t>(iteration);
  const auto k = static_cast<std::uint64_t>(particle);
  double r1 = hashed_uniform(config.seed, kStreamR1, it, k);
  double r2 = hashed_uniform(config.seed, kStreamR2, it, k);
  if (config.omega == OmegaSet::Grid) {
    auto snap = [](double u) {
      return 0.01 * static_cast<double>(std::min(100, 1 + static_cast<int>(u * 100.0)));
    };
    r1 = snap(r1);
    r2 = snap(r2);
  }
  return {r1, r2};
}

std::vector<FeasibilityReport> evaluate_batch(const std::vector<Vector>& positions,
                                              const Evaluator& eval, int workers) {
  const int count = static_cast<int>(positions.size());
  std::vector<FeasibilityReport> out(positions.size());
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) out[i] = eval(positions[i]);
    return out;
  }
  std::vector<std::exception_ptr> failures(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += workers) out[i] = eval(positions[i]);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return out;
}

void rerank(SwarmState& state, Stage stage) {
  state.globalBest = 0;
  for (int k = 1; k < static_cast<int>(state.particles.size()); ++k) {
    if (stage_prefers(stage, state.best_report(), state.particles[k].bestReport)) {
      state.globalBest = k;
    }
  }
}

SwarmState initialize_swarm(int dimension, const Evaluator& eval,
                            const PsoConfig& config, Stage stage,
                            const std::optional<Vector>& warmStart) {
  SwarmState state;
  state.particles.resize(config.swarmSize);
  std::vector<Vector> positions(config.swarmSize);
  for (int k = 0; k < config.swarmSize; ++k) {
    Vector x(dimension);
    for (int d = 0; d < dimension; ++d) {
      const double u = hashed_uniform(config.seed, kStreamInit,
                                      static_cast<std::uint64_t>(k),
                                      static_cast<std::uint64_t>(d));
      x(d) = config.theta * (2.0 * u - 1.0);
    }
    positions[k] = std::move(x);
  }
  if (warmStart) {
    if (warmStart->size() != dimension) {
      throw Error(ErrorKind::InvalidArgument, "warm start has the wrong dimension");
    }
    positions[0] = *warmStart;
  }
  const std::vector<FeasibilityReport> reports =
      evaluate_batch(positions, eval, config.workers);
  for (int k = 0; k < config.swarmSize; ++k) {
    Particle& p = state.particles[k];
    p.position = positions[k];
    p.velocity = Vector::Zero(dimension);
    p.report = reports[k];
    p.bestPosition = p.position;
    p.bestReport = p.report;
  }
  rerank(state, stage);
  return state;
}

std::pair<Vector, Vector> particle_update(const Vector& x, const Vector& v, const Vector& p1,
                                          const Vector& p2, double r1, double r2,
                                          const PsoConfig& config) {
  Vector nv = config.a * v + config.b1 * r1 * (p1 - x) + config.b2 * r2 * (p2 - x);
  Vector nx = x + nv;
  return {std::move(nx), std::move(nv)};
}

void swarm_step(SwarmState& state, const Evaluator& eval, const PsoConfig& config,
                Stage stage) {
  const int count = static_cast<int>(state.particles.size());
  const Vector p2 = state.best_position();
  std::vector<Vector> positions(count);
  for (int k = 0; k < count; ++k) {
    Particle& p = state.particles[k];
    const auto [r1, r2] = swarm_coefficients(config, state.iteration, k);
    std::tie(p.position, p.velocity) =
        particle_update(p.position, p.velocity, p.bestPosition, p2, r1, r2, config);
    positions[k] = p.position;
  }
  const std::vector<FeasibilityReport> reports =
      evaluate_batch(positions, eval, config.workers);
  // Sequential reduction in particle order keeps the outcome deterministic.
  for (int k = 0; k < count; ++k) {
    Particle& p = state.particles[k];
    p.report = reports[k];
    if (stage_prefers(stage, p.bestReport, p.report)) {
      p.bestPosition = p.position;
      p.bestReport = p.report;
    }
    if (k != state.globalBest &&
        stage_prefers(stage, state.best_report(), p.bestReport)) {
      state.globalBest = k;
    }
  }
  ++state.iteration;
}

OptimizeResult optimize(const NetworkProblem& problem, const PsoConfig& config) {
  OptimizeResult result;
  result.warnings = config.validate();
  const GainCoding coding(problem.topology);
  const Evaluator eval = [&](const Vector& x) {
    return evaluate_constraints(x, problem, coding, config);
  };

  std::optional<Vector> warm;
  if (config.seeding_enabled()) {
    const std::vector<double> c(problem.topology.nodes(), config.seedScale);
    warm = coding.encode(feasible_seed_gain(problem.topology, problem.plantWeights,
                                            problem.noiseWeights, c));
  }

  auto record = [&](const SwarmState& st, Stage stage) {
    TraceRecord t;
    t.iteration = st.iteration;
    t.stage = static_cast<int>(stage);
    t.bestJ = st.best_report().J;
    t.bestS = st.best_report().s;
    t.spread = st.spread();
    result.trace.push_back(t);
  };

  // Runs one stage until `done` holds, the swarm collapses, the best stalls,
  // or the budget is spent. Returns the number of update steps taken.
  auto run_stage = [&](SwarmState& st, Stage stage, auto done) {
    int steps = 0;
    int stalled = 0;
    while (!done(st) && steps < config.maxIters) {
      const FeasibilityReport before = st.best_report();
      swarm_step(st, eval, config, stage);
      ++steps;
      record(st, stage);
      if (stage_prefers(stage, before, st.best_report())) {
        stalled = 0;
      } else {
        ++stalled;
      }
      if (st.spread() < config.exit.spread) break;
      if (config.exit.stagnation > 0 && stalled >= config.exit.stagnation) break;
    }
    return steps;
  };

  SwarmState state = initialize_swarm(coding.size(), eval, config, Stage::One, warm);
  result.stageOneIterations = run_stage(
      state, Stage::One, [](const SwarmState& st) { return st.best_report().h1 == 0; });

  if (state.best_report().h1 == 0) {
    rerank(state, Stage::Two);
    result.stageTwoIterations =
        run_stage(state, Stage::Two, [](const SwarmState&) { return false; });
  }

  result.bestPosition = state.best_position();
  result.bestReport = state.best_report();
  result.bestGain = coding.gain_matrix(result.bestPosition);
  result.feasible = result.bestReport.feasible();
  return result;
}

}  // namespace lqs
