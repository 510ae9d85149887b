#include "lqs/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>

#include "lqs/error.hpp"
#include "lqs/perf.hpp"
#include "lqs/semistab.hpp"
#include "lqs/sim.hpp"

#ifndef LQS_BENCHMARK_DIR
#define LQS_BENCHMARK_DIR "benchmarks"
#endif

namespace lqs {

using nlohmann::json;

namespace {

const char* class_name(EigenClass c) {
  switch (c) {
    case EigenClass::StrictlyStable: return "strictly-stable";
    case EigenClass::Zero: return "zero";
    case EigenClass::PureImaginary: return "pure-imaginary";
    case EigenClass::Unstable: return "unstable";
  }
  return "?";
}

// JSON cannot hold inf; keep the information explicit instead of a bare null.
json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json spectrum_json(const SpectralReport& s) {
  json eig = json::array();
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
    eig.push_back({{"re", s.eigenvalues[i].real()},
                   {"im", s.eigenvalues[i].imag()},
                   {"class", class_name(s.classes[i])}});
  }
  return {{"eigenvalues", eig}, {"rank", s.rank}, {"zeroSemisimple", s.zeroSemisimple}};
}

json characterize(const Matrix& a, const Matrix& d, const ToleranceConfig& tol) {
  const StabilityVerdict v = is_semistable(a, tol);
  json out;
  out["semistable"] = v.semistable;
  out["spectrum"] = spectrum_json(v.spectrum);
  out["semistabilizable"] = is_semistabilizable(a, d, tol);
  out["semicontrollable"] = is_semicontrollable(a, d, tol);
  out["completelyUnstabilizable"] = is_completely_unstabilizable(a, d, tol);
  return out;
}

json cost_json(const CostReport& c) {
  json out;
  out["J"] = finite_or_null(c.J);
  out["feasible"] = c.feasible;
  out["diagnostics"] = {{"semistable", c.diagnostics.semistable},
                        {"semistabilizable", c.diagnostics.semistabilizable},
                        {"rangeContained", c.diagnostics.rangeContained},
                        {"lyapunovResidual", finite_or_null(c.diagnostics.lyapunovResidual)},
                        {"reason", c.diagnostics.reason}};
  if (c.W.size() > 0) out["W"] = matrix_to_json(c.W);
  if (c.xInf.size() > 0) out["xInf"] = vector_to_json(c.xInf);
  return out;
}

json report_json(const FeasibilityReport& r) {
  return {{"h1", r.h1},
          {"h2", r.h2},
          {"h3residual", finite_or_null(r.h3residual)},
          {"s", finite_or_null(r.s)},
          {"J", finite_or_null(r.J)},
          {"feasible", r.feasible()}};
}

ToleranceConfig profile_tolerances(ToleranceProfile p) {
  return p == ToleranceProfile::Printed ? ToleranceConfig::printed_precision()
                                        : ToleranceConfig{};
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

const Matrix& require_gain(const ProblemFile& pf, const char* command) {
  if (!pf.K) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(command) + ": the problem file has no gain K");
  }
  return *pf.K;
}

// Constraint report for an assembled gain, when it maps onto gain weights.
std::optional<FeasibilityReport> constraints_for(const NetworkProblem& problem,
                                                 const Matrix& gain,
                                                 const PsoConfig& cfg) {
  try {
    const GainCoding coding(problem.topology);
    const Vector x = coding.encode(gain_weights_from_matrix(problem.topology, gain));
    return evaluate_constraints(x, problem, coding, cfg);
  } catch (const Error&) {
    return std::nullopt;
  }
}

PsoConfig swarm_config(const CommandOptions& o, const ToleranceConfig& tol,
                       std::uint64_t seed, int defaultParticles, int defaultIters) {
  PsoConfig cfg = o.pso;
  cfg.swarmSize = o.particles.value_or(defaultParticles);
  cfg.maxIters = o.iterations.value_or(defaultIters);
  cfg.seed = seed;
  cfg.tol = tol;
  return cfg;
}

json trace_json(const std::vector<TraceRecord>& trace) {
  json out = json::array();
  for (const TraceRecord& t : trace) {
    out.push_back({{"iteration", t.iteration},
                   {"stage", t.stage},
                   {"bestJ", finite_or_null(t.bestJ)},
                   {"bestS", finite_or_null(t.bestS)},
                   {"spread", t.spread}});
  }
  return out;
}

CsvTable trace_table(const std::vector<TraceRecord>& trace) {
  CsvTable t;
  t.header = {"iteration", "stage", "bestJ", "bestS", "spread"};
  for (const TraceRecord& r : trace) {
    t.rows.push_back({static_cast<double>(r.iteration), static_cast<double>(r.stage), r.bestJ,
                      r.bestS, r.spread});
  }
  return t;
}

json optimize_json(const OptimizeResult& r) {
  json out;
  out["feasible"] = r.feasible;
  out["status"] = r.feasible ? "feasible" : "infeasible-run";
  out["bestGain"] = matrix_to_json(r.bestGain);
  out["bestReport"] = report_json(r.bestReport);
  out["stageOneIterations"] = r.stageOneIterations;
  out["stageTwoIterations"] = r.stageTwoIterations;
  out["warnings"] = r.warnings;
  out["trace"] = trace_json(r.trace);
  return out;
}

void cmd_check(const ProblemFile& pf, const CommandOptions& o, RunResult& out) {
  const ToleranceConfig tol = profile_tolerances(o.profile);
  const NetworkProblem problem = pf.to_problem(tol);
  out.outputs["openLoop"] = characterize(problem.plant, problem.noise, tol);
  if (pf.K) {
    const SystemRealization sys = SystemRealization::close(problem, *pf.K);
    json cl = characterize(sys.closedLoop, sys.noise, tol);
    cl["cost"] = cost_json(lqs_cost(sys, tol));
    out.outputs["closedLoop"] = cl;
  }
}

void cmd_evaluate(const ProblemFile& pf, const CommandOptions& o, RunResult& out) {
  const ToleranceConfig tol = profile_tolerances(o.profile);
  const NetworkProblem problem = pf.to_problem(tol);
  const Matrix& k = require_gain(pf, "evaluate");
  const CostReport cost = lqs_cost(SystemRealization::close(problem, k), tol);
  out.outputs["gain"] = matrix_to_json(k);
  out.outputs["cost"] = cost_json(cost);
  PsoConfig cfg = o.pso;
  cfg.tol = tol;
  if (auto r = constraints_for(problem, k, cfg)) out.outputs["constraints"] = report_json(*r);
  out.table.header = {"J", "feasible"};
  out.table.rows.push_back({cost.J, cost.feasible ? 1.0 : 0.0});
}

void cmd_optimize(const ProblemFile& pf, const CommandOptions& o, RunResult& out) {
  const ToleranceConfig tol = profile_tolerances(o.profile);
  const NetworkProblem problem = pf.to_problem(tol);
  const PsoConfig cfg = swarm_config(o, tol, out.seed, 30, 100);
  const OptimizeResult r = optimize(problem, cfg);
  out.outputs = optimize_json(r);
  out.outputs["particles"] = cfg.swarmSize;
  out.outputs["iterations"] = cfg.maxIters;
  out.table = trace_table(r.trace);
}

void cmd_simulate(const ProblemFile& pf, const CommandOptions& o, RunResult& out) {
  const ToleranceConfig tol = profile_tolerances(o.profile);
  const NetworkProblem problem = pf.to_problem(tol);
  const Matrix& k = require_gain(pf, "simulate");
  const SystemRealization sys = SystemRealization::close(problem, k);
  if (o.sampleEvery < 1) throw Error(ErrorKind::InvalidArgument, "sample stride must be >= 1");

  const Vector x0 =
      o.stochastic ? sample_initial_state(pf.mu0, pf.V, out.seed, tol) : pf.mu0;
  const TrajectoryRecord rec =
      o.stochastic ? stochastic_trajectory(sys.closedLoop, sys.noise, x0, o.T, o.dt, out.seed)
                   : deterministic_trajectory(sys.closedLoop, x0, o.T, o.dt);

  out.table.header.push_back("t");
  for (Eigen::Index i = 0; i < x0.size(); ++i) out.table.header.push_back("x" + std::to_string(i + 1));
  for (std::size_t s = 0; s < rec.times.size(); ++s) {
    if (s % static_cast<std::size_t>(o.sampleEvery) != 0 && s + 1 != rec.times.size()) continue;
    std::vector<double> row{rec.times[s]};
    for (Eigen::Index i = 0; i < rec.states[s].size(); ++i) row.push_back(rec.states[s](i));
    out.table.rows.push_back(std::move(row));
  }
  out.outputs["mode"] = o.stochastic ? "euler-maruyama" : "exact-propagator";
  out.outputs["initialState"] = vector_to_json(x0);
  out.outputs["finalState"] = vector_to_json(rec.states.back());
  out.outputs["steps"] = rec.times.size() - 1;
  if (is_semistable(sys.closedLoop, tol).semistable) {
    out.outputs["limit"] = vector_to_json(limit_projector(sys.closedLoop, tol) * x0);
  }
  if (o.paths > 0) {
    const CostReport exact = lqs_cost(sys, tol);
    const MonteCarloEstimate mc =
        monte_carlo_cost(sys, o.paths, o.T, o.dt, o.burnFraction, out.seed, o.pso.workers, tol);
    out.outputs["monteCarlo"] = {{"estimate", mc.estimate},
                                 {"standardError", mc.standardError},
                                 {"paths", mc.paths},
                                 {"exactJ", finite_or_null(exact.J)}};
  }
}

void cmd_reproduce(const CommandOptions& o, RunResult& out) {
  const std::string path = benchmark_path(o.caseName);
  // Printed four-decimal gains need the looser profile unless overridden.
  const ToleranceProfile profile =
      o.profile == ToleranceProfile::Default ? ToleranceProfile::Printed : o.profile;
  const ToleranceConfig tol = profile_tolerances(profile);
  const ProblemFile pf = parse_problem_file(path, tol);
  out.inputDigest = pf.digest;
  const NetworkProblem problem = pf.to_problem(tol);

  json& res = out.outputs;
  res["case"] = o.caseName;
  res["file"] = path;
  res["description"] = pf.description;
  res["toleranceProfile"] = profile == ToleranceProfile::Printed ? "printed" : "default";
  res["openLoop"] = characterize(problem.plant, problem.noise, tol);

  double reported = std::nan("");
  bool comparable = false;
  if (pf.reference) {
    reported = pf.reference->reportedJ;
    comparable = pf.reference->comparable;
    res["reportedJ"] = reported;
    res["comparable"] = comparable;
    res["note"] = pf.reference->note;
  }
  out.table.header = {"source", "reportedJ", "computedJ", "relativeDifference"};

  auto rel = [&](double computed) {
    return std::isfinite(computed) && std::isfinite(reported) && comparable
               ? std::abs(computed - reported) / std::abs(reported)
               : std::nan("");
  };

  if (pf.K) {
    const SystemRealization sys = SystemRealization::close(problem, *pf.K);
    const CostReport cost = lqs_cost(sys, tol);
    json g;
    g["closedLoop"] = characterize(sys.closedLoop, sys.noise, tol);
    g["cost"] = cost_json(cost);
    g["computedJ"] = finite_or_null(cost.J);
    g["relativeDifference"] = finite_or_null(rel(cost.J));
    res["printedGain"] = g;
    out.table.rows.push_back({0.0, reported, cost.J, rel(cost.J)});
  }

  if (o.runOptimizer) {
    int particles = 30, iterations = 100;
    PsoConfig base = o.pso;
    if (pf.reference) {
      particles = pf.reference->particles > 0 ? pf.reference->particles : particles;
      iterations = pf.reference->iterations > 0 ? pf.reference->iterations : iterations;
      base.omega = pf.reference->omega == "grid" ? OmegaSet::Grid : OmegaSet::Unit;
    }
    CommandOptions tuned = o;
    tuned.pso = base;
    const PsoConfig cfg = swarm_config(tuned, tol, out.seed, particles, iterations);
    const OptimizeResult r = optimize(problem, cfg);
    json opt = optimize_json(r);
    opt["particles"] = cfg.swarmSize;
    opt["iterations"] = cfg.maxIters;
    opt["relativeDifference"] = finite_or_null(rel(r.bestReport.J));
    res["optimizer"] = opt;
    out.table.rows.push_back({1.0, reported, r.bestReport.J, rel(r.bestReport.J)});
  }
}

}  // namespace

const std::vector<std::string>& benchmark_cases() {
  static const std::vector<std::string> cases{"4node", "6node", "10node",
                                              "2node", "20node", "24node"};
  return cases;
}

std::string benchmark_path(const std::string& caseName) {
  std::string file;
  if (caseName == "4node" || caseName == "6node" || caseName == "10node") {
    file = "case1_" + caseName + ".json";
  } else if (caseName == "2node" || caseName == "20node" || caseName == "24node") {
    file = "case2_" + caseName + ".json";
  } else {
    throw Error(ErrorKind::InvalidArgument,
                "unknown case '" + caseName + "' (expected 4node, 6node, 10node, 2node, 20node "
                "or 24node)");
  }
  const char* env = std::getenv("LQS_BENCHMARK_DIR");
  const std::string dir = env && *env ? env : LQS_BENCHMARK_DIR;
  return dir + "/" + file;
}

RunResult run_command(const std::string& command, const CommandOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunResult out;
  out.command = command;
  out.seed = resolve_seed(options.seed);

  if (command == "reproduce") {
    cmd_reproduce(options, out);
  } else {
    if (options.problemPath.empty()) {
      throw Error(ErrorKind::InvalidArgument, command + ": --problem is required");
    }
    const ProblemFile pf =
        parse_problem_file(options.problemPath, profile_tolerances(options.profile));
    out.inputDigest = pf.digest;
    out.outputs["problem"] = pf.name;
    if (command == "check") {
      cmd_check(pf, options, out);
    } else if (command == "evaluate") {
      cmd_evaluate(pf, options, out);
    } else if (command == "optimize") {
      cmd_optimize(pf, options, out);
    } else if (command == "simulate") {
      cmd_simulate(pf, options, out);
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown command '" + command + "'");
    }
  }
  out.wallTime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace lqs
