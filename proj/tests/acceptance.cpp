// Acceptance runner: one PASS/FAIL line per criterion.
//
//   lqs_acceptance <id>...   ids: 1 2 3 4 5a 5b 5c 5d 6 7 8 9, or "all"
//
// Exit status is nonzero when any gating criterion fails. 5d (10-node
// printed gain) is informational and never affects the exit status.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lqs/error.hpp"
#include "lqs/matcore.hpp"
#include "lqs/perf.hpp"
#include "lqs/semistab.hpp"
#include "lqs/sim.hpp"
#include "lqs/swarm.hpp"
#include "properties.hpp"
#include "support.hpp"

using namespace lqs;
using namespace lqs::testing;

namespace {

// Pinned tolerances.
constexpr double kProjectorTol = 1e-8;
constexpr double kMeanTol = 1e-10;
constexpr double kOracleTol = 1e-6;
constexpr double kTwoRouteTol = 1e-8;
constexpr double kGainTight = 0.02;
constexpr double kGainLoose = 0.10;
constexpr int kOptimizerSeeds = 10;
constexpr int kOptimizerMinFeasible = 8;
constexpr double kOptimizerFactor = 5.0;
constexpr int kPropertyInstances = 200;
constexpr double kMonteCarloTol = 0.05;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

Outcome limit_projector_regression() {
  Matrix a(2, 2);
  a << -1, 1, 1, -1;
  const double err = (limit_projector(a) - 0.5 * Matrix::Ones(2, 2)).norm();
  return {err <= kProjectorTol, "||L - J/2||_F = " + fmt(err)};
}

Outcome mass_damper() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> pos(0.1, 10.0), init(-5.0, 5.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double m = pos(rng), c = pos(rng), q0 = init(rng), qd0 = init(rng);
    Matrix a(2, 2);
    a << 0, 1, 0, -c / m;
    const Vector x = steady_state_mean(a, Vector{{q0, qd0}});
    const Vector expect{{q0 + (m / c) * qd0, 0.0}};
    worst = std::max(worst, (x - expect).cwiseAbs().maxCoeff());
  }
  return {worst <= kMeanTol, "100 instances, max error " + fmt(worst)};
}

// Shared corpus for criteria 3 and 4.
struct CorpusItem {
  SemistableSample s;
  Matrix d;
};

std::vector<CorpusItem> lyapunov_corpus() {
  std::mt19937_64 rng(303);
  std::vector<CorpusItem> out;
  for (int k = 0; k < 100; ++k) {
    CorpusItem it;
    it.s = random_semistable(rng, 6);
    it.d = compatible_noise(rng, it.s.a, 1 + static_cast<Eigen::Index>(rng() % 3));
    out.push_back(std::move(it));
  }
  return out;
}

Outcome lyapunov_oracle() {
  double worst = 0.0;
  for (const CorpusItem& it : lyapunov_corpus()) {
    const Matrix m = it.d * it.d.transpose();
    const Matrix p = solve_singular_lyapunov(it.s.a, m);
    const QuadratureResult q = gramian_quadrature_oracle(it.s.a, m, 40.0 / it.s.slowest, 4000);
    worst = std::max(worst, (p - q.value).norm() / std::max(q.value.norm(), 1e-12));
  }
  return {worst <= kOracleTol, "100 instances, max relative error " + fmt(worst)};
}

Outcome two_route_cost() {
  std::mt19937_64 rng(404);
  double worst = 0.0;
  int refused = 0;
  for (const CorpusItem& it : lyapunov_corpus()) {
    const Eigen::Index n = it.s.a.rows();
    const Matrix v = random_psd(rng, n);
    const Matrix r1 = random_psd(rng, n);
    const SystemRealization sys = SystemRealization::from_matrices(
        it.s.a, it.d, Matrix::Zero(n, n), r1, Matrix::Zero(n, n), Vector(), v);
    const CostReport c = lqs_cost(sys);
    if (!c.feasible) {
      ++refused;
      continue;
    }
    const double viaLimit = (limiting_covariance(it.s.a, it.d, v) * c.Rtilde).trace();
    worst = std::max(worst, std::abs(c.J - viaLimit) / std::max(std::abs(viaLimit), 1e-12));
  }
  return {worst <= kTwoRouteTol && refused == 0,
          "100 instances, max relative difference " + fmt(worst) +
              (refused ? ", " + std::to_string(refused) + " refused" : "")};
}

Outcome printed_gain(const std::string& name) {
  const ToleranceConfig tol = ToleranceConfig::printed_precision();
  const ProblemFile pf = load_case(name, tol);
  const SystemRealization sys = SystemRealization::close(pf.to_problem(tol), *pf.K);
  const bool semistable = is_semistable(sys.closedLoop, tol).semistable;
  const bool stabilizable = is_semistabilizable(sys.closedLoop, sys.noise, tol);
  const CostReport c = lqs_cost(sys, tol);
  const double reported = pf.reference->reportedJ;
  const double rel = std::isfinite(c.J) ? rel_diff(c.J, reported) : INFINITY;
  std::string detail = name + ": reported J = " + fmt(reported) + ", computed J = " +
                       fmt(c.J, 10) + ", relative difference " + fmt(rel, 3) +
                       ", semistable=" + (semistable ? "yes" : "no") +
                       ", semistabilizable=" + (stabilizable ? "yes" : "no");
  const bool structural = semistable && stabilizable && c.feasible;
  if (structural && rel <= kGainTight) return {true, detail};
  if (structural && rel <= kGainLoose) {
    return {true, detail + " (outside 2%, inside 10%: four-decimal gain rounding)"};
  }
  return {false, detail};
}

Outcome optimizer_success() {
  const NetworkProblem p = load_case("4node").to_problem();
  const double reported = 41499.0;
  int feasible = 0;
  double best = INFINITY;
  std::string perSeed;
  for (int seed = 1; seed <= kOptimizerSeeds; ++seed) {
    PsoConfig cfg;
    cfg.swarmSize = 30;
    cfg.maxIters = 100;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const OptimizeResult r = optimize(p, cfg);
    if (r.feasible) {
      ++feasible;
      best = std::min(best, r.bestReport.J);
    }
    perSeed += (seed > 1 ? " " : "") + fmt(r.feasible ? r.bestReport.J : INFINITY, 5);
  }
  const bool pass = feasible >= kOptimizerMinFeasible && best <= kOptimizerFactor * reported;
  return {pass, std::to_string(feasible) + "/10 feasible, best J = " + fmt(best, 8) +
                    " (bound " + fmt(kOptimizerFactor * reported) + "); per seed: " + perSeed};
}

Outcome property_suites() {
  const int n = kPropertyInstances;
  const std::vector<PropertyOutcome> all{
      semiobservable_duality(n, 701),
      semiobservable_implies_semidetectable(n, 702),
      semistabilizability_feedback_invariance(n, 703, 50),
      seed_gain_semicontrollable(n, 704),
      avq_bound(n, 705),
      xy_symmetry(n, 706),
      certificate_soundness(n, 707),
      semistability_equivalence(n, 708),
  };
  bool pass = true;
  std::string detail;
  for (const PropertyOutcome& r : all) {
    pass = pass && r.ok(n);
    if (!detail.empty()) detail += "; ";
    detail += r.name + " " + std::to_string(r.violations) + "/" + std::to_string(r.instances);
    if (r.violations) detail += " [" + r.firstFailure + "]";
  }
  return {pass, detail};
}

Outcome monte_carlo() {
  const Matrix one = Matrix::Ones(1, 1);
  const SystemRealization ou =
      SystemRealization::from_matrices(-one, one, 0.0 * one, one, 0.0 * one);
  const MonteCarloEstimate a = monte_carlo_cost(ou, 200, 50.0, 1e-3, 0.5, 801);
  const double relOu = rel_diff(a.estimate, 0.5);

  const ToleranceConfig tol = ToleranceConfig::printed_precision();
  const ProblemFile pf = load_case("4node", tol);
  const SystemRealization sys = SystemRealization::close(pf.to_problem(tol), *pf.K);
  const double exact = lqs_cost(sys, tol).J;
  const MonteCarloEstimate b = monte_carlo_cost(sys, 200, 50.0, 1e-3, 0.5, 802, 1, tol);
  const double rel4 = rel_diff(b.estimate, exact);
  return {relOu <= kMonteCarloTol && rel4 <= kMonteCarloTol,
          "OU: " + fmt(a.estimate) + " vs 0.5 (rel " + fmt(relOu, 3) + ", se " +
              fmt(a.standardError, 3) + "); 4-node: " + fmt(b.estimate) + " vs " + fmt(exact) +
              " (rel " + fmt(rel4, 3) + ", se " + fmt(b.standardError, 3) + ")"};
}

Outcome determinism() {
  const NetworkProblem p = load_case("4node").to_problem();
  PsoConfig cfg;
  cfg.swarmSize = 30;
  cfg.maxIters = 60;
  cfg.seed = 2024;
  cfg.workers = 1;
  const OptimizeResult a = optimize(p, cfg);
  cfg.workers = 3;
  const OptimizeResult b = optimize(p, cfg);
  bool same = a.trace.size() == b.trace.size() && a.bestGain == b.bestGain;
  for (std::size_t i = 0; same && i < a.trace.size(); ++i) {
    same = a.trace[i].bestJ == b.trace[i].bestJ && a.trace[i].bestS == b.trace[i].bestS &&
           a.trace[i].spread == b.trace[i].spread && a.trace[i].stage == b.trace[i].stage;
  }
  return {same, std::to_string(a.trace.size()) + " trace rows, workers 1 vs 3, final J " +
                    fmt(a.bestReport.J, 17) + (same ? " (bit-identical)" : " (differs)")};
}

struct Criterion {
  std::string id;
  bool gating;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {"1", true, limit_projector_regression},
      {"2", true, mass_damper},
      {"3", true, lyapunov_oracle},
      {"4", true, two_route_cost},
      {"5a", true, [] { return printed_gain("4node"); }},
      {"5b", true, [] { return printed_gain("6node"); }},
      {"5c", true, [] { return printed_gain("2node"); }},
      {"5d", false, [] { return printed_gain("10node"); }},
      {"6", true, optimizer_success},
      {"7", true, property_suites},
      {"8", true, monte_carlo},
      {"9", true, determinism},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  if (wanted.empty() || (wanted.size() == 1 && wanted[0] == "all")) {
    wanted.clear();
    for (const Criterion& c : criteria()) wanted.push_back(c.id);
  }
  int failures = 0;
  for (const std::string& id : wanted) {
    const Criterion* found = nullptr;
    for (const Criterion& c : criteria()) {
      if (c.id == id) found = &c;
    }
    if (!found) {
      std::fprintf(stderr, "unknown criterion '%s'\n", id.c_str());
      return 2;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = found->run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s%s: %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", id.c_str(),
                found->gating ? "" : " (non-gating)", o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass && found->gating) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
