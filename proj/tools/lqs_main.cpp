// lqs: batch front end for the semistabilizing network-gain toolkit.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "lqs/commands.hpp"
#include "lqs/error.hpp"

namespace {

void emit_error(std::string_view kind, const std::string& message) {
  nlohmann::json rec{{"error", kind}, {"message", message}};
  std::cerr << rec.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology-preserving semistabilizing gains for stochastic network systems"};
  app.require_subcommand(1);

  lqs::CommandOptions opt;
  std::string out = "-";
  std::string format = "json";
  std::string omega = "unit";
  std::string mode = "default";
  std::string profile = "default";
  std::string freqMode = "exact";
  std::uint64_t seed = 0;
  int particles = 0, iters = 0;
  bool noWarmStart = false, warmStart = false;

  auto common = [&](CLI::App* sub, bool needsProblem) {
    if (needsProblem) {
      sub->add_option("--problem", opt.problemPath, "problem file (JSON)")->required();
    }
    sub->add_option("--seed", seed, "64-bit seed (drawn from entropy and echoed when absent)");
    sub->add_option("--out", out, "output path, '-' for stdout");
    sub->add_option("--format", format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--tolerance", profile, "tolerance profile: default or printed")
        ->check(CLI::IsMember({"default", "printed"}));
    sub->add_option("--workers", opt.pso.workers, "evaluation threads (0 = all cores)");
  };
  auto swarm = [&](CLI::App* sub) {
    sub->add_option("--particles", particles, "swarm size");
    sub->add_option("--iters", iters, "iterations per stage");
    sub->add_option("--theta", opt.pso.theta, "initialization half-width");
    sub->add_option("--eps", opt.pso.eps, "equality-constraint tolerance");
    sub->add_option("--omega", omega, "random coefficient set: unit or grid")
        ->check(CLI::IsMember({"unit", "grid"}));
    sub->add_option("--mode", mode, "default or paper-strict")
        ->check(CLI::IsMember({"default", "paper-strict"}));
    sub->add_option("--inertia", opt.pso.a, "velocity weight a");
    sub->add_option("--b1", opt.pso.b1, "personal-best weight");
    sub->add_option("--b2", opt.pso.b2, "global-best weight");
    sub->add_option("--spread", opt.pso.exit.spread, "stage exit: position spread");
    sub->add_option("--stagnation", opt.pso.exit.stagnation,
                    "stage exit: iterations without improvement (0 = off)");
    sub->add_flag("--warm-start", warmStart, "seed one particle with a feasible gain");
    sub->add_flag("--no-warm-start", noWarmStart, "disable the warm-start particle");
    sub->add_option("--freq-mode", freqMode, "semistabilizability test: exact or grid")
        ->check(CLI::IsMember({"exact", "grid"}));
  };

  auto* check = app.add_subcommand("check", "semistability predicates for the open (and closed) loop");
  common(check, true);
  auto* evaluate = app.add_subcommand("evaluate", "exact cost of the gain K in the problem file");
  common(evaluate, true);
  auto* optimize = app.add_subcommand("optimize", "two-stage constrained swarm search");
  common(optimize, true);
  swarm(optimize);
  auto* simulate = app.add_subcommand("simulate", "closed-loop trajectory for the file's K");
  common(simulate, true);
  simulate->add_option("--T", opt.T, "horizon");
  simulate->add_option("--dt", opt.dt, "step");
  simulate->add_option("--every", opt.sampleEvery, "keep every k-th sample");
  simulate->add_flag("--stochastic", opt.stochastic, "Euler-Maruyama with white noise");
  simulate->add_option("--paths", opt.paths, "Monte Carlo cost paths (0 = none)");
  simulate->add_option("--burn", opt.burnFraction, "discarded fraction of [0, T]");
  auto* reproduce = app.add_subcommand("reproduce", "bundled benchmark against its reported value");
  common(reproduce, false);
  swarm(reproduce);
  reproduce->add_option("case", opt.caseName, "4node | 6node | 10node | 2node | 20node | 24node")
      ->required();
  reproduce->add_flag("--optimize", opt.runOptimizer, "also run the swarm with the case's budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (sub->count("--seed") > 0) opt.seed = seed;
    if (particles > 0) opt.particles = particles;
    if (iters > 0) opt.iterations = iters;
    opt.pso.omega = omega == "grid" ? lqs::OmegaSet::Grid : lqs::OmegaSet::Unit;
    opt.pso.mode = mode == "paper-strict" ? lqs::PsoMode::Strict : lqs::PsoMode::Default;
    opt.profile = profile == "printed" ? lqs::ToleranceProfile::Printed
                                       : lqs::ToleranceProfile::Default;
    if (warmStart) opt.pso.seedParticle = true;
    if (noWarmStart) opt.pso.seedParticle = false;
    if (freqMode == "grid") {
      opt.pso.frequency.mode = lqs::FrequencyMode::Grid;
      for (int k = 1; k <= 100; ++k) opt.pso.frequency.frequencies.push_back(0.01 * k);
    }

    const lqs::RunResult result = lqs::run_command(sub->get_name(), opt);
    lqs::write_results(result,
                       format == "csv" ? lqs::OutputFormat::Csv : lqs::OutputFormat::Json, out);
    if (out != "-") {
      std::cerr << sub->get_name() << ": seed " << result.seed << ", wrote " << out << '\n';
    } else if (format == "csv") {
      std::cerr << sub->get_name() << ": seed " << result.seed << '\n';
    }
  } catch (const lqs::Error& e) {
    emit_error(lqs::to_string(e.kind()), e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 3;
  }
  return 0;
}
