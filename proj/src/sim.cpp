#include "lqs/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>

#include "lqs/error.hpp"
#include "lqs/perf.hpp"

namespace lqs {

namespace {

int step_count(double T, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(T) || T < dt) {
    throw Error(ErrorKind::InvalidArgument, "need dt > 0 and T >= dt");
  }
  // Tolerate T/dt landing a hair above an integer.
  return static_cast<int>(std::ceil(T / dt - 1e-9));
}

// Distinct, well-mixed seeds for each path from one run seed.
std::uint64_t path_seed(std::uint64_t seed, int path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), 0x5eedu};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

Matrix psd_sqrt(const Matrix& v, const ToleranceConfig& tol) {
  if (!is_symmetric(v, tol) ||
      !definiteness_test(v, Definiteness::PositiveSemidefinite, tol).holds) {
    throw Error(ErrorKind::InvalidArgument, "V must be symmetric positive semidefinite");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (v + v.transpose()));
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

TrajectoryRecord deterministic_trajectory(const Matrix& closedLoop, const Vector& x0,
                                          double T, double dt) {
  if (x0.size() != closedLoop.rows()) {
    throw Error(ErrorKind::InvalidArgument, "deterministic_trajectory: size mismatch");
  }
  const int steps = step_count(T, dt);
  const Matrix step = mat_exp(closedLoop, dt);
  TrajectoryRecord rec;
  rec.times.reserve(steps + 1);
  rec.states.reserve(steps + 1);
  Vector x = x0;
  for (int k = 0; k <= steps; ++k) {
    rec.times.push_back(k * dt);
    rec.states.push_back(x);
    x = step * x;
  }
  return rec;
}

TrajectoryRecord stochastic_trajectory(const Matrix& closedLoop, const Matrix& noise,
                                       const Vector& x0, double T, double dt,
                                       std::uint64_t pathSeed) {
  if (x0.size() != closedLoop.rows() || noise.rows() != closedLoop.rows()) {
    throw Error(ErrorKind::InvalidArgument, "stochastic_trajectory: size mismatch");
  }
  const int steps = step_count(T, dt);
  std::mt19937_64 rng(pathSeed);
  std::normal_distribution<double> normal;
  const double sdt = std::sqrt(dt);
  TrajectoryRecord rec;
  rec.pathSeed = pathSeed;
  rec.times.reserve(steps + 1);
  rec.states.reserve(steps + 1);
  Vector x = x0;
  Vector xi(noise.cols());
  for (int k = 0; k <= steps; ++k) {
    rec.times.push_back(k * dt);
    rec.states.push_back(x);
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = normal(rng);
    x += dt * (closedLoop * x) + sdt * (noise * xi);
  }
  return rec;
}

Vector sample_initial_state(const Vector& mu0, const Matrix& v, std::uint64_t pathSeed,
                            const ToleranceConfig& tol) {
  if (v.rows() != mu0.size() || v.cols() != mu0.size()) {
    throw Error(ErrorKind::InvalidArgument, "sample_initial_state: size mismatch");
  }
  if (v.size() == 0 || v.cwiseAbs().maxCoeff() == 0.0) return mu0;
  const Matrix root = psd_sqrt(v, tol);
  std::mt19937_64 rng(pathSeed);
  std::normal_distribution<double> normal;
  Vector xi(mu0.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = normal(rng);
  return mu0 + root * xi;
}

MonteCarloEstimate monte_carlo_cost(const SystemRealization& sys, int paths, double T,
                                    double dt, double burnFraction, std::uint64_t seed,
                                    int workers, const ToleranceConfig& tol) {
  if (paths < 1) throw Error(ErrorKind::InvalidArgument, "monte_carlo_cost: paths must be >= 1");
  if (!(burnFraction >= 0.0 && burnFraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "monte_carlo_cost: burnFraction must lie in [0, 1)");
  }
  const int steps = step_count(T, dt);
  const CostReport cost = lqs_cost(sys, tol);
  if (!cost.feasible) {
    throw Error(ErrorKind::NotSemistable,
                "monte_carlo_cost: infeasible realization (" + cost.diagnostics.reason + ")");
  }
  const Matrix& at = sys.closedLoop;
  const Matrix& d = sys.noise;
  const Vector xInf = cost.xInf;
  // (x - x_inf)^T R1 (x - x_inf) + (K(x - x_inf))^T R2 (K(x - x_inf)).
  const Matrix& rt = cost.Rtilde;
  const int first = static_cast<int>(std::floor(burnFraction * steps));
  const Matrix root = sys.initialCovariance.cwiseAbs().maxCoeff() == 0.0
                          ? Matrix::Zero(at.rows(), at.cols())
                          : psd_sqrt(sys.initialCovariance, tol);

  std::vector<double> means(paths, 0.0);
  auto run_path = [&](int p) {
    std::mt19937_64 rng(path_seed(seed, p));
    std::normal_distribution<double> normal;
    Vector xi0(at.rows());
    for (Eigen::Index i = 0; i < xi0.size(); ++i) xi0(i) = normal(rng);
    Vector x = sys.initialMean + root * xi0;
    Vector xi(d.cols());
    const double sdt = std::sqrt(dt);
    // Trapezoid over the retained window.
    double acc = 0.0;
    auto integrand = [&](const Vector& y) {
      const Vector e = y - xInf;
      return e.dot(rt * e);
    };
    for (int k = 0; k <= steps; ++k) {
      if (k >= first) {
        const double w = (k == first || k == steps) ? 0.5 : 1.0;
        acc += w * integrand(x);
      }
      if (k == steps) break;
      for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = normal(rng);
      x += dt * (at * x) + sdt * (d * xi);
    }
    means[p] = acc / static_cast<double>(steps - first);
  };

  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, paths);
  if (workers == 1) {
    for (int p = 0; p < paths; ++p) run_path(p);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int p = w; p < paths; p += workers) run_path(p);
      });
    }
    for (auto& t : pool) t.join();
  }

  MonteCarloEstimate out;
  out.paths = paths;
  double sum = 0.0;
  for (double m : means) sum += m;
  out.estimate = sum / paths;
  if (paths > 1) {
    double ss = 0.0;
    for (double m : means) ss += (m - out.estimate) * (m - out.estimate);
    out.standardError = std::sqrt(ss / (paths - 1) / paths);
  }
  return out;
}

}  // namespace lqs
