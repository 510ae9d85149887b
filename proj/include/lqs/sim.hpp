#pragma once

// Closed-loop trajectories (noise-free and white-noise driven) and the
// Monte Carlo estimate of the time-averaged cost.

#include <cstdint>
#include <vector>

#include "lqs/matcore.hpp"
#include "lqs/netmodel.hpp"

namespace lqs {

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<Vector> states;
  std::uint64_t pathSeed = 0;
};

/// x(t_k) = e^{Ã t_k} x0 on t_k = k dt, k = 0..ceil(T/dt), using the exact
/// one-step propagator.
TrajectoryRecord deterministic_trajectory(const Matrix& closedLoop, const Vector& x0,
                                          double T, double dt);

/// Euler-Maruyama: x_{k+1} = x_k + dt Ã x_k + sqrt(dt) D ξ_k (strong order 1/2).
TrajectoryRecord stochastic_trajectory(const Matrix& closedLoop, const Matrix& noise,
                                       const Vector& x0, double T, double dt,
                                       std::uint64_t pathSeed);

/// mu0 + V^{1/2} ξ. V = 0 returns mu0 exactly.
Vector sample_initial_state(const Vector& mu0, const Matrix& v, std::uint64_t pathSeed,
                            const ToleranceConfig& tol = {});

struct MonteCarloEstimate {
  double estimate = 0.0;
  double standardError = 0.0;  ///< across paths
  int paths = 0;
};

/// Path average of (x - x_inf)^T R1 (x - x_inf) + (u - u_inf)^T R2 (u - u_inf)
/// over [burnFraction T, T], u = Kx. Throws when the realization is infeasible.
MonteCarloEstimate monte_carlo_cost(const SystemRealization& sys, int paths, double T,
                                    double dt, double burnFraction, std::uint64_t seed,
                                    int workers = 1, const ToleranceConfig& tol = {});

}  // namespace lqs
