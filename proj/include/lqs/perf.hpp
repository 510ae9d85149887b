#pragma once

// Steady-state cost of a closed network loop and the covariance quantities
// behind it.

#include <limits>
#include <string>

#include "lqs/matcore.hpp"
#include "lqs/netmodel.hpp"

namespace lqs {

struct CostDiagnostics {
  bool semistable = false;
  bool semistabilizable = false;  ///< (Ã, D)
  bool rangeContained = false;    ///< N(Ã^T) ⊆ N(D^T)
  double lyapunovResidual = std::numeric_limits<double>::infinity();
  std::string reason;  ///< empty when feasible
};

struct CostReport {
  double J = std::numeric_limits<double>::infinity();
  Matrix W;
  Matrix Rtilde;  ///< R1 + K^T R2 K
  Vector xInf;
  bool feasible = false;
  CostDiagnostics diagnostics;
};

/// J = tr((W + V) R̃), W the minimal solution of ÃW + WÃ^T + ÃV + VÃ^T + DD^T = 0.
/// Infeasible gains are reported (feasible = false, J = +inf), never thrown.
CostReport lqs_cost(const SystemRealization& sys, const ToleranceConfig& tol = {});

/// x_inf = (I - ÃÃ^#) mu0. Throws NotSemistable.
Vector steady_state_mean(const Matrix& closedLoop, const Vector& mu0,
                         const ToleranceConfig& tol = {});

/// Q(t) = e^{Ãt} Q0 e^{Ã^T t} + ∫_0^t e^{Ãs} D D^T e^{Ã^T s} ds.
Matrix covariance_at(const Matrix& closedLoop, const Matrix& noise,
                     const Matrix& q0, double t, const ToleranceConfig& tol = {});

/// L Q0 L^T + Q_hat with Q_hat the minimal solution of ÃQ + QÃ^T + DD^T = 0.
/// Throws LimitDoesNotExist when N(Ã^T) ⊄ N(D^T).
Matrix limiting_covariance(const Matrix& closedLoop, const Matrix& noise,
                           const Matrix& q0, const ToleranceConfig& tol = {});

/// For 0 = AQ + QA^T + V: checks lambda_min(V) <= 2 sigma_min(Q) sigma_max(A).
/// Throws InvalidArgument when the triple does not satisfy the equation.
bool avq_bound_check(const Matrix& a, const Matrix& v, const Matrix& q,
                     const ToleranceConfig& tol = {});

}  // namespace lqs
