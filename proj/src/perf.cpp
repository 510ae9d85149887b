#include "lqs/perf.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "lqs/error.hpp"
#include "lqs/semistab.hpp"

namespace lqs {

CostReport lqs_cost(const SystemRealization& sys, const ToleranceConfig& tol) {
  CostReport report;
  const Matrix& at = sys.closedLoop;
  const Matrix& v = sys.initialCovariance;
  report.Rtilde = sys.stateWeight +
                  sys.gain.transpose() * sys.controlWeight * sys.gain;

  const StabilityVerdict verdict = is_semistable(at, tol);
  report.diagnostics.semistable = verdict.semistable;
  if (!verdict.semistable) {
    report.diagnostics.reason = "closed loop is not semistable";
    return report;
  }
  // No eigenvalue on the nonzero imaginary axis, so the rank test is vacuous.
  report.diagnostics.semistabilizable = is_semistabilizable(at, sys.noise, tol);

  const Matrix rhs = at * v + v * at.transpose() + sys.noise * sys.noise.transpose();
  try {
    report.W = solve_singular_lyapunov(at, 0.5 * (rhs + rhs.transpose()), tol);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InconsistentSystem) throw;
    report.diagnostics.reason = "N(A~^T) is not contained in N(D^T)";
    return report;
  }
  report.diagnostics.rangeContained = true;
  report.diagnostics.lyapunovResidual =
      (at * report.W + report.W * at.transpose() + rhs).norm();
  report.xInf = limit_projector(at, tol) * sys.initialMean;
  report.J = ((report.W + v) * report.Rtilde).trace();
  report.feasible = report.diagnostics.semistabilizable;
  if (!report.feasible) {
    report.J = std::numeric_limits<double>::infinity();
    report.diagnostics.reason = "(A~, D) is not semistabilizable";
  }
  return report;
}

Vector steady_state_mean(const Matrix& closedLoop, const Vector& mu0,
                         const ToleranceConfig& tol) {
  if (mu0.size() != closedLoop.rows()) {
    throw Error(ErrorKind::InvalidArgument, "steady_state_mean: size mismatch");
  }
  if (!is_semistable(closedLoop, tol).semistable) {
    throw Error(ErrorKind::NotSemistable, "steady_state_mean: closed loop is not semistable");
  }
  return limit_projector(closedLoop, tol) * mu0;
}

Matrix covariance_at(const Matrix& closedLoop, const Matrix& noise,
                     const Matrix& q0, double t, const ToleranceConfig& tol) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error(ErrorKind::InvalidArgument, "covariance_at: t must be finite and >= 0");
  }
  if (!is_symmetric(q0, tol)) {
    throw Error(ErrorKind::InvalidArgument, "covariance_at: Q0 must be symmetric");
  }
  const Matrix f = mat_exp(closedLoop, t);
  Matrix q = f * q0 * f.transpose();
  if (t > 0.0 && noise.size() > 0) {
    // Panel width keeps the integrand's exponent below ~0.25 per panel.
    const double rho = std::max(closedLoop.norm(), 1e-12);
    const double want = std::ceil(2.0 * rho * t / 0.25);
    const int panels = static_cast<int>(std::clamp(want, 8.0, 200000.0));
    q += detail::gauss_legendre_gramian(closedLoop, noise * noise.transpose(), t,
                                        panels);
  }
  return 0.5 * (q + q.transpose());
}

Matrix limiting_covariance(const Matrix& closedLoop, const Matrix& noise,
                           const Matrix& q0, const ToleranceConfig& tol) {
  if (!is_semistable(closedLoop, tol).semistable) {
    throw Error(ErrorKind::NotSemistable,
                "limiting_covariance: closed loop is not semistable");
  }
  Matrix qhat;
  try {
    qhat = solve_singular_lyapunov(closedLoop, noise * noise.transpose(), tol);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InconsistentSystem) throw;
    throw Error(ErrorKind::LimitDoesNotExist,
                "limit does not exist: N(A~^T) is not contained in N(D^T)");
  }
  const Matrix proj = limit_projector(closedLoop, tol);
  return proj * q0 * proj.transpose() + qhat;
}

bool avq_bound_check(const Matrix& a, const Matrix& v, const Matrix& q,
                     const ToleranceConfig& tol) {
  const double residual = (a * q + q * a.transpose() + v).norm();
  const double scale = std::max({v.norm(), a.norm() * q.norm(), 1e-300});
  if (residual > tol.res * scale && residual > 0.0) {
    throw Error(ErrorKind::InvalidArgument,
                "avq_bound_check: triple does not satisfy AQ + QA^T + V = 0");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (v + v.transpose()),
                                            Eigen::EigenvaluesOnly);
  const double lambda_min = eig.eigenvalues()(0);
  Eigen::JacobiSVD<Matrix> sq(q);
  Eigen::JacobiSVD<Matrix> sa(a);
  const double sigma_min_q = sq.singularValues()(sq.singularValues().size() - 1);
  const double sigma_max_a = sa.singularValues()(0);
  const double bound = 2.0 * sigma_min_q * sigma_max_a;
  // Slack for the residual actually present in the triple.
  return lambda_min <= bound + residual + tol.res * scale;
}

}  // namespace lqs
