#pragma once

// Dense matrix kernels shared by every other module: exponentials, numerical
// rank and subspaces, the group inverse, Kronecker utilities, and the minimal
// solution of singular Lyapunov equations.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace lqs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Numerical tolerances. All of them are relative to the norm of the matrix
/// being tested; an absolute fallback applies when that norm is zero.
struct ToleranceConfig {
  double rank = 1e-8;  ///< singular-value cutoff relative to sigma_max
  double sym = 1e-10;  ///< ||M - M^T||_F <= sym * ||M||_F
  double psd = 1e-8;   ///< lambda_min >= -psd * ||S||_F
  double imag = 1e-8;  ///< |Re lambda| band, relative to ||A||_F
  double res = 1e-8;   ///< residual bound for linear-system consistency

  /// Looser profile for matrices typed in at four printed decimals, where a
  /// structurally zero eigenvalue shows up at roughly 1e-4 absolute.
  static ToleranceConfig printed_precision();

  void validate() const;
};

enum class EigenClass { StrictlyStable, Zero, PureImaginary, Unstable };

struct SpectralReport {
  std::vector<std::complex<double>> eigenvalues;
  std::vector<EigenClass> classes;
  bool zeroSemisimple = true;  ///< rank(A) == rank(A^2)
  int rank = 0;

  int count(EigenClass c) const;
};

Matrix mat_exp(const Matrix& a, double t);

int numerical_rank(const Matrix& m, const ToleranceConfig& tol = {});
int numerical_rank(const ComplexMatrix& m, const ToleranceConfig& tol = {});

enum class Subspace { Null, Range };

/// Orthonormal basis (as columns) of N(M) or R(M). May have zero columns.
Matrix subspace_basis(const Matrix& m, Subspace kind,
                      const ToleranceConfig& tol = {});

/// A^# from a full-rank factorization A = BC, A^# = B (CB)^{-2} C.
/// Throws ErrorKind::NotGroupInvertible when the index of A exceeds one.
Matrix group_inverse(const Matrix& a, const ToleranceConfig& tol = {});

/// I - A A^#, which equals lim e^{At} when A is semistable.
Matrix limit_projector(const Matrix& a, const ToleranceConfig& tol = {});

SpectralReport spectral_classification(const Matrix& a,
                                       const ToleranceConfig& tol = {});

/// A ⊗ B.
Matrix kron(const Matrix& a, const Matrix& b);
/// A ⊕ A = A ⊗ I + I ⊗ A, the operator of X -> AX + XA^T on column-major vec.
Matrix kronecker_sum(const Matrix& a);
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Eigen::Index rows);

struct LyapunovLeastSquares {
  Matrix solution;
  double residual = 0.0;  ///< ||AX + XA^T + M||_F / max(||M||_F, 1)
};

/// Minimum-norm least-squares solution of AX + XA^T + M = 0 with no
/// precondition on A. Used where infeasibility must be measured, not thrown.
LyapunovLeastSquares lyapunov_least_squares(const Matrix& a, const Matrix& m,
                                            const ToleranceConfig& tol = {});

/// Minimal solution P = -unvec((A⊕A)^# vec M) of AP + PA^T + M = 0 for
/// semistable A. It has no component in span{x y^T : x, y in N(A)}, i.e. it
/// is the integral of e^{As} M e^{A^T s} over [0, inf).
Matrix solve_singular_lyapunov(const Matrix& a, const Matrix& m,
                               const ToleranceConfig& tol = {});

struct QuadratureResult {
  Matrix value;
  double errorEstimate = 0.0;
};

/// Brute-force evaluation of the integral of e^{As} M e^{A^T s} over
/// [0, horizon] with the limiting integrand removed. Composite 4-point
/// Gauss-Legendre over `steps` panels (convergence order 8 in the panel
/// width). Test oracle for solve_singular_lyapunov; shares no code with it.
QuadratureResult gramian_quadrature_oracle(const Matrix& a, const Matrix& m,
                                           double horizon, int steps);

enum class Definiteness { PositiveDefinite, PositiveSemidefinite };

struct DefinitenessResult {
  bool holds = false;
  /// pd: 0 on success, else the 1-based column where Cholesky broke down.
  /// psd: number of eigenvalues below the floor.
  int indicator = 0;
};

DefinitenessResult definiteness_test(const Matrix& s, Definiteness mode,
                                     const ToleranceConfig& tol = {});

bool is_symmetric(const Matrix& m, const ToleranceConfig& tol = {});

namespace detail {

// Integral of F(s) M F(s)^T over [0, t], F(s) = e^{As}, by composite
// Gauss-Legendre. `subtract` is removed from the integrand at every node.
Matrix gauss_legendre_gramian(const Matrix& a, const Matrix& m, double t,
                              int panels, const Matrix* subtract = nullptr);

}  // namespace detail

}  // namespace lqs
