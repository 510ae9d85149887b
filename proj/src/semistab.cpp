#include "lqs/semistab.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace lqs {

namespace {

void require_compatible(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0 || b.rows() != a.rows()) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + ": incompatible shapes");
  }
}

int rank_deficit_at(const Matrix& a, const Matrix& b, std::complex<double> s,
                    const ToleranceConfig& tol) {
  const Eigen::Index n = a.rows();
  ComplexMatrix m(n, b.cols() + n);
  m.leftCols(b.cols()) = b.cast<std::complex<double>>();
  m.rightCols(n) = s * ComplexMatrix::Identity(n, n) - a.cast<std::complex<double>>();
  return static_cast<int>(n) - numerical_rank(m, tol);
}

}  // namespace

StabilityVerdict is_semistable(const Matrix& a, const ToleranceConfig& tol) {
  StabilityVerdict v;
  v.spectrum = spectral_classification(a, tol);
  const SpectralReport& s = v.spectrum;
  const int nullity = static_cast<int>(a.rows()) - s.rank;
  // Semisimple zero: rank(A) = rank(A^2), and the number of eigenvalues in
  // the zero band matches the nullity.
  v.semistable = s.count(EigenClass::Unstable) == 0 &&
                 s.count(EigenClass::PureImaginary) == 0 && s.zeroSemisimple &&
                 s.count(EigenClass::Zero) == nullity;
  return v;
}

int semistabilizability_deficit(const Matrix& a, const Matrix& b,
                                const ToleranceConfig& tol,
                                const FrequencyOptions& freq) {
  require_compatible(a, b, "is_semistabilizable");
  int deficit = 0;
  if (freq.mode == FrequencyMode::Grid) {
    for (double w : freq.frequencies) {
      if (w == 0.0) continue;
      deficit = std::max(deficit, rank_deficit_at(a, b, {0.0, w}, tol));
      deficit = std::max(deficit, rank_deficit_at(a, b, {0.0, -w}, tol));
    }
    return deficit;
  }
  // The rank can only drop where jω is an eigenvalue of A.
  const SpectralReport s = spectral_classification(a, tol);
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
    if (s.classes[i] != EigenClass::PureImaginary) continue;
    const std::complex<double> jw{0.0, s.eigenvalues[i].imag()};
    deficit = std::max(deficit, rank_deficit_at(a, b, jw, tol));
  }
  return deficit;
}

bool is_semistabilizable(const Matrix& a, const Matrix& b,
                         const ToleranceConfig& tol,
                         const FrequencyOptions& freq) {
  return semistabilizability_deficit(a, b, tol, freq) == 0;
}

bool is_semidetectable(const Matrix& a, const Matrix& c,
                       const ToleranceConfig& tol,
                       const FrequencyOptions& freq) {
  if (c.cols() != a.cols()) {
    throw Error(ErrorKind::InvalidArgument, "is_semidetectable: incompatible shapes");
  }
  return is_semistabilizable(a.transpose(), c.transpose(), tol, freq);
}

Matrix controllable_subspace(const Matrix& a, const Matrix& b,
                             const ToleranceConfig& tol) {
  require_compatible(a, b, "controllable_subspace");
  const Eigen::Index n = a.rows();
  Matrix basis = subspace_basis(b, Subspace::Range, tol);
  if (basis.cols() == 0) return basis;
  const double a_norm = a.norm();
  Matrix frontier = basis;
  for (Eigen::Index power = 1; power < n && basis.cols() < n; ++power) {
    Matrix next = a * frontier;
    // Two passes of classical Gram-Schmidt against the accumulated basis.
    for (int pass = 0; pass < 2; ++pass) {
      next -= basis * (basis.transpose() * next);
    }
    if (next.norm() <= tol.rank * std::max(a_norm, 1e-300)) break;
    Eigen::JacobiSVD<Matrix> svd(next, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Eigen::Index fresh = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > tol.rank * a_norm) ++fresh;
    }
    fresh = std::min(fresh, n - basis.cols());
    if (fresh == 0) break;
    frontier = svd.matrixU().leftCols(fresh);
    frontier -= basis * (basis.transpose() * frontier);
    frontier = Eigen::HouseholderQR<Matrix>(frontier)
                   .householderQ() * Matrix::Identity(n, fresh);
    Matrix grown(n, basis.cols() + fresh);
    grown << basis, frontier;
    basis = std::move(grown);
  }
  return basis;
}

bool is_semicontrollable(const Matrix& a, const Matrix& b,
                         const ToleranceConfig& tol) {
  const Matrix reach = controllable_subspace(a, b, tol);
  const Matrix range = subspace_basis(a, Subspace::Range, tol);
  if (reach.cols() != range.cols()) return false;
  if (range.cols() == 0) return true;
  Matrix both(a.rows(), reach.cols() + range.cols());
  both << reach, range;
  return numerical_rank(both, tol) == range.cols();
}

bool is_semiobservable(const Matrix& a, const Matrix& c,
                       const ToleranceConfig& tol) {
  if (c.cols() != a.cols()) {
    throw Error(ErrorKind::InvalidArgument, "is_semiobservable: incompatible shapes");
  }
  return is_semicontrollable(a.transpose(), c.transpose(), tol);
}

bool is_completely_unstabilizable(const Matrix& a, const Matrix& b,
                                  const ToleranceConfig& tol) {
  const Matrix reach = controllable_subspace(a, b, tol);
  if (reach.cols() == 0) return true;
  // R(reach) is A-invariant, so the restriction carries the reachable modes.
  const Matrix restricted = reach.transpose() * a * reach;
  const SpectralReport s = spectral_classification(restricted, tol);
  // Classify against the band of the full matrix so a restriction that is
  // itself tiny is not judged on its own scale.
  const double band = tol.imag * std::max(a.norm(), 1.0);
  return std::all_of(s.eigenvalues.begin(), s.eigenvalues.end(),
                     [band](std::complex<double> l) { return l.real() < -band; });
}

SemistabilityCertificate certify_semistability(const Matrix& a,
                                               const ToleranceConfig& tol) {
  StabilityVerdict verdict = is_semistable(a, tol);
  if (!verdict.semistable) throw NotSemistableError(std::move(verdict.spectrum));

  SemistabilityCertificate cert;
  cert.outputMap = a;
  const Matrix ctc = a.transpose() * a;
  const Matrix observability = solve_singular_lyapunov(a.transpose(), ctc, tol);
  cert.groupInverse = group_inverse(a, tol);
  cert.projector = Matrix::Identity(a.rows(), a.cols()) - a * cert.groupInverse;
  cert.lyapunov = observability + cert.projector.transpose() * cert.projector;
  cert.lyapunov = 0.5 * (cert.lyapunov + cert.lyapunov.transpose()).eval();
  cert.residual =
      (a.transpose() * cert.lyapunov + cert.lyapunov * a + ctc).norm();
  return cert;
}

bool verify_lyapunov_witness(const Matrix& a, const Matrix& c, const Matrix& p,
                             const ToleranceConfig& tol) {
  if (p.rows() != a.rows() || p.cols() != a.cols() || c.cols() != a.cols()) {
    throw Error(ErrorKind::InvalidArgument, "verify_lyapunov_witness: shape mismatch");
  }
  if (!is_symmetric(p, tol)) return false;
  if (!definiteness_test(p, Definiteness::PositiveDefinite, tol).holds) return false;
  const Matrix ctc = c.transpose() * c;
  const double residual = (a.transpose() * p + p * a + ctc).norm();
  const double scale = std::max({ctc.norm(), a.norm() * p.norm(), 1e-300});
  if (residual > tol.res * scale) return false;
  return is_semidetectable(a, c, tol);
}

}  // namespace lqs
