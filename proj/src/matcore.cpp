#include "lqs/matcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lqs/error.hpp"

namespace lqs {

namespace {

double relative_floor(double scale, double tol) {
  return scale > 0.0 ? tol * scale : tol;
}

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + ": matrix must be square and non-empty");
  }
}

// Pade approximant of degree m for exp(a), Higham (2005) coefficient tables.
Matrix pade_exp(const Matrix& a, int m) {
  const Eigen::Index n = a.rows();
  const Matrix ident = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  Matrix u, v;
  if (m == 13) {
    static constexpr std::array<double, 14> b = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0,  129060195264000.0,   10559470521600.0,
        670442572800.0,      33522128640.0,       1323241920.0,
        40840800.0,          960960.0,            16380.0,
        182.0,               1.0};
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix inner_u = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
    u = a * (inner_u + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
    v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
        b[2] * a2 + b[0] * ident;
  } else {
    std::vector<double> b;
    switch (m) {
      case 3: b = {120.0, 60.0, 12.0, 1.0}; break;
      case 5: b = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0}; break;
      case 7:
        b = {17297280.0, 8648640.0, 1995840.0, 277200.0,
             25200.0,    1512.0,    56.0,      1.0};
        break;
      default:
        b = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
             30270240.0,    2162160.0,    110880.0,     3960.0,
             90.0,          1.0};
        break;
    }
    Matrix power = ident;
    Matrix u_even = b[1] * ident;
    v = b[0] * ident;
    for (int k = 2; k <= m; k += 2) {
      power = power * a2;
      u_even += b[k + 1] * power;
      v += b[k] * power;
    }
    u = a * u_even;
  }
  return (v - u).partialPivLu().solve(v + u);
}

template <typename M>
int rank_from_singular_values(const M& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<M> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cutoff = tol * s(0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) ++r;
  }
  return r;
}

}  // namespace

ToleranceConfig ToleranceConfig::printed_precision() {
  ToleranceConfig t;
  t.rank = 1e-6;
  t.imag = 1e-6;
  t.res = 1e-6;
  t.psd = 1e-6;
  t.sym = 1e-8;
  return t;
}

void ToleranceConfig::validate() const {
  if (!(rank > 0 && sym > 0 && psd > 0 && imag > 0 && res > 0)) {
    throw Error(ErrorKind::InvalidArgument,
                "all tolerances must be strictly positive");
  }
}

int SpectralReport::count(EigenClass c) const {
  return static_cast<int>(std::count(classes.begin(), classes.end(), c));
}

Matrix mat_exp(const Matrix& a, double t) {
  require_square(a, "mat_exp");
  if (!std::isfinite(t)) {
    throw Error(ErrorKind::InvalidArgument, "mat_exp: t must be finite");
  }
  const Matrix at = a * t;
  const double norm1 = at.cwiseAbs().colwise().sum().maxCoeff();
  static constexpr std::array<std::pair<int, double>, 4> kLowOrder = {{
      {3, 1.495585217958292e-2},
      {5, 2.539398330063230e-1},
      {7, 9.504178996162932e-1},
      {9, 2.097847961257068e0},
  }};
  for (const auto& [m, theta] : kLowOrder) {
    if (norm1 <= theta) return pade_exp(at, m);
  }
  constexpr double kTheta13 = 5.371920351148152;
  int squarings = 0;
  if (norm1 > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  }
  Matrix r = pade_exp(at / std::ldexp(1.0, squarings), 13);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

int numerical_rank(const Matrix& m, const ToleranceConfig& tol) {
  return rank_from_singular_values(m, tol.rank);
}

int numerical_rank(const ComplexMatrix& m, const ToleranceConfig& tol) {
  return rank_from_singular_values(m, tol.rank);
}

Matrix subspace_basis(const Matrix& m, Subspace kind,
                      const ToleranceConfig& tol) {
  if (m.size() == 0) {
    return Matrix(kind == Subspace::Null ? m.cols() : m.rows(), 0);
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int r = 0;
  if (s(0) > 0.0) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > tol.rank * s(0)) ++r;
    }
  }
  if (kind == Subspace::Range) return svd.matrixU().leftCols(r);
  return svd.matrixV().rightCols(m.cols() - r);
}

Matrix group_inverse(const Matrix& a, const ToleranceConfig& tol) {
  require_square(a, "group_inverse");
  const Eigen::Index n = a.rows();
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  if (s(0) > 0.0) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > tol.rank * s(0)) ++r;
    }
  }
  if (r == 0) return Matrix::Zero(n, n);

  // A = B C with B = U_r S_r (n x r) and C = V_r^T (r x n).
  const Matrix b = svd.matrixU().leftCols(r) * s.head(r).asDiagonal();
  const Matrix c = svd.matrixV().leftCols(r).transpose();
  // CB = (V_r^T U_r) S_r; its cosine factor is singular exactly when R(A)
  // meets N(A), i.e. when the index of A exceeds one.
  const Matrix cosines = c * svd.matrixU().leftCols(r);
  Eigen::JacobiSVD<Matrix> csvd(cosines);
  if (csvd.singularValues()(r - 1) <= tol.rank) {
    throw Error(ErrorKind::NotGroupInvertible,
                "group_inverse: matrix is not group invertible (index > 1)");
  }
  const Matrix cb_inv = (c * b).partialPivLu().inverse();
  return b * cb_inv * cb_inv * c;
}

Matrix limit_projector(const Matrix& a, const ToleranceConfig& tol) {
  const Eigen::Index n = a.rows();
  return Matrix::Identity(n, n) - a * group_inverse(a, tol);
}

SpectralReport spectral_classification(const Matrix& a,
                                       const ToleranceConfig& tol) {
  require_square(a, "spectral_classification");
  Eigen::EigenSolver<Matrix> solver(a, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::EigenFailure,
                "spectral_classification: eigenvalue iteration did not converge");
  }
  const double band = relative_floor(a.norm(), tol.imag);
  SpectralReport report;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const std::complex<double> lambda = solver.eigenvalues()(i);
    report.eigenvalues.push_back(lambda);
    EigenClass c;
    if (std::abs(lambda) <= band) {
      c = EigenClass::Zero;
    } else if (lambda.real() < -band) {
      c = EigenClass::StrictlyStable;
    } else if (std::abs(lambda.real()) <= band) {
      c = EigenClass::PureImaginary;
    } else {
      c = EigenClass::Unstable;
    }
    report.classes.push_back(c);
  }
  report.rank = numerical_rank(a, tol);
  report.zeroSemisimple = report.rank == numerical_rank(Matrix(a * a), tol);
  return report;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix kronecker_sum(const Matrix& a) {
  require_square(a, "kronecker_sum");
  const Matrix ident = Matrix::Identity(a.rows(), a.rows());
  return kron(a, ident) + kron(ident, a);
}

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector& v, Eigen::Index rows) {
  if (rows <= 0 || v.size() % rows != 0) {
    throw Error(ErrorKind::InvalidArgument, "unvec: length not a multiple of rows");
  }
  return Eigen::Map<const Matrix>(v.data(), rows, v.size() / rows);
}

bool is_symmetric(const Matrix& m, const ToleranceConfig& tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).norm() <= relative_floor(m.norm(), tol.sym);
}

LyapunovLeastSquares lyapunov_least_squares(const Matrix& a, const Matrix& m,
                                            const ToleranceConfig& tol) {
  require_square(a, "lyapunov_least_squares");
  if (m.rows() != a.rows() || m.cols() != a.cols()) {
    throw Error(ErrorKind::InvalidArgument,
                "lyapunov_least_squares: shape mismatch between A and M");
  }
  const Eigen::Index n = a.rows();
  const Matrix op = kronecker_sum(a);
  const Vector rhs = -vec(m);

  Vector x;
  Eigen::PartialPivLU<Matrix> lu(op);
  if (lu.rcond() > 1e3 * tol.rank) {
    x = lu.solve(rhs);
  } else if (op.rows() <= 64) {
    Eigen::JacobiSVD<Matrix> svd(op, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(tol.rank);
    x = svd.solve(rhs);
  } else {
    Eigen::BDCSVD<Matrix> svd(op, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(tol.rank);
    x = svd.solve(rhs);
  }
  LyapunovLeastSquares out;
  out.solution = unvec(x, n);
  const Matrix r = a * out.solution + out.solution * a.transpose() + m;
  out.residual = r.norm() / std::max(m.norm(), 1e-300);
  if (m.norm() == 0.0) out.residual = r.norm();
  return out;
}

Matrix solve_singular_lyapunov(const Matrix& a, const Matrix& m,
                               const ToleranceConfig& tol) {
  require_square(a, "solve_singular_lyapunov");
  if (!is_symmetric(m, tol)) {
    throw Error(ErrorKind::InvalidArgument,
                "solve_singular_lyapunov: right-hand side must be symmetric");
  }
  const SpectralReport spec = spectral_classification(a, tol);
  if (spec.count(EigenClass::Unstable) > 0 ||
      spec.count(EigenClass::PureImaginary) > 0 || !spec.zeroSemisimple) {
    throw Error(ErrorKind::NotSemistable,
                "solve_singular_lyapunov: coefficient matrix is not semistable");
  }
  if (m.norm() == 0.0) return Matrix::Zero(a.rows(), a.cols());

  LyapunovLeastSquares ls = lyapunov_least_squares(a, m, tol);
  if (ls.residual > tol.res) {
    throw Error(ErrorKind::InconsistentSystem,
                "no solution: right-hand side is not in the range of the "
                "Lyapunov operator (N(A^T) not contained in N(M))");
  }
  Matrix p = std::move(ls.solution);
  if (spec.rank < a.rows()) {
    // Remove the component along N(A ⊕ A); its projector is L ⊗ L.
    const Matrix proj = limit_projector(a, tol);
    p -= proj * p * proj.transpose();
  }
  return 0.5 * (p + p.transpose());
}

DefinitenessResult definiteness_test(const Matrix& s, Definiteness mode,
                                     const ToleranceConfig& tol) {
  if (!is_symmetric(s, tol)) {
    throw Error(ErrorKind::InvalidArgument,
                "definiteness_test: matrix is not symmetric");
  }
  DefinitenessResult out;
  const Eigen::Index n = s.rows();
  if (mode == Definiteness::PositiveDefinite) {
    // Column-by-column Cholesky; the indicator is the first failing pivot.
    // A pivot at roundoff level counts as a breakdown, otherwise a singular
    // psd matrix can slip through on the rounding of the earlier columns.
    const double pivotFloor =
        static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
        s.cwiseAbs().maxCoeff();
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double d = s(j, j) - l.row(j).head(j).squaredNorm();
      if (!(d > pivotFloor)) {
        out.indicator = static_cast<int>(j) + 1;
        return out;
      }
      l(j, j) = std::sqrt(d);
      for (Eigen::Index i = j + 1; i < n; ++i) {
        l(i, j) = (s(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
      }
    }
    out.holds = true;
    return out;
  }
  const double scale = s.norm();
  if (scale == 0.0) {
    out.holds = true;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
  const double floor = -tol.psd * scale;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (eig.eigenvalues()(i) < floor) ++out.indicator;
  }
  out.holds = out.indicator == 0;
  return out;
}

}  // namespace lqs
