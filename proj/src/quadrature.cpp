#include <array>
#include <cmath>

#include "lqs/error.hpp"
#include "lqs/matcore.hpp"

namespace lqs {

namespace {

// 4-point Gauss-Legendre rule mapped to [0, 1].
constexpr std::array<double, 4> kNodes = {
    0.5 - 0.5 * 0.8611363115940526, 0.5 - 0.5 * 0.3399810435848563,
    0.5 + 0.5 * 0.3399810435848563, 0.5 + 0.5 * 0.8611363115940526};
constexpr std::array<double, 4> kWeights = {
    0.5 * 0.3478548451374538, 0.5 * 0.6521451548625461,
    0.5 * 0.6521451548625461, 0.5 * 0.3478548451374538};

}  // namespace

namespace detail {

Matrix gauss_legendre_gramian(const Matrix& a, const Matrix& m, double t,
                              int panels, const Matrix* subtract) {
  if (panels < 1) {
    throw Error(ErrorKind::InvalidArgument, "quadrature: panel count must be >= 1");
  }
  const Eigen::Index n = a.rows();
  Matrix acc = Matrix::Zero(n, n);
  if (t <= 0.0) return acc;
  const double h = t / panels;
  const Matrix step = mat_exp(a, h);
  std::array<Matrix, 4> node_exp;
  for (std::size_t i = 0; i < kNodes.size(); ++i) {
    node_exp[i] = mat_exp(a, kNodes[i] * h);
  }
  Matrix start = Matrix::Identity(n, n);
  for (int p = 0; p < panels; ++p) {
    for (std::size_t i = 0; i < kNodes.size(); ++i) {
      const Matrix f = node_exp[i] * start;
      Matrix g = f * m * f.transpose();
      if (subtract != nullptr) g -= *subtract;
      acc += (kWeights[i] * h) * g;
    }
    start = step * start;
  }
  return 0.5 * (acc + acc.transpose());
}

}  // namespace detail

QuadratureResult gramian_quadrature_oracle(const Matrix& a, const Matrix& m,
                                           double horizon, int steps) {
  if (a.rows() != a.cols() || m.rows() != a.rows() || m.cols() != a.cols()) {
    throw Error(ErrorKind::InvalidArgument, "gramian_quadrature_oracle: shape mismatch");
  }
  if (!(horizon > 0.0) || steps < 2) {
    throw Error(ErrorKind::InvalidArgument,
                "gramian_quadrature_oracle: need horizon > 0 and steps >= 2");
  }
  // The limiting integrand is approximated by its value at the horizon, so
  // the oracle never touches group inverses or Kronecker solves.
  const Matrix far = mat_exp(a, horizon);
  const Matrix tail = far * m * far.transpose();
  const Matrix mid = mat_exp(a, 0.5 * horizon);
  const Matrix tail_mid = mid * m * mid.transpose();

  QuadratureResult out;
  out.value = detail::gauss_legendre_gramian(a, m, horizon, steps, &tail);
  const Matrix coarse =
      detail::gauss_legendre_gramian(a, m, horizon, steps / 2, &tail);
  out.errorEstimate =
      (out.value - coarse).norm() + horizon * (tail - tail_mid).norm();
  return out;
}

}  // namespace lqs
