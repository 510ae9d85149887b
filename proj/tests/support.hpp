#pragma once

// Shared corpus builders for the unit and acceptance tests.

#include <cstdint>
#include <random>
#include <string>

#include "lqs/commands.hpp"
#include "lqs/matcore.hpp"
#include "lqs/netmodel.hpp"
#include "lqs/problem_io.hpp"

namespace lqs::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c,
                            double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

/// Well-conditioned random similarity transform.
inline Matrix random_similarity(std::mt19937_64& rng, Eigen::Index n) {
  return Matrix::Identity(n, n) + 0.4 * random_matrix(rng, n, n) / std::sqrt(double(n));
}

/// Hurwitz block with eigenvalue real parts in [-3, -0.3].
inline Matrix random_hurwitz(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> re(-3.0, -0.3), im(-2.0, 2.0);
  Matrix h = Matrix::Zero(n, n);
  Eigen::Index i = 0;
  while (i < n) {
    if (i + 1 < n && rng() % 2 == 0) {
      const double a = re(rng), b = im(rng);
      h(i, i) = a;
      h(i + 1, i + 1) = a;
      h(i, i + 1) = b;
      h(i + 1, i) = -b;
      i += 2;
    } else {
      h(i, i) = re(rng);
      ++i;
    }
  }
  const Matrix s = random_similarity(rng, n);
  return s * h * s.inverse();
}

struct SemistableSample {
  Matrix a;       ///< S blockdiag(H, 0) S^{-1}
  Matrix s;       ///< the similarity
  int nullity = 0;
  double slowest = 0.0;  ///< smallest |Re λ| over the nonzero spectrum
};

/// Semistable A = S blockdiag(H, 0_k) S^{-1}, n <= maxN, 0 <= k < n.
inline SemistableSample random_semistable(std::mt19937_64& rng, int maxN = 6,
                                          int minN = 2) {
  std::uniform_int_distribution<int> nd(minN, maxN);
  const int n = nd(rng);
  std::uniform_int_distribution<int> kd(0, n - 1);
  const int k = kd(rng);
  const int m = n - k;
  std::uniform_real_distribution<double> re(-3.0, -0.3);
  Matrix h = Matrix::Zero(m, m);
  double slowest = 1e300;
  for (int i = 0; i < m; ++i) {
    h(i, i) = re(rng);
    slowest = std::min(slowest, -h(i, i));
  }
  h += 0.3 * Matrix(random_matrix(rng, m, m).triangularView<Eigen::StrictlyUpper>());
  Matrix blk = Matrix::Zero(n, n);
  blk.topLeftCorner(m, m) = h;
  const Matrix s = random_similarity(rng, n);
  return {s * blk * s.inverse(), s, k, slowest};
}

/// D with N(A^T) ⊆ N(D^T): D = A G for random G, plus optionally nothing else.
inline Matrix compatible_noise(std::mt19937_64& rng, const Matrix& a, Eigen::Index cols) {
  return a * random_matrix(rng, a.cols(), cols);
}

/// Random psd V = G G^T of random rank.
inline Matrix random_psd(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_int_distribution<int> rd(0, static_cast<int>(n));
  const Matrix g = random_matrix(rng, n, rd(rng));
  return g * g.transpose();
}

inline ProblemFile load_case(const std::string& name, const ToleranceConfig& tol = {}) {
  return parse_problem_file(benchmark_path(name), tol);
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace lqs::testing
