#pragma once

// Executable predicates for semistability and the semi- notions of
// stabilizability, detectability, controllability and observability, plus
// Lyapunov certificates of semistability.

#include <vector>

#include "lqs/error.hpp"
#include "lqs/matcore.hpp"

namespace lqs {

struct StabilityVerdict {
  bool semistable = false;
  SpectralReport spectrum;
};

/// True iff no eigenvalue is unstable or nonzero on the imaginary axis and
/// the zero eigenvalue (when present) is semisimple.
StabilityVerdict is_semistable(const Matrix& a, const ToleranceConfig& tol = {});

enum class FrequencyMode {
  Exact,  ///< test only at the near-imaginary eigenvalues of A
  Grid,   ///< test at ±ω for every ω in a user-supplied set
};

struct FrequencyOptions {
  FrequencyMode mode = FrequencyMode::Exact;
  std::vector<double> frequencies;
};

/// Largest rank deficit n - rank[B, jωI - A] over the tested frequencies.
int semistabilizability_deficit(const Matrix& a, const Matrix& b,
                                const ToleranceConfig& tol = {},
                                const FrequencyOptions& freq = {});

bool is_semistabilizable(const Matrix& a, const Matrix& b,
                         const ToleranceConfig& tol = {},
                         const FrequencyOptions& freq = {});

bool is_semidetectable(const Matrix& a, const Matrix& c,
                       const ToleranceConfig& tol = {},
                       const FrequencyOptions& freq = {});

/// Orthonormal basis of R([B, AB, ..., A^{n-1}B]), built one power at a
/// time with re-orthogonalization so large powers never overflow.
Matrix controllable_subspace(const Matrix& a, const Matrix& b,
                             const ToleranceConfig& tol = {});

/// span ∪ R(A^{i-1}B) == R(A).
bool is_semicontrollable(const Matrix& a, const Matrix& b,
                         const ToleranceConfig& tol = {});

/// ∩ N(CA^{i-1}) == N(A), via duality with semicontrollability.
bool is_semiobservable(const Matrix& a, const Matrix& c,
                       const ToleranceConfig& tol = {});

/// The controllable subspace is asymptotically stable, i.e. e^{At}B -> 0.
bool is_completely_unstabilizable(const Matrix& a, const Matrix& b,
                                  const ToleranceConfig& tol = {});

struct SemistabilityCertificate {
  Matrix outputMap;     ///< C (always A)
  Matrix lyapunov;      ///< P = P_hat + L^T L, positive definite
  Matrix groupInverse;  ///< A^#
  Matrix projector;     ///< L = I - A A^#
  double residual = 0.0;  ///< ||A^T P + P A + C^T C||_F
};

class NotSemistableError : public Error {
 public:
  explicit NotSemistableError(SpectralReport report)
      : Error(ErrorKind::NotSemistable, "matrix is not semistable"),
        report_(std::move(report)) {}
  const SpectralReport& report() const noexcept { return report_; }

 private:
  SpectralReport report_;
};

/// Builds a witness (C, P) with C = A. Throws NotSemistableError otherwise.
SemistabilityCertificate certify_semistability(const Matrix& a,
                                               const ToleranceConfig& tol = {});

/// P > 0, A^T P + P A + C^T C = 0 within tolerance, and (A, C) semidetectable.
bool verify_lyapunov_witness(const Matrix& a, const Matrix& c, const Matrix& p,
                             const ToleranceConfig& tol = {});

}  // namespace lqs
