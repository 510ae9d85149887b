#pragma once

// Network topology data model and the topology-preserving assembly of the
// plant, noise and gain matrices.

#include <map>
#include <utility>
#include <vector>

#include "lqs/matcore.hpp"

namespace lqs {

/// Directed graph over n nodes, each carrying a q-dimensional value.
/// adjacency(i, j) = 1 means node i listens to node j (edge (j, i)).
class NetworkTopology {
 public:
  NetworkTopology(Eigen::MatrixXi adjacency, int blockDim = 1);

  int nodes() const { return static_cast<int>(adjacency_.rows()); }
  int block_dim() const { return blockDim_; }
  int state_dim() const { return nodes() * blockDim_; }
  const Eigen::MatrixXi& adjacency() const { return adjacency_; }
  bool linked(int i, int j) const { return adjacency_(i, j) != 0; }

  /// Gain weights may sit on any edge and on every node's own block.
  bool in_gain_pattern(int i, int j) const { return i == j || linked(i, j); }

 private:
  Eigen::MatrixXi adjacency_;
  int blockDim_;
};

enum class WeightKind { Plant, Noise, Gain };

/// Edge-indexed weights w_ij, each a q x q block. Plant and noise weights
/// live on adjacency entries only; gain weights additionally on every
/// self-pair.
class WeightSet {
 public:
  WeightSet(WeightKind kind, int blockDim) : kind_(kind), blockDim_(blockDim) {}

  /// From an n x n table with table(i, j) = w_ij; scalars become w_ij * I_q.
  /// Nonzero entries outside the pattern are rejected.
  static WeightSet from_scalar_table(WeightKind kind,
                                     const NetworkTopology& topology,
                                     const Matrix& table);

  WeightKind kind() const { return kind_; }
  int block_dim() const { return blockDim_; }

  void set(int i, int j, Matrix block);
  /// Nullptr when (i, j) carries no weight.
  const Matrix* find(int i, int j) const;
  const std::map<std::pair<int, int>, Matrix>& blocks() const { return blocks_; }

 private:
  WeightKind kind_;
  int blockDim_;
  std::map<std::pair<int, int>, Matrix> blocks_;
};

/// Blockwise assembly of the network matrix:
///   M(i, j) = adj(i, j) w_ji                        for i != j,
///   M(i, i) = c_i w_ii - sum_{r != i} adj(i, r) w_ir,
/// with c_i = adj(i, i) for plant/noise weights and c_i = 1 for gains.
Matrix assemble_system(const NetworkTopology& topology, const WeightSet& weights);

/// Inverse of assemble_system for gain weights.
WeightSet gain_weights_from_matrix(const NetworkTopology& topology,
                                   const Matrix& gain);

Matrix closed_loop(const Matrix& a, const Matrix& k);

/// Zeroes every off-diagonal block whose adjacency entry is 0.
Matrix project_to_pattern(const Matrix& m, const NetworkTopology& topology);

bool respects_pattern(const Matrix& m, const NetworkTopology& topology);

struct CostMatrices {
  Matrix stateWeight;    ///< R1 = E1^T E1
  Matrix controlWeight;  ///< R2 = E2^T E2
};

/// Rejects E1, E2 whose cross term E1^T E2 is not numerically zero.
CostMatrices cost_matrices(const Matrix& e1, const Matrix& e2,
                           const ToleranceConfig& tol = {});

/// Gain weights k_ji = -a_ji + c_j d_ji. The closed loop then satisfies
/// Ã^T = (diag(c) ⊗ I_q) D^T, so (Ã, D) is semicontrollable.
WeightSet feasible_seed_gain(const NetworkTopology& topology,
                             const WeightSet& plant, const WeightSet& noise,
                             const std::vector<double>& c);

/// Plant data shared by every candidate gain.
struct NetworkProblem {
  NetworkTopology topology;
  WeightSet plantWeights;
  WeightSet noiseWeights;
  Matrix plant;    ///< A(G)
  Matrix noise;    ///< D(G)
  CostMatrices cost;
  Vector initialMean;        ///< mu0
  Matrix initialCovariance;  ///< V (psd)

  static NetworkProblem build(NetworkTopology topology, WeightSet plantWeights,
                              WeightSet noiseWeights, const Matrix& e1,
                              const Matrix& e2, Vector mu0 = {}, Matrix v = {},
                              const ToleranceConfig& tol = {});
};

/// A problem closed with a particular gain.
struct SystemRealization {
  NetworkTopology topology;
  Matrix plant;
  Matrix noise;
  Matrix gain;
  Matrix closedLoop;
  Matrix stateWeight;
  Matrix controlWeight;
  Vector initialMean;
  Matrix initialCovariance;

  static SystemRealization close(const NetworkProblem& problem, const Matrix& gain);

  /// Raw matrices on a fully connected scalar topology, for systems that do
  /// not come from a weight table. Empty mu0 / V default to zero.
  static SystemRealization from_matrices(const Matrix& plant, const Matrix& noise,
                                         const Matrix& gain, const Matrix& r1,
                                         const Matrix& r2, Vector mu0 = {},
                                         Matrix v = {},
                                         const ToleranceConfig& tol = {});
};

}  // namespace lqs
