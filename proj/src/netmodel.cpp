#include "lqs/netmodel.hpp"

#include <string>

#include "lqs/error.hpp"

namespace lqs {

namespace {

std::string pair_name(int i, int j) {
  return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
}

bool allowed(WeightKind kind, const NetworkTopology& topo, int i, int j) {
  return kind == WeightKind::Gain ? topo.in_gain_pattern(i, j) : topo.linked(i, j);
}

void check_psd(const Matrix& v, const ToleranceConfig& tol, const char* what) {
  if (!is_symmetric(v, tol) ||
      !definiteness_test(v, Definiteness::PositiveSemidefinite, tol).holds) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + ": must be symmetric positive semidefinite");
  }
}

}  // namespace

NetworkTopology::NetworkTopology(Eigen::MatrixXi adjacency, int blockDim)
    : adjacency_(std::move(adjacency)), blockDim_(blockDim) {
  if (adjacency_.rows() == 0 || adjacency_.rows() != adjacency_.cols()) {
    throw Error(ErrorKind::InvalidArgument, "adjacency must be square and non-empty");
  }
  if (blockDim_ < 1) {
    throw Error(ErrorKind::InvalidArgument, "block dimension must be >= 1");
  }
  for (Eigen::Index i = 0; i < adjacency_.size(); ++i) {
    const int e = adjacency_.data()[i];
    if (e != 0 && e != 1) {
      throw Error(ErrorKind::InvalidArgument, "adjacency entries must be 0 or 1");
    }
  }
}

WeightSet WeightSet::from_scalar_table(WeightKind kind,
                                       const NetworkTopology& topology,
                                       const Matrix& table) {
  const int n = topology.nodes();
  const int q = topology.block_dim();
  if (table.rows() != n || table.cols() != n) {
    throw Error(ErrorKind::InvalidArgument, "weight table must be n x n");
  }
  WeightSet out(kind, q);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (allowed(kind, topology, i, j)) {
        out.set(i, j, table(i, j) * Matrix::Identity(q, q));
      } else if (table(i, j) != 0.0) {
        throw Error(ErrorKind::InvalidArgument,
                    "weight " + pair_name(i, j) + " lies outside the topology");
      }
    }
  }
  return out;
}

void WeightSet::set(int i, int j, Matrix block) {
  if (block.rows() != blockDim_ || block.cols() != blockDim_) {
    throw Error(ErrorKind::InvalidArgument,
                "weight block " + pair_name(i, j) + " has the wrong size");
  }
  blocks_[{i, j}] = std::move(block);
}

const Matrix* WeightSet::find(int i, int j) const {
  auto it = blocks_.find({i, j});
  return it == blocks_.end() ? nullptr : &it->second;
}

Matrix assemble_system(const NetworkTopology& topology, const WeightSet& weights) {
  const int n = topology.nodes();
  const int q = topology.block_dim();
  if (weights.block_dim() != q) {
    throw Error(ErrorKind::InvalidArgument, "weight block size differs from topology");
  }
  for (const auto& [key, block] : weights.blocks()) {
    const auto [i, j] = key;
    if (i < 0 || j < 0 || i >= n || j >= n ||
        (!allowed(weights.kind(), topology, i, j) && block.norm() != 0.0)) {
      throw Error(ErrorKind::InvalidArgument,
                  "weight " + pair_name(i, j) + " lies outside the topology");
    }
  }
  Matrix m = Matrix::Zero(n * q, n * q);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || !topology.linked(i, j)) continue;
      if (const Matrix* w = weights.find(j, i)) m.block(i * q, j * q, q, q) = *w;
      if (const Matrix* w = weights.find(i, j)) m.block(i * q, i * q, q, q) -= *w;
    }
    const double self = weights.kind() == WeightKind::Gain || topology.linked(i, i);
    if (const Matrix* w = weights.find(i, i); w != nullptr && self != 0.0) {
      m.block(i * q, i * q, q, q) += *w;
    }
  }
  return m;
}

WeightSet gain_weights_from_matrix(const NetworkTopology& topology,
                                   const Matrix& gain) {
  const int n = topology.nodes();
  const int q = topology.block_dim();
  if (gain.rows() != n * q || gain.cols() != n * q) {
    throw Error(ErrorKind::InvalidArgument, "gain matrix has the wrong size");
  }
  if (!respects_pattern(gain, topology)) {
    throw Error(ErrorKind::InvalidArgument, "gain matrix violates the topology");
  }
  WeightSet out(WeightKind::Gain, q);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || !topology.linked(i, j)) continue;
      // K(i, j) carries k_ji, which only exists when adj(j, i) = 1 as well.
      const Matrix block = gain.block(i * q, j * q, q, q);
      if (topology.linked(j, i)) {
        out.set(j, i, block);
      } else if (block.norm() != 0.0) {
        throw Error(ErrorKind::InvalidArgument,
                    "gain entry " + pair_name(i, j) +
                        " needs the reverse edge to be representable");
      }
    }
  }
  // Weights on one-way edges only shift the diagonal; they are folded into
  // k_ii and left at zero.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && topology.linked(i, j) && out.find(i, j) == nullptr) {
        out.set(i, j, Matrix::Zero(q, q));
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    Matrix self = gain.block(i * q, i * q, q, q);
    for (int r = 0; r < n; ++r) {
      if (r != i && topology.linked(i, r)) self += *out.find(i, r);
    }
    out.set(i, i, self);
  }
  return out;
}

Matrix closed_loop(const Matrix& a, const Matrix& k) {
  if (a.rows() != k.rows() || a.cols() != k.cols()) {
    throw Error(ErrorKind::InvalidArgument, "closed_loop: shape mismatch");
  }
  return a + k;
}

Matrix project_to_pattern(const Matrix& m, const NetworkTopology& topology) {
  const int n = topology.nodes();
  const int q = topology.block_dim();
  if (m.rows() != n * q || m.cols() != n * q) {
    throw Error(ErrorKind::InvalidArgument, "project_to_pattern: shape mismatch");
  }
  Matrix out = m;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && !topology.linked(i, j)) out.block(i * q, j * q, q, q).setZero();
    }
  }
  return out;
}

bool respects_pattern(const Matrix& m, const NetworkTopology& topology) {
  return (project_to_pattern(m, topology) - m).cwiseAbs().maxCoeff() == 0.0;
}

CostMatrices cost_matrices(const Matrix& e1, const Matrix& e2,
                           const ToleranceConfig& tol) {
  if (e1.cols() != e2.cols()) {
    throw Error(ErrorKind::InvalidArgument, "E1 and E2 need the same column count");
  }
  if (e1.rows() != e2.rows()) {
    throw Error(ErrorKind::InvalidArgument, "E1 and E2 need the same row count");
  }
  const double cross = (e1.transpose() * e2).norm();
  if (cross > tol.res * std::max(e1.norm() * e2.norm(), 1e-300) && cross > 0.0) {
    throw Error(ErrorKind::InvalidArgument, "E1^T E2 must vanish (orthogonality)");
  }
  return {e1.transpose() * e1, e2.transpose() * e2};
}

WeightSet feasible_seed_gain(const NetworkTopology& topology,
                             const WeightSet& plant, const WeightSet& noise,
                             const std::vector<double>& c) {
  const int n = topology.nodes();
  const int q = topology.block_dim();
  if (static_cast<int>(c.size()) != n) {
    throw Error(ErrorKind::InvalidArgument, "feasible_seed_gain: need one scale per node");
  }
  for (double cj : c) {
    if (cj == 0.0) {
      throw Error(ErrorKind::InvalidArgument, "feasible_seed_gain: scales must be nonzero");
    }
  }
  const Matrix zero = Matrix::Zero(q, q);
  WeightSet out(WeightKind::Gain, q);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!topology.in_gain_pattern(j, i)) continue;
      const Matrix* a = plant.find(j, i);
      const Matrix* d = noise.find(j, i);
      out.set(j, i, -(a ? *a : zero) + c[j] * (d ? *d : zero));
    }
  }
  return out;
}

NetworkProblem NetworkProblem::build(NetworkTopology topology, WeightSet plantWeights,
                                     WeightSet noiseWeights, const Matrix& e1,
                                     const Matrix& e2, Vector mu0, Matrix v,
                                     const ToleranceConfig& tol) {
  const int nq = topology.state_dim();
  if (e1.cols() != nq) {
    throw Error(ErrorKind::InvalidArgument, "E1/E2 need n*q columns");
  }
  Matrix a = assemble_system(topology, plantWeights);
  Matrix d = assemble_system(topology, noiseWeights);
  CostMatrices cost = cost_matrices(e1, e2, tol);
  if (mu0.size() == 0) mu0 = Vector::Zero(nq);
  if (v.size() == 0) v = Matrix::Zero(nq, nq);
  if (mu0.size() != nq || v.rows() != nq || v.cols() != nq) {
    throw Error(ErrorKind::InvalidArgument, "mu0 / V have the wrong size");
  }
  check_psd(v, tol, "V");
  return NetworkProblem{std::move(topology), std::move(plantWeights),
                        std::move(noiseWeights), std::move(a), std::move(d),
                        std::move(cost), std::move(mu0), std::move(v)};
}

SystemRealization SystemRealization::close(const NetworkProblem& problem,
                                           const Matrix& gain) {
  const int nq = problem.topology.state_dim();
  if (gain.rows() != nq || gain.cols() != nq) {
    throw Error(ErrorKind::InvalidArgument, "gain matrix has the wrong size");
  }
  if (!respects_pattern(gain, problem.topology)) {
    throw Error(ErrorKind::InvalidArgument, "gain matrix violates the topology");
  }
  return SystemRealization{problem.topology,
                           problem.plant,
                           problem.noise,
                           gain,
                           closed_loop(problem.plant, gain),
                           problem.cost.stateWeight,
                           problem.cost.controlWeight,
                           problem.initialMean,
                           problem.initialCovariance};
}

SystemRealization SystemRealization::from_matrices(const Matrix& plant,
                                                   const Matrix& noise,
                                                   const Matrix& gain,
                                                   const Matrix& r1,
                                                   const Matrix& r2, Vector mu0,
                                                   Matrix v,
                                                   const ToleranceConfig& tol) {
  const Eigen::Index n = plant.rows();
  if (plant.cols() != n || noise.rows() != n || gain.rows() != n ||
      gain.cols() != n || r1.rows() != n || r1.cols() != n || r2.rows() != n ||
      r2.cols() != n) {
    throw Error(ErrorKind::InvalidArgument, "from_matrices: shape mismatch");
  }
  if (mu0.size() == 0) mu0 = Vector::Zero(n);
  if (v.size() == 0) v = Matrix::Zero(n, n);
  check_psd(v, tol, "V");
  check_psd(r1, tol, "R1");
  check_psd(r2, tol, "R2");
  NetworkTopology full(Eigen::MatrixXi::Ones(n, n));
  return SystemRealization{std::move(full), plant, noise, gain,
                           closed_loop(plant, gain), r1, r2, std::move(mu0),
                           std::move(v)};
}

}  // namespace lqs
