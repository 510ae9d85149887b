#include "doctest.h"

#include "lqs/error.hpp"
#include "lqs/netmodel.hpp"
#include "lqs/semistab.hpp"
#include "support.hpp"

using namespace lqs;

namespace {

Eigen::MatrixXi adj2() {
  Eigen::MatrixXi a(2, 2);
  a << 0, 1, 1, 0;
  return a;
}

Matrix table2(double w12, double w21) {
  Matrix t = Matrix::Zero(2, 2);
  t(0, 1) = w12;
  t(1, 0) = w21;
  return t;
}

// Hand expansion of the assembly rule for scalar states.
Matrix assemble_by_hand(const Eigen::MatrixXi& adj, const Matrix& w, bool gain) {
  const Eigen::Index n = adj.rows();
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = (gain ? 1.0 : adj(i, i)) * w(i, i);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      m(i, j) = adj(i, j) * w(j, i);
      diag -= adj(i, j) * w(i, j);
    }
    m(i, i) = diag;
  }
  return m;
}

}  // namespace

TEST_SUITE("netmodel") {

TEST_CASE("topology validation") {
  CHECK_THROWS_AS(NetworkTopology(Eigen::MatrixXi::Constant(2, 2, 2)), Error);
  CHECK_THROWS_AS(NetworkTopology(Eigen::MatrixXi::Ones(2, 3)), Error);
  CHECK_THROWS_AS(NetworkTopology(Eigen::MatrixXi::Ones(2, 2), 0), Error);
  const NetworkTopology t(adj2(), 3);
  CHECK(t.state_dim() == 6);
  CHECK(t.in_gain_pattern(0, 0));
  CHECK_FALSE(t.linked(0, 0));
}

TEST_CASE("assemble_system: 2-node example, scalar and block") {
  const NetworkTopology t(adj2());
  const WeightSet a = WeightSet::from_scalar_table(WeightKind::Plant, t, table2(-1, 1));
  Matrix expect(2, 2);
  expect << 1, 1, -1, -1;
  CHECK((assemble_system(t, a) - expect).norm() == 0.0);

  const NetworkTopology t2(adj2(), 2);
  const WeightSet a2 = WeightSet::from_scalar_table(WeightKind::Plant, t2, table2(-1, 1));
  const Matrix big = assemble_system(t2, a2);
  CHECK((big - kron(expect, Matrix::Identity(2, 2))).norm() == 0.0);
}

TEST_CASE("assemble_system: zero weights and off-pattern rejection") {
  const NetworkTopology t(adj2());
  CHECK(assemble_system(t, WeightSet(WeightKind::Plant, 1)).norm() == 0.0);
  Matrix bad = table2(1, 1);
  bad(0, 0) = 2.0;  // adjacency(0,0) = 0
  try {
    WeightSet::from_scalar_table(WeightKind::Plant, t, bad);
    FAIL("off-pattern weight accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("(1,1)") != std::string::npos);
  }
  WeightSet manual(WeightKind::Noise, 1);
  manual.set(0, 0, Matrix::Ones(1, 1));
  CHECK_THROWS_AS(assemble_system(t, manual), Error);
}

TEST_CASE("assemble_system matches the hand rule on the 4-node benchmark") {
  const ProblemFile pf = lqs::testing::load_case("4node");
  const NetworkProblem p = pf.to_problem();
  CHECK((p.plant - assemble_by_hand(pf.adjacency, pf.aWeights, false)).norm() == 0.0);
  CHECK((p.noise - assemble_by_hand(pf.adjacency, pf.dWeights, false)).norm() == 0.0);
  CHECK(respects_pattern(p.plant, p.topology));
  // Entry (1,2) of the plant carries a_21 = 3; (3,1) and (1,3) are off-pattern.
  CHECK(p.plant(0, 1) == 3.0);
  CHECK(p.plant(2, 0) == 0.0);
  CHECK(p.plant(0, 2) == 0.0);
  // a_11 - a_12 - a_14 = 1 - 3 - 2.
  CHECK(p.plant(0, 0) == -4.0);
}

TEST_CASE("structure preservation and row sums on random topologies") {
  std::mt19937_64 rng(21);
  std::bernoulli_distribution edge(0.4);
  std::uniform_real_distribution<double> w(-3, 3);
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + k % 6;
    Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(n, n);
    Matrix tab = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && edge(rng)) {
          adj(i, j) = 1;
          tab(i, j) = w(rng);
        }
      }
    }
    const NetworkTopology t(adj);
    const Matrix m = assemble_system(t, WeightSet::from_scalar_table(WeightKind::Plant, t, tab));
    CHECK((project_to_pattern(m, t) - m).norm() == 0.0);
    CHECK((m - assemble_by_hand(adj, tab, false)).norm() == 0.0);
    // Zero self-weights: M 1 = (incoming weights) - (outgoing weights) per row.
    const Vector ones = Vector::Ones(n);
    for (int i = 0; i < n; ++i) {
      double expect = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j != i && adj(i, j)) expect += tab(j, i) - tab(i, j);
      }
      CHECK((m * ones)(i) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("gain weights round-trip through assembly") {
  const ProblemFile pf = lqs::testing::load_case("4node");
  const NetworkTopology t(pf.adjacency);
  const WeightSet kw = gain_weights_from_matrix(t, *pf.K);
  CHECK((assemble_system(t, kw) - *pf.K).norm() < 1e-12);

  const ProblemFile c2 = lqs::testing::load_case("2node");
  const NetworkTopology t2(c2.adjacency, c2.q);
  CHECK((assemble_system(t2, gain_weights_from_matrix(t2, *c2.K)) - *c2.K).norm() < 1e-12);

  // One-way edge: K(i, j) on it cannot be represented.
  Eigen::MatrixXi oneway(2, 2);
  oneway << 1, 1, 0, 1;
  Matrix k = Matrix::Zero(2, 2);
  k(0, 1) = 1.0;
  CHECK_THROWS_AS(gain_weights_from_matrix(NetworkTopology(oneway), k), Error);
  k(0, 1) = 0.0;
  k(0, 0) = -2.0;
  CHECK((assemble_system(NetworkTopology(oneway),
                         gain_weights_from_matrix(NetworkTopology(oneway), k)) - k)
            .norm() == 0.0);
}

TEST_CASE("closed_loop and project_to_pattern") {
  std::mt19937_64 rng(5);
  const Matrix a = lqs::testing::random_matrix(rng, 3, 3);
  CHECK((closed_loop(a, Matrix::Zero(3, 3)) - a).norm() == 0.0);
  CHECK(closed_loop(a, -a).norm() == 0.0);
  CHECK_THROWS_AS(closed_loop(a, Matrix::Zero(2, 2)), Error);

  const NetworkTopology full(Eigen::MatrixXi::Ones(3, 3));
  CHECK((project_to_pattern(a, full) - a).norm() == 0.0);
  const NetworkTopology diag(Eigen::MatrixXi::Identity(3, 3));
  const Matrix pd = project_to_pattern(a, diag);
  CHECK((pd - Matrix(a.diagonal().asDiagonal())).norm() == 0.0);
  CHECK((project_to_pattern(pd, diag) - pd).norm() == 0.0);

  const ProblemFile pf = lqs::testing::load_case("4node");
  const NetworkProblem p = pf.to_problem();
  const SystemRealization sys = SystemRealization::close(p, *pf.K);
  CHECK(is_semistable(sys.closedLoop).semistable);
  CHECK(respects_pattern(sys.closedLoop, p.topology));
}

TEST_CASE("cost_matrices") {
  const ProblemFile pf = lqs::testing::load_case("4node");
  const CostMatrices c = cost_matrices(pf.E1, pf.E2);
  CHECK((pf.E1.transpose() * pf.E2).norm() == 0.0);
  CHECK((c.stateWeight - pf.E1.transpose() * pf.E1).norm() == 0.0);
  CHECK(definiteness_test(c.stateWeight, Definiteness::PositiveSemidefinite).holds);
  CHECK(definiteness_test(c.controlWeight, Definiteness::PositiveSemidefinite).holds);
  const CostMatrices id = cost_matrices(Matrix::Identity(3, 3), Matrix::Zero(3, 3));
  CHECK((id.stateWeight - Matrix::Identity(3, 3)).norm() == 0.0);
  CHECK(id.controlWeight.norm() == 0.0);
  CHECK_THROWS_AS(cost_matrices(Matrix::Identity(3, 3), Matrix::Identity(3, 3)), Error);
  CHECK_THROWS_AS(cost_matrices(Matrix::Identity(3, 3), Matrix::Zero(3, 2)), Error);
}

TEST_CASE("feasible_seed_gain") {
  const ProblemFile pf = lqs::testing::load_case("4node");
  const NetworkProblem p = pf.to_problem();
  const std::vector<double> c{1.0, -2.0, 0.5, 3.0};
  const Matrix k = assemble_system(p.topology,
                                   feasible_seed_gain(p.topology, p.plantWeights, p.noiseWeights, c));
  const Matrix at = p.plant + k;
  Matrix cd = Matrix::Zero(4, 4);
  cd.diagonal() << 1.0, -2.0, 0.5, 3.0;
  CHECK((at.transpose() - cd * p.noise.transpose()).norm() < 1e-12);
  CHECK(is_semicontrollable(at, p.noise));

  // a = d, c = 1 gives K = 0.
  const WeightSet same = p.plantWeights;
  const Matrix k0 = assemble_system(
      p.topology, feasible_seed_gain(p.topology, same, same, std::vector<double>(4, 1.0)));
  CHECK(k0.norm() == 0.0);

  CHECK_THROWS_AS(feasible_seed_gain(p.topology, p.plantWeights, p.noiseWeights, {1, 0, 1, 1}),
                  Error);
  CHECK_THROWS_AS(feasible_seed_gain(p.topology, p.plantWeights, p.noiseWeights, {1, 1}), Error);
}

TEST_CASE("feasible_seed_gain is semicontrollable on 100 random problems") {
  std::mt19937_64 rng(77);
  std::bernoulli_distribution edge(0.5);
  std::uniform_real_distribution<double> w(-3, 3), cs(0.2, 3.0);
  int violations = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + k % 6;
    Eigen::MatrixXi adj = Eigen::MatrixXi::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (edge(rng)) adj(i, j) = adj(j, i) = 1;
      }
    }
    Matrix ta = Matrix::Zero(n, n), td = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (adj(i, j)) {
          ta(i, j) = w(rng);
          td(i, j) = w(rng);
        }
      }
    }
    const NetworkTopology t(adj);
    const WeightSet a = WeightSet::from_scalar_table(WeightKind::Plant, t, ta);
    const WeightSet d = WeightSet::from_scalar_table(WeightKind::Noise, t, td);
    std::vector<double> c(n);
    for (double& x : c) x = (rng() % 2 ? 1.0 : -1.0) * cs(rng);
    const Matrix at = assemble_system(t, a) + assemble_system(t, feasible_seed_gain(t, a, d, c));
    if (!is_semicontrollable(at, assemble_system(t, d))) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("NetworkProblem::build and SystemRealization validation") {
  const ProblemFile pf = lqs::testing::load_case("4node");
  const NetworkTopology t(pf.adjacency);
  auto a = WeightSet::from_scalar_table(WeightKind::Plant, t, pf.aWeights);
  auto d = WeightSet::from_scalar_table(WeightKind::Noise, t, pf.dWeights);
  Matrix v = -Matrix::Identity(4, 4);
  CHECK_THROWS_AS(NetworkProblem::build(t, a, d, pf.E1, pf.E2, {}, v), Error);
  const NetworkProblem p = NetworkProblem::build(t, a, d, pf.E1, pf.E2);
  CHECK(p.initialMean.norm() == 0.0);
  CHECK(p.initialCovariance.norm() == 0.0);
  Matrix offpattern = Matrix::Zero(4, 4);
  offpattern(0, 2) = 1.0;
  CHECK_THROWS_AS(SystemRealization::close(p, offpattern), Error);
}

}  // TEST_SUITE
