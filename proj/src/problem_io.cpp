#include "lqs/problem_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lqs/error.hpp"

namespace lqs {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::Parse, field + ": " + what);
}

const json& require(const json& root, const char* key) {
  if (!root.contains(key)) fail(key, "missing");
  return root.at(key);
}

int positive_int(const json& root, const char* key) {
  const json& v = require(root, key);
  if (!v.is_number_integer() || v.get<long long>() < 1) fail(key, "must be an integer >= 1");
  return v.get<int>();
}

std::string at_index(const std::string& field, std::size_t i) {
  return field + "[" + std::to_string(i) + "]";
}

std::string at_index(const std::string& field, std::size_t i, std::size_t j) {
  return at_index(field, i) + "[" + std::to_string(j) + "]";
}

Matrix numeric_matrix(const json& j, const std::string& field, Eigen::Index rows,
                      Eigen::Index cols) {
  Matrix m = matrix_from_json(j, field);
  if ((rows >= 0 && m.rows() != rows) || (cols >= 0 && m.cols() != cols)) {
    std::ostringstream os;
    os << "expected " << (rows >= 0 ? std::to_string(rows) : "any") << " x "
       << (cols >= 0 ? std::to_string(cols) : "any") << ", got " << m.rows() << " x "
       << m.cols();
    fail(field, os.str());
  }
  return m;
}

void check_off_pattern(const Matrix& w, const Eigen::MatrixXi& adj, const std::string& field) {
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (adj(i, j) == 0 && w(i, j) != 0.0) {
        fail(at_index(field, i, j), "weight lies outside the topology (adjacency is 0)");
      }
    }
  }
}

}  // namespace

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) fail(field, "must be a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(at_index(field, 0), "must be a non-empty array");
  Matrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != cols) {
      fail(at_index(field, r), "expected " + std::to_string(cols) + " entries");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) fail(at_index(field, r, c), "must be a number");
      const double x = row[c].get<double>();
      if (!std::isfinite(x)) fail(at_index(field, r, c), "must be finite");
      m(r, c) = x;
    }
  }
  return m;
}

ProblemFile parse_problem_text(std::string_view text, const ToleranceConfig& tol) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) fail("<root>", "must be an object");

  ProblemFile pf;
  pf.digest = fnv1a64_hex(text);
  if (root.contains("name")) pf.name = root["name"].get<std::string>();
  if (root.contains("description")) pf.description = root["description"].get<std::string>();
  pf.n = positive_int(root, "n");
  pf.q = root.contains("q") ? positive_int(root, "q") : 1;
  const int n = pf.n;
  const int nq = n * pf.q;

  const Matrix adj = numeric_matrix(require(root, "adjacency"), "adjacency", n, n);
  pf.adjacency.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (adj(i, j) != 0.0 && adj(i, j) != 1.0) fail(at_index("adjacency", i, j), "must be 0 or 1");
      pf.adjacency(i, j) = static_cast<int>(adj(i, j));
    }
  }

  pf.aWeights = numeric_matrix(require(root, "aWeights"), "aWeights", n, n);
  pf.dWeights = numeric_matrix(require(root, "dWeights"), "dWeights", n, n);
  check_off_pattern(pf.aWeights, pf.adjacency, "aWeights");
  check_off_pattern(pf.dWeights, pf.adjacency, "dWeights");

  pf.E1 = numeric_matrix(require(root, "E1"), "E1", -1, nq);
  pf.E2 = numeric_matrix(require(root, "E2"), "E2", pf.E1.rows(), nq);
  const double cross = (pf.E1.transpose() * pf.E2).norm();
  if (cross > tol.res * std::max(pf.E1.norm() * pf.E2.norm(), 1e-300) && cross > 0.0) {
    fail("E2", "E1^T E2 must vanish (orthogonality), |E1^T E2| = " + format_number(cross));
  }

  pf.mu0 = Vector::Zero(nq);
  if (root.contains("mu0") && !root["mu0"].is_null()) {
    const json& m = root["mu0"];
    if (!m.is_array() || static_cast<int>(m.size()) != nq) {
      fail("mu0", "expected " + std::to_string(nq) + " numbers");
    }
    for (int i = 0; i < nq; ++i) {
      if (!m[i].is_number()) fail(at_index("mu0", i), "must be a number");
      pf.mu0(i) = m[i].get<double>();
    }
  }

  pf.V = Matrix::Zero(nq, nq);
  if (root.contains("V") && !root["V"].is_null()) {
    pf.V = numeric_matrix(root["V"], "V", nq, nq);
    if (!is_symmetric(pf.V, tol)) fail("V", "must be symmetric");
    if (!definiteness_test(pf.V, Definiteness::PositiveSemidefinite, tol).holds) {
      fail("V", "must be positive semidefinite (a covariance)");
    }
  }

  if (root.contains("K") && !root["K"].is_null()) {
    Matrix k = numeric_matrix(root["K"], "K", nq, nq);
    const int q = pf.q;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j || pf.adjacency(i, j) != 0) continue;
        for (int r = 0; r < q; ++r) {
          for (int c = 0; c < q; ++c) {
            if (k(i * q + r, j * q + c) != 0.0) {
              fail(at_index("K", i * q + r, j * q + c), "gain entry lies outside the topology");
            }
          }
        }
      }
    }
    pf.K = std::move(k);
  }

  if (root.contains("reference") && !root["reference"].is_null()) {
    const json& r = root["reference"];
    if (!r.is_object()) fail("reference", "must be an object");
    BenchmarkReference ref;
    try {
      ref.reportedJ = r.at("reportedJ").get<double>();
      ref.particles = r.value("particles", 0);
      ref.iterations = r.value("iterations", 0);
      ref.omega = r.value("omega", std::string("unit"));
      ref.comparable = r.value("comparable", false);
      ref.note = r.value("note", std::string());
    } catch (const json::exception& e) {
      fail("reference", e.what());
    }
    if (ref.omega != "unit" && ref.omega != "grid") fail("reference.omega", "must be unit or grid");
    pf.reference = ref;
  }
  return pf;
}

ProblemFile parse_problem_file(const std::string& path, const ToleranceConfig& tol) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open problem file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_problem_text(buf.str(), tol);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

NetworkProblem ProblemFile::to_problem(const ToleranceConfig& tol) const {
  NetworkTopology topo(adjacency, q);
  WeightSet a = WeightSet::from_scalar_table(WeightKind::Plant, topo, aWeights);
  WeightSet d = WeightSet::from_scalar_table(WeightKind::Noise, topo, dWeights);
  return NetworkProblem::build(std::move(topo), std::move(a), std::move(d), E1, E2, mu0, V,
                               tol);
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json RunResult::to_json() const {
  json out;
  out["command"] = command;
  out["inputDigest"] = inputDigest;
  out["seed"] = seed;
  out["wallTime"] = wallTime;
  out["outputs"] = outputs;
  return out;
}

void write_results(const RunResult& result, OutputFormat format, const std::string& path) {
  std::ostringstream os;
  if (format == OutputFormat::Json) {
    // nlohmann emits doubles in shortest round-trip form; +-inf become null.
    os << result.to_json().dump(2) << '\n';
  } else {
    const CsvTable& t = result.table;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      os << (i ? "," : "") << t.header[i];
    }
    os << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        os << (i ? "," : "") << format_number(row[i]);
      }
      os << '\n';
    }
  }
  if (path.empty() || path == "-") {
    std::cout << os.str();
    std::cout.flush();
    if (!std::cout) throw Error(ErrorKind::Io, "failed writing to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << os.str();
  out.close();
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

}  // namespace lqs
