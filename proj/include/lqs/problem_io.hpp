#pragma once

// Problem-file ingestion and result emission.
//
// Problem files are JSON objects:
//   name, description   strings (optional)
//   n, q                node count, per-node state dimension
//   adjacency           n x n array of 0/1, adjacency[i][j] = 1 when node i
//                       listens to node j
//   aWeights, dWeights  n x n arrays, [i][j] = a_ij / d_ij; zero off-pattern
//   E1, E2              arrays with n*q columns and equal row counts,
//                       E1^T E2 = 0
//   mu0                 optional, length n*q (default 0)
//   V                   optional, n*q x n*q symmetric psd (default 0)
//   K                   optional assembled gain, n*q x n*q, on the pattern
//   reference           optional {reportedJ, particles, iterations, omega,
//                       comparable, note}

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "lqs/matcore.hpp"
#include "lqs/netmodel.hpp"

namespace lqs {

struct BenchmarkReference {
  double reportedJ = 0.0;
  int particles = 0;
  int iterations = 0;
  std::string omega = "unit";
  bool comparable = false;
  std::string note;
};

struct ProblemFile {
  std::string name;
  std::string description;
  int n = 0;
  int q = 1;
  Eigen::MatrixXi adjacency;
  Matrix aWeights;
  Matrix dWeights;
  Matrix E1;
  Matrix E2;
  Vector mu0;
  Matrix V;
  std::optional<Matrix> K;
  std::optional<BenchmarkReference> reference;
  std::string digest;  ///< FNV-1a 64 of the raw file bytes

  NetworkProblem to_problem(const ToleranceConfig& tol = {}) const;
};

/// Validated load. Errors name the offending field, e.g. "aWeights[0][2]".
ProblemFile parse_problem_text(std::string_view text, const ToleranceConfig& tol = {});
ProblemFile parse_problem_file(const std::string& path, const ToleranceConfig& tol = {});

std::string fnv1a64_hex(std::string_view bytes);

nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json vector_to_json(const Vector& v);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& field);

/// Tabular payload for CSV output: one row per time instant or iteration.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct RunResult {
  std::string command;
  std::string inputDigest;
  std::uint64_t seed = 0;
  double wallTime = 0.0;  ///< seconds
  nlohmann::json outputs = nlohmann::json::object();
  CsvTable table;

  nlohmann::json to_json() const;
};

enum class OutputFormat { Json, Csv };

/// JSON carries the whole result; CSV carries `table`. Numbers are written
/// with 17 significant digits. path "-" writes to stdout.
void write_results(const RunResult& result, OutputFormat format, const std::string& path);

std::string format_number(double x);

}  // namespace lqs
