#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lqs/commands.hpp"
#include "lqs/error.hpp"
#include "lqs/problem_io.hpp"
#include "lqs/semistab.hpp"
#include "support.hpp"

using namespace lqs;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json four_node_json() { return json::parse(slurp(benchmark_path("4node"))); }

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("lqs_test_" + name)).string();
}

std::string parse_error(const json& doc) {
  try {
    parse_problem_text(doc.dump());
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    return e.what();
  }
  return "";
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("parse errors name the offending field") {
  json doc = four_node_json();
  doc["aWeights"][0][2] = 5.0;  // adjacency(0, 2) = 0
  const std::string off = parse_error(doc);
  CHECK(off.find("aWeights[0][2]") != std::string::npos);

  doc = four_node_json();
  doc["E2"] = doc["E1"];
  CHECK(parse_error(doc).find("E2") != std::string::npos);
  CHECK(parse_error(doc).find("orthogonal") != std::string::npos);

  doc = four_node_json();
  doc["K"][0][2] = 1.0;
  CHECK(parse_error(doc).find("K[0][2]") != std::string::npos);

  doc = four_node_json();
  doc["adjacency"][1][1] = 2;
  CHECK(parse_error(doc).find("adjacency[1][1]") != std::string::npos);

  doc = four_node_json();
  doc.erase("dWeights");
  CHECK(parse_error(doc).find("dWeights") != std::string::npos);

  CHECK_THROWS_AS(parse_problem_text("{not json"), Error);
  try {
    parse_problem_file("/nonexistent/problem.json");
    FAIL("missing file accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("every bundled case loads") {
  for (const std::string& name : benchmark_cases()) {
    CAPTURE(name);
    const ProblemFile pf = lqs::testing::load_case(name, ToleranceConfig::printed_precision());
    REQUIRE(pf.reference.has_value());
    // Only the comparable cases ship a reported gain.
    CHECK(pf.K.has_value() == pf.reference->comparable);
    CHECK(pf.digest.size() == 16);
    const NetworkProblem p = pf.to_problem(ToleranceConfig::printed_precision());
    CHECK(p.plant.rows() == pf.n * pf.q);
  }
  CHECK_THROWS_AS(benchmark_path("3node"), Error);
}

TEST_CASE("bundled Case-1 open loops are not semistable; the gains fix that") {
  const ToleranceConfig tol = ToleranceConfig::printed_precision();
  for (const char* name : {"4node", "6node", "10node"}) {
    CAPTURE(name);
    const ProblemFile pf = lqs::testing::load_case(name, tol);
    const NetworkProblem p = pf.to_problem(tol);
    CHECK_FALSE(is_semistable(p.plant, tol).semistable);
    CHECK(is_semistable(SystemRealization::close(p, *pf.K).closedLoop, tol).semistable);
  }
}

TEST_CASE("JSON results round-trip at full precision") {
  RunResult r;
  r.command = "evaluate";
  r.inputDigest = fnv1a64_hex("abc");
  r.seed = 123456789012345ULL;
  r.outputs["x"] = 0.1 + 0.2;
  r.outputs["m"] = matrix_to_json(Matrix::Identity(2, 3) * (1.0 / 3.0));
  const std::string path = temp_path("roundtrip.json");
  write_results(r, OutputFormat::Json, path);
  const json back = json::parse(slurp(path));
  std::remove(path.c_str());
  CHECK(back["command"] == "evaluate");
  CHECK(back["seed"].get<std::uint64_t>() == r.seed);
  CHECK(back["outputs"]["x"].get<double>() == 0.1 + 0.2);
  const Matrix m = matrix_from_json(back["outputs"]["m"], "m");
  CHECK((m - Matrix::Identity(2, 3) * (1.0 / 3.0)).norm() == 0.0);
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  // Known FNV-1a 64 vector.
  CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("optimize trace CSV: header plus one row per iteration") {
  CommandOptions o;
  o.problemPath = benchmark_path("4node");
  o.seed = 7;
  o.particles = 5;
  o.iterations = 100;
  o.pso.exit.spread = 0.0;  // run the full budget
  const RunResult r = run_command("optimize", o);
  const std::string path = temp_path("trace.csv");
  write_results(r, OutputFormat::Csv, path);
  const std::vector<std::string> rows = lines(slurp(path));
  std::remove(path.c_str());
  REQUIRE(rows.size() == 101);
  CHECK(rows[0] == "iteration,stage,bestJ,bestS,spread");
  CHECK(r.outputs["stageOneIterations"].get<int>() + r.outputs["stageTwoIterations"].get<int>() ==
        100);
  CHECK(r.seed == 7);
  CHECK(r.inputDigest.size() == 16);
}

TEST_CASE("simulate CSV columns and the consensus limit") {
  CommandOptions o;
  o.problemPath = benchmark_path("4node");
  o.seed = 1;
  o.T = 2.0;
  o.dt = 1e-2;
  o.sampleEvery = 10;
  o.profile = ToleranceProfile::Printed;
  const RunResult r = run_command("simulate", o);
  CHECK(r.table.header == std::vector<std::string>{"t", "x1", "x2", "x3", "x4"});
  CHECK(r.table.rows.size() == 21);
  CHECK(r.table.rows.back()[0] == doctest::Approx(2.0));
  CHECK(r.outputs.contains("limit"));
}

TEST_CASE("evaluate and check report the cost and characterization") {
  CommandOptions o;
  o.problemPath = benchmark_path("4node");
  o.profile = ToleranceProfile::Printed;
  const RunResult e = run_command("evaluate", o);
  CHECK(e.outputs["cost"]["feasible"].get<bool>());
  CHECK(e.outputs["constraints"]["h1"].get<int>() == 0);
  const RunResult c = run_command("check", o);
  CHECK_FALSE(c.outputs["openLoop"]["semistable"].get<bool>());
  CHECK(c.outputs["closedLoop"]["semistable"].get<bool>());

  CommandOptions none;
  CHECK_THROWS_AS(run_command("evaluate", none), Error);
}

TEST_CASE("reproduce keeps reported and computed values side by side") {
  CommandOptions o;
  o.caseName = "4node";
  o.seed = 1;
  const RunResult r = run_command("reproduce", o);
  CHECK(r.outputs["reportedJ"].get<double>() == 41499.0);
  CHECK(r.outputs["printedGain"]["computedJ"].get<double>() ==
        doctest::Approx(41499.33708414294).epsilon(1e-9));
  CHECK(r.table.header ==
        std::vector<std::string>{"source", "reportedJ", "computedJ", "relativeDifference"});
  CHECK(r.outputs["toleranceProfile"] == "printed");

  o.caseName = "20node";
  const RunResult s = run_command("reproduce", o);
  CHECK_FALSE(s.outputs["comparable"].get<bool>());
  CHECK_FALSE(s.outputs.contains("printedGain"));
  CHECK(s.table.rows.empty());
}

}  // TEST_SUITE
