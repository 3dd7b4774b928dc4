#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "clfsyn/probio.hpp"

using namespace clfsyn;
using nlohmann::json;

namespace {

std::string problems_dir() { return std::string(CLFSYN_SOURCE_DIR) + "/problems"; }

json base_document() {
  std::ifstream in(problems_dir() + "/double_integrator.json");
  return json::parse(in);
}

// Message of the ProblemError raised by parsing `doc`, or "" if none.
std::string error_of(const std::string& text) {
  try {
    problem_from_json(text);
  } catch (const ProblemError& e) {
    return e.what();
  }
  return "";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CLFSYN_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(ProblemFile, ShippedFilesMatchBenchmarks) {
  for (auto id : all_benchmarks()) {
    const std::string name = benchmark_name(id);
    const ProblemInstance loaded = load_problem(problems_dir() + "/" + name + ".json");
    EXPECT_TRUE(loaded == load_benchmark(id)) << name;
  }
}

TEST(ProblemFile, SerializationRoundTrips) {
  for (auto id : all_benchmarks()) {
    const ProblemInstance p = load_benchmark(id);
    EXPECT_TRUE(problem_from_json(problem_to_json(p)) == p) << benchmark_name(id);
  }
}

TEST(ProblemFile, RejectsBasisWithConstantTerm) {
  json doc = base_document();
  doc["basis"] = json::array({"x1^2", "x1 + 1"});
  EXPECT_NE(error_of(doc.dump()), "");
}

TEST(ProblemFile, RejectsInvertedBox) {
  json doc = base_document();
  doc["s_box"]["lower"][0] = 2.0;
  EXPECT_NE(error_of(doc.dump()), "");
  doc = base_document();
  doc["inputs"]["lower"][0] = 1.0;
  EXPECT_NE(error_of(doc.dump()), "");
}

TEST(ProblemFile, SchemaErrorsCarryPointers) {
  json doc = base_document();
  doc["dynamics"]["f0"][1] = "x2 +";
  EXPECT_NE(error_of(doc.dump()).find("/dynamics/f0/1"), std::string::npos) << error_of(doc.dump());

  doc = base_document();
  doc["safe_set"] = "x1^2 - 1";
  EXPECT_NE(error_of(doc.dump()).find("/safe_set"), std::string::npos) << error_of(doc.dump());

  doc = base_document();
  doc.erase("variables");
  EXPECT_NE(error_of(doc.dump()).find("/variables"), std::string::npos) << error_of(doc.dump());

  doc = base_document();
  doc["schema_version"] = "7";
  EXPECT_NE(error_of(doc.dump()).find("/schema_version"), std::string::npos) << error_of(doc.dump());

  doc = base_document();
  doc["basis"] = json::array({"x1^2", "y^2"});
  EXPECT_NE(error_of(doc.dump()).find("/basis/1"), std::string::npos) << error_of(doc.dump());
}

TEST(ProblemFile, MalformedJsonReportsPosition) {
  const std::string msg = error_of("{\n  \"name\": \"x\",\n  oops\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(ProblemFile, LoadClfForms) {
  const ProblemInstance p = load_benchmark(BenchmarkId::kDoubleIntegrator);
  const Polynomial v = load_clf("2*x1^2 + x2^2", p);
  EXPECT_EQ(v, parse_poly("2*x1^2 + x2^2", p.variables));

  const auto dir = std::filesystem::temp_directory_path() / "clfsyn_probio_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "coeffs.json") << R"({"coefficients": [1, 0.5, 2]})";
    std::ofstream(dir / "expr.json") << R"({"clf": "x1^2 + x2^2"})";
  }
  EXPECT_EQ(load_clf((dir / "coeffs.json").string(), p), parse_poly("x1^2 + 0.5*x1*x2 + 2*x2^2", p.variables));
  EXPECT_EQ(load_clf((dir / "expr.json").string(), p), parse_poly("x1^2 + x2^2", p.variables));
  EXPECT_THROW(load_clf((dir / "missing.json").string(), p), ProblemError);
  EXPECT_THROW(load_clf("x1^2 + z", p), ProblemError);

  const ProblemInstance tora = load_benchmark(BenchmarkId::kTora);
  EXPECT_EQ(load_clf(problems_dir() + "/tora_paper_clf.json", tora).degree(), 2);
}

TEST(ProblemFile, CsvVectors) {
  EXPECT_EQ(parse_csv_vector("1, -2.5,3e-1"), (std::vector<double>{1, -2.5, 0.3}));
  EXPECT_THROW(parse_csv_vector("1,,2"), std::invalid_argument);
  EXPECT_THROW(parse_csv_vector("a"), std::invalid_argument);
}

TEST(Cli, ExitCodes) {
  const auto dir = std::filesystem::temp_directory_path() / "clfsyn_cli_test";
  std::filesystem::create_directories(dir);
  const std::string di = problems_dir() + "/double_integrator.json";
  const std::string report = (dir / "report.json").string();
  EXPECT_EQ(run_cli("synthesize --benchmark double_integrator --out " + report), 0);
  EXPECT_TRUE(std::filesystem::exists(report));
  EXPECT_EQ(run_cli("synthesize " + di + " --max-iterations 1"), 3);
  EXPECT_EQ(run_cli("verify " + di + " --clf '50*x1^2 + 50*x1*x2 + 53.75*x2^2'"), 0);
  EXPECT_EQ(run_cli("verify " + di + " --clf 'x1^2 + x2^2'"), 2);
  EXPECT_EQ(run_cli("demonstrate " + di + " --state 0.5,0"), 0);
  EXPECT_EQ(run_cli("simulate " + di + " --clf " + (dir / "nope.json").string() + " --x0 0.1,0"), 64);
  EXPECT_EQ(run_cli("simulate " + di + " --clf 'x1^2 +' --x0 0.1,0"), 64);
  EXPECT_EQ(run_cli("verify " + di), 64);
  EXPECT_EQ(run_cli("no-such-command"), 64);
  EXPECT_EQ(run_cli("verify " + (dir / "absent.json").string() + " --clf x1^2"), 64);
}
