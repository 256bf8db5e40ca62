#include "fastlip/problem_io.hpp"

#include "fastlip/gallery.hpp"
#include "fastlip/solver.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fastlip;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const json kAffineDoc = {
    {"n", 2},
    {"m", 2},
    {"objective", {{1.0, 0.1}, {0.1, 1.0}}},
    {"gain", {{0.0, 0.2}, {0.2, 0.0}}},
    {"offset", {1.0, 1.0}},
    {"box", {{"lower", {0.0, 0.0}}, {"upper", {2.0, 2.0}}}},
};

fs::path test_dir() {
  const fs::path dir = fs::temp_directory_path() / "fastlip_cli_tests";
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FASTLIP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("affine problem files load with consistent evaluators") {
  const ProblemSpec p = io::problem_from_json(kAffineDoc);
  CHECK(p.n == 2);
  CHECK(p.m == 2);
  Vec x(2);
  x << 1.0, 0.5;
  const Vec fx = p.con(x);
  CHECK(fx[0] == doctest::Approx(1.0 + 0.2 * 0.5));
  CHECK(fx[1] == doctest::Approx(1.0 + 0.2 * 1.0));
  const Vec f0 = p.obj(x);
  CHECK(f0[0] == doctest::Approx(1.0 + 0.1 * 0.5));
  // gradient orientation: column j holds partials of f_j
  const Mat Gf = p.constraint_gradient(x);
  CHECK(Gf(1, 0) == doctest::Approx(0.2)); // d f_1 / d x_2
  CHECK(fd_check_gradients(p, x, 1e-6) <= 1e-9);
}

TEST_CASE("problem file diagnostics name the offending field") {
  json bad = kAffineDoc;
  bad["offset"] = {1.0};
  CHECK_THROWS_WITH_AS(io::problem_from_json(bad), doctest::Contains("offset"), InvalidInput);

  bad = kAffineDoc;
  bad["gain"][0] = {0.0};
  CHECK_THROWS_WITH_AS(io::problem_from_json(bad), doctest::Contains("gain"), InvalidInput);

  bad = kAffineDoc;
  bad["eq"] = {5};
  CHECK_THROWS_WITH_AS(io::problem_from_json(bad), doctest::Contains("eq"), InvalidInput);

  bad = kAffineDoc;
  bad["box"]["lower"] = {3.0, 3.0}; // lower > upper
  CHECK_THROWS_AS(io::problem_from_json(bad), InvalidInput);
}

TEST_CASE("equality sets from problem files") {
  json doc = kAffineDoc;
  doc["eq"] = {0};
  const ProblemSpec p = io::problem_from_json(doc);
  CHECK(p.eq_set == std::vector<int>{0});
  CHECK(p.ineq_set == std::vector<int>{1});
}

TEST_CASE("certificate reports serialize with the documented schema") {
  const ProblemSpec toy = gallery::make_toy(-0.3, 0.3);
  const CertificateReport report =
      check_condition(toy, ConditionId::qinfd(), sample_grid(toy.box, 9));
  const json doc = io::to_json(report);
  CHECK(doc.at("schema_version") == io::kReportSchemaVersion);
  CHECK(doc.at("condition") == "QINFD");
  CHECK(doc.at("verdict") == "pass");
  CHECK(doc.at("sampled_certificate") == true);
  CHECK(doc.at("margins").is_array());
  CHECK(doc.at("failures").is_array());
  CHECK(doc.at("grid").at("per_axis") == 9);
}

TEST_CASE("relax reports reuse the certificate schema with a branch field") {
  const std::vector<double> w = gallery::uniform_disturbances(3, 1.0, 7);
  const gallery::ControlAssembly asmb = gallery::make_optimal_control(
      gallery::ControlKind::Linear, gallery::ControlParams{}, 4, 1.0, w);
  const Grid grid = monte_carlo_grid(asmb.stacked.box, 128, 1);
  const FewerConstraintsReport fewer =
      check_fewer_constraints(asmb.stacked, asmb.partition, grid);
  const json fewer_doc = io::to_json(fewer);
  CHECK(fewer_doc.at("schema_version") == io::kReportSchemaVersion);
  CHECK(fewer_doc.at("branch") == "b.iii");
  CHECK(fewer_doc.at("verdict") == "pass");
  CHECK(fewer_doc.at("sampled_certificate") == true);
  CHECK(fewer_doc.at("branches").size() == 3);

  const gallery::EpigraphTransform ep =
      gallery::epigraph_transform(gallery::make_toy(0.5, 0.5));
  const MissingVarsReport missing = check_missing_objective_vars(
      ep.problem, ep.partition, sample_grid(ep.problem.box, 5));
  const json missing_doc = io::to_json(missing);
  CHECK(missing_doc.at("verdict") == "pass");
  CHECK(missing_doc.at("margins").is_array());
}

TEST_CASE("residual csv has the documented columns") {
  const ProblemSpec toy = gallery::make_toy(-0.3, 0.3);
  const SolveResult result = solve_fixed_point(toy, Vec::Ones(2), 1e-6);
  std::ostringstream os;
  io::write_residual_csv(os, result);
  std::istringstream in(os.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "iter,residual,x_1,x_2");
  std::string first;
  std::getline(in, first);
  CHECK(first.rfind("0,", 0) == 0);
  int rows = 1;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == static_cast<int>(result.residuals.size()));
}

TEST_CASE("async trace csv marks drops") {
  const ProblemSpec toy = gallery::make_toy(-0.3, 0.3);
  AsyncSimConfig cfg;
  cfg.max_delay = 3;
  cfg.drop_prob = 0.5;
  cfg.seed = 9;
  const AsyncResult result = solve_async(toy, Vec::Ones(2), cfg);
  std::ostringstream os;
  io::write_async_trace_csv(os, result);
  const std::string text = os.str();
  CHECK(text.rfind("step,component,age_vector,value\n", 0) == 0);
  CHECK(text.find("\"") != std::string::npos);
  CHECK(text.find("-1") != std::string::npos); // at least one drop at 50%
}

TEST_CASE("cli check exit codes") {
  CHECK(run_cli("check --gallery toy --a=-0.3 --b=0.3 --cond qinfd") == 0);
  CHECK(run_cli("check --gallery toy --a=0.6 --b=0.6 --cond qinfd") == 2);
  CHECK(run_cli("check --file /nonexistent/problem.json --cond q1") == 1);
  CHECK(run_cli("check --gallery toy --cond nosuchcondition") == 1);
  CHECK(run_cli("check --gallery toy") == 1); // --cond is required
}

TEST_CASE("cli solve exit codes and result files") {
  const fs::path dir = test_dir();
  const fs::path out = dir / "solve.json";
  const fs::path trace = dir / "trace.csv";
  CHECK(run_cli("solve --gallery toy --a=-0.3 --b=0.3 --x0 1,1 --out " + out.string() +
                " --trace " + trace.string()) == 0);
  const json doc = json::parse(slurp(out));
  CHECK(doc.at("solve").at("converged") == true);
  CHECK(doc.at("solve").at("iterations").get<int>() <= 8);
  CHECK(doc.at("kkt").at("pass") == true);
  std::ifstream ts(trace);
  std::string header;
  std::getline(ts, header);
  CHECK(header == "iter,residual,x_1,x_2");

  CHECK(run_cli("solve --gallery toy --a=1.5 --b=1.5 --max-iter 40") == 3);
}

TEST_CASE("cli async solve matches the synchronous fixed point") {
  const fs::path dir = test_dir();
  const fs::path sync_out = dir / "sync.json";
  const fs::path async_out = dir / "async.json";
  REQUIRE(run_cli("solve --gallery power --out " + sync_out.string()) == 0);
  REQUIRE(run_cli("solve --gallery power --async --delay 5 --drop 0.2 --seed 42 --out " +
                  async_out.string()) == 0);
  const json sync = json::parse(slurp(sync_out));
  const json async = json::parse(slurp(async_out));
  const auto xs = sync.at("solve").at("xstar");
  const auto xa = async.at("solve").at("xstar");
  REQUIRE(xs.size() == xa.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    CHECK(std::abs(xs[i].get<double>() - xa[i].get<double>()) <= 1e-6);
  }
}

TEST_CASE("cli reports are byte-identical across runs") {
  const fs::path dir = test_dir();
  const fs::path a = dir / "report_a.json";
  const fs::path b = dir / "report_b.json";
  const std::string args = "check --gallery toy --a=-0.3 --b=0.3 --cond qk:2 --mc 32 "
                           "--grid-seed 7 --out ";
  REQUIRE(run_cli(args + a.string()) == run_cli(args + b.string()));
  CHECK(slurp(a) == slurp(b));
  CHECK_FALSE(slurp(a).empty());
}

TEST_CASE("cli oracle exit codes") {
  CHECK(run_cli("oracle --gallery toy --a=-0.3 --b=0.3 --resolution 101") == 0);
  CHECK(run_cli("oracle --gallery control-linear --N 3 --w-zero --levels 11") == 0);

  // a 5-dimensional lattice request must fail the budget with a usage error
  const fs::path dir = test_dir();
  const fs::path file = dir / "big.json";
  json big = {{"n", 5},
              {"m", 1},
              {"objective", {{1.0}, {1.0}, {1.0}, {1.0}, {1.0}}},
              {"gain", json::array({{0.0, 0.0, 0.0, 0.0, 0.0},
                                    {0.0, 0.0, 0.0, 0.0, 0.0},
                                    {0.0, 0.0, 0.0, 0.0, 0.0},
                                    {0.0, 0.0, 0.0, 0.0, 0.0},
                                    {0.0, 0.0, 0.0, 0.0, 0.0}})},
              {"offset", {0.5, 0.5, 0.5, 0.5, 0.5}},
              {"box", {{"lower", {0, 0, 0, 0, 0}}, {"upper", {1, 1, 1, 1, 1}}}}};
  std::ofstream(file) << big.dump();
  CHECK(run_cli("oracle --file " + file.string()) == 1);
}

TEST_CASE("cli demo walks through cleanly") {
  CHECK(run_cli("demo") == 0);
}

TEST_CASE("cli check on a problem file") {
  const fs::path dir = test_dir();
  const fs::path file = dir / "affine.json";
  std::ofstream(file) << kAffineDoc.dump();
  CHECK(run_cli("check --file " + file.string() + " --cond q1") == 0);
  CHECK(run_cli("solve --file " + file.string()) == 0);
  CHECK(run_cli("oracle --file " + file.string() + " --resolution 81") == 0);
}
