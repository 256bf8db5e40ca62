#include "fastlip/gallery.hpp"
#include "fastlip/oracle.hpp"
#include "fastlip/problem_io.hpp"
#include "fastlip/qc.hpp"
#include "fastlip/relax.hpp"
#include "fastlip/rng.hpp"
#include "fastlip/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace fastlip;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFail = 2;
constexpr int kExitNoConvergence = 3;

struct SourceOptions {
  std::string file;
  std::string gallery;
  double toy_a = -0.3;
  double toy_b = 0.3;
  int pc_n = 0; // 0: the built-in 2x2 instance
  double pc_gain = 0.5;
  double ctl_a = 0.5;
  double ctl_b = 0.3;
  double ctl_cs = 3.0;
  double ctl_cu = 2.0;
  int ctl_N = 20;
  double ctl_s_init = 1.0;
  double ctl_w_max = 1.0;
  bool ctl_w_zero = false;
  std::uint64_t seed = 0;
};

void add_source_flags(CLI::App* cmd, SourceOptions& src) {
  cmd->add_option("--file", src.file, "JSON problem file (affine instances)");
  cmd->add_option("--gallery", src.gallery,
                  "built-in problem: toy | power | control-linear | control-nonlinear");
  cmd->add_option("--a", src.toy_a, "toy parameter a");
  cmd->add_option("--b", src.toy_b, "toy parameter b");
  cmd->add_option("--pc-n", src.pc_n, "power control: random instance size (0 = built-in 2x2)");
  cmd->add_option("--pc-gain", src.pc_gain, "power control: worst row sum of the gain matrix");
  cmd->add_option("--ca", src.ctl_a, "control: state decay a");
  cmd->add_option("--cb", src.ctl_b, "control: actuator gain b");
  cmd->add_option("--cs", src.ctl_cs, "control: state cost c_s");
  cmd->add_option("--cu", src.ctl_cu, "control: control cost c_u");
  cmd->add_option("--N", src.ctl_N, "control: horizon");
  cmd->add_option("--s-init", src.ctl_s_init, "control: initial state");
  cmd->add_option("--w-max", src.ctl_w_max, "control: disturbance bound");
  cmd->add_flag("--w-zero", src.ctl_w_zero, "control: use zero disturbances");
  cmd->add_option("--seed", src.seed, "seed for every randomized path (default 0)");
}

struct ResolvedSource {
  ProblemSpec problem;
  std::optional<gallery::ControlAssembly> control;
  std::string name;
};

ResolvedSource resolve_source(const SourceOptions& src) {
  if (!src.file.empty() && !src.gallery.empty()) {
    throw InvalidInput("pass either --file or --gallery, not both");
  }
  if (!src.file.empty()) {
    return {io::load_problem_file(src.file), std::nullopt, src.file};
  }
  if (src.gallery == "toy") {
    return {gallery::make_toy(src.toy_a, src.toy_b), std::nullopt, "toy"};
  }
  if (src.gallery == "power") {
    if (src.pc_n > 0) {
      return {gallery::random_power_control(src.pc_n, src.pc_gain, src.seed), std::nullopt,
              "power"};
    }
    Mat G(2, 2);
    G << 0, 0.2, 0.2, 0;
    Vec eta(2);
    eta << 1, 1;
    return {gallery::make_power_control(G, eta), std::nullopt, "power"};
  }
  if (src.gallery == "control-linear" || src.gallery == "control-nonlinear") {
    const auto kind = src.gallery == "control-linear" ? gallery::ControlKind::Linear
                                                      : gallery::ControlKind::Nonlinear;
    gallery::ControlParams params;
    params.a = src.ctl_a;
    params.b = src.ctl_b;
    params.c_s = src.ctl_cs;
    params.c_u = src.ctl_cu;
    const std::vector<double> w =
        src.ctl_w_zero ? std::vector<double>(static_cast<size_t>(src.ctl_N), 0.0)
                       : gallery::uniform_disturbances(src.ctl_N, src.ctl_w_max, src.seed);
    gallery::ControlAssembly assembly =
        gallery::make_optimal_control(kind, params, src.ctl_N, src.ctl_s_init, w);
    ProblemSpec stacked = assembly.stacked;
    return {std::move(stacked), std::move(assembly), src.gallery};
  }
  if (src.gallery.empty()) {
    throw InvalidInput("no problem source: pass --file or --gallery");
  }
  throw InvalidInput("unknown gallery problem: " + src.gallery);
}

void write_output(const std::string& path, const json& doc) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write output file: " + path);
  out << doc.dump(2) << "\n";
}

Vec parse_x0(const std::string& text, const BoundingBox& box) {
  if (text.empty()) return box.midpoint();
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
  if (static_cast<int>(values.size()) != box.dim()) {
    throw InvalidInput("--x0 needs " + std::to_string(box.dim()) + " comma-separated values");
  }
  Vec x(box.dim());
  for (size_t i = 0; i < values.size(); ++i) x[static_cast<Eigen::Index>(i)] = values[i];
  return x;
}

void warn_box_mapping(const ProblemSpec& problem) {
  Grid probe = problem.box.dim() <= 4 ? sample_grid(problem.box, 5)
                                      : monte_carlo_grid(problem.box, 128, 0);
  const int violations = box_mapping_violations(problem, probe.points);
  if (violations > 0) {
    std::cerr << "warning: f leaves the box at " << violations << "/" << probe.points.size()
              << " sampled points; iterates will be clamped\n";
  }
}

int cmd_check(const SourceOptions& src, const std::string& cond_text, int per_axis, int mc,
              std::uint64_t grid_seed, const std::string& out_path) {
  const ResolvedSource source = resolve_source(src);
  const ConditionId cond = ConditionId::parse(cond_text);
  Grid grid;
  if (source.problem.box.dim() <= 4 || per_axis > 0) {
    grid = sample_grid(source.problem.box, per_axis > 0 ? per_axis : 33, mc, grid_seed);
  } else {
    grid = monte_carlo_grid(source.problem.box, mc > 0 ? mc : 100000, grid_seed);
  }
  warn_box_mapping(source.problem);

  const CertificateReport report = check_condition(source.problem, cond, grid);
  const json doc = io::to_json(report);
  write_output(out_path, doc);

  std::cout << source.name << " " << cond.name() << " on " << grid.spec.describe() << ": "
            << (report.verdict ? "PASS" : "FAIL") << " (sampled certificate)\n";
  for (const SubConditionResult& r : report.worst_margins) {
    std::cout << "  " << (r.pass ? "ok  " : "FAIL") << " " << r.name
              << "  worst=" << r.worst_value << " bound=" << r.bound << " margin=" << r.margin;
    if (!r.detail.empty()) std::cout << " [" << r.detail << "]";
    std::cout << "\n";
  }
  if (!report.verdict) {
    std::cout << "  failing points: " << report.failure_count << "\n";
  }
  return report.verdict ? kExitOk : kExitFail;
}

int cmd_solve(const SourceOptions& src, const std::string& x0_text, double tol, int max_iter,
              bool async, int delay, double drop, const std::string& schedule, int n_mu,
              const std::string& out_path, const std::string& trace_path,
              const std::string& async_trace_path) {
  const ResolvedSource source = resolve_source(src);
  const ProblemSpec& problem = source.problem;
  const Vec x0 = parse_x0(x0_text, problem.box);
  warn_box_mapping(problem);

  SolveResult result;
  std::optional<AsyncResult> async_result;
  if (async) {
    AsyncSimConfig cfg;
    cfg.max_delay = delay;
    cfg.drop_prob = drop;
    cfg.seed = src.seed;
    cfg.schedule =
        schedule == "random" ? AsyncSchedule::RandomComponent : AsyncSchedule::RoundRobin;
    cfg.max_steps = static_cast<long>(max_iter) * problem.n;
    async_result = solve_async(problem, x0, cfg, tol);
    result = async_result->result;
  } else {
    result = solve_fixed_point(problem, x0, tol, max_iter);
  }

  json doc{{"schema_version", io::kReportSchemaVersion},
           {"problem", source.name},
           {"mode", async ? "async" : "sync"},
           {"solve", io::to_json(result)}};

  bool cert_pass = false;
  if (result.converged) {
    try {
      const KktCertificate cert =
          kkt_certificate(problem, result.xstar, n_mu, src.seed, std::max(tol * 10, 1e-9));
      doc["kkt"] = io::to_json(cert);
      cert_pass = cert.pass();
    } catch (const std::exception& e) {
      doc["kkt"] = json{{"error", e.what()}, {"pass", false}};
    }
  }

  write_output(out_path, doc);
  if (!trace_path.empty()) {
    std::ofstream ts(trace_path, std::ios::binary);
    if (!ts) throw InvalidInput("cannot write trace file: " + trace_path);
    io::write_residual_csv(ts, result);
  }
  if (!async_trace_path.empty() && async_result) {
    std::ofstream ts(async_trace_path, std::ios::binary);
    if (!ts) throw InvalidInput("cannot write async trace file: " + async_trace_path);
    io::write_async_trace_csv(ts, *async_result);
  }

  std::cout << source.name << (async ? " async" : " sync") << " solve: "
            << (result.converged ? "converged" : "NO CONVERGENCE") << " in " << result.iterations
            << " iterations, final residual "
            << (result.residuals.empty() ? 0.0 : result.residuals.back())
            << ", clamp events " << result.clamp_events << "\n";
  if (result.converged) {
    std::cout << "  x* = [";
    for (Eigen::Index i = 0; i < result.xstar.size(); ++i) {
      std::cout << (i ? ", " : "") << result.xstar[i];
    }
    std::cout << "]\n  kkt certificate: " << (cert_pass ? "PASS" : "FAIL") << "\n";
  }

  if (!result.converged) return kExitNoConvergence;
  return cert_pass ? kExitOk : kExitFail;
}

int cmd_oracle(const SourceOptions& src, int resolution, int mu_count, int levels,
               const std::string& out_path) {
  const ResolvedSource source = resolve_source(src);

  if (source.control) {
    const gallery::OptimalControlSpec& oc = source.control->oc;
    const gallery::Result1Report r1 = gallery::result1_check(oc, 64, src.seed);
    const oracle::BruteForceResult bf = oracle::control_bruteforce(oc, levels);
    bool all_zero = true;
    for (const Vec& u : bf.best_controls) {
      if (u.cwiseAbs().maxCoeff() > 1e-12) all_zero = false;
    }
    const bool agrees = !r1.pass || (all_zero && bf.ties_within_tol == 1);
    json doc{{"schema_version", io::kReportSchemaVersion},
             {"problem", source.name},
             {"result1", {{"pass", r1.pass}, {"margin", r1.margin}, {"lhs", r1.lhs},
                          {"rhs", r1.rhs}, {"reason", r1.reason}}},
             {"bruteforce", {{"best_cost", bf.best_cost}, {"sequences", bf.sequences},
                             {"all_zero", all_zero}, {"ties_within_tol", bf.ties_within_tol}}},
             {"agrees", agrees}};
    write_output(out_path, doc);
    std::cout << source.name << " zero-control criterion: " << (r1.pass ? "PASS" : "FAIL")
              << " (margin " << r1.margin << ")\n"
              << "  bruteforce best cost " << bf.best_cost << " over " << bf.sequences
              << " sequences, all-zero=" << (all_zero ? "yes" : "no") << "\n"
              << "  oracle agreement: " << (agrees ? "yes" : "NO") << "\n";
    return agrees ? kExitOk : kExitFail;
  }

  const ProblemSpec& problem = source.problem;
  const SolveResult solved = solve_fixed_point(problem, problem.box.midpoint());
  if (!solved.converged) {
    std::cout << "solver did not converge; oracle comparison impossible\n";
    return kExitNoConvergence;
  }

  const bool pareto = oracle::pareto_check(problem, solved.xstar, resolution);
  double spacing = 0.0;
  for (int i = 0; i < problem.n; ++i) {
    spacing = std::max(spacing,
                       (problem.box.upper[i] - problem.box.lower[i]) / (resolution - 1));
  }

  std::mt19937_64 gen(src.seed);
  bool scalarized_ok = true;
  json scalarized = json::array();
  for (int k = 0; k < mu_count; ++k) {
    const Vec mu = rng::simplex_point(gen, problem.m);
    const oracle::ScalarizedOptResult best = oracle::scalarized_grid_opt(problem, mu, resolution);
    if (!best.found) {
      scalarized_ok = false;
      scalarized.push_back({{"draw", k}, {"infeasible", true}});
      continue;
    }
    const double gap = (best.best - solved.xstar).cwiseAbs().maxCoeff();
    scalarized_ok = scalarized_ok && gap <= spacing + 1e-12;
    scalarized.push_back({{"draw", k}, {"gap", gap}});
  }

  const bool agrees = pareto && scalarized_ok;
  json doc{{"schema_version", io::kReportSchemaVersion},
           {"problem", source.name},
           {"resolution", resolution},
           {"pareto_check", pareto},
           {"scalarized", scalarized},
           {"lattice_step", spacing},
           {"agrees", agrees}};
  write_output(out_path, doc);

  std::cout << source.name << " oracle at resolution " << resolution << ":\n"
            << "  pareto_check(x*): " << (pareto ? "true" : "FALSE") << "\n"
            << "  scalarized argmax within one lattice step for " << mu_count
            << " weight draws: " << (scalarized_ok ? "yes" : "NO") << "\n";
  return agrees ? kExitOk : kExitFail;
}

int cmd_demo() {
  std::cout << "Bilinear two-variable example, a = -0.3, b = 0.3 on [0,1]^2\n\n";
  const ProblemSpec toy = gallery::make_toy(-0.3, 0.3);
  const Grid grid = sample_grid(toy.box, 33);

  std::cout << "Qualifying conditions (33x33 sampled certificates):\n";
  for (const ConditionId& cond : special_conditions()) {
    const CertificateReport report = check_condition(toy, cond, grid);
    std::cout << "  " << cond.name() << ": " << (report.verdict ? "pass" : "fail") << "\n";
  }

  const SolveResult result = solve_fixed_point(toy, Vec::Ones(2), 1e-6);
  std::cout << "\nFixed-point iteration from (1,1): " << result.iterations
            << " iterations to residual " << result.residuals.back() << "\n  x* = ("
            << result.xstar[0] << ", " << result.xstar[1] << ")\n";

  const KktCertificate cert = kkt_certificate(toy, result.xstar, 100, 0);
  std::cout << "\nDual positivity over 100 weight draws: min lambda = " << cert.min_lambda
            << " -> " << (cert.pass() ? "pass" : "fail") << "\n";

  const bool pareto = oracle::pareto_check(toy, result.xstar, 101);
  std::cout << "Brute-force Pareto scan at resolution 101: "
            << (pareto ? "x* undominated" : "x* DOMINATED") << "\n";

  const bool in_extra = check_extra_set(toy, result.xstar);
  std::cout << "Extra-set membership of x*: " << (in_extra ? "yes" : "no") << "\n";
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fast-Lipschitz optimization toolkit: sampled qualifying-condition\n"
               "certificates, fixed-point solvers and independent oracles"};
  app.require_subcommand(1);

  SourceOptions check_src;
  std::string check_cond;
  int check_per_axis = 0;
  int check_mc = 0;
  std::uint64_t check_grid_seed = 0;
  std::string check_out;
  CLI::App* check = app.add_subcommand("check", "verify a qualifying condition by sampling");
  add_source_flags(check, check_src);
  check->add_option("--cond", check_cond, "condition id: q1 q2 qinf q2d qinfd qk:<k|inf> old1-3")
      ->required();
  check->add_option("--per-axis", check_per_axis, "lattice points per axis (default 33)");
  check->add_option("--mc", check_mc, "extra Monte Carlo points");
  check->add_option("--grid-seed", check_grid_seed, "grid sampling seed");
  check->add_option("--out", check_out, "write the JSON report here");

  SourceOptions solve_src;
  std::string solve_x0;
  double solve_tol = 1e-6;
  int solve_max_iter = kDefaultMaxIter;
  bool solve_async_flag = false;
  int solve_delay = 5;
  double solve_drop = 0.0;
  std::string solve_schedule = "rr";
  int solve_mu = 100;
  std::string solve_out, solve_trace, solve_async_trace;
  CLI::App* solve = app.add_subcommand("solve", "run the fixed-point iteration and certify");
  add_source_flags(solve, solve_src);
  solve->add_option("--x0", solve_x0, "start point, comma separated (default: box midpoint)");
  solve->add_option("--tol", solve_tol, "residual tolerance (default 1e-6)");
  solve->add_option("--max-iter", solve_max_iter, "iteration cap");
  solve->add_flag("--async", solve_async_flag, "simulate the asynchronous iteration");
  solve->add_option("--delay", solve_delay, "async: max read age B");
  solve->add_option("--drop", solve_drop, "async: message drop probability");
  solve->add_option("--schedule", solve_schedule, "async: rr | random");
  solve->add_option("--mu", solve_mu, "KKT certificate weight draws");
  solve->add_option("--out", solve_out, "write the JSON result here");
  solve->add_option("--trace", solve_trace, "write the residual CSV here");
  solve->add_option("--async-trace", solve_async_trace, "write the async event CSV here");

  SourceOptions oracle_src;
  int oracle_resolution = 101;
  int oracle_mu = 5;
  int oracle_levels = 11;
  std::string oracle_out;
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "compare against brute-force lattice/control oracles");
  add_source_flags(oracle_cmd, oracle_src);
  oracle_cmd->add_option("--resolution", oracle_resolution, "lattice points per axis");
  oracle_cmd->add_option("--mu-count", oracle_mu, "scalarization weight draws");
  oracle_cmd->add_option("--levels", oracle_levels, "control lattice levels per stage");
  oracle_cmd->add_option("--out", oracle_out, "write the JSON comparison here");

  app.add_subcommand("demo", "end-to-end walkthrough on the bilinear example");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      return app.exit(e);
    }
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (check->parsed()) {
      return cmd_check(check_src, check_cond, check_per_axis, check_mc, check_grid_seed,
                       check_out);
    }
    if (solve->parsed()) {
      return cmd_solve(solve_src, solve_x0, solve_tol, solve_max_iter, solve_async_flag,
                       solve_delay, solve_drop, solve_schedule, solve_mu, solve_out, solve_trace,
                       solve_async_trace);
    }
    if (oracle_cmd->parsed()) {
      return cmd_oracle(oracle_src, oracle_resolution, oracle_mu, oracle_levels, oracle_out);
    }
    return cmd_demo();
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
