#include "fastlip/oracle.hpp"

#include "fastlip/gallery.hpp"
#include "fastlip/qc.hpp"
#include "fastlip/rng.hpp"
#include "fastlip/solver.hpp"

#include <doctest.h>

#include <random>

using namespace fastlip;
using namespace fastlip::oracle;

namespace {

ProblemSpec scalar_cap_problem() {
  // one variable, x <= 0.5 on [0, 1], increasing objective
  ProblemSpec p;
  p.n = 1;
  p.m = 1;
  p.obj = [](const Vec& x) { return x; };
  p.obj_grad = [](const Vec&) { return Mat::Ones(1, 1); };
  p.con = [](const Vec&) { return Vec::Constant(1, 0.5); };
  p.con_grad = [](const Vec&) { return Mat::Zero(1, 1); };
  p.ineq_set = {0};
  p.box = BoundingBox(Vec::Zero(1), Vec::Ones(1));
  return p;
}

} // namespace

TEST_CASE("feasible lattice honors the constraint slack") {
  const ProblemSpec toy = gallery::make_toy(-0.3, 0.3);
  const FeasGrid grid = feasible_lattice(toy, 41);
  CHECK_FALSE(grid.points.empty());
  for (const Vec& x : grid.points) {
    const Vec fx = toy.con(x);
    for (int i : toy.ineq_set) CHECK(x[i] <= fx[i] + grid.feas_tol);
  }
}

TEST_CASE("pareto check accepts the solved fixed point and rejects dominated points") {
  const ProblemSpec toy = gallery::make_toy(-0.3, 0.3);
  const SolveResult solved = solve_fixed_point(toy, Vec::Ones(2));
  REQUIRE(solved.converged);
  CHECK(pareto_check(toy, solved.xstar, 101));
  CHECK_FALSE(pareto_check(toy, Vec::Zero(2), 101)); // feasible but dominated by x*
}

TEST_CASE("pareto check on the scalar cap problem") {
  const ProblemSpec p = scalar_cap_problem();
  CHECK(pareto_check(p, Vec::Constant(1, 0.5), 101));
  CHECK_FALSE(pareto_check(p, Vec::Constant(1, 0.25), 101));
}

TEST_CASE("pareto check enforces its budget and feasibility preconditions") {
  ProblemSpec big;
  big.n = 5;
  big.m = 1;
  big.obj = [](const Vec& x) { return Vec::Constant(1, x.sum()); };
  big.obj_grad = [](const Vec&) { return Mat::Ones(5, 1); };
  big.con = [](const Vec& x) { return x; };
  big.con_grad = [](const Vec&) { return Mat::Identity(5, 5); };
  big.ineq_set = {0, 1, 2, 3, 4};
  big.box = BoundingBox(Vec::Zero(5), Vec::Ones(5));
  CHECK_THROWS_AS(pareto_check(big, Vec::Zero(5), 11), BudgetExceeded);

  const ProblemSpec toy = gallery::make_toy(-0.3, 0.3);
  Vec infeasible(2);
  infeasible << 1.0, 1.0; // 1 > f_1(x) ~ 0.35
  CHECK_THROWS_AS(pareto_check(toy, infeasible, 51), PreconditionViolation);
}

TEST_CASE("scalarized lattice optimum tracks the fixed point") {
  const ProblemSpec toy = gallery::make_toy(-0.3, 0.3);
  const SolveResult solved = solve_fixed_point(toy, Vec::Ones(2));
  const double spacing = 1.0 / 100.0;

  std::mt19937_64 gen(13);
  for (int draw = 0; draw < 5; ++draw) {
    const Vec mu = rng::simplex_point(gen, 2);
    const ScalarizedOptResult best = scalarized_grid_opt(toy, mu, 101);
    REQUIRE(best.found);
    CHECK((best.best - solved.xstar).cwiseAbs().maxCoeff() <= spacing + 1e-12);
  }

  // extreme but valid weights still land next to the same point (uniqueness)
  Vec lopsided(2);
  lopsided << 0.999, 0.001;
  const ScalarizedOptResult best = scalarized_grid_opt(toy, lopsided, 101);
  REQUIRE(best.found);
  CHECK((best.best - solved.xstar).cwiseAbs().maxCoeff() <= spacing + 1e-12);
}

TEST_CASE("scalarized oracle reports infeasible lattices") {
  ProblemSpec p;
  p.n = 1;
  p.m = 1;
  p.obj = [](const Vec& x) { return x; };
  p.obj_grad = [](const Vec&) { return Mat::Ones(1, 1); };
  p.con = [](const Vec& x) { return Vec::Constant(1, x[0] - 1.0); }; // x = x - 1: empty
  p.con_grad = [](const Vec&) { return Mat::Identity(1, 1); };
  p.ineq_set = {};
  p.eq_set = {0};
  p.box = BoundingBox(Vec::Zero(1), Vec::Ones(1));
  const ScalarizedOptResult result = scalarized_grid_opt(p, Vec::Ones(1), 11);
  CHECK_FALSE(result.found);
}

TEST_CASE("scalarized ties break toward the lexicographically smallest point") {
  // objective ignores x2, so a whole lattice column ties at the optimum
  ProblemSpec p;
  p.n = 2;
  p.m = 1;
  p.obj = [](const Vec& x) { return Vec::Constant(1, x[0]); };
  p.obj_grad = [](const Vec&) {
    Mat g(2, 1);
    g << 1, 0;
    return g;
  };
  p.con = [](const Vec&) { return Vec::Constant(2, 0.5); };
  p.con_grad = [](const Vec&) { return Mat::Zero(2, 2); };
  p.ineq_set = {0, 1};
  p.box = BoundingBox(Vec::Zero(2), Vec::Ones(2));
  const ScalarizedOptResult best = scalarized_grid_opt(p, Vec::Ones(1), 11);
  REQUIRE(best.found);
  CHECK(best.best[0] == doctest::Approx(0.5));
  CHECK(best.best[1] == 0.0); // smallest x2 among the ties
}

TEST_CASE("control brute force confirms the zero-control optimum") {
  gallery::ControlParams params; // a=0.5, b=0.3, c_s=3, c_u=2
  const std::vector<double> w(2, 0.0);
  const gallery::ControlAssembly asmb =
      gallery::make_optimal_control(gallery::ControlKind::Linear, params, 3, 1.0, w);
  const BruteForceResult result = control_bruteforce(asmb.oc, 11);
  CHECK(result.sequences == 11 * 11 * 11);
  CHECK(result.best_cost == doctest::Approx(5.25).epsilon(1e-12)); // 3*(1+0.5+0.25)
  CHECK(result.ties_within_tol == 1);
  for (const Vec& u : result.best_controls) CHECK(u.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stronger actuator makes nonzero controls optimal") {
  gallery::ControlParams params;
  params.b = 0.5;
  const std::vector<double> w(2, 0.0);
  const gallery::ControlAssembly asmb =
      gallery::make_optimal_control(gallery::ControlKind::Linear, params, 3, 1.0, w);
  const BruteForceResult result = control_bruteforce(asmb.oc, 11);
  CHECK(result.best_cost == doctest::Approx(5.0).epsilon(1e-12)); // u = (1,0,0)
  CHECK(result.best_controls[0][0] == doctest::Approx(1.0));
  CHECK(result.best_cost < 5.25); // beats the all-zero policy
}

TEST_CASE("single-stage problems keep the control at zero") {
  gallery::ControlParams params;
  const gallery::ControlAssembly asmb =
      gallery::make_optimal_control(gallery::ControlKind::Linear, params, 1, 1.0, {});
  const BruteForceResult result = control_bruteforce(asmb.oc, 5);
  CHECK(result.best_controls.size() == 1);
  CHECK(result.best_controls[0][0] == 0.0);
  CHECK(result.best_cost == doctest::Approx(3.0));
}

TEST_CASE("control brute force budget") {
  gallery::ControlParams params;
  const std::vector<double> w(9, 0.0);
  const gallery::ControlAssembly asmb =
      gallery::make_optimal_control(gallery::ControlKind::Linear, params, 10, 1.0, w);
  CHECK_THROWS_AS(control_bruteforce(asmb.oc, 11), BudgetExceeded); // 11^10 > 1e7
}

TEST_CASE("zero-control criterion agrees with enumeration") {
  // whenever the sampled criterion passes, enumeration returns the all-zero
  // sequence as the unique minimum
  gallery::ControlParams params;
  const std::vector<double> w = gallery::uniform_disturbances(2, 1.0, 21);
  const gallery::ControlAssembly asmb =
      gallery::make_optimal_control(gallery::ControlKind::Linear, params, 3, 1.0, w);
  const gallery::Result1Report criterion = gallery::result1_check(asmb.oc);
  REQUIRE(criterion.pass);
  const BruteForceResult enumerated = control_bruteforce(asmb.oc, 11);
  CHECK(enumerated.ties_within_tol == 1);
  for (const Vec& u : enumerated.best_controls) CHECK(u.cwiseAbs().maxCoeff() == 0.0);

  // the nonlinear counterpart with its state-dependent cap
  const gallery::ControlAssembly nl =
      gallery::make_optimal_control(gallery::ControlKind::Nonlinear, params, 3, 1.0, w);
  const gallery::Result1Report criterion_nl = gallery::result1_check(nl.oc);
  REQUIRE(criterion_nl.pass);
  const BruteForceResult enumerated_nl = control_bruteforce(nl.oc, 9);
  CHECK(enumerated_nl.ties_within_tol == 1);
  for (const Vec& u : enumerated_nl.best_controls) CHECK(u.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("power-control instances pass the lattice oracles") {
  const auto make_standard = [] {
    Mat G(2, 2);
    G << 0, 0.2, 0.2, 0;
    Vec eta(2);
    eta << 1, 1;
    return gallery::make_power_control(G, eta);
  };
  const ProblemSpec p = make_standard();
  const SolveResult solved = solve_fixed_point(p, Vec::Zero(2));
  REQUIRE(solved.converged);
  CHECK(pareto_check(p, solved.xstar, 101));

  double spacing = 0.0;
  for (int i = 0; i < p.n; ++i) {
    spacing = std::max(spacing, (p.box.upper[i] - p.box.lower[i]) / 100.0);
  }
  std::mt19937_64 gen(17);
  for (int draw = 0; draw < 5; ++draw) {
    const Vec mu = rng::simplex_point(gen, p.m);
    const ScalarizedOptResult best = scalarized_grid_opt(p, mu, 101);
    REQUIRE(best.found);
    CHECK((best.best - solved.xstar).cwiseAbs().maxCoeff() <= spacing + 1e-12);
  }
}
