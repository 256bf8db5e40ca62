#include "fastlip/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace fastlip::oracle {

namespace {

void require_lattice_budget(const ProblemSpec& problem, int resolution) {
  if (problem.n > kMaxLatticeDims) {
    throw BudgetExceeded("lattice oracle: n = " + std::to_string(problem.n) +
                         " exceeds the n <= " + std::to_string(kMaxLatticeDims) + " budget");
  }
  if (resolution < 2) throw InvalidInput("lattice oracle: resolution must be >= 2");
  const double points = std::pow(static_cast<double>(resolution), problem.n);
  if (points > 5e6) {
    throw BudgetExceeded("lattice oracle: resolution^n = " + std::to_string(points) +
                         " exceeds the 5e6 point budget");
  }
}

// A fixed point is always feasible; querying other feasible points is also
// meaningful (they come back dominated), so feasibility is what gets enforced.
void require_feasible(const ProblemSpec& problem, const Vec& x, double tol) {
  const Vec fx = problem.con(x);
  for (int i : problem.ineq_set) {
    if (x[i] > fx[i] + tol) {
      throw PreconditionViolation("oracle: query point violates constraint " +
                                  std::to_string(i));
    }
  }
  for (int i : problem.eq_set) {
    if (std::abs(x[i] - fx[i]) > tol) {
      throw PreconditionViolation("oracle: query point violates equality " + std::to_string(i));
    }
  }
}

// visits lattice points in lexicographically ascending order
template <typename Fn>
void for_each_lattice_point(const BoundingBox& box, int resolution, Fn&& fn) {
  const int n = box.dim();
  std::vector<int> idx(static_cast<size_t>(n), 0);
  Vec x(n);
  while (true) {
    for (int i = 0; i < n; ++i) {
      // most significant axis first so enumeration order is lexicographic
      const double t = static_cast<double>(idx[static_cast<size_t>(i)]) / (resolution - 1);
      x[i] = box.lower[i] + t * (box.upper[i] - box.lower[i]);
    }
    fn(x);
    int axis = n - 1;
    while (axis >= 0 && ++idx[static_cast<size_t>(axis)] == resolution) {
      idx[static_cast<size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
}

bool lattice_feasible(const ProblemSpec& problem, const Vec& x, double feas_tol) {
  const Vec fx = problem.con(x);
  for (int i : problem.ineq_set) {
    if (x[i] > fx[i] + feas_tol) return false;
  }
  for (int i : problem.eq_set) {
    if (std::abs(x[i] - fx[i]) > feas_tol) return false;
  }
  if (problem.extra_set && !problem.extra_set(x)) return false;
  return true;
}

double default_feas_tol(const ProblemSpec& problem, int resolution) {
  if (problem.eq_set.empty()) return 1e-9;
  double spacing = 0.0;
  for (int i = 0; i < problem.n; ++i) {
    spacing = std::max(spacing, (problem.box.upper[i] - problem.box.lower[i]) / (resolution - 1));
  }
  return 1.5 * spacing;
}

} // namespace

FeasGrid feasible_lattice(const ProblemSpec& problem, int resolution,
                          std::optional<double> feas_tol) {
  problem.validate();
  require_lattice_budget(problem, resolution);
  FeasGrid grid;
  grid.resolution = resolution;
  grid.feas_tol = feas_tol.value_or(default_feas_tol(problem, resolution));
  for_each_lattice_point(problem.box, resolution, [&](const Vec& x) {
    if (lattice_feasible(problem, x, grid.feas_tol)) grid.points.push_back(x);
  });
  return grid;
}

bool pareto_check(const ProblemSpec& problem, const Vec& xstar, int resolution) {
  problem.validate();
  if (!problem.obj) throw InvalidInput("pareto_check: objective evaluator required");
  require_lattice_budget(problem, resolution);
  const double feas_tol = default_feas_tol(problem, resolution);
  require_feasible(problem, xstar, std::max(feas_tol, 1e-6));

  const Vec ref = problem.obj(xstar);
  bool dominated = false;
  for_each_lattice_point(problem.box, resolution, [&](const Vec& x) {
    if (dominated || !lattice_feasible(problem, x, feas_tol)) return;
    const Vec v = problem.obj(x);
    bool all_geq = true;
    bool some_strict = false;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (v[j] < ref[j] - kDominationTol) {
        all_geq = false;
        break;
      }
      if (v[j] > ref[j] + kDominationTol) some_strict = true;
    }
    if (all_geq && some_strict) dominated = true;
  });
  return !dominated;
}

ScalarizedOptResult scalarized_grid_opt(const ProblemSpec& problem, const Vec& mu,
                                        int resolution) {
  problem.validate();
  if (!problem.obj) throw InvalidInput("scalarized_grid_opt: objective evaluator required");
  if (mu.size() != problem.m || mu.minCoeff() <= 0) {
    throw InvalidInput("scalarized_grid_opt: mu must be a positive m-vector");
  }
  require_lattice_budget(problem, resolution);
  const double feas_tol = default_feas_tol(problem, resolution);

  ScalarizedOptResult result;
  result.value = -std::numeric_limits<double>::infinity();
  // lexicographic enumeration + strict improvement keeps the smallest tie
  for_each_lattice_point(problem.box, resolution, [&](const Vec& x) {
    if (!lattice_feasible(problem, x, feas_tol)) return;
    const double v = mu.dot(problem.obj(x));
    if (!result.found || v > result.value) {
      result.found = true;
      result.best = x;
      result.value = v;
    }
  });
  return result;
}

BruteForceResult control_bruteforce(const gallery::OptimalControlSpec& oc, int u_levels,
                                    double cost_tie_tol) {
  if (u_levels < 1) throw InvalidInput("control_bruteforce: u_levels must be >= 1");
  if (!oc.dynamics || !oc.stage_cost || !oc.control_bound) {
    throw InvalidInput("control_bruteforce: incomplete control spec");
  }
  const double combos =
      std::pow(static_cast<double>(u_levels), static_cast<double>(oc.horizon) * oc.control_dim);
  if (combos > kBruteForceBudget) {
    throw BudgetExceeded("control_bruteforce: u_levels^(N*p) = " + std::to_string(combos) +
                         " exceeds budget " + std::to_string(kBruteForceBudget));
  }

  BruteForceResult result;
  result.best_cost = std::numeric_limits<double>::infinity();
  std::vector<Vec> current(static_cast<size_t>(oc.horizon));
  const Vec w_zero = Vec::Zero(oc.state_dim);

  // pass 1: best cost and the lexicographically smallest minimizer;
  // pass 2: count of sequences within the tie tolerance of the best
  auto visit = [&](auto&& self, int stage, const Vec& s, double cost, bool counting) -> void {
    if (stage == oc.horizon) {
      ++result.sequences;
      if (counting) {
        if (cost <= result.best_cost + cost_tie_tol) ++result.ties_within_tol;
      } else if (cost < result.best_cost) {
        result.best_cost = cost;
        result.best_controls = current;
      }
      return;
    }
    const Vec cap = oc.control_bound(s);
    Vec u = Vec::Zero(oc.control_dim);
    std::vector<int> level(static_cast<size_t>(oc.control_dim), 0);
    while (true) {
      for (int j = 0; j < oc.control_dim; ++j) {
        u[j] = u_levels == 1
                   ? 0.0
                   : cap[j] * static_cast<double>(level[static_cast<size_t>(j)]) / (u_levels - 1);
      }
      current[static_cast<size_t>(stage)] = u;
      const double stage_cost = oc.stage_cost(s, u);
      if (stage + 1 < oc.horizon) {
        const Vec& w = static_cast<size_t>(stage) < oc.disturbances.size()
                           ? oc.disturbances[static_cast<size_t>(stage)]
                           : w_zero;
        self(self, stage + 1, oc.dynamics(s, u) + w, cost + stage_cost, counting);
      } else {
        self(self, stage + 1, s, cost + stage_cost, counting);
      }
      int j = oc.control_dim - 1;
      while (j >= 0 && ++level[static_cast<size_t>(j)] == u_levels) {
        level[static_cast<size_t>(j)] = 0;
        --j;
      }
      if (j < 0) break;
    }
  };

  visit(visit, 0, oc.s_init, 0.0, false);
  result.sequences = 0;
  visit(visit, 0, oc.s_init, 0.0, true);
  return result;
}

} // namespace fastlip::oracle
