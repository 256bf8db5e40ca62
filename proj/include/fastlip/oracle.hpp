#pragma once

#include "fastlip/core.hpp"
#include "fastlip/gallery.hpp"

#include <optional>
#include <vector>

namespace fastlip::oracle {

inline constexpr int kMaxLatticeDims = 3;
inline constexpr double kDominationTol = 1e-8;

/// Lattice restriction of the feasible set: x_i <= f_i(x) + feas_tol on the
/// inequality set, |x_i - f_i(x)| <= feas_tol on the equality set, extra set
/// honored when present. Default feas_tol is 1.5 lattice spacings when
/// equality constraints exist (equality manifolds rarely hit the lattice),
/// 1e-9 otherwise.
struct FeasGrid {
  int resolution = 0;
  double feas_tol = 0;
  std::vector<Vec> points;
};

FeasGrid feasible_lattice(const ProblemSpec& problem, int resolution,
                          std::optional<double> feas_tol = std::nullopt);

/// Brute-force Pareto test: true iff no feasible lattice point dominates
/// f0(xstar) (all components >= within kDominationTol, one strictly above).
/// Requires n <= kMaxLatticeDims and xstar to be a fixed point.
bool pareto_check(const ProblemSpec& problem, const Vec& xstar, int resolution);

struct ScalarizedOptResult {
  bool found = false; // false: the feasible lattice is empty
  Vec best;
  double value = 0;
};

/// argmax of mu^T f0 over the feasible lattice, ties broken toward the
/// lexicographically smallest point. Requires mu > 0 and n <= kMaxLatticeDims.
ScalarizedOptResult scalarized_grid_opt(const ProblemSpec& problem, const Vec& mu,
                                        int resolution);

inline constexpr double kBruteForceBudget = 1e7;

struct BruteForceResult {
  std::vector<Vec> best_controls; // one entry per stage
  double best_cost = 0;
  long sequences = 0;
  long ties_within_tol = 0; // sequences with cost <= best + tie tolerance
};

/// Exhaustive control search: each control component ranges over a u_levels
/// lattice on [0, u_max] (state-dependent caps re-evaluated along the path).
/// Requires u_levels^(N*p) within budget.
BruteForceResult control_bruteforce(const gallery::OptimalControlSpec& oc, int u_levels,
                                    double cost_tie_tol = 1e-9);

} // namespace fastlip::oracle
