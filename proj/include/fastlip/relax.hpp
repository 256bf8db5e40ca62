#pragma once

#include "fastlip/core.hpp"
#include "fastlip/qc.hpp"

#include <string>
#include <vector>

namespace fastlip {

/// A split of the variables into an objective-active / constrained block (y)
/// and its complement (z).
struct PartitionSpec {
  std::vector<int> y_idx;
  std::vector<int> z_idx;

  void validate(int n) const; // y and z partition {0..n-1}

  static Vec gather(const Vec& x, const std::vector<int>& idx);
  static Mat gather(const Mat& A, const std::vector<int>& rows,
                    const std::vector<int>& cols);
  Vec scatter(const Vec& y, const Vec& z, int n) const;
};

/// Membership of a verified fixed point in the extra set X. True plus a
/// passing qualifying certificate means the problem with X added keeps the
/// same unique optimum. A problem without an extra set counts as X = R^n.
bool check_extra_set(const ProblemSpec& problem, const Vec& xstar, double feas_tol = 1e-6);

struct BranchReport {
  std::string name; // "b.i" | "b.ii" | "b.iii"
  bool pass = false;
  double worst_margin = 0;
  Vec worst_x;
  std::string detail;
};

struct FewerConstraintsOptions {
  std::uint64_t seed = 0;
  int interior_z_samples = 8;
  int max_corner_samples = 64; // beyond 6 z-axes, corners are sampled
  int sub_mc_points = 512;     // subproblem grid size over the y-box
  int sub_per_axis = 9;        // lattice per axis when the y-block is small
};

struct FewerConstraintsReport {
  bool verdict = false;
  bool subproblem_pass = false;
  ConditionId subproblem_condition; // condition that certified (a), if any
  std::string certified_branch;     // branch holding at every sampled point
  std::vector<BranchReport> branches;
  GridSpec grid;
  long z_samples = 0;
};

/// Checker for problems with fewer constraints than variables, rewritten with
/// constant z-constraints f_z = b_z:
///   (a) the subproblem (f0|z, f_y|z) satisfies a qualifying condition for
///       every sampled z (QINFD first, then QK(1..K_MAX), QK(inf)), and
///   (b) one of the coupling branches holds at every sampled point:
///       (b.i)   grad_z f0 >= 0 and grad_z f_y >= 0 with non-zero rows
///       (b.ii)  grad_z f0 >= 0 with non-zero rows and grad_z f_y >= 0
///       (b.iii) ||grad_z f_y|| / (1 - ||grad_y f_y||) < delta_z / Delta_y
FewerConstraintsReport check_fewer_constraints(const ProblemSpec& problem,
                                               const PartitionSpec& partition,
                                               const Grid& grid,
                                               const FewerConstraintsOptions& options = {});

struct MissingVarsReport {
  bool verdict = false;
  std::vector<SubConditionResult> worst_margins;
  std::vector<PointFailure> failures;
  long failure_count = 0;
  GridSpec grid;
};

/// Checker for variables absent from the objective (z marks the absent
/// block). At every grid point:
///   (a) grad_y f0 >= 0 with non-zero rows and grad_z f0 >= 0
///   (b) full grad f >= 0
///   (c) ||grad f|| < 1 in the configured norm family
///   (d) grad_z f_y has non-zero rows
MissingVarsReport check_missing_objective_vars(const ProblemSpec& problem,
                                               const PartitionSpec& partition,
                                               const Grid& grid);

} // namespace fastlip
