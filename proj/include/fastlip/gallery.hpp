#pragma once

#include "fastlip/core.hpp"
#include "fastlip/relax.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fastlip::gallery {

/// Affine power control, min p s.t. p >= G p + eta, recast as a maximization
/// in Fast-Lipschitz form over [0, p_max]^n. Every feasible point of the
/// recast problem lies below the fixed point p* = (I - G)^{-1} eta, so p* is
/// its unique Pareto maximum. Requires G >= 0, eta > 0 and rho(G) < 1.
/// p_max <= 0 selects the smallest forward-invariant cap (needs row sums < 1).
ProblemSpec make_power_control(const Mat& G, const Vec& eta, double p_max = 0.0);

/// Random admissible power-control instance: n transmitters, zero diagonal,
/// row sums scaled to `gain`, eta in [0.5, 1.5].
ProblemSpec random_power_control(int n, double gain, std::uint64_t seed);

/// Two-variable bilinear-constraint example on [0,1]^2:
///   f0(x) = (2x1 + x2, x1 + 2x2),  f(x) = 0.5 (1 + a x2^2, 1 + b x1^2).
/// Nonconvex whenever a or b is positive. Requires |a|, |b| <= 2.
ProblemSpec make_toy(double a, double b);

/// Finite-horizon control instance: state s, control u in [0, u_max(s)],
/// dynamics s' = f(s, u) + w, stage cost g(s, u), horizon N.
struct OptimalControlSpec {
  int horizon = 0;   // N
  int state_dim = 1; // per-stage state size
  int control_dim = 1;

  std::function<Vec(const Vec&, const Vec&)> dynamics;       // f(s, u)
  std::function<Mat(const Vec&, const Vec&)> dyn_grad_s;     // grad_s f, state_dim x state_dim
  std::function<Mat(const Vec&, const Vec&)> dyn_grad_u;     // grad_u f, control_dim x state_dim
  std::function<double(const Vec&, const Vec&)> stage_cost;  // g(s, u)
  std::function<Vec(const Vec&, const Vec&)> cost_grad_s;    // grad_s g
  std::function<Vec(const Vec&, const Vec&)> cost_grad_u;    // grad_u g
  std::function<Vec(const Vec&)> control_bound;              // u_max(s)
  std::vector<Vec> disturbances;                             // w^1..w^{N-1}
  Vec s_init;
};

enum class ControlKind { Linear, Nonlinear };

struct ControlParams {
  double a = 0.5;
  double b = 0.3;
  double c_s = 3.0;
  double c_u = 2.0;
  double u_max = 1.0; // constant cap for the linear kind; the nonlinear kind
                      // uses the state-dependent cap a s^2 / (b (1 + s))
};

struct ControlAssembly {
  OptimalControlSpec oc;
  ProblemSpec stacked;     // variables (y, z) = (-s, -u), constant z-constraints
  PartitionSpec partition; // y = state block, z = control block
};

/// Builds the scalar first-order family (linear: f = a s - b u; nonlinear:
/// f = a s^2/(1+s) - b u) together with its stacked Fast-Lipschitz transform.
/// Disturbances w must be nonnegative for the nonlinear kind.
ControlAssembly make_optimal_control(ControlKind kind, const ControlParams& params, int N,
                                     double s_init, const std::vector<double>& w);

/// Seeded uniform draws in [0, w_max].
std::vector<double> uniform_disturbances(int count, double w_max, std::uint64_t seed);

/// States and controls visited by seeded forward simulations (the first
/// simulation holds all controls at zero).
struct ReachableSample {
  Vec s;
  Vec u;
};
std::vector<ReachableSample> sample_reachable(const OptimalControlSpec& oc, int n_sims,
                                              std::uint64_t seed);

/// Zero-control optimality criterion over sampled reachable states:
///   max ||grad_u f|| / (1 - max ||grad_s f||) < min grad_u g / max grad_s g.
/// The reported margin carries a 5% haircut for sampling slack. When it
/// passes, the all-zero control sequence is optimal for any horizon, initial
/// state and disturbances.
struct Result1Report {
  bool pass = false;
  double margin = 0; // 0.95 * (rhs - lhs)
  double lhs = 0;
  double rhs = 0;
  double max_grad_s_norm = 0;
  double max_grad_u_norm = 0;
  std::string reason; // set when the denominator collapses
};

Result1Report result1_check(const OptimalControlSpec& oc, int n_sims = 64,
                            std::uint64_t seed = 0);

/// Epigraph form of an inequality-only problem: variables (t, x) with
/// objective t, constraints t <= f0(x) and x <= f(x). The partition marks the
/// original variables as the objective-absent block, so
/// check_missing_objective_vars on the transform succeeds exactly when Q1
/// holds for the base problem.
struct EpigraphTransform {
  ProblemSpec problem;
  PartitionSpec partition;
};

EpigraphTransform epigraph_transform(const ProblemSpec& base);

} // namespace fastlip::gallery
