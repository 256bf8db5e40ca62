#pragma once

#include "fastlip/core.hpp"
#include "fastlip/qc.hpp"

#include <cstdint>
#include <vector>

namespace fastlip {

inline constexpr double kDefaultSolveTol = 1e-9;
inline constexpr int kDefaultMaxIter = 10000;

struct SolveResult {
  Vec xstar;
  int iterations = 0;
  std::vector<double> residuals; // ||x - f(x)||_inf history, size iterations + 1
  std::vector<Vec> iterates;     // x history, same length as residuals
  double contraction_estimate = 0; // max residual ratio, first ratio skipped
  bool converged = false;
  int clamp_events = 0; // projections back onto the box
};

/// Repeated evaluation x <- f(x), clamped to the box, until
/// ||x - f(x)||_inf <= tol or max_iter. Non-convergence is reported in the
/// result, not thrown; NaN from an evaluator is a hard error.
SolveResult solve_fixed_point(const ProblemSpec& problem, const Vec& x0,
                              double tol = kDefaultSolveTol, int max_iter = kDefaultMaxIter);

enum class AsyncSchedule { RoundRobin, RandomComponent };

struct AsyncSimConfig {
  int max_delay = 0;     // B: per-link read age drawn uniformly from {0..B}
  double drop_prob = 0;  // a dropped message re-uses the last delivered value
  std::uint64_t seed = 0;
  AsyncSchedule schedule = AsyncSchedule::RoundRobin;
  long max_steps = 100000; // component updates
};

struct AsyncEvent {
  long step = 0;
  int component = 0;
  std::vector<int> ages; // effective read age per component; -1 marks a drop
  double value = 0;      // updated component value
};

struct AsyncResult {
  SolveResult result; // iterations counts rounds of n component updates
  std::vector<AsyncEvent> trace;
  long steps = 0;
};

/// Deterministic single-threaded simulation of a totally asynchronous
/// iteration: each component update reads neighbor values aged by seeded
/// delays <= max_delay and subject to message drops. Identical
/// (problem, x0, config) inputs produce identical traces. Convergence is
/// measured on the true state.
AsyncResult solve_async(const ProblemSpec& problem, const Vec& x0, const AsyncSimConfig& cfg,
                        double tol = kDefaultSolveTol);

/// Scalarized dual variables at a fixed point:
///   lambda = (I - grad f(x*))^{-1} grad f0(x*) mu
/// for seeded weights mu > 0 on the simplex. A positive minimum entry across
/// all draws certifies the fixed point against the first-order conditions.
struct KktCertificate {
  std::vector<Vec> mu_samples;
  std::vector<Vec> lambdas;
  double min_lambda = 0;
  bool pass() const { return min_lambda > kPosTol; }
};

inline constexpr double kConditionLimit = 1e12;

KktCertificate kkt_certificate(const ProblemSpec& problem, const Vec& xstar, int n_mu,
                               std::uint64_t seed, double feas_tol = 1e-6);

struct ContractionEstimate {
  double alpha = 0;
  bool contractive = false; // alpha < 1
};

/// alpha = max over the grid of the best contraction certificate at each
/// point (min over the configured norm family). alpha < 1 certifies sampled
/// contraction and predicts a geometric residual decay factor <= alpha.
ContractionEstimate estimate_contraction(const ProblemSpec& problem, const Grid& grid);

} // namespace fastlip
