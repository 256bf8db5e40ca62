#include "fastlip/solver.hpp"

#include "fastlip/rng.hpp"

#include <algorithm>
#include <cmath>

namespace fastlip {

namespace {

Vec evaluate_constraints(const ProblemSpec& problem, const Vec& x) {
  Vec fx = problem.con(x);
  if (fx.size() != problem.n) throw InvalidInput("constraint evaluator returned wrong size");
  if (!fx.allFinite()) throw std::runtime_error("constraint evaluator produced NaN/Inf");
  return fx;
}

double max_ratio_after_transient(const std::vector<double>& residuals) {
  double worst = 0.0;
  // skip residuals[1]/residuals[0]: the first step reflects the start point,
  // not the map's contraction modulus
  for (size_t k = 1; k + 1 < residuals.size(); ++k) {
    if (residuals[k] > 0.0) worst = std::max(worst, residuals[k + 1] / residuals[k]);
  }
  return worst;
}

} // namespace

SolveResult solve_fixed_point(const ProblemSpec& problem, const Vec& x0, double tol,
                              int max_iter) {
  problem.validate();
  if (!problem.box.contains(x0, 1e-12)) {
    throw PreconditionViolation("solve_fixed_point: x0 outside the box");
  }

  SolveResult result;
  Vec x = problem.box.clamp(x0);
  Vec fx = evaluate_constraints(problem, x);
  double residual = (x - fx).cwiseAbs().maxCoeff();
  result.residuals.push_back(residual);
  result.iterates.push_back(x);

  while (residual > tol && result.iterations < max_iter) {
    if (!problem.box.contains(fx, 1e-12)) ++result.clamp_events;
    x = problem.box.clamp(fx);
    fx = evaluate_constraints(problem, x);
    residual = (x - fx).cwiseAbs().maxCoeff();
    ++result.iterations;
    result.residuals.push_back(residual);
    result.iterates.push_back(x);
  }

  result.xstar = x;
  result.converged = residual <= tol;
  result.contraction_estimate = max_ratio_after_transient(result.residuals);
  return result;
}

AsyncResult solve_async(const ProblemSpec& problem, const Vec& x0, const AsyncSimConfig& cfg,
                        double tol) {
  problem.validate();
  if (!problem.box.contains(x0, 1e-12)) {
    throw PreconditionViolation("solve_async: x0 outside the box");
  }
  if (cfg.max_delay < 0) throw InvalidInput("solve_async: max_delay must be >= 0");
  if (cfg.drop_prob < 0 || cfg.drop_prob >= 1) {
    throw InvalidInput("solve_async: drop_prob must be in [0, 1)");
  }

  const int n = problem.n;
  const int B = cfg.max_delay;
  std::mt19937_64 gen(cfg.seed);

  AsyncResult out;
  Vec x = problem.box.clamp(x0);

  // Ring of the last B+1 true states; history[t % (B+1)] is the state after
  // step t (step 0 = initial state).
  std::vector<Vec> history(static_cast<size_t>(B) + 1, x);
  // last value each link (reader i, source j) delivered; reused on drops
  Mat last_delivered = x.transpose().replicate(n, 1);
  std::vector<long> last_update(static_cast<size_t>(n), 0);
  const long starvation_cap = static_cast<long>(n) * B;

  auto true_residual = [&]() {
    const Vec fx = evaluate_constraints(problem, x);
    return (x - fx).cwiseAbs().maxCoeff();
  };

  SolveResult& res = out.result;
  double residual = true_residual();
  res.residuals.push_back(residual);
  res.iterates.push_back(x);

  long step = 0;
  bool round_recorded = true; // the initial state is already recorded
  while (residual > tol && step < cfg.max_steps) {
    ++step;

    int comp;
    if (cfg.schedule == AsyncSchedule::RoundRobin) {
      comp = static_cast<int>((step - 1) % n);
    } else {
      // enforce the starvation cap before drawing
      comp = -1;
      long worst_wait = -1;
      for (int i = 0; i < n; ++i) {
        const long wait = step - last_update[static_cast<size_t>(i)];
        if (wait >= starvation_cap && wait > worst_wait) {
          worst_wait = wait;
          comp = i;
        }
        if (wait > starvation_cap + n) {
          throw std::logic_error("solve_async: starvation cap violated"); // unreachable
        }
      }
      if (comp < 0) comp = rng::index(gen, n);
    }
    last_update[static_cast<size_t>(comp)] = step;

    // assemble the (possibly outdated) view component `comp` reads
    Vec view(n);
    std::vector<int> ages(static_cast<size_t>(n), 0);
    for (int j = 0; j < n; ++j) {
      if (j == comp) {
        view[j] = x[j]; // a node always knows its own current value
        continue;
      }
      const int age = B > 0 ? rng::index(gen, B + 1) : 0;
      const long at = std::max<long>(0, step - 1 - age);
      const double aged = history[static_cast<size_t>(at % (B + 1))][j];
      if (cfg.drop_prob > 0 && rng::unit(gen) < cfg.drop_prob) {
        view[j] = last_delivered(comp, j);
        ages[static_cast<size_t>(j)] = -1; // drop: stale reuse
      } else {
        last_delivered(comp, j) = aged;
        view[j] = aged;
        ages[static_cast<size_t>(j)] = age;
      }
    }

    const Vec fview = evaluate_constraints(problem, view);
    double updated = fview[comp];
    const double clamped =
        std::clamp(updated, problem.box.lower[comp], problem.box.upper[comp]);
    if (clamped != updated) ++res.clamp_events;
    x[comp] = clamped;
    history[static_cast<size_t>(step % (B + 1))] = x;

    out.trace.push_back({step, comp, ages, clamped});

    residual = true_residual(); // termination is on the true state
    round_recorded = false;
    if (step % n == 0) { // history granularity: one round of n updates
      ++res.iterations;
      res.residuals.push_back(residual);
      res.iterates.push_back(x);
      round_recorded = true;
    }
  }
  if (!round_recorded) { // final partial round
    ++res.iterations;
    res.residuals.push_back(residual);
    res.iterates.push_back(x);
  }

  out.steps = step;
  res.xstar = x;
  res.converged = residual <= tol;
  res.contraction_estimate = max_ratio_after_transient(res.residuals);
  return out;
}

KktCertificate kkt_certificate(const ProblemSpec& problem, const Vec& xstar, int n_mu,
                               std::uint64_t seed, double feas_tol) {
  problem.validate();
  if (n_mu < 1) throw InvalidInput("kkt_certificate: n_mu must be >= 1");

  const Vec fx = evaluate_constraints(problem, xstar);
  const double residual = (xstar - fx).cwiseAbs().maxCoeff();
  if (residual > feas_tol) {
    throw PreconditionViolation("kkt_certificate: x is not a fixed point within tolerance (" +
                                std::to_string(residual) + ")");
  }

  const Mat A = problem.constraint_gradient(xstar);
  const Mat G0 = problem.objective_gradient(xstar);
  const Mat M = Mat::Identity(problem.n, problem.n) - A;
  Eigen::PartialPivLU<Mat> lu(M);
  const double rcond = lu.rcond();
  if (!(rcond > 0) || 1.0 / rcond > kConditionLimit) {
    throw RegularityFailure(
        "kkt_certificate: I - grad f(x*) is singular or ill-conditioned "
        "(constraint gradients not usable as an independent set)");
  }

  KktCertificate cert;
  cert.min_lambda = std::numeric_limits<double>::infinity();
  std::mt19937_64 gen(seed);
  for (int i = 0; i < n_mu; ++i) {
    const Vec mu = rng::simplex_point(gen, problem.m);
    const Vec lambda = lu.solve(G0 * mu);
    cert.min_lambda = std::min(cert.min_lambda, lambda.minCoeff());
    cert.mu_samples.push_back(mu);
    cert.lambdas.push_back(lambda);
  }
  return cert;
}

ContractionEstimate estimate_contraction(const ProblemSpec& problem, const Grid& grid) {
  problem.validate();
  if (grid.points.empty()) throw InvalidInput("estimate_contraction: empty grid");
  ContractionEstimate est;
  for (const Vec& x : grid.points) {
    est.alpha = std::max(est.alpha, norm_family(problem.constraint_gradient(x)).min_value());
  }
  est.contractive = est.alpha < 1.0;
  return est;
}

} // namespace fastlip
