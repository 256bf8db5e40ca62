#include "fastlip/core.hpp"

#include <algorithm>
#include <cmath>

namespace fastlip {

namespace {

void require_finite(const Mat& A, const char* what) {
  if (!A.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entries");
}

Mat central_difference(const std::function<Vec(const Vec&)>& fn, const Vec& x, int cols,
                       double h) {
  Mat grad(x.size(), cols);
  Vec xp = x;
  Vec xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double hi = h * (1.0 + std::abs(x[i]));
    xp[i] = x[i] + hi;
    xm[i] = x[i] - hi;
    const Vec fp = fn(xp);
    const Vec fm = fn(xm);
    grad.row(i) = ((fp - fm) / (2.0 * hi)).transpose();
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return grad;
}

} // namespace

BoundingBox::BoundingBox(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) throw InvalidInput("box: lower/upper dimension mismatch");
  if (!lower.allFinite() || !upper.allFinite()) throw InvalidInput("box: non-finite bound");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (lower[i] > upper[i]) throw InvalidInput("box: lower > upper at axis " + std::to_string(i));
  }
}

bool BoundingBox::contains(const Vec& x, double tol) const {
  if (x.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
  }
  return true;
}

Vec BoundingBox::clamp(const Vec& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

void ProblemSpec::validate() const {
  if (n < 1) throw InvalidInput("problem: n must be >= 1");
  if (m < 1) throw InvalidInput("problem: m must be >= 1");
  if (!obj_grad) throw InvalidInput("problem: objective gradient evaluator missing");
  if (!con) throw InvalidInput("problem: constraint evaluator missing");
  if (box.dim() != n) throw InvalidInput("problem: box dimension != n");

  std::vector<int> seen(static_cast<size_t>(n), 0);
  auto mark = [&](const std::vector<int>& idx, const char* name) {
    for (int i : idx) {
      if (i < 0 || i >= n) throw InvalidInput(std::string(name) + ": index out of range");
      if (seen[static_cast<size_t>(i)]++) {
        throw InvalidInput("index sets overlap at " + std::to_string(i));
      }
    }
  };
  mark(ineq_set, "ineq_set");
  mark(eq_set, "eq_set");
  for (int i = 0; i < n; ++i) {
    if (!seen[static_cast<size_t>(i)]) {
      throw InvalidInput("index sets do not cover variable " + std::to_string(i));
    }
  }
}

Mat ProblemSpec::constraint_gradient(const Vec& x) const {
  if (con_grad) return con_grad(x);
  return central_difference(con, x, n, 1e-6);
}

Mat ProblemSpec::objective_gradient(const Vec& x) const {
  return obj_grad(x);
}

ConditionSample make_condition_sample(const ProblemSpec& problem, const Vec& x) {
  ConditionSample s;
  s.x = x;
  s.G0 = problem.objective_gradient(x);
  if (s.G0.rows() != problem.n || s.G0.cols() != problem.m) {
    throw InvalidInput("objective gradient has wrong shape");
  }
  s.Gf = problem.constraint_gradient(x);
  if (s.Gf.rows() != problem.n || s.Gf.cols() != problem.n) {
    throw InvalidInput("constraint gradient has wrong shape");
  }
  require_finite(s.G0, "grad f0");
  require_finite(s.Gf, "grad f");
  s.q = q_ratio_or_nan(s.G0);
  std::tie(s.delta, s.Delta) = delta_Delta(s.G0);
  s.inf_norm_Gf = inf_norm(s.Gf);
  return s;
}

double inf_norm(const Mat& A) {
  require_finite(A, "inf_norm");
  if (A.rows() == 0 || A.cols() == 0) return 0.0;
  return A.cwiseAbs().rowwise().sum().maxCoeff();
}

double one_norm(const Mat& A) {
  require_finite(A, "one_norm");
  if (A.rows() == 0 || A.cols() == 0) return 0.0;
  return A.cwiseAbs().colwise().sum().maxCoeff();
}

double transpose_norm(const Mat& A, BaseNorm base) {
  switch (base) {
    case BaseNorm::Inf:
      return inf_norm(A.transpose());
    case BaseNorm::One:
      return one_norm(A.transpose());
  }
  throw InvalidInput("transpose_norm: unknown base norm");
}

double q_ratio(const Mat& G0) {
  require_finite(G0, "q_ratio");
  if (G0.minCoeff() < -kSignTol) {
    throw InvalidInput("q_ratio: negative entries (q is defined for grad f0 >= 0)");
  }
  double q = 1.0;
  for (Eigen::Index j = 0; j < G0.cols(); ++j) {
    const double mx = G0.col(j).maxCoeff();
    if (mx <= kSignTol) {
      q = 0.0; // all-zero column
      continue;
    }
    const double mn = std::max(G0.col(j).minCoeff(), 0.0);
    q = std::min(q, mn / mx);
  }
  return q;
}

double q_ratio_or_nan(const Mat& G0) noexcept {
  if (!G0.allFinite() || G0.minCoeff() < -kSignTol) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double q = 1.0;
  for (Eigen::Index j = 0; j < G0.cols(); ++j) {
    const double mx = G0.col(j).maxCoeff();
    if (mx <= kSignTol) {
      q = 0.0;
      continue;
    }
    q = std::min(q, std::max(G0.col(j).minCoeff(), 0.0) / mx);
  }
  return q;
}

std::pair<double, double> delta_Delta(const Mat& G0) {
  require_finite(G0, "delta_Delta");
  return {G0.minCoeff(), G0.maxCoeff()};
}

bool matrix_power_nonneg(const Mat& A, int k) {
  require_finite(A, "matrix_power_nonneg");
  if (k < 1) throw UnsupportedOrder("matrix_power_nonneg: k must be >= 1");
  if (k > kMaxPowerK) {
    throw UnsupportedOrder("matrix_power_nonneg: k exceeds K_MAX = " +
                           std::to_string(kMaxPowerK));
  }
  Mat P = A;
  for (int i = 1; i < k; ++i) P = P * A;
  return P.minCoeff() >= -kSignTol;
}

double geometric_tail_norm(const Mat& A, int k) {
  require_finite(A, "geometric_tail_norm");
  if (k == kInfiniteK) {
    const double a = inf_norm(A);
    if (a >= 1.0) {
      throw DivergentSeries("geometric_tail_norm: ||A||_inf >= 1, series diverges");
    }
    return a / (1.0 - a);
  }
  if (k < 1) throw UnsupportedOrder("geometric_tail_norm: k must be >= 1");
  if (k == 1) return 0.0; // empty sum
  Mat sum = A;
  Mat P = A;
  for (int l = 2; l <= k - 1; ++l) {
    P = P * A;
    sum += P;
  }
  return inf_norm(sum);
}

double rho_upper_bound(const Mat& A) {
  require_finite(A, "rho_upper_bound");
  double s0 = inf_norm(A);
  if (s0 == 0.0) return 0.0;
  Mat B = A / s0;
  double log_acc = std::log(s0);
  double weight = 0.5;
  for (int i = 0; i < 6; ++i) { // B tracks A^(2^i) up to scaling -> ||A^64||^(1/64)
    B = B * B;
    const double s = inf_norm(B);
    if (s == 0.0) return 0.0; // nilpotent
    B /= s;
    log_acc += weight * std::log(s);
    weight *= 0.5;
  }
  return std::exp(log_acc);
}

double NormFamily::min_value() const {
  return std::min(inf, std::min(one, rho));
}

const char* NormFamily::best_name() const {
  const double mv = min_value();
  if (inf == mv) return "inf";
  if (one == mv) return "one";
  return "rho";
}

NormFamily norm_family(const Mat& A) {
  NormFamily f;
  f.inf = inf_norm(A);
  f.one = one_norm(A);
  f.rho = rho_upper_bound(A) + kRhoSafetyMargin;
  return f;
}

bool nonneg_with_nonzero_rows(const Mat& A) {
  if (A.size() == 0) return false;
  if (A.minCoeff() < -kSignTol) return false;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (A.row(i).cwiseAbs().maxCoeff() <= kPosTol) return false;
  }
  return true;
}

double fd_check_gradients(const ProblemSpec& problem, const Vec& x, double h) {
  if (h <= 0) throw InvalidInput("fd_check_gradients: h must be positive");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double hi = h * (1.0 + std::abs(x[i]));
    if (x[i] - hi < problem.box.lower[i] || x[i] + hi > problem.box.upper[i]) {
      throw PreconditionViolation("fd_check_gradients: x within step of box boundary");
    }
  }
  double worst = 0.0;
  {
    const Mat analytic = problem.constraint_gradient(x);
    const Mat fd = central_difference(problem.con, x, problem.n, h);
    worst = (analytic - fd).cwiseAbs().maxCoeff();
  }
  if (problem.obj) {
    const Mat analytic = problem.objective_gradient(x);
    const Mat fd = central_difference(problem.obj, x, problem.m, h);
    worst = std::max(worst, (analytic - fd).cwiseAbs().maxCoeff());
  }
  return worst;
}

int box_mapping_violations(const ProblemSpec& problem, const std::vector<Vec>& points,
                           double tol) {
  int count = 0;
  for (const Vec& x : points) {
    if (!problem.box.contains(problem.con(x), tol)) ++count;
  }
  return count;
}

} // namespace fastlip
