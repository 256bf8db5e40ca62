#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fastlip {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Shared numeric knobs. Sign tests tolerate floating-point zero noise;
// strict-positivity tests demand clearance above it.
inline constexpr double kSignTol = 1e-12;        // slack for ">= 0" tests
inline constexpr double kPosTol = 1e-10;         // threshold for "> 0" tests
inline constexpr int kMaxPowerK = 8;             // largest finite k in matrix-power checks
inline constexpr double kRhoSafetyMargin = 1e-3; // added on top of spectral-radius estimates
inline constexpr int kInfiniteK = std::numeric_limits<int>::max();

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DivergentSeries : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnsupportedOrder : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct PreconditionViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RegularityFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InfeasibleGain : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Axis-aligned box D = [lower, upper]. All optimality candidates are assumed
/// to live here, and the constraint map is expected to send D into D.
struct BoundingBox {
  Vec lower;
  Vec upper;

  BoundingBox() = default;
  BoundingBox(Vec lo, Vec hi);

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Vec& x, double tol = 0.0) const;
  Vec clamp(const Vec& x) const;
  Vec midpoint() const { return 0.5 * (lower + upper); }
};

/// A problem in Fast-Lipschitz form:
///   max f0(x)  s.t.  x_i <= f_i(x) (i in ineq_set),  x_i = f_i(x) (i in eq_set)
/// restricted to the bounding box.
///
/// Gradient orientation throughout the library: [grad f]_{ij} = d f_j / d x_i,
/// i.e. column j holds the partials of f_j (the transpose of the Jacobian).
struct ProblemSpec {
  int n = 0; // number of variables == number of constraints
  int m = 1; // objective dimension

  std::function<Vec(const Vec&)> obj;      // f0(x), m-vector; optional but needed by oracles
  std::function<Mat(const Vec&)> obj_grad; // grad f0(x), n x m
  std::function<Vec(const Vec&)> con;      // f(x), n-vector
  std::function<Mat(const Vec&)> con_grad; // grad f(x), n x n; null -> finite differences
  std::vector<int> ineq_set;               // 0-based
  std::vector<int> eq_set;
  BoundingBox box;
  std::function<bool(const Vec&)> extra_set; // membership in an extra set X; optional

  /// Structural checks: index sets partition {0..n-1}, box dims match, evaluators set.
  void validate() const;

  /// Analytic gradient if provided, else central differences with
  /// per-coordinate step h_i = 1e-6 * (1 + |x_i|).
  Mat constraint_gradient(const Vec& x) const;
  Mat objective_gradient(const Vec& x) const;
};

/// Point-local quantities the qualifying conditions are made of.
struct ConditionSample {
  Vec x;
  Mat G0;             // grad f0(x)
  Mat Gf;             // grad f(x)
  double q;           // q(x); NaN when grad f0 has negative entries
  double delta;       // smallest entry of grad f0(x)
  double Delta;       // largest entry of grad f0(x)
  double inf_norm_Gf; // ||grad f(x)||_inf
};

ConditionSample make_condition_sample(const ProblemSpec& problem, const Vec& x);

/// Induced infinity norm: max over rows of the absolute row sum.
double inf_norm(const Mat& A);

/// Induced one norm: max over columns of the absolute column sum.
double one_norm(const Mat& A);

enum class BaseNorm { Inf, One };

/// The norm A -> base(A^T). Inherits all matrix-norm axioms from the base.
double transpose_norm(const Mat& A, BaseNorm base);

/// q(G0) = min over columns of (smallest entry / largest entry).
/// Requires G0 >= 0; zero entries give q = 0, as does an all-zero column.
double q_ratio(const Mat& G0);

/// Like q_ratio but yields NaN instead of throwing when G0 has negative
/// entries (used where a condition references q at points that fail the
/// sign requirement anyway).
double q_ratio_or_nan(const Mat& G0) noexcept;

/// (smallest entry, largest entry) of G0.
std::pair<double, double> delta_Delta(const Mat& G0);

/// True iff every entry of A^k is >= -kSignTol. Requires 1 <= k <= kMaxPowerK.
bool matrix_power_nonneg(const Mat& A, int k);

/// ||sum_{l=1}^{k-1} A^l||_inf for finite k (0 when k == 1), and the geometric
/// series bound ||A||_inf / (1 - ||A||_inf) when k == kInfiniteK.
double geometric_tail_norm(const Mat& A, int k);

/// Upper bound on the spectral radius: ||A^64||_inf^(1/64) via repeated
/// squaring (Gelfand). Always in [rho(A), ||A||_inf].
double rho_upper_bound(const Mat& A);

/// The configured family of contraction certificates for "||grad f|| < 1 in
/// some norm": infinity norm, one norm, and the spectral-radius bound plus a
/// safety margin. A value below 1 from any member certifies that a suitable
/// norm exists.
struct NormFamily {
  double inf = 0;
  double one = 0;
  double rho = 0; // rho_upper_bound + kRhoSafetyMargin

  double min_value() const;
  const char* best_name() const; // member attaining min_value()
  bool certifies_contraction() const { return min_value() < 1.0; }
};

NormFamily norm_family(const Mat& A);

/// A >= 0 entry-wise (within kSignTol) and every row has an entry above kPosTol.
bool nonneg_with_nonzero_rows(const Mat& A);

/// Central-difference validation of the analytic gradients at an interior
/// point; returns the worst absolute entry-wise deviation across grad f and
/// (when an objective evaluator is present) grad f0.
double fd_check_gradients(const ProblemSpec& problem, const Vec& x, double h);

/// Counts sampled points whose constraint image leaves the box (warn-level
/// diagnostic; the solver clamps regardless).
int box_mapping_violations(const ProblemSpec& problem, const std::vector<Vec>& points,
                           double tol = 1e-9);

} // namespace fastlip
