#include "fastlip/relax.hpp"

#include "fastlip/rng.hpp"

#include <algorithm>
#include <cmath>

namespace fastlip {

void PartitionSpec::validate(int n) const {
  std::vector<int> seen(static_cast<size_t>(n), 0);
  auto mark = [&](const std::vector<int>& idx, const char* name) {
    for (int i : idx) {
      if (i < 0 || i >= n) throw InvalidInput(std::string(name) + ": index out of range");
      if (seen[static_cast<size_t>(i)]++) {
        throw InvalidInput("partition blocks overlap at " + std::to_string(i));
      }
    }
  };
  mark(y_idx, "y_idx");
  mark(z_idx, "z_idx");
  for (int i = 0; i < n; ++i) {
    if (!seen[static_cast<size_t>(i)]) {
      throw InvalidInput("partition misses variable " + std::to_string(i));
    }
  }
}

Vec PartitionSpec::gather(const Vec& x, const std::vector<int>& idx) {
  Vec out(static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = x[idx[i]];
  return out;
}

Mat PartitionSpec::gather(const Mat& A, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
  Mat out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = A(rows[i], cols[j]);
    }
  }
  return out;
}

Vec PartitionSpec::scatter(const Vec& y, const Vec& z, int n) const {
  Vec x(n);
  for (size_t i = 0; i < y_idx.size(); ++i) x[y_idx[i]] = y[static_cast<Eigen::Index>(i)];
  for (size_t i = 0; i < z_idx.size(); ++i) x[z_idx[i]] = z[static_cast<Eigen::Index>(i)];
  return x;
}

bool check_extra_set(const ProblemSpec& problem, const Vec& xstar, double feas_tol) {
  problem.validate();
  const Vec fx = problem.con(xstar);
  const double residual = (xstar - fx).cwiseAbs().maxCoeff();
  if (residual > feas_tol) {
    throw PreconditionViolation("check_extra_set: x is not a fixed point within tolerance (" +
                                std::to_string(residual) + ")");
  }
  if (!problem.extra_set) return true; // X = R^n
  return problem.extra_set(xstar);
}

namespace {

// Subproblem obtained by freezing the z-block: variables y, constraints the
// y-indexed rows of f, objective restricted accordingly.
ProblemSpec make_subproblem(const ProblemSpec& problem, const PartitionSpec& partition,
                            const Vec& z_fixed) {
  const int n = problem.n;
  ProblemSpec sub;
  sub.n = static_cast<int>(partition.y_idx.size());
  sub.m = problem.m;
  sub.box = BoundingBox(PartitionSpec::gather(problem.box.lower, partition.y_idx),
                        PartitionSpec::gather(problem.box.upper, partition.y_idx));
  sub.ineq_set.resize(static_cast<size_t>(sub.n));
  for (int i = 0; i < sub.n; ++i) sub.ineq_set[static_cast<size_t>(i)] = i;

  const PartitionSpec part = partition;
  sub.obj_grad = [&problem, part, z_fixed, n](const Vec& y) {
    const Vec x = part.scatter(y, z_fixed, n);
    Mat G0 = problem.objective_gradient(x);
    std::vector<int> all_cols(static_cast<size_t>(G0.cols()));
    for (size_t j = 0; j < all_cols.size(); ++j) all_cols[j] = static_cast<int>(j);
    return PartitionSpec::gather(G0, part.y_idx, all_cols);
  };
  sub.con = [&problem, part, z_fixed, n](const Vec& y) {
    const Vec x = part.scatter(y, z_fixed, n);
    return PartitionSpec::gather(problem.con(x), part.y_idx);
  };
  sub.con_grad = [&problem, part, z_fixed, n](const Vec& y) {
    const Vec x = part.scatter(y, z_fixed, n);
    return PartitionSpec::gather(problem.constraint_gradient(x), part.y_idx, part.y_idx);
  };
  return sub;
}

Grid subproblem_grid(const BoundingBox& box, const FewerConstraintsOptions& options) {
  const int dims = box.dim();
  double lattice = 1.0;
  for (int i = 0; i < dims; ++i) lattice *= options.sub_per_axis;
  if (lattice <= 4096.0) return sample_grid(box, options.sub_per_axis, 0, options.seed);
  return monte_carlo_grid(box, options.sub_mc_points, options.seed);
}

std::vector<Vec> z_sample_points(const BoundingBox& zbox, const FewerConstraintsOptions& options) {
  const int dz = zbox.dim();
  std::vector<Vec> samples;
  std::mt19937_64 gen(options.seed + 1);
  const double corners = std::pow(2.0, dz);
  if (corners <= options.max_corner_samples) {
    for (long mask = 0; mask < static_cast<long>(corners); ++mask) {
      Vec z(dz);
      for (int i = 0; i < dz; ++i) {
        z[i] = (mask >> i) & 1 ? zbox.upper[i] : zbox.lower[i];
      }
      samples.push_back(z);
    }
  } else {
    for (int s = 0; s < options.max_corner_samples; ++s) {
      Vec z(dz);
      for (int i = 0; i < dz; ++i) {
        z[i] = rng::unit(gen) < 0.5 ? zbox.lower[i] : zbox.upper[i];
      }
      samples.push_back(z);
    }
  }
  for (int s = 0; s < options.interior_z_samples; ++s) {
    samples.push_back(rng::point_in_box(gen, zbox.lower, zbox.upper));
  }
  return samples;
}

double min_row_abs_max(const Mat& A) {
  double worst = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    worst = std::min(worst, A.row(i).cwiseAbs().maxCoeff());
  }
  return worst;
}

} // namespace

FewerConstraintsReport check_fewer_constraints(const ProblemSpec& problem,
                                               const PartitionSpec& partition,
                                               const Grid& grid,
                                               const FewerConstraintsOptions& options) {
  problem.validate();
  partition.validate(problem.n);
  if (grid.points.empty()) throw InvalidInput("check_fewer_constraints: empty grid");

  FewerConstraintsReport report;
  report.grid = grid.spec;

  // Precondition: the z-block constraints are constant (f_z = b_z). Their
  // gradient columns must vanish at sampled points.
  {
    const size_t probes = std::min<size_t>(grid.points.size(), 8);
    for (size_t i = 0; i < probes; ++i) {
      const Mat Gf = problem.constraint_gradient(grid.points[i]);
      std::vector<int> all_rows(static_cast<size_t>(problem.n));
      for (size_t r = 0; r < all_rows.size(); ++r) all_rows[r] = static_cast<int>(r);
      const Mat z_cols = PartitionSpec::gather(Gf, all_rows, partition.z_idx);
      if (z_cols.cwiseAbs().maxCoeff() > 1e-9) {
        throw PreconditionViolation(
            "check_fewer_constraints: z-block constraints are not constant");
      }
    }
  }

  // (a) subproblem qualifying condition, uniform across sampled z
  const BoundingBox zbox(PartitionSpec::gather(problem.box.lower, partition.z_idx),
                         PartitionSpec::gather(problem.box.upper, partition.z_idx));
  const std::vector<Vec> z_samples = z_sample_points(zbox, options);
  report.z_samples = static_cast<long>(z_samples.size());

  std::vector<ConditionId> escalation;
  escalation.push_back(ConditionId::qinfd());
  for (int k = 1; k <= kMaxPowerK; ++k) escalation.push_back(ConditionId::qk(k));
  escalation.push_back(ConditionId::qk(kInfiniteK));

  const BoundingBox ybox(PartitionSpec::gather(problem.box.lower, partition.y_idx),
                         PartitionSpec::gather(problem.box.upper, partition.y_idx));
  const Grid sub_grid = subproblem_grid(ybox, options);
  for (const ConditionId& cond : escalation) {
    bool all_z_pass = true;
    for (const Vec& z : z_samples) {
      const ProblemSpec sub = make_subproblem(problem, partition, z);
      if (!check_condition(sub, cond, sub_grid).verdict) {
        all_z_pass = false;
        break;
      }
    }
    if (all_z_pass) {
      report.subproblem_pass = true;
      report.subproblem_condition = cond;
      break;
    }
  }

  // (b) coupling branches over the full grid
  BranchReport bi{"b.i", true, std::numeric_limits<double>::infinity(), Vec(), ""};
  BranchReport bii{"b.ii", true, std::numeric_limits<double>::infinity(), Vec(), ""};
  BranchReport biii{"b.iii", true, std::numeric_limits<double>::infinity(), Vec(), ""};

  auto fold = [](BranchReport& b, double margin, const Vec& x, const std::string& detail = {}) {
    if (margin < b.worst_margin || b.worst_x.size() == 0) {
      b.worst_margin = margin;
      b.worst_x = x;
      if (!detail.empty()) b.detail = detail;
    }
    if (!(margin > 0)) b.pass = false;
  };

  for (const Vec& x : grid.points) {
    const Mat Gf = problem.constraint_gradient(x);
    const Mat G0 = problem.objective_gradient(x);
    std::vector<int> obj_cols(static_cast<size_t>(G0.cols()));
    for (size_t j = 0; j < obj_cols.size(); ++j) obj_cols[j] = static_cast<int>(j);

    const Mat A11 = PartitionSpec::gather(Gf, partition.y_idx, partition.y_idx);
    const Mat A21 = PartitionSpec::gather(Gf, partition.z_idx, partition.y_idx);
    const Mat G0y = PartitionSpec::gather(G0, partition.y_idx, obj_cols);
    const Mat G0z = PartitionSpec::gather(G0, partition.z_idx, obj_cols);

    // b.i: grad_z f0 >= 0, grad_z f_y >= 0 with non-zero rows
    fold(bi,
         std::min({G0z.minCoeff() + kSignTol, A21.minCoeff() + kSignTol,
                   min_row_abs_max(A21) - kPosTol}),
         x);

    // b.ii: grad_z f0 >= 0 with non-zero rows, grad_z f_y >= 0
    fold(bii,
         std::min({G0z.minCoeff() + kSignTol, min_row_abs_max(G0z) - kPosTol,
                   A21.minCoeff() + kSignTol}),
         x);

    // b.iii: coupling norm ratio against delta_z / Delta_y
    const double a11 = inf_norm(A11);
    if (a11 >= 1.0) {
      fold(biii, -std::numeric_limits<double>::infinity(), x,
           "||grad_y f_y||_inf >= 1 (ratio undefined)");
    } else {
      const double lhs = inf_norm(A21) / (1.0 - a11);
      const double rhs = G0z.minCoeff() / G0y.maxCoeff();
      fold(biii, rhs - lhs, x);
    }
  }

  report.branches = {bi, bii, biii};
  for (const BranchReport& b : report.branches) {
    if (b.pass) {
      report.certified_branch = b.name;
      break;
    }
  }
  report.verdict = report.subproblem_pass && !report.certified_branch.empty();
  return report;
}

MissingVarsReport check_missing_objective_vars(const ProblemSpec& problem,
                                               const PartitionSpec& partition,
                                               const Grid& grid) {
  problem.validate();
  partition.validate(problem.n);
  if (grid.points.empty()) throw InvalidInput("check_missing_objective_vars: empty grid");

  MissingVarsReport report;
  report.grid = grid.spec;

  auto fold = [&](const SubConditionEval& e, const Vec& x) {
    size_t idx = 0;
    for (; idx < report.worst_margins.size(); ++idx) {
      if (report.worst_margins[idx].name == e.name) break;
    }
    if (idx == report.worst_margins.size()) {
      SubConditionResult r;
      r.name = e.name;
      r.worst_value = e.value;
      r.bound = e.bound;
      r.margin = e.margin;
      r.worst_x = x;
      r.pass = e.pass;
      r.detail = e.detail;
      report.worst_margins.push_back(std::move(r));
    } else if (e.margin < report.worst_margins[idx].margin) {
      SubConditionResult& r = report.worst_margins[idx];
      r.worst_value = e.value;
      r.bound = e.bound;
      r.margin = e.margin;
      r.worst_x = x;
    }
    if (!e.pass) {
      report.worst_margins[idx].pass = false;
      ++report.failure_count;
      if (report.failures.size() < kMaxRecordedFailures) {
        report.failures.push_back({x, e.name});
      }
    }
  };

  for (const Vec& x : grid.points) {
    Mat Gf, G0;
    try {
      Gf = problem.constraint_gradient(x);
      G0 = problem.objective_gradient(x);
    } catch (const std::exception& e) {
      ++report.failure_count;
      if (report.failures.size() < kMaxRecordedFailures) {
        report.failures.push_back({x, std::string("evaluation-failure: ") + e.what()});
      }
      continue;
    }
    std::vector<int> obj_cols(static_cast<size_t>(G0.cols()));
    for (size_t j = 0; j < obj_cols.size(); ++j) obj_cols[j] = static_cast<int>(j);
    const Mat G0y = PartitionSpec::gather(G0, partition.y_idx, obj_cols);
    const Mat G0z = PartitionSpec::gather(G0, partition.z_idx, obj_cols);
    const Mat Azy = PartitionSpec::gather(Gf, partition.z_idx, partition.y_idx);

    // (a) the active block must keep lambda_1 > 0 for every mu > 0, which is
    // exactly nonnegativity with non-zero rows; the absent block only needs
    // nonnegativity
    {
      SubConditionEval e;
      e.name = "f0.active_nonneg";
      e.value = G0y.minCoeff();
      e.bound = -kSignTol;
      e.margin = e.value - e.bound;
      e.pass = e.value >= e.bound;
      fold(e, x);
    }
    {
      SubConditionEval e;
      e.name = "f0.active_rows_nonzero";
      e.value = min_row_abs_max(G0y);
      e.bound = kPosTol;
      e.margin = e.value - e.bound;
      e.pass = e.value > e.bound;
      fold(e, x);
    }
    if (G0z.size() > 0) {
      SubConditionEval e;
      e.name = "f0.absent_nonneg";
      e.value = G0z.minCoeff();
      e.bound = -kSignTol;
      e.margin = e.value - e.bound;
      e.pass = e.value >= e.bound;
      fold(e, x);
    }
    // (b) monotone constraints
    {
      SubConditionEval e;
      e.name = "con.nonneg";
      e.value = Gf.minCoeff();
      e.bound = -kSignTol;
      e.margin = e.value - e.bound;
      e.pass = e.value >= e.bound;
      fold(e, x);
    }
    // (c) contraction in the configured norm family
    {
      const NormFamily fam = norm_family(Gf);
      SubConditionEval e;
      e.name = "con.norm_family_lt_1";
      e.value = fam.min_value();
      e.bound = 1.0;
      e.margin = e.bound - e.value;
      e.pass = e.value < e.bound;
      e.detail = std::string("norm=") + fam.best_name();
      fold(e, x);
    }
    // (d) every absent variable influences some active constraint
    {
      SubConditionEval e;
      e.name = "coupling.rows_nonzero";
      e.value = min_row_abs_max(Azy);
      e.bound = kPosTol;
      e.margin = e.value - e.bound;
      e.pass = e.value > e.bound;
      fold(e, x);
    }
  }

  report.verdict = report.failure_count == 0;
  return report;
}

} // namespace fastlip
