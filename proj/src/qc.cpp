#include "fastlip/qc.hpp"

#include "fastlip/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace fastlip {

namespace {

std::string lower_copy(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

int thread_count() {
  const char* env = std::getenv("FL_THREADS");
  if (!env) return 1;
  const long v = std::strtol(env, nullptr, 10);
  if (v <= 1) return 1;
  return static_cast<int>(std::min<long>(v, 64));
}

SubConditionEval geq_zero(const std::string& name, double min_entry) {
  SubConditionEval e;
  e.name = name;
  e.value = min_entry;
  e.bound = -kSignTol;
  e.margin = min_entry - e.bound;
  e.pass = min_entry >= e.bound;
  return e;
}

SubConditionEval strictly_positive(const std::string& name, double min_entry) {
  SubConditionEval e;
  e.name = name;
  e.value = min_entry;
  e.bound = kPosTol;
  e.margin = min_entry - e.bound;
  e.pass = min_entry > e.bound;
  return e;
}

// min over rows of the largest absolute row entry; > kPosTol means no zero row
SubConditionEval rows_nonzero(const std::string& name, const Mat& A) {
  double worst = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    worst = std::min(worst, A.row(i).cwiseAbs().maxCoeff());
  }
  return strictly_positive(name, worst);
}

SubConditionEval strict_upper(const std::string& name, double value, double bound,
                              std::string detail = {}) {
  SubConditionEval e;
  e.name = name;
  e.value = value;
  e.bound = bound;
  e.margin = bound - value;
  e.pass = std::isfinite(e.margin) && value < bound;
  e.detail = std::move(detail);
  if (std::isnan(bound)) e.detail = "bound undefined (grad f0 not nonnegative)";
  return e;
}

SubConditionEval contraction_family(const Mat& Gf) {
  const NormFamily fam = norm_family(Gf);
  return strict_upper("con.norm_family_lt_1", fam.min_value(), 1.0,
                      std::string("norm=") + fam.best_name());
}

SubConditionEval power_nonneg(const Mat& Gf, int k) {
  Mat P = Gf;
  for (int i = 1; i < k; ++i) P = P * Gf;
  auto e = geq_zero("con.power" + std::to_string(k) + "_nonneg", P.minCoeff());
  return e;
}

SubConditionEval tail_lt_q(const ConditionSample& s, int k) {
  const std::string name = "con.tail_norm_lt_q";
  double value;
  try {
    value = geometric_tail_norm(s.Gf, k);
  } catch (const DivergentSeries&) {
    SubConditionEval e;
    e.name = name;
    e.value = std::numeric_limits<double>::infinity();
    e.bound = s.q;
    e.margin = -std::numeric_limits<double>::infinity();
    e.pass = false;
    e.detail = "series divergent (||grad f||_inf >= 1)";
    return e;
  }
  return strict_upper(name, value, s.q);
}

} // namespace

ConditionId ConditionId::qk(int k) {
  if (k != kInfiniteK && (k < 1 || k > kMaxPowerK)) {
    throw UnsupportedOrder("QK order must be in 1.." + std::to_string(kMaxPowerK) + " or inf");
  }
  return {ConditionTag::Qk, k};
}

ConditionId ConditionId::parse(const std::string& text) {
  const std::string t = lower_copy(text);
  if (t == "q1") return q1();
  if (t == "q2") return q2();
  if (t == "qinf") return qinf();
  if (t == "q2d") return q2d();
  if (t == "qinfd") return qinfd();
  if (t == "old1" || t == "old_i") return old1();
  if (t == "old2" || t == "old_ii") return old2();
  if (t == "old3" || t == "old_iii") return old3();
  if (t.rfind("qk:", 0) == 0) {
    const std::string arg = t.substr(3);
    if (arg == "inf") return qk(kInfiniteK);
    return qk(static_cast<int>(std::strtol(arg.c_str(), nullptr, 10)));
  }
  throw InvalidInput("unknown condition id: " + text);
}

std::string ConditionId::name() const {
  switch (tag) {
    case ConditionTag::Q1: return "Q1";
    case ConditionTag::Q2: return "Q2";
    case ConditionTag::QInf: return "QINF";
    case ConditionTag::Q2Delta: return "Q2D";
    case ConditionTag::QInfDelta: return "QINFD";
    case ConditionTag::Qk:
      return k == kInfiniteK ? "QK(inf)" : "QK(" + std::to_string(k) + ")";
    case ConditionTag::OldI: return "OLD_I";
    case ConditionTag::OldII: return "OLD_II";
    case ConditionTag::OldIII: return "OLD_III";
  }
  return "?";
}

std::vector<ConditionId> special_conditions() {
  return {ConditionId::q1(),  ConditionId::q2(),   ConditionId::qinf(),
          ConditionId::q2d(), ConditionId::qinfd(), ConditionId::old1(),
          ConditionId::old2(), ConditionId::old3()};
}

ConditionId implication_target(const ConditionId& source) {
  switch (source.tag) {
    case ConditionTag::Q1: return ConditionId::qk(1);
    case ConditionTag::Q2: return ConditionId::qk(2);
    case ConditionTag::QInf: return ConditionId::qk(kInfiniteK);
    case ConditionTag::Q2Delta: return ConditionId::q2();
    case ConditionTag::QInfDelta: return ConditionId::qinf();
    case ConditionTag::OldI: return ConditionId::q1();
    case ConditionTag::OldII: return ConditionId::q2d();
    case ConditionTag::OldIII: return ConditionId::qinfd();
    case ConditionTag::Qk: break;
  }
  throw InvalidInput("no implication target for " + source.name());
}

std::string GridSpec::describe() const {
  std::string s;
  if (per_axis > 0) {
    s = "lattice " + std::to_string(per_axis) + "^" + std::to_string(dims) + " (" +
        std::to_string(lattice_points) + " pts)";
    if (mc_points > 0) s += " + " + std::to_string(mc_points) + " mc pts";
  } else {
    s = "mc " + std::to_string(mc_points) + " pts";
  }
  if (mc_points > 0) s += " seed " + std::to_string(seed);
  return s;
}

Grid sample_grid(const BoundingBox& box, int per_axis, int mc_extra, std::uint64_t seed) {
  if (per_axis < 2) throw InvalidInput("sample_grid: per_axis must be >= 2");
  const int n = box.dim();
  double budget = 1.0;
  for (int i = 0; i < n; ++i) budget *= per_axis;
  if (budget > static_cast<double>(kLatticeBudget)) {
    throw BudgetExceeded("sample_grid: per_axis^n = " + std::to_string(budget) +
                         " exceeds budget " + std::to_string(kLatticeBudget) +
                         "; use Monte Carlo mode (monte_carlo_grid)");
  }

  Grid grid;
  grid.spec.dims = n;
  grid.spec.per_axis = per_axis;
  grid.spec.lattice_points = static_cast<long>(budget);
  grid.spec.mc_points = mc_extra;
  grid.spec.seed = seed;
  grid.points.reserve(static_cast<size_t>(budget) + static_cast<size_t>(mc_extra));

  std::vector<int> idx(static_cast<size_t>(n), 0);
  Vec x(n);
  while (true) {
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(idx[static_cast<size_t>(i)]) / (per_axis - 1);
      x[i] = box.lower[i] + t * (box.upper[i] - box.lower[i]);
    }
    grid.points.push_back(x);
    int axis = 0;
    while (axis < n && ++idx[static_cast<size_t>(axis)] == per_axis) {
      idx[static_cast<size_t>(axis)] = 0;
      ++axis;
    }
    if (axis == n) break;
  }

  std::mt19937_64 gen(seed);
  for (int i = 0; i < mc_extra; ++i) {
    grid.points.push_back(rng::point_in_box(gen, box.lower, box.upper));
  }
  return grid;
}

Grid monte_carlo_grid(const BoundingBox& box, int count, std::uint64_t seed) {
  if (count < 1) throw InvalidInput("monte_carlo_grid: count must be >= 1");
  Grid grid;
  grid.spec.dims = box.dim();
  grid.spec.per_axis = 0;
  grid.spec.mc_points = count;
  grid.spec.seed = seed;
  grid.points.reserve(static_cast<size_t>(count));
  std::mt19937_64 gen(seed);
  for (int i = 0; i < count; ++i) {
    grid.points.push_back(rng::point_in_box(gen, box.lower, box.upper));
  }
  return grid;
}

Grid default_grid(const BoundingBox& box, std::uint64_t seed) {
  if (box.dim() <= 4) return sample_grid(box, 33, 0, seed);
  return monte_carlo_grid(box, 100000, seed);
}

GlobalDeltas global_deltas(const ProblemSpec& problem, const Grid& grid) {
  GlobalDeltas g;
  g.delta_bar = std::numeric_limits<double>::infinity();
  g.Delta_bar = -std::numeric_limits<double>::infinity();
  for (const Vec& x : grid.points) {
    const Mat G0 = problem.objective_gradient(x);
    g.delta_bar = std::min(g.delta_bar, G0.minCoeff());
    g.Delta_bar = std::max(g.Delta_bar, G0.maxCoeff());
  }
  return g;
}

std::vector<SubConditionEval> evaluate_condition_at(const ConditionSample& s,
                                                    const ConditionId& cond,
                                                    const std::optional<GlobalDeltas>& globals) {
  std::vector<SubConditionEval> out;
  const double min_G0 = s.G0.minCoeff();

  switch (cond.tag) {
    case ConditionTag::Q1: {
      out.push_back(geq_zero("f0.nonneg", min_G0));
      out.push_back(rows_nonzero("f0.rows_nonzero", s.G0));
      out.push_back(contraction_family(s.Gf));
      out.push_back(geq_zero("con.nonneg", s.Gf.minCoeff()));
      break;
    }
    case ConditionTag::Qk: {
      out.push_back(geq_zero("f0.nonneg", min_G0));
      out.push_back(rows_nonzero("f0.rows_nonzero", s.G0));
      out.push_back(contraction_family(s.Gf));
      if (cond.k != kInfiniteK) out.push_back(power_nonneg(s.Gf, cond.k));
      if (cond.k > 1) out.push_back(tail_lt_q(s, cond.k));
      break;
    }
    case ConditionTag::Q2: {
      out.push_back(strictly_positive("f0.pos", min_G0));
      out.push_back(power_nonneg(s.Gf, 2));
      out.push_back(strict_upper("con.inf_norm_lt_q", s.inf_norm_Gf, s.q));
      break;
    }
    case ConditionTag::QInf: {
      out.push_back(strictly_positive("f0.pos", min_G0));
      out.push_back(
          strict_upper("con.inf_norm_lt_q_frac", s.inf_norm_Gf, s.q / (1.0 + s.q)));
      break;
    }
    case ConditionTag::Q2Delta: {
      out.push_back(strictly_positive("f0.pos", min_G0));
      out.push_back(power_nonneg(s.Gf, 2));
      out.push_back(
          strict_upper("con.inf_norm_lt_delta_ratio", s.inf_norm_Gf, s.delta / s.Delta));
      break;
    }
    case ConditionTag::QInfDelta: {
      out.push_back(strictly_positive("f0.pos", min_G0));
      out.push_back(strict_upper("con.inf_norm_lt_delta_frac", s.inf_norm_Gf,
                                 s.delta / (s.delta + s.Delta)));
      break;
    }
    case ConditionTag::OldI: {
      out.push_back(strictly_positive("f0.pos", min_G0));
      out.push_back(geq_zero("con.nonneg", s.Gf.minCoeff()));
      out.push_back(contraction_family(s.Gf));
      break;
    }
    case ConditionTag::OldII: {
      out.push_back(strictly_positive("f0.pos", min_G0));
      // f0 = c 1^T x: every entry of grad f0 equals one positive constant
      const double spread = s.Delta - s.delta;
      SubConditionEval eq;
      eq.name = "f0.equal_entries";
      eq.value = spread;
      eq.bound = 1e-9 * std::max(1.0, std::abs(s.Delta));
      eq.margin = eq.bound - spread;
      eq.pass = spread <= eq.bound;
      out.push_back(eq);
      out.push_back(power_nonneg(s.Gf, 2));
      out.push_back(strict_upper("con.inf_norm_lt_1", s.inf_norm_Gf, 1.0));
      break;
    }
    case ConditionTag::OldIII: {
      out.push_back(strictly_positive("f0.pos", min_G0));
      SubConditionEval sc;
      sc.name = "f0.scalar";
      sc.value = static_cast<double>(s.G0.cols());
      sc.bound = 1.0;
      sc.margin = sc.bound - sc.value;
      sc.pass = s.G0.cols() == 1;
      out.push_back(sc);
      if (!globals) throw InvalidInput("OLD_III requires box-global deltas");
      const double db = globals->delta_bar;
      const double Db = globals->Delta_bar;
      out.push_back(strict_upper("con.inf_norm_lt_global_delta_frac", s.inf_norm_Gf,
                                 db / (db + Db)));
      break;
    }
  }
  return out;
}

namespace {

struct PointOutcome {
  bool eval_failed = false;
  std::string error;
  std::vector<SubConditionEval> evals;
};

PointOutcome evaluate_point(const ProblemSpec& problem, const ConditionId& cond,
                            const Vec& x, const std::optional<GlobalDeltas>& globals) {
  PointOutcome out;
  try {
    const ConditionSample s = make_condition_sample(problem, x);
    out.evals = evaluate_condition_at(s, cond, globals);
  } catch (const std::exception& e) {
    out.eval_failed = true;
    out.error = e.what();
  }
  return out;
}

} // namespace

CertificateReport check_condition(const ProblemSpec& problem, const ConditionId& cond,
                                  const Grid& grid) {
  if (grid.points.empty()) throw InvalidInput("check_condition: empty grid");
  problem.validate();

  std::optional<GlobalDeltas> globals;
  if (cond.tag == ConditionTag::OldIII) globals = global_deltas(problem, grid);

  const size_t count = grid.points.size();
  std::vector<PointOutcome> outcomes(count);
  const int threads = std::min<int>(thread_count(), static_cast<int>(count));
  if (threads <= 1) {
    for (size_t i = 0; i < count; ++i) {
      outcomes[i] = evaluate_point(problem, cond, grid.points[i], globals);
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (size_t i = static_cast<size_t>(t); i < count; i += static_cast<size_t>(threads)) {
          outcomes[i] = evaluate_point(problem, cond, grid.points[i], globals);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  // Ordered reduction: verdicts and worst-margin locations do not depend on
  // the execution schedule.
  const auto worse = [](double a, double b) { // NaN counts as the worst margin
    if (std::isnan(a)) return !std::isnan(b);
    if (std::isnan(b)) return false;
    return a < b;
  };

  CertificateReport report;
  report.condition = cond;
  report.grid = grid.spec;
  for (size_t i = 0; i < count; ++i) {
    const PointOutcome& oc = outcomes[i];
    if (oc.eval_failed) {
      ++report.failure_count;
      if (report.failures.size() < kMaxRecordedFailures) {
        report.failures.push_back({grid.points[i], "evaluation-failure: " + oc.error});
      }
      continue;
    }
    for (const SubConditionEval& e : oc.evals) {
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
        r.worst_x = grid.points[i];
        r.pass = e.pass;
        r.detail = e.detail;
        report.worst_margins.push_back(std::move(r));
      } else if (worse(e.margin, report.worst_margins[idx].margin)) {
        SubConditionResult& r = report.worst_margins[idx];
        r.worst_value = e.value;
        r.bound = e.bound;
        r.margin = e.margin;
        r.worst_x = grid.points[i];
        r.detail = e.detail;
      }
      if (!e.pass) {
        report.worst_margins[idx].pass = false;
        ++report.failure_count;
        if (report.failures.size() < kMaxRecordedFailures) {
          report.failures.push_back({grid.points[i], e.name});
        }
      }
    }
  }
  report.verdict = report.failure_count == 0;
  return report;
}

AuditResult implication_audit(const ProblemSpec& problem, const Grid& grid) {
  problem.validate();
  AuditResult result;
  const std::vector<ConditionId> sources = special_conditions();
  const GlobalDeltas globals = global_deltas(problem, grid);

  auto all_pass = [](const std::vector<SubConditionEval>& evals) {
    return std::all_of(evals.begin(), evals.end(),
                       [](const SubConditionEval& e) { return e.pass; });
  };

  for (const Vec& x : grid.points) {
    ConditionSample sample;
    try {
      sample = make_condition_sample(problem, x);
    } catch (const std::exception&) {
      continue; // evaluator failure: nothing to audit at this point
    }
    for (const ConditionId& src : sources) {
      ++result.pairs_checked;
      if (!all_pass(evaluate_condition_at(sample, src, globals))) continue;
      const ConditionId tgt = implication_target(src);
      if (!all_pass(evaluate_condition_at(sample, tgt, globals))) {
        result.violations.push_back({x, src, tgt});
      }
    }
  }
  return result;
}

} // namespace fastlip
