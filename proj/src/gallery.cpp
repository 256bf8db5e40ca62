#include "fastlip/gallery.hpp"

#include "fastlip/rng.hpp"

#include <algorithm>
#include <cmath>

namespace fastlip::gallery {

namespace {

double spectral_radius(const Mat& A) {
  return Eigen::EigenSolver<Mat>(A, /*computeEigenvectors=*/false)
      .eigenvalues()
      .cwiseAbs()
      .maxCoeff();
}

} // namespace

ProblemSpec make_power_control(const Mat& G, const Vec& eta, double p_max) {
  const int n = static_cast<int>(G.rows());
  if (G.cols() != n || n < 1) throw InvalidInput("power control: G must be square");
  if (eta.size() != n) throw InvalidInput("power control: eta size mismatch");
  if (!G.allFinite() || !eta.allFinite()) throw InvalidInput("power control: non-finite input");
  if (G.minCoeff() < 0) throw InvalidInput("power control: G must be nonnegative");
  if (eta.minCoeff() <= 0) throw InvalidInput("power control: eta must be positive");
  const double rho = spectral_radius(G);
  if (rho >= 1.0) {
    throw InfeasibleGain("power control: rho(G) = " + std::to_string(rho) +
                         " >= 1, no feasible power allocation");
  }

  if (p_max <= 0) {
    // smallest cap that keeps f(p) = G p + eta inside [0, p_max]^n
    p_max = 0.0;
    for (int i = 0; i < n; ++i) {
      const double row_sum = G.row(i).sum();
      if (row_sum >= 1.0) {
        throw InvalidInput("power control: row sums >= 1, pass an explicit p_max");
      }
      p_max = std::max(p_max, eta[i] / (1.0 - row_sum));
    }
  }

  ProblemSpec problem;
  problem.n = n;
  problem.m = n;
  // p* dominates every feasible point, so any strictly increasing objective
  // keeps it the unique Pareto maximum; the rank-one tilt makes grad f0
  // strictly positive rather than just the identity.
  const Mat C = Mat::Identity(n, n) + 0.05 * Mat::Ones(n, n);
  problem.obj = [C](const Vec& p) -> Vec { return C.transpose() * p; };
  problem.obj_grad = [C](const Vec&) { return C; };
  problem.con = [G, eta](const Vec& p) -> Vec { return G * p + eta; };
  const Mat Gt = G.transpose(); // [grad f]_{ij} = d f_j / d p_i
  problem.con_grad = [Gt](const Vec&) { return Gt; };
  problem.ineq_set.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) problem.ineq_set[static_cast<size_t>(i)] = i;
  problem.box = BoundingBox(Vec::Zero(n), Vec::Constant(n, p_max));
  return problem;
}

ProblemSpec random_power_control(int n, double gain, std::uint64_t seed) {
  if (n < 2) throw InvalidInput("random_power_control: n must be >= 2");
  if (gain <= 0 || gain >= 1) throw InvalidInput("random_power_control: gain must be in (0,1)");
  std::mt19937_64 gen(seed);
  Mat G(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) G(i, j) = i == j ? 0.0 : rng::unit(gen);
  }
  const double worst_row = G.cwiseAbs().rowwise().sum().maxCoeff();
  if (worst_row > 0) G *= gain / worst_row;
  Vec eta(n);
  for (int i = 0; i < n; ++i) eta[i] = rng::uniform(gen, 0.5, 1.5);
  return make_power_control(G, eta);
}

ProblemSpec make_toy(double a, double b) {
  if (std::abs(a) > 2.0 || std::abs(b) > 2.0) {
    throw InvalidInput("toy: |a| and |b| must be <= 2");
  }
  ProblemSpec problem;
  problem.n = 2;
  problem.m = 2;
  problem.obj = [](const Vec& x) -> Vec {
    Vec v(2);
    v << 2 * x[0] + x[1], x[0] + 2 * x[1];
    return v;
  };
  problem.obj_grad = [](const Vec&) {
    Mat C(2, 2);
    C << 2, 1, 1, 2;
    return C;
  };
  problem.con = [a, b](const Vec& x) -> Vec {
    Vec v(2);
    v << 0.5 * (1 + a * x[1] * x[1]), 0.5 * (1 + b * x[0] * x[0]);
    return v;
  };
  problem.con_grad = [a, b](const Vec& x) {
    Mat Gf(2, 2);
    Gf << 0, b * x[0], a * x[1], 0;
    return Gf;
  };
  problem.ineq_set = {0, 1};
  problem.box = BoundingBox(Vec::Zero(2), Vec::Ones(2));
  const BoundingBox box = problem.box;
  problem.extra_set = [box](const Vec& x) { return box.contains(x, 1e-12); };
  return problem;
}

std::vector<double> uniform_disturbances(int count, double w_max, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<double> w(static_cast<size_t>(std::max(count, 0)));
  for (double& wi : w) wi = rng::uniform(gen, 0.0, w_max);
  return w;
}

ControlAssembly make_optimal_control(ControlKind kind, const ControlParams& params, int N,
                                     double s_init, const std::vector<double>& w) {
  if (N < 1) throw InvalidInput("optimal control: N must be >= 1");
  if (params.a <= 0 || params.b <= 0 || params.c_s <= 0 || params.c_u <= 0) {
    throw InvalidInput("optimal control: a, b, c_s, c_u must be positive");
  }
  if (static_cast<int>(w.size()) < N - 1) {
    throw InvalidInput("optimal control: need N-1 disturbance values");
  }
  if (kind == ControlKind::Nonlinear) {
    if (s_init < 0) throw InvalidInput("optimal control: nonlinear kind needs s_init >= 0");
    for (int i = 0; i < N - 1; ++i) {
      if (w[static_cast<size_t>(i)] < 0) {
        throw InvalidInput("optimal control: nonlinear kind needs nonnegative disturbances");
      }
    }
  }

  const double a = params.a;
  const double b = params.b;
  const double c_s = params.c_s;
  const double c_u = params.c_u;

  ControlAssembly out;
  OptimalControlSpec& oc = out.oc;
  oc.horizon = N;
  oc.state_dim = 1;
  oc.control_dim = 1;
  oc.s_init = Vec::Constant(1, s_init);
  for (int i = 0; i < N - 1; ++i) {
    oc.disturbances.push_back(Vec::Constant(1, w[static_cast<size_t>(i)]));
  }

  if (kind == ControlKind::Linear) {
    oc.dynamics = [a, b](const Vec& s, const Vec& u) -> Vec {
      return Vec::Constant(1, a * s[0] - b * u[0]);
    };
    oc.dyn_grad_s = [a](const Vec&, const Vec&) { return Mat::Constant(1, 1, a); };
    const double umax = params.u_max;
    oc.control_bound = [umax](const Vec&) { return Vec::Constant(1, umax); };
  } else {
    oc.dynamics = [a, b](const Vec& s, const Vec& u) -> Vec {
      return Vec::Constant(1, a * s[0] * s[0] / (1.0 + s[0]) - b * u[0]);
    };
    oc.dyn_grad_s = [a](const Vec& s, const Vec&) {
      const double d = 1.0 + s[0];
      return Mat::Constant(1, 1, a * (s[0] * s[0] + 2.0 * s[0]) / (d * d));
    };
    oc.control_bound = [a, b](const Vec& s) {
      return Vec::Constant(1, a * s[0] * s[0] / (b * (1.0 + s[0])));
    };
  }
  oc.dyn_grad_u = [b](const Vec&, const Vec&) { return Mat::Constant(1, 1, -b); };
  oc.stage_cost = [c_s, c_u](const Vec& s, const Vec& u) { return c_s * s[0] + c_u * u[0]; };
  oc.cost_grad_s = [c_s](const Vec&, const Vec&) { return Vec::Constant(1, c_s); };
  oc.cost_grad_u = [c_u](const Vec&, const Vec&) { return Vec::Constant(1, c_u); };

  // State envelope for the stacked box. f(s, u) <= a s + w in both kinds, so
  // the upper bound closes at w_max / (1 - a) when a < 1; otherwise fall back
  // to the N-step image from s_init.
  double w_max = 0.0;
  for (int i = 0; i < N - 1; ++i) w_max = std::max(w_max, w[static_cast<size_t>(i)]);

  double s_hi = s_init;
  if (a < 1.0) {
    s_hi = std::max(s_init, w_max / (1.0 - a));
  } else {
    double t = s_init;
    for (int i = 0; i < N; ++i) {
      t = a * t + w_max;
      s_hi = std::max(s_hi, t);
    }
  }

  double u_hi;
  double s_lo;
  if (kind == ControlKind::Linear) {
    u_hi = params.u_max;
    if (a < 1.0) {
      s_lo = std::min({s_init, 0.0, -b * u_hi / (1.0 - a)});
    } else {
      s_lo = std::min(s_init, 0.0);
      double t = s_init;
      for (int i = 0; i < N; ++i) {
        t = a * t - b * u_hi;
        s_lo = std::min(s_lo, t);
      }
    }
  } else {
    u_hi = a * s_hi * s_hi / (b * (1.0 + s_hi)); // cap is increasing in s
    s_lo = 0.0; // cap keeps f >= 0 and disturbances are nonnegative
  }

  // Stacked transform: x = (y, z) with y = -s and z = -u, one constant
  // constraint z <= 0 per control.
  ProblemSpec& st = out.stacked;
  st.n = 2 * N;
  st.m = 1;
  Vec lower(2 * N), upper(2 * N);
  for (int i = 0; i < N; ++i) {
    lower[i] = -s_hi;
    upper[i] = -s_lo;
    lower[N + i] = -u_hi;
    upper[N + i] = 0.0;
  }
  st.box = BoundingBox(lower, upper);
  st.ineq_set.resize(static_cast<size_t>(2 * N));
  for (int i = 0; i < 2 * N; ++i) st.ineq_set[static_cast<size_t>(i)] = i;

  std::vector<double> w_used(w.begin(), w.begin() + (N - 1));
  const OptimalControlSpec oc_copy = oc; // evaluators share the closure state

  st.obj = [oc_copy, N](const Vec& x) -> Vec {
    double total = 0.0;
    for (int i = 0; i < N; ++i) {
      total += oc_copy.stage_cost(Vec::Constant(1, -x[i]), Vec::Constant(1, -x[N + i]));
    }
    return Vec::Constant(1, -total);
  };
  st.obj_grad = [oc_copy, N](const Vec& x) {
    Mat g(2 * N, 1);
    for (int i = 0; i < N; ++i) {
      const Vec s = Vec::Constant(1, -x[i]);
      const Vec u = Vec::Constant(1, -x[N + i]);
      g(i, 0) = oc_copy.cost_grad_s(s, u)[0];
      g(N + i, 0) = oc_copy.cost_grad_u(s, u)[0];
    }
    return g;
  };
  st.con = [oc_copy, w_used, s_init, N](const Vec& x) -> Vec {
    Vec out_v = Vec::Zero(2 * N);
    out_v[0] = -s_init;
    for (int c = 1; c < N; ++c) {
      const Vec s = Vec::Constant(1, -x[c - 1]);
      const Vec u = Vec::Constant(1, -x[N + c - 1]);
      out_v[c] = -oc_copy.dynamics(s, u)[0] - w_used[static_cast<size_t>(c - 1)];
    }
    return out_v; // z-constraints are the constant 0
  };
  st.con_grad = [oc_copy, N](const Vec& x) {
    Mat Gf = Mat::Zero(2 * N, 2 * N);
    for (int c = 1; c < N; ++c) {
      const Vec s = Vec::Constant(1, -x[c - 1]);
      const Vec u = Vec::Constant(1, -x[N + c - 1]);
      Gf(c - 1, c) = oc_copy.dyn_grad_s(s, u)(0, 0);
      Gf(N + c - 1, c) = oc_copy.dyn_grad_u(s, u)(0, 0);
    }
    return Gf;
  };

  if (kind == ControlKind::Nonlinear) {
    const BoundingBox box = st.box;
    const OptimalControlSpec oc2 = oc;
    st.extra_set = [box, oc2, N](const Vec& x) {
      if (!box.contains(x, 1e-12)) return false;
      for (int i = 0; i < N; ++i) { // u_i <= u_max(s_i)
        const double u = -x[N + i];
        if (u > oc2.control_bound(Vec::Constant(1, -x[i]))[0] + 1e-12) return false;
      }
      return true;
    };
  } else {
    const BoundingBox box = st.box;
    st.extra_set = [box](const Vec& x) { return box.contains(x, 1e-12); };
  }

  out.partition.y_idx.resize(static_cast<size_t>(N));
  out.partition.z_idx.resize(static_cast<size_t>(N));
  for (int i = 0; i < N; ++i) {
    out.partition.y_idx[static_cast<size_t>(i)] = i;
    out.partition.z_idx[static_cast<size_t>(i)] = N + i;
  }
  return out;
}

std::vector<ReachableSample> sample_reachable(const OptimalControlSpec& oc, int n_sims,
                                              std::uint64_t seed) {
  if (n_sims < 1) throw InvalidInput("sample_reachable: n_sims must be >= 1");
  std::mt19937_64 gen(seed);
  std::vector<ReachableSample> samples;
  samples.reserve(static_cast<size_t>(n_sims) * static_cast<size_t>(oc.horizon));
  const Vec w_zero = Vec::Zero(oc.state_dim);
  for (int sim = 0; sim < n_sims; ++sim) {
    Vec s = oc.s_init;
    for (int stage = 0; stage < oc.horizon; ++stage) {
      const Vec cap = oc.control_bound(s);
      Vec u = Vec::Zero(oc.control_dim);
      if (sim > 0) { // simulation 0 keeps the zero-control path
        for (int j = 0; j < oc.control_dim; ++j) u[j] = rng::uniform(gen, 0.0, cap[j]);
      }
      samples.push_back({s, u});
      if (stage + 1 < oc.horizon) {
        const Vec& w = static_cast<size_t>(stage) < oc.disturbances.size()
                           ? oc.disturbances[static_cast<size_t>(stage)]
                           : w_zero;
        s = oc.dynamics(s, u) + w;
      }
    }
  }
  return samples;
}

Result1Report result1_check(const OptimalControlSpec& oc, int n_sims, std::uint64_t seed) {
  Result1Report report;
  const std::vector<ReachableSample> visits = sample_reachable(oc, n_sims, seed);

  double min_cost_u = std::numeric_limits<double>::infinity();
  double max_cost_s = 0.0;
  for (const ReachableSample& v : visits) {
    report.max_grad_s_norm = std::max(report.max_grad_s_norm, inf_norm(oc.dyn_grad_s(v.s, v.u)));
    report.max_grad_u_norm = std::max(report.max_grad_u_norm, inf_norm(oc.dyn_grad_u(v.s, v.u)));
    min_cost_u = std::min(min_cost_u, oc.cost_grad_u(v.s, v.u).minCoeff());
    max_cost_s = std::max(max_cost_s, oc.cost_grad_s(v.s, v.u).maxCoeff());
  }

  if (report.max_grad_s_norm >= 1.0) {
    report.pass = false;
    report.margin = -1.0;
    report.reason = "max ||grad_s f||_inf >= 1, the coupling ratio is undefined";
    return report;
  }
  report.lhs = report.max_grad_u_norm / (1.0 - report.max_grad_s_norm);
  report.rhs = min_cost_u / max_cost_s;
  report.margin = 0.95 * (report.rhs - report.lhs); // 5% haircut for sampling slack
  report.pass = report.lhs < report.rhs;
  return report;
}

EpigraphTransform epigraph_transform(const ProblemSpec& base) {
  base.validate();
  if (!base.eq_set.empty()) {
    throw InvalidInput("epigraph_transform: equality constraints unsupported");
  }
  if (!base.obj) throw InvalidInput("epigraph_transform: base objective evaluator required");

  const int n = base.n;
  const int m = base.m;

  // t must cover the range of f0 over the box so the transform still maps its
  // box into itself: corners plus seeded interior samples, padded.
  Vec t_lo = Vec::Constant(m, std::numeric_limits<double>::infinity());
  Vec t_hi = Vec::Constant(m, -std::numeric_limits<double>::infinity());
  auto absorb = [&](const Vec& x) {
    const Vec v = base.obj(x);
    t_lo = t_lo.cwiseMin(v);
    t_hi = t_hi.cwiseMax(v);
  };
  if (n <= 12) {
    for (long mask = 0; mask < (1L << n); ++mask) {
      Vec x(n);
      for (int i = 0; i < n; ++i) {
        x[i] = (mask >> i) & 1 ? base.box.upper[i] : base.box.lower[i];
      }
      absorb(x);
    }
  }
  std::mt19937_64 gen(0);
  for (int s = 0; s < 256; ++s) {
    absorb(rng::point_in_box(gen, base.box.lower, base.box.upper));
  }
  for (int j = 0; j < m; ++j) {
    const double pad = 0.05 * (t_hi[j] - t_lo[j]) + 1e-9;
    t_lo[j] -= pad;
    t_hi[j] += pad;
  }

  EpigraphTransform out;
  ProblemSpec& ep = out.problem;
  ep.n = m + n;
  ep.m = m;

  const ProblemSpec held = base; // keep the base evaluators alive in the closures
  ep.obj = [m](const Vec& tx) -> Vec { return tx.head(m); };
  ep.obj_grad = [m, n](const Vec&) {
    Mat g = Mat::Zero(m + n, m);
    g.topRows(m) = Mat::Identity(m, m);
    return g;
  };
  ep.con = [held, m, n](const Vec& tx) -> Vec {
    const Vec x = tx.tail(n);
    Vec v(m + n);
    v.head(m) = held.obj(x);
    v.tail(n) = held.con(x);
    return v;
  };
  ep.con_grad = [held, m, n](const Vec& tx) {
    const Vec x = tx.tail(n);
    Mat g = Mat::Zero(m + n, m + n);
    g.block(m, 0, n, m) = held.objective_gradient(x);
    g.block(m, m, n, n) = held.constraint_gradient(x);
    return g;
  };

  Vec lower(m + n), upper(m + n);
  lower.head(m) = t_lo;
  lower.tail(n) = base.box.lower;
  upper.head(m) = t_hi;
  upper.tail(n) = base.box.upper;
  ep.box = BoundingBox(lower, upper);
  ep.ineq_set.resize(static_cast<size_t>(m + n));
  for (int i = 0; i < m + n; ++i) ep.ineq_set[static_cast<size_t>(i)] = i;
  if (base.extra_set) {
    const auto base_extra = base.extra_set;
    ep.extra_set = [base_extra, n](const Vec& tx) { return base_extra(tx.tail(n)); };
  }

  out.partition.y_idx.resize(static_cast<size_t>(m));
  out.partition.z_idx.resize(static_cast<size_t>(n));
  for (int i = 0; i < m; ++i) out.partition.y_idx[static_cast<size_t>(i)] = i;
  for (int i = 0; i < n; ++i) out.partition.z_idx[static_cast<size_t>(i)] = m + i;
  return out;
}

} // namespace fastlip::gallery
