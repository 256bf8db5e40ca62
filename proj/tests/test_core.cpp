#include "fastlip/core.hpp"
#include "fastlip/gallery.hpp"
#include "fastlip/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fastlip;

namespace {

Mat random_matrix(std::mt19937_64& gen, int rows, int cols, double lo = -2.0, double hi = 2.0) {
  Mat A(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) A(i, j) = rng::uniform(gen, lo, hi);
  }
  return A;
}

} // namespace

TEST_CASE("inf_norm matches max absolute row sum") {
  Mat A(2, 2);
  A << 0, 0.3, -0.3, 0;
  CHECK(inf_norm(A) == doctest::Approx(0.3));
  CHECK(inf_norm(Mat::Identity(2, 2)) == doctest::Approx(1.0));
  Mat B(2, 2);
  B << 1, -2, 3, 4;
  CHECK(inf_norm(B) == doctest::Approx(7.0));
}

TEST_CASE("inf_norm rejects non-finite input") {
  Mat A(1, 2);
  A << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(inf_norm(A), InvalidInput);
  A(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(inf_norm(A), InvalidInput);
}

TEST_CASE("q_ratio on the gallery objective gradient") {
  Mat G0(2, 2);
  G0 << 2, 1, 1, 2;
  CHECK(q_ratio(G0) == doctest::Approx(0.5)); // both columns give 1/2
}

TEST_CASE("q_ratio is one exactly for identical rows") {
  Mat G0(3, 2);
  G0 << 1.5, 0.25, 1.5, 0.25, 1.5, 0.25;
  CHECK(q_ratio(G0) == 1.0);
  G0(2, 1) = 0.26; // perturb one row
  CHECK(q_ratio(G0) < 1.0);
}

TEST_CASE("q_ratio is zero when any entry is zero") {
  Mat G0(2, 2);
  G0 << 1, 0, 1, 1;
  CHECK(q_ratio(G0) == 0.0);
}

TEST_CASE("q_ratio rejects negative entries, q_ratio_or_nan reports NaN") {
  Mat G0(2, 2);
  G0 << 1, -0.5, 1, 1;
  CHECK_THROWS_AS(q_ratio(G0), InvalidInput);
  CHECK(std::isnan(q_ratio_or_nan(G0)));
}

TEST_CASE("delta_Delta extremes") {
  Mat G0(2, 2);
  G0 << 2, 1, 1, 2;
  auto [d, D] = delta_Delta(G0);
  CHECK(d == doctest::Approx(1.0));
  CHECK(D == doctest::Approx(2.0));

  std::tie(d, D) = delta_Delta(Mat::Ones(3, 3));
  CHECK(d == doctest::Approx(1.0));
  CHECK(D == doctest::Approx(1.0));

  Mat B(2, 2);
  B << -1, 3, 0, 2;
  std::tie(d, D) = delta_Delta(B);
  CHECK(d == doctest::Approx(-1.0));
  CHECK(D == doctest::Approx(3.0));
}

TEST_CASE("matrix_power_nonneg") {
  Mat A(2, 2);
  A << 0, -0.2, -0.2, 0;
  CHECK(matrix_power_nonneg(A, 2)); // A^2 = 0.04 I

  Mat B(2, 2);
  B << 0, 0.3, -0.3, 0;
  CHECK_FALSE(matrix_power_nonneg(B, 2)); // B^2 = -0.09 I

  std::mt19937_64 gen(7);
  const Mat P = random_matrix(gen, 3, 3, 0.0, 1.0);
  for (int k = 1; k <= kMaxPowerK; ++k) CHECK(matrix_power_nonneg(P, k));

  CHECK_THROWS_AS(matrix_power_nonneg(A, 0), UnsupportedOrder);
  CHECK_THROWS_AS(matrix_power_nonneg(A, kMaxPowerK + 1), UnsupportedOrder);
}

TEST_CASE("geometric_tail_norm") {
  Mat A(2, 2);
  A << 0, 0.3, 0.3, 0;
  CHECK(geometric_tail_norm(A, 1) == 0.0); // empty sum
  CHECK(geometric_tail_norm(A, 3) == doctest::Approx(0.39)); // ||A + A^2||, A^2 = 0.09 I

  const Mat S = 0.3 * Mat::Identity(3, 3);
  CHECK(geometric_tail_norm(S, kInfiniteK) == doctest::Approx(0.3 / 0.7));

  const Mat big = 1.5 * Mat::Identity(2, 2);
  CHECK_THROWS_AS(geometric_tail_norm(big, kInfiniteK), DivergentSeries);
}

TEST_CASE("geometric_tail_norm is nondecreasing in k for nonnegative matrices") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + rng::index(gen, 4);
    Mat A = random_matrix(gen, n, n, 0.0, 1.0);
    A *= 0.8 / std::max(inf_norm(A), 1e-9); // keep the series summable
    double prev = 0.0;
    for (int k = 1; k <= kMaxPowerK; ++k) {
      const double v = geometric_tail_norm(A, k);
      CHECK(v >= prev - 1e-15);
      prev = v;
    }
    CHECK(geometric_tail_norm(A, kInfiniteK) >= prev - 1e-12);
  }
}

TEST_CASE("transpose_norm examples and the one-norm identity") {
  Mat A(2, 2);
  A << 1, -2, 3, 4;
  CHECK(transpose_norm(A, BaseNorm::Inf) == doctest::Approx(6.0)); // column sums 4 and 6

  Mat S(2, 2);
  S << 1, 0.5, 0.5, 2;
  CHECK(transpose_norm(S, BaseNorm::Inf) == doctest::Approx(inf_norm(S)));

  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat R = random_matrix(gen, 1 + rng::index(gen, 5), 1 + rng::index(gen, 5));
    CHECK(transpose_norm(R, BaseNorm::Inf) == doctest::Approx(one_norm(R)).epsilon(1e-12));
    CHECK(transpose_norm(R, BaseNorm::One) == doctest::Approx(inf_norm(R)).epsilon(1e-12));
  }
}

TEST_CASE("transpose_norm satisfies the matrix-norm axioms") {
  std::mt19937_64 gen(17);
  for (BaseNorm base : {BaseNorm::Inf, BaseNorm::One}) {
    auto nrm = [base](const Mat& M) { return transpose_norm(M, base); };
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = 1 + rng::index(gen, 4);
      const Mat A = random_matrix(gen, n, n);
      const Mat B = random_matrix(gen, n, n);
      const double c = rng::uniform(gen, -3.0, 3.0);

      const double na = nrm(A);
      const double nb = nrm(B);
      CHECK(na >= 0.0);                                       // nonnegativity
      CHECK(nrm(Mat::Zero(n, n)) == 0.0);                     // definiteness (zero side)
      if (A.cwiseAbs().maxCoeff() > 1e-12) CHECK(na > 0.0);   // definiteness (nonzero side)
      CHECK(nrm(c * A) ==
            doctest::Approx(std::abs(c) * na).epsilon(1e-12)); // homogeneity
      CHECK(nrm(A + B) <= na + nb + 1e-12 * (na + nb + 1));    // triangle
      CHECK(nrm(A * B) <= na * nb + 1e-12 * (na * nb + 1));    // submultiplicativity
    }
  }
}

TEST_CASE("rho_upper_bound stays between the spectral radius and the norm") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + rng::index(gen, 5);
    const Mat A = random_matrix(gen, n, n);
    const double bound = rho_upper_bound(A);
    const double rho = Eigen::EigenSolver<Mat>(A, false).eigenvalues().cwiseAbs().maxCoeff();
    CHECK(bound <= inf_norm(A) + 1e-6);
    CHECK(bound >= rho - 1e-9);
  }
  Mat rot(2, 2);
  rot << 0, 0.3, -0.3, 0; // complex pair, |lambda| = 0.3
  CHECK(rho_upper_bound(rot) == doctest::Approx(0.3));
  CHECK(rho_upper_bound(Mat::Zero(3, 3)) == 0.0);
}

TEST_CASE("q_ratio is bounded below by delta over Delta for positive gradients") {
  std::mt19937_64 gen(29);
  for (int trial = 0; trial < 500; ++trial) {
    const Mat G0 = random_matrix(gen, 1 + rng::index(gen, 4), 1 + rng::index(gen, 4), 0.05, 3.0);
    auto [d, D] = delta_Delta(G0);
    CHECK(q_ratio(G0) >= d / D - 1e-15);
  }
}

TEST_CASE("condition sample invariants on the bilinear example") {
  const ProblemSpec toy = gallery::make_toy(-0.3, 0.3);
  Vec x(2);
  x << 0.7, 0.4;
  const ConditionSample s = make_condition_sample(toy, x);
  CHECK(s.q >= 0.0);
  CHECK(s.q <= 1.0);
  CHECK(s.delta <= s.Delta);
  CHECK(s.q == doctest::Approx(0.5));
  CHECK(s.inf_norm_Gf == doctest::Approx(std::max(0.3 * 0.7, 0.3 * 0.4)));
}

TEST_CASE("fd_check_gradients validates analytic gradients") {
  const ProblemSpec toy = gallery::make_toy(-0.3, 0.3);
  Vec x(2);
  x << 0.4, 0.6;
  CHECK(fd_check_gradients(toy, x, 1e-6) <= 1e-6); // quadratic f: exact up to roundoff

  // affine constraints: central differences are exact
  ProblemSpec affine = toy;
  Mat G(2, 2);
  G << 0.1, 0.2, 0.05, 0.1;
  Vec eta(2);
  eta << 0.3, 0.3;
  affine.con = [G, eta](const Vec& p) -> Vec { return G * p + eta; };
  const Mat Gt = G.transpose();
  affine.con_grad = [Gt](const Vec&) { return Gt; };
  CHECK(fd_check_gradients(affine, x, 1e-6) <= 1e-9);

  // sabotage: a wrong analytic gradient must be flagged
  ProblemSpec broken = toy;
  broken.con_grad = [](const Vec& xx) {
    Mat Gf(2, 2);
    Gf << 0, 0.3 * xx[0] + 1.5, -0.3 * xx[1], 0;
    return Gf;
  };
  CHECK(fd_check_gradients(broken, x, 1e-6) >= 1.0);

  // too close to the boundary for the requested step
  Vec edge(2);
  edge << 1.0 - 1e-9, 0.5;
  CHECK_THROWS_AS(fd_check_gradients(toy, edge, 1e-6), PreconditionViolation);
}

TEST_CASE("bounding box membership and clamping") {
  const BoundingBox box(Vec::Zero(2), Vec::Ones(2));
  Vec inside(2), outside(2);
  inside << 0.5, 1.0;
  outside << 1.2, -0.1;
  CHECK(box.contains(inside));
  CHECK_FALSE(box.contains(outside));
  const Vec clamped = box.clamp(outside);
  CHECK(clamped[0] == 1.0);
  CHECK(clamped[1] == 0.0);
  CHECK_THROWS_AS(BoundingBox(Vec::Ones(2), Vec::Zero(2)), InvalidInput);
}

TEST_CASE("problem validation catches malformed index sets") {
  ProblemSpec p = gallery::make_toy(0.1, 0.1);
  p.eq_set = {0};
  CHECK_THROWS_AS(p.validate(), InvalidInput); // 0 appears in both sets
  p.ineq_set = {1};
  CHECK_NOTHROW(p.validate());
  p.eq_set.clear();
  CHECK_THROWS_AS(p.validate(), InvalidInput); // variable 0 uncovered
}

TEST_CASE("finite-difference fallback kicks in when con_grad is missing") {
  ProblemSpec p = gallery::make_toy(-0.3, 0.3);
  const ProblemSpec analytic = p;
  p.con_grad = nullptr;
  Vec x(2);
  x << 0.3, 0.8;
  const Mat fd = p.constraint_gradient(x);
  const Mat exact = analytic.constraint_gradient(x);
  CHECK((fd - exact).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("box mapping diagnostic counts escaping points") {
  const ProblemSpec good = gallery::make_toy(0.5, 0.5);
  const ProblemSpec bad = gallery::make_toy(1.8, 1.8); // f leaves [0,1]^2 near the corner
  std::vector<Vec> pts;
  Vec a(2), b(2);
  a << 0.1, 0.1;
  b << 1.0, 1.0;
  pts.push_back(a);
  pts.push_back(b);
  CHECK(box_mapping_violations(good, pts) == 0);
  CHECK(box_mapping_violations(bad, pts) == 1);
}
