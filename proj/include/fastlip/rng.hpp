#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>

namespace fastlip::rng {

// Deterministic draws built directly on mt19937_64 output. std::*_distribution
// is implementation-defined, which would break byte-identical reports across
// toolchains.

inline double unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53; // [0, 1)
}

inline int index(std::mt19937_64& gen, int n) {
  return static_cast<int>(gen() % static_cast<std::uint64_t>(n));
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * unit(gen);
}

inline Eigen::VectorXd point_in_box(std::mt19937_64& gen, const Eigen::VectorXd& lo,
                                    const Eigen::VectorXd& hi) {
  Eigen::VectorXd x(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) x[i] = uniform(gen, lo[i], hi[i]);
  return x;
}

/// Strictly positive weights summing to one (flat Dirichlet via exponentials).
inline Eigen::VectorXd simplex_point(std::mt19937_64& gen, int m) {
  Eigen::VectorXd w(m);
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    double e = -std::log(1.0 - unit(gen)); // Exp(1), strictly positive
    e = std::max(e, 1e-12);
    w[i] = e;
    total += e;
  }
  return w / total;
}

} // namespace fastlip::rng
