#pragma once

// Helpers shared by the test binaries. The checks here are written directly
// from the cone definitions and do not call the library's membership code, so
// they can serve as independent oracles.

#include "mesoc/lcp.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

namespace mesoc::testing {

inline std::filesystem::path data_dir() { return MESOC_DATA_DIR; }

inline Vec random_vec(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vec v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline Mat random_mat(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

inline LcpInstance random_instance(std::mt19937_64& rng, int p, int q) {
  BlockMatrix T{random_mat(rng, p, p), random_mat(rng, p, q), random_mat(rng, q, p), random_mat(rng, q, q)};
  return LcpInstance(ConeDims(p, q), std::move(T), ConePoint(random_vec(rng, p), random_vec(rng, q)));
}

/// A point of L built from sorted nonnegative increments.
inline ConePoint random_mesoc_member(std::mt19937_64& rng, int p, int q) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ConePoint z(Vec(p), random_vec(rng, q));
  const double base = z.u.norm() + 2.0 * unit(rng);
  double level = base;
  for (int i = p - 1; i >= 0; --i) {
    z.x[i] = level;
    level += unit(rng) < 0.3 ? 0.0 : 2.0 * unit(rng);
  }
  return z;
}

/// A point of the dual cone built from nonnegative prefix-sum increments.
inline ConePoint random_dual_member(std::mt19937_64& rng, int p, int q) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vec v = random_vec(rng, q);
  Vec sums(p);
  double acc = 0.0;
  for (int j = 0; j + 1 < p; ++j) {
    acc += unit(rng) < 0.3 ? 0.0 : 2.0 * unit(rng);
    sums[j] = acc;
  }
  sums[p - 1] = std::max(acc, v.norm()) + (unit(rng) < 0.3 ? 0.0 : unit(rng));
  Vec y(p);
  y[0] = sums[0];
  for (int j = 1; j < p; ++j) y[j] = sums[j] - sums[j - 1];
  return {y, v};
}

/// Membership in L and in its dual, and orthogonality, straight from the
/// definitions with the absolute-plus-relative tolerance.
inline bool ge_tol(double a, double b, double tol) {
  return a >= b - tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

inline bool oracle_in_mesoc(const ConePoint& z, double tol) {
  for (Eigen::Index i = 0; i + 1 < z.x.size(); ++i)
    if (!ge_tol(z.x[i], z.x[i + 1], tol)) return false;
  return ge_tol(z.x[z.x.size() - 1], z.u.norm(), tol);
}

inline bool oracle_in_dual(const ConePoint& s, double tol) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j + 1 < s.x.size(); ++j) {
    acc += s.x[j];
    if (!ge_tol(acc, 0.0, tol)) return false;
  }
  return ge_tol(s.x.sum(), s.u.norm(), tol);
}

inline bool oracle_certified(const LcpInstance& inst, const ConePoint& z, double tol) {
  const Vec xs = z.x;
  const Vec s_top = inst.T().A * z.x + inst.T().B * z.u + inst.y();
  const Vec s_bot = inst.T().C * z.x + inst.T().D * z.u + inst.v();
  const ConePoint s(s_top, s_bot);
  const double inner = z.x.dot(s_top) + z.u.dot(s_bot);
  const double scale = std::sqrt(z.x.squaredNorm() + z.u.squaredNorm()) *
                       std::sqrt(s_top.squaredNorm() + s_bot.squaredNorm());
  return oracle_in_mesoc(z, tol) && oracle_in_dual(s, tol) && std::abs(inner) <= tol * (1.0 + scale);
}

}  // namespace mesoc::testing
