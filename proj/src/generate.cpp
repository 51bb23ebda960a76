#include "mesoc/generate.hpp"

#include <random>

namespace mesoc {

PlantedInstance generate_planted(const ConeDims& dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  const int p = dims.p;
  const int q = dims.q;
  const int n = dims.n();

  Vec dir(q);
  do {
    for (auto& d : dir) d = normal(rng);
  } while (dir.norm() < 1e-6);
  const double t = uniform(0.5, 2.0);
  const Vec u = t * dir / dir.norm();

  // Each gap w_i is either active (positive) or closed; the matching prefix
  // sum of y is zero or strictly positive respectively.
  Vec w(p - 1);
  Vec sums(p);
  for (int i = 0; i < p - 1; ++i) {
    if (uniform(0.0, 1.0) < 0.5) {
      w[i] = uniform(0.2, 1.5);
      sums[i] = 0.0;
    } else {
      w[i] = 0.0;
      sums[i] = uniform(0.2, 1.5);
    }
  }
  const double lambda = uniform(0.5, 2.0);
  const Vec v = -lambda * u;
  sums[p - 1] = v.norm();

  Vec y(p);
  y[0] = sums[0];
  for (int i = 1; i < p; ++i) y[i] = sums[i] - sums[i - 1];

  Mat G(n, n), K(n, n);
  for (Eigen::Index i = 0; i < G.size(); ++i) G.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < K.size(); ++i) K.data()[i] = normal(rng);
  const Mat T = 0.5 * G.transpose() * G / n + 0.5 * Mat::Identity(n, n) + 0.5 * (K - K.transpose());

  ConePoint z_star{x_from_reform(w, t), u};
  ConePoint s_star{y, v};
  const ConePoint r = ConePoint::from_stacked(s_star.stacked() - T * z_star.stacked(), dims);

  return {LcpInstance(dims, BlockMatrix::from_full(T, dims), r), std::move(z_star), std::move(s_star), lambda};
}

}  // namespace mesoc
