#pragma once

#include "mesoc/cone.hpp"

#include <functional>
#include <optional>

namespace mesoc {

/// T = [A B; C D] with A p x p, B p x q, C q x p, D q x q.
struct BlockMatrix {
  Mat A, B, C, D;

  static BlockMatrix from_full(const Mat& T, const ConeDims& dims);
  Mat full() const;
  void check(const ConeDims& dims) const;
};

/// LCP(T, r, L): find z in L with (z, Tz + r) in C(L).
class LcpInstance {
 public:
  LcpInstance(ConeDims dims, BlockMatrix T, ConePoint r);

  const ConeDims& dims() const { return dims_; }
  const BlockMatrix& T() const { return T_; }
  /// r = (y, v).
  const ConePoint& r() const { return r_; }
  const Vec& y() const { return r_.x; }
  const Vec& v() const { return r_.u; }

 private:
  ConeDims dims_;
  BlockMatrix T_;
  ConePoint r_;
};

/// Reformulated variables: w_hat in R^{p-1} (consecutive differences of x),
/// u in R^q, and t standing in for ||u||.
struct ReformPoint {
  Vec w_hat;
  Vec u;
  double t = 0.0;

  /// Stacked (w_hat, u, t), length p + q.
  Vec stacked() const;
  static ReformPoint from_stacked(const Vec& z, const ConeDims& dims);
};

struct AlphaBetaCertificate {
  Vec alpha;  // (x_1 - x_2, ..., x_{p-1} - x_p, x_p - ||u||)
  Vec beta;   // prefix sums of Ax + Bu + y
};

/// Jacobian of (G~, H~) with respect to (w_hat, (u, t)).
struct JacobianBlocks {
  Mat A_tilde;  // (p-1) x (p-1)
  Mat B_tilde;  // (p-1) x (q+1)
  Mat C_tilde;  // (q+1) x (p-1)
  Mat D_tilde;  // (q+1) x (q+1)

  Mat assembled() const;
};

ConePoint affine_image(const LcpInstance& inst, const ConePoint& z);

/// x_i = w_i + ... + w_{p-1} + t for i < p, x_p = t.
Vec x_from_reform(const Vec& w_hat, double t);
inline Vec x_from_reform(const ReformPoint& pt) { return x_from_reform(pt.w_hat, pt.t); }

/// w_i = x_i - x_{i+1}, t = ||u||.
ReformPoint reform_from_xu(const Vec& x, const Vec& u);

/// Prefix sums 1..p-1 of A x(w_hat, t) + B u + y.
Vec eval_G_tilde(const LcpInstance& inst, const ReformPoint& pt);

/// (u e^T(Ax + Bu + y) + t (Cx + Du + v), t^2 - ||u||^2), length q + 1.
Vec eval_H_tilde(const LcpInstance& inst, const ReformPoint& pt);

JacobianBlocks jacobian_blocks(const LcpInstance& inst, const ReformPoint& pt);

/// Lower-triangular all-ones (n x n).
Mat lower_ones(int n);
/// Upper-triangular all-ones (n x n).
Mat upper_ones(int n);

AlphaBetaCertificate alpha_beta_certificate(const LcpInstance& inst, const ConePoint& z);

/// Solves LCP(M, q) on the monotone nonnegative cone of R^p; nullopt on failure.
using MonotoneLcpSolver = std::function<std::optional<Vec>(const Mat& M, const Vec& q)>;

/// Solves the mixed problem: find (x, u) with x in the monotone nonnegative
/// cone, g = Ax + Bu + y in its dual, <x, g> = 0, and Cx + Du + v = 0.
using MonotoneMicpSolver = std::function<std::optional<ConePoint>(const LcpInstance& inst)>;

/// Solution under the ansatz u = 0: x solves LCP(A, y) on the monotone cone,
/// x_p = 0 and sum_i (Ax + y)_i >= ||Cx + v||. nullopt when the ansatz fails.
std::optional<ConePoint> solve_case_u_zero(const LcpInstance& inst, const MonotoneLcpSolver& solver,
                                           double tol = 1e-8);

/// Solution under the ansatz Cx + Du + v = 0: checks x_i >= ||u|| for all i
/// and sum_i (Ax + Bu + y)_i = 0 on the sub-solver's answer.
std::optional<ConePoint> solve_case_w_zero(const LcpInstance& inst, const MonotoneMicpSolver& solver,
                                           double tol = 1e-8);

}  // namespace mesoc
