#include "mesoc/lcp.hpp"

#include <cmath>

namespace mesoc {

namespace {

void require_shape(const Mat& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string("block ") + name + " has shape " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()) + ", expected " + std::to_string(rows) +
                         "x" + std::to_string(cols));
  }
}

void require_point(const ReformPoint& pt, const ConeDims& dims) {
  if (pt.w_hat.size() != dims.p - 1 || pt.u.size() != dims.q) {
    throw DimensionError("reformulated point does not match instance dimensions");
  }
}

// A x(w, t) + B u + y
Vec primal_image(const LcpInstance& inst, const Vec& x, const Vec& u) {
  return inst.T().A * x + inst.T().B * u + inst.y();
}

Vec dual_image(const LcpInstance& inst, const Vec& x, const Vec& u) {
  return inst.T().C * x + inst.T().D * u + inst.v();
}

}  // namespace

BlockMatrix BlockMatrix::from_full(const Mat& T, const ConeDims& dims) {
  require_shape(T, dims.n(), dims.n(), "T");
  return {T.topLeftCorner(dims.p, dims.p), T.topRightCorner(dims.p, dims.q),
          T.bottomLeftCorner(dims.q, dims.p), T.bottomRightCorner(dims.q, dims.q)};
}

Mat BlockMatrix::full() const {
  Mat T(A.rows() + C.rows(), A.cols() + B.cols());
  T << A, B, C, D;
  return T;
}

void BlockMatrix::check(const ConeDims& dims) const {
  require_shape(A, dims.p, dims.p, "A");
  require_shape(B, dims.p, dims.q, "B");
  require_shape(C, dims.q, dims.p, "C");
  require_shape(D, dims.q, dims.q, "D");
}

LcpInstance::LcpInstance(ConeDims dims, BlockMatrix T, ConePoint r)
    : dims_(dims), T_(std::move(T)), r_(std::move(r)) {
  T_.check(dims_);
  if (r_.dims() != dims_) throw DimensionError("r does not match instance dimensions");
}

Vec ReformPoint::stacked() const {
  Vec z(w_hat.size() + u.size() + 1);
  z << w_hat, u, t;
  return z;
}

ReformPoint ReformPoint::from_stacked(const Vec& z, const ConeDims& dims) {
  if (z.size() != dims.n()) throw DimensionError("stacked reformulated point has wrong length");
  return {z.head(dims.p - 1), z.segment(dims.p - 1, dims.q), z[dims.n() - 1]};
}

Mat JacobianBlocks::assembled() const {
  const auto m = A_tilde.rows();
  const auto k = D_tilde.rows();
  Mat J(m + k, m + k);
  J << A_tilde, B_tilde, C_tilde, D_tilde;
  return J;
}

ConePoint affine_image(const LcpInstance& inst, const ConePoint& z) {
  if (z.dims() != inst.dims()) throw DimensionError("affine_image: point does not match instance");
  return {primal_image(inst, z.x, z.u), dual_image(inst, z.x, z.u)};
}

Vec x_from_reform(const Vec& w_hat, double t) {
  const auto p = w_hat.size() + 1;
  Vec x(p);
  x[p - 1] = t;
  for (Eigen::Index i = p - 2; i >= 0; --i) x[i] = x[i + 1] + w_hat[i];
  return x;
}

ReformPoint reform_from_xu(const Vec& x, const Vec& u) {
  if (x.size() < 2) throw DimensionError("reform_from_xu needs p >= 2");
  const auto p = x.size();
  return {x.head(p - 1) - x.tail(p - 1), u, u.norm()};
}

Vec eval_G_tilde(const LcpInstance& inst, const ReformPoint& pt) {
  require_point(pt, inst.dims());
  const Vec g = primal_image(inst, x_from_reform(pt), pt.u);
  return prefix_sums(g).head(inst.dims().p - 1);
}

Vec eval_H_tilde(const LcpInstance& inst, const ReformPoint& pt) {
  require_point(pt, inst.dims());
  const Vec x = x_from_reform(pt);
  const double s = primal_image(inst, x, pt.u).sum();
  const Vec h = dual_image(inst, x, pt.u);
  const int q = inst.dims().q;
  Vec out(q + 1);
  out.head(q) = s * pt.u + pt.t * h;
  out[q] = pt.t * pt.t - pt.u.squaredNorm();
  return out;
}

Mat lower_ones(int n) { return Mat::Ones(n, n).triangularView<Eigen::Lower>(); }

Mat upper_ones(int n) { return Mat::Ones(n, n).triangularView<Eigen::Upper>(); }

JacobianBlocks jacobian_blocks(const LcpInstance& inst, const ReformPoint& pt) {
  require_point(pt, inst.dims());
  const int p = inst.dims().p;
  const int q = inst.dims().q;
  const int m = p - 1;
  const auto& T = inst.T();

  const Mat L = lower_ones(m);
  const Mat U = upper_ones(m);
  const Vec e = Vec::Ones(p);
  const Vec x = x_from_reform(pt);
  const Vec g = primal_image(inst, x, pt.u);
  const Vec h = dual_image(inst, x, pt.u);
  const double s = g.sum();
  const Eigen::RowVectorXd eA = e.transpose() * T.A;  // column sums of A

  JacobianBlocks J;
  J.A_tilde = L * T.A.topLeftCorner(m, m) * U;

  J.B_tilde.resize(m, q + 1);
  J.B_tilde.leftCols(q) = L * T.B.topRows(m);
  J.B_tilde.col(q) = L * T.A.topRows(m) * e;

  J.C_tilde = Mat::Zero(q + 1, m);
  J.C_tilde.topRows(q) = pt.t * T.C.leftCols(m) * U + pt.u * (eA.head(m) * U);

  J.D_tilde.resize(q + 1, q + 1);
  J.D_tilde.topLeftCorner(q, q) =
      pt.t * T.D + pt.u * (e.transpose() * T.B) + s * Mat::Identity(q, q);
  J.D_tilde.topRightCorner(q, 1) = h + pt.t * T.C * e + pt.u * eA.sum();
  J.D_tilde.bottomLeftCorner(1, q) = -2.0 * pt.u.transpose();
  J.D_tilde(q, q) = 2.0 * pt.t;
  return J;
}

AlphaBetaCertificate alpha_beta_certificate(const LcpInstance& inst, const ConePoint& z) {
  if (z.dims() != inst.dims()) throw DimensionError("alpha_beta_certificate: dimension mismatch");
  const auto p = z.x.size();
  AlphaBetaCertificate cert;
  cert.alpha.resize(p);
  cert.alpha.head(p - 1) = z.x.head(p - 1) - z.x.tail(p - 1);
  cert.alpha[p - 1] = z.x[p - 1] - z.u.norm();
  cert.beta = prefix_sums(primal_image(inst, z.x, z.u));
  return cert;
}

std::optional<ConePoint> solve_case_u_zero(const LcpInstance& inst, const MonotoneLcpSolver& solver,
                                           double tol) {
  const auto sub = solver(inst.T().A, inst.y());
  if (!sub) return std::nullopt;
  const Vec& x = *sub;
  if (x.size() != inst.dims().p) throw DimensionError("monotone sub-solver returned wrong length");
  if (!monotone_complementary(x, inst.T().A * x + inst.y(), tol)) return std::nullopt;
  if (!approx_eq(x[x.size() - 1], 0.0, tol)) return std::nullopt;
  const double total = (inst.T().A * x + inst.y()).sum();
  if (!approx_ge(total, (inst.T().C * x + inst.v()).norm(), tol)) return std::nullopt;
  return ConePoint{x, Vec::Zero(inst.dims().q)};
}

std::optional<ConePoint> solve_case_w_zero(const LcpInstance& inst, const MonotoneMicpSolver& solver,
                                           double tol) {
  const auto sub = solver(inst);
  if (!sub) return std::nullopt;
  if (sub->dims() != inst.dims()) throw DimensionError("mixed sub-solver returned wrong dimensions");
  const Vec& x = sub->x;
  const Vec& u = sub->u;
  const Vec g = primal_image(inst, x, u);
  const Vec h = dual_image(inst, x, u);
  if (h.norm() > tol * (1.0 + x.norm() + u.norm())) return std::nullopt;
  if (!monotone_complementary(x, g, tol)) return std::nullopt;
  if (!approx_ge(x.minCoeff(), u.norm(), tol)) return std::nullopt;
  if (!approx_eq(g.sum(), 0.0, tol)) return std::nullopt;
  return *sub;
}

}  // namespace mesoc
