#include "mesoc/cone.hpp"

#include <algorithm>
#include <cmath>

namespace mesoc {

ConeDims::ConeDims(int p_, int q_) : p(p_), q(q_) {
  if (p < 2 || q < 1) {
    throw DimensionError("cone dimensions need p >= 2 and q >= 1, got p=" + std::to_string(p) +
                         " q=" + std::to_string(q));
  }
}

ConePoint ConePoint::zero(const ConeDims& dims) {
  return {Vec::Zero(dims.p), Vec::Zero(dims.q)};
}

ConePoint ConePoint::from_stacked(const Vec& z, const ConeDims& dims) {
  if (z.size() != dims.n()) throw DimensionError("stacked vector has wrong length");
  return {z.head(dims.p), z.tail(dims.q)};
}

Vec ConePoint::stacked() const {
  Vec z(x.size() + u.size());
  z << x, u;
  return z;
}

double ConePoint::dot(const ConePoint& other) const {
  if (x.size() != other.x.size() || u.size() != other.u.size()) {
    throw DimensionError("inner product of points with different dimensions");
  }
  return x.dot(other.x) + u.dot(other.u);
}

double ConePoint::norm() const { return std::sqrt(x.squaredNorm() + u.squaredNorm()); }

ConePoint operator+(const ConePoint& a, const ConePoint& b) {
  if (a.dims() != b.dims()) throw DimensionError("sum of points with different dimensions");
  return {a.x + b.x, a.u + b.u};
}

ConePoint operator*(double s, const ConePoint& a) { return {s * a.x, s * a.u}; }

bool approx_eq(double a, double b, double tol) {
  return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

bool approx_ge(double a, double b, double tol) {
  return a >= b - tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

namespace {

void require_valid(const ConePoint& z) {
  if (z.x.size() < 2 || z.u.size() < 1) {
    throw DimensionError("cone point needs p >= 2 and q >= 1");
  }
}

}  // namespace

bool monotone_nonneg_contains(const Vec& x, double tol) {
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    if (!approx_ge(x[i], x[i + 1], tol)) return false;
  }
  return x.size() == 0 || approx_ge(x[x.size() - 1], 0.0, tol);
}

bool orthant_contains(const Vec& x, double tol) {
  for (double xi : x) {
    if (!approx_ge(xi, 0.0, tol)) return false;
  }
  return true;
}

bool mesoc_contains(const ConePoint& z, double tol) {
  require_valid(z);
  const auto p = z.x.size();
  for (Eigen::Index i = 0; i + 1 < p; ++i) {
    if (!approx_ge(z.x[i], z.x[i + 1], tol)) return false;
  }
  return approx_ge(z.x[p - 1], z.u.norm(), tol);
}

Vec prefix_sums(const Vec& v) {
  Vec s(v.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    acc += v[i];
    s[i] = acc;
  }
  return s;
}

bool dual_contains(const ConePoint& s, double tol) {
  require_valid(s);
  const Vec sums = prefix_sums(s.x);
  const auto p = sums.size();
  for (Eigen::Index j = 0; j + 1 < p; ++j) {
    if (!approx_ge(sums[j], 0.0, tol)) return false;
  }
  return approx_ge(sums[p - 1], s.u.norm(), tol);
}

Vec shift_to_monotone(const ConePoint& z) {
  return z.x - Vec::Constant(z.x.size(), z.u.norm());
}

double mesoc_gap(const ConePoint& z) {
  require_valid(z);
  double gap = 0.0;
  const auto p = z.x.size();
  for (Eigen::Index i = 0; i + 1 < p; ++i) gap = std::max(gap, z.x[i + 1] - z.x[i]);
  return std::max(gap, z.u.norm() - z.x[p - 1]);
}

double dual_gap(const ConePoint& s) {
  require_valid(s);
  const Vec sums = prefix_sums(s.x);
  const auto p = sums.size();
  double gap = 0.0;
  for (Eigen::Index j = 0; j + 1 < p; ++j) gap = std::max(gap, -sums[j]);
  return std::max(gap, s.u.norm() - sums[p - 1]);
}

std::string to_string(CaseTag tag) {
  switch (tag) {
    case CaseTag::BothZero: return "both-zero";
    case CaseTag::UZero: return "u-zero";
    case CaseTag::VZero: return "v-zero";
    case CaseTag::Generic: return "generic";
  }
  return "unknown";
}

bool monotone_complementary(const Vec& x, const Vec& y, double tol) {
  if (x.size() != y.size()) throw DimensionError("monotone pair with different lengths");
  if (!monotone_nonneg_contains(x, tol)) return false;
  const Vec sums = prefix_sums(y);
  for (double s : sums) {
    if (!approx_ge(s, 0.0, tol)) return false;
  }
  return std::abs(x.dot(y)) <= tol * (1.0 + x.norm() * y.norm());
}

ComplementarityCertificate classify_pair(const ConePoint& z, const ConePoint& s, double tol) {
  require_valid(z);
  if (z.dims() != s.dims()) throw DimensionError("classify_pair: primal and dual dimensions differ");

  ComplementarityCertificate cert;
  cert.primal = z;
  cert.dual = s;

  const auto p = z.x.size();
  const double norm_u = z.u.norm();
  const double norm_v = s.u.norm();
  const double sum_y = s.x.sum();
  const double inner = z.dot(s);

  auto& res = cert.residuals;
  res["primal_membership_gap"] = mesoc_gap(z);
  res["dual_membership_gap"] = dual_gap(s);
  res["orthogonality"] = inner;
  res["sum_y_minus_norm_v"] = sum_y - norm_v;
  res["xp_minus_norm_u"] = z.x[p - 1] - norm_u;
  res["colinearity_defect"] = 0.0;

  auto check = [&](bool ok, const char* name) {
    if (!ok) cert.failed_checks.emplace_back(name);
  };

  check(mesoc_contains(z, tol), "primal_membership");
  check(dual_contains(s, tol), "dual_membership");
  check(std::abs(inner) <= tol * (1.0 + z.norm() * s.norm()), "orthogonality");

  const bool u_zero = !(norm_u > tol);
  const bool v_zero = !(norm_v > tol);

  if (u_zero && v_zero) {
    cert.case_tag = CaseTag::BothZero;
    check(monotone_complementary(z.x, s.x, tol), "monotone_complementarity");
  } else if (u_zero) {
    cert.case_tag = CaseTag::UZero;
    check(approx_eq(z.x[p - 1], 0.0, tol), "xp_zero");
    check(approx_ge(sum_y, norm_v, tol), "sum_y_ge_norm_v");
    check(monotone_complementary(z.x, s.x, tol), "monotone_complementarity");
  } else if (v_zero) {
    cert.case_tag = CaseTag::VZero;
    check(approx_ge(z.x.minCoeff(), norm_u, tol), "x_ge_norm_u");
    check(approx_eq(sum_y, 0.0, tol), "sum_y_zero");
    check(monotone_complementary(z.x, s.x, tol), "monotone_complementarity");
  } else {
    cert.case_tag = CaseTag::Generic;
    const double lambda = -z.u.dot(s.u) / z.u.squaredNorm();
    cert.lambda = lambda;
    cert.lambda_near_zero = lambda <= tol;
    const double defect = (s.u + lambda * z.u).norm();
    res["colinearity_defect"] = defect;
    res["lambda"] = lambda;

    check(approx_eq(z.x[p - 1], norm_u, tol), "xp_eq_norm_u");
    check(approx_eq(sum_y, norm_v, tol), "sum_y_eq_norm_v");
    check(approx_eq(z.u.dot(s.u), -norm_u * norm_v, tol), "antiparallel_uv");
    check(lambda >= -tol, "lambda_nonneg");
    check(defect <= tol * (1.0 + norm_v), "colinearity");

    Vec y_shift = s.x;
    y_shift[p - 1] -= norm_v;
    check(monotone_complementary(shift_to_monotone(z), y_shift, tol), "shifted_complementarity");
  }

  cert.in_set = cert.failed_checks.empty();
  return cert;
}

}  // namespace mesoc
