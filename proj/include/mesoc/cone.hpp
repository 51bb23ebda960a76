#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mesoc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kDefaultTol = 1e-9;

/// Raised when vector or matrix shapes disagree with the declared cone dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dimensions of the product space R^p x R^q. Requires p >= 2, q >= 1.
struct ConeDims {
  int p = 2;
  int q = 1;

  ConeDims() = default;
  ConeDims(int p_, int q_);

  int n() const { return p + q; }
  bool operator==(const ConeDims&) const = default;
};

/// A pair (x, u) in R^p x R^q. Used both for points of the cone L and of
/// its dual M (where the parts are conventionally called (y, v)).
struct ConePoint {
  Vec x;
  Vec u;

  ConePoint() = default;
  ConePoint(Vec x_, Vec u_) : x(std::move(x_)), u(std::move(u_)) {}

  static ConePoint zero(const ConeDims& dims);
  /// Splits a stacked vector of length p+q.
  static ConePoint from_stacked(const Vec& z, const ConeDims& dims);

  ConeDims dims() const { return {static_cast<int>(x.size()), static_cast<int>(u.size())}; }
  Vec stacked() const;
  double dot(const ConePoint& other) const;
  double norm() const;
};

ConePoint operator+(const ConePoint& a, const ConePoint& b);
ConePoint operator*(double s, const ConePoint& a);

// Comparisons in absolute-plus-relative form: |a - b| <= tol * (1 + max(|a|, |b|)).
bool approx_eq(double a, double b, double tol);
bool approx_ge(double a, double b, double tol);

/// x_1 >= x_2 >= ... >= x_p >= ||u||, each link relaxed by tol.
bool mesoc_contains(const ConePoint& z, double tol = kDefaultTol);

/// Every prefix sum of y is >= 0 and the full sum is >= ||v||.
bool dual_contains(const ConePoint& s, double tol = kDefaultTol);

/// x_1 >= ... >= x_p >= 0.
bool monotone_nonneg_contains(const Vec& x, double tol = kDefaultTol);
bool orthant_contains(const Vec& x, double tol = kDefaultTol);

/// x - ||u|| e. Lies in the monotone nonnegative cone iff z lies in L.
Vec shift_to_monotone(const ConePoint& z);

/// Largest violation of the defining inequalities of L (0 for members).
double mesoc_gap(const ConePoint& z);
/// Largest violation of the defining inequalities of M (0 for members).
double dual_gap(const ConePoint& s);

Vec prefix_sums(const Vec& v);

enum class CaseTag { BothZero, UZero, VZero, Generic };

std::string to_string(CaseTag tag);

/// Outcome of testing (z, s) for membership in the complementarity set C(L).
///
/// The case is chosen from the zero pattern of (u, v); a vector counts as
/// zero when its norm is at most tol. `residuals` always carries the
/// membership gaps, orthogonality, sum(y) - ||v||, x_p - ||u|| and the
/// colinearity defect ||v + lambda u|| (0 outside the generic case).
struct ComplementarityCertificate {
  ConePoint primal;
  ConePoint dual;
  CaseTag case_tag = CaseTag::BothZero;
  std::optional<double> lambda;
  bool lambda_near_zero = false;
  bool in_set = false;
  std::map<std::string, double> residuals;
  std::vector<std::string> failed_checks;
};

ComplementarityCertificate classify_pair(const ConePoint& z, const ConePoint& s,
                                         double tol = kDefaultTol);

/// (x, y) in C(monotone nonnegative cone): x monotone nonnegative, all prefix
/// sums of y nonnegative, <x, y> = 0.
bool monotone_complementary(const Vec& x, const Vec& y, double tol);

}  // namespace mesoc
