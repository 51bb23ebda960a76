#pragma once

#include "mesoc/cone.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mesoc::portfolio {

/// Per-period asset returns: R is periods x assets, r the mean return per asset.
struct ReturnsPanel {
  Mat R;
  Vec r;
  std::vector<std::string> labels;
  bool mean_supplied = false;

  /// r is the column mean of R.
  static ReturnsPanel from_returns(Mat R, std::vector<std::string> labels = {});
  /// r is given by the caller and flagged as such.
  static ReturnsPanel with_mean(Mat R, Vec r, std::vector<std::string> labels = {});

  int periods() const { return static_cast<int>(R.rows()); }
  int assets() const { return static_cast<int>(R.cols()); }
};

/// Row j is U_j = R^j - r.
Mat disturbances(const ReturnsPanel& panel);

/// theta_t = c0 (f_t + ... + f_{T-1} - f_T) for t < T, theta_T = -c0 f_T.
Vec theta_schedule(double c0, const Vec& f);

struct MadModel {
  double c0 = 1.0;
  Vec f;
  int jstar = 0;  // zero-based period index
  double norm_Ujstar = 0.0;

  /// Validates c0 > 0, f length and ||U_jstar|| > 0.
  static MadModel make(const ReturnsPanel& panel, double c0, Vec f, int jstar);

  Vec theta() const { return theta_schedule(c0, f); }
  /// c0 sum(f) + 2 theta_T, the level that enters the general-case quadratic.
  double general_level() const;
};

struct BetaRoots {
  double plus = 0.0;
  double minus = 0.0;
};

/// n b^2 - 2 (sum r / s) b + sum r^2 / s^2 - level^2 evaluated at b, with s = ||U_j*||.
double beta_quadratic(const Vec& r, double norm_U, double level, double beta);

/// Real roots of beta_quadratic; nullopt when the discriminant is negative.
std::optional<BetaRoots> beta_roots(const Vec& r, double norm_U, double level);

std::optional<BetaRoots> beta_roots_general(const MadModel& model, const ReturnsPanel& panel);
/// Same quadratic with theta_1 as the level.
std::optional<BetaRoots> beta_roots_degenerate(const MadModel& model, const ReturnsPanel& panel);

enum class CaseTag { Degenerate, General };
std::string to_string(CaseTag tag);

struct PortfolioSolution {
  Vec w;
  Vec u;
  double beta = 0.0;
  Vec theta;
  std::optional<double> lambda;
  bool lambda_flagged = false;  // lambda <= 0 or absent
  CaseTag case_tag = CaseTag::General;
  std::map<std::string, double> kkt_residuals;
};

/// w = (r - beta s e) / (<r, e> - n beta s), s = ||U_j*||.
/// Throws std::domain_error when the denominator vanishes.
PortfolioSolution weights_closed_form(const MadModel& model, const ReturnsPanel& panel, double beta,
                                      double tol = 1e-12);

/// The stationary case -r/s + theta_1 u/||u|| + beta e = 0. Throws
/// std::domain_error when theta_1 is zero.
std::optional<PortfolioSolution> solve_degenerate_case(const MadModel& model, const ReturnsPanel& panel,
                                                       double tol = 1e-8);

struct KktReport {
  ConePoint primal;  // (y_T, ..., y_1, u), bounds at the binding level ||u||
  ConePoint dual;
  ComplementarityCertificate certificate;
  std::map<std::string, double> residuals;
  bool accepted = false;
};

/// Complementarity pair of the conic model at `sol` and its residual map.
/// Accepted when classify_pair passes at tol with a generic or v-zero tag and
/// the budget holds to 1e-12.
KktReport kkt_residuals(const MadModel& model, const ReturnsPanel& panel, const PortfolioSolution& sol,
                        double tol = 1e-8);

enum class JstarMode { Fixed, GivenW, FixedPoint };

struct JstarRequest {
  JstarMode mode = JstarMode::Fixed;
  int fixed_index = 0;  // zero-based, for Fixed
  Vec w;                // for GivenW; also the fixed-point seed when non-empty
  double c0 = 1.0;      // FixedPoint only
  Vec f;                // FixedPoint only
  int max_rounds = 50;
};

struct JstarSelection {
  int index = 0;
  bool converged = true;
  int rounds = 0;
};

/// argmin_j |U_j^T w| over periods with U_j != 0, ties to the smallest index.
int argmin_exposure(const ReturnsPanel& panel, const Vec& w);

JstarSelection select_jstar(const ReturnsPanel& panel, const JstarRequest& request, double tol = 1e-8);

struct Candidate {
  std::string root;  // "plus", "minus" or "degenerate"
  PortfolioSolution solution;
  KktReport kkt;
};

struct PortfolioRun {
  MadModel model;
  std::optional<BetaRoots> roots;
  std::vector<Candidate> candidates;
  std::optional<std::size_t> chosen;
};

/// Evaluates both general-case roots plus the degenerate path and ranks them:
/// accepted first, then positive lambda, then smallest KKT residual.
PortfolioRun solve_portfolio(const ReturnsPanel& panel, double c0, const Vec& f, int jstar,
                             double tol = 1e-8);

}  // namespace mesoc::portfolio
