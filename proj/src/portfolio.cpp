#include "mesoc/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace mesoc::portfolio {

ReturnsPanel ReturnsPanel::from_returns(Mat R, std::vector<std::string> labels) {
  if (R.rows() == 0 || R.cols() == 0) throw std::invalid_argument("returns panel is empty");
  ReturnsPanel panel;
  panel.r = R.colwise().mean().transpose();
  panel.R = std::move(R);
  panel.labels = std::move(labels);
  return panel;
}

ReturnsPanel ReturnsPanel::with_mean(Mat R, Vec r, std::vector<std::string> labels) {
  if (R.rows() == 0 || R.cols() == 0) throw std::invalid_argument("returns panel is empty");
  if (r.size() != R.cols()) throw DimensionError("mean vector length differs from asset count");
  return {std::move(R), std::move(r), std::move(labels), true};
}

Mat disturbances(const ReturnsPanel& panel) {
  if (panel.R.rows() == 0 || panel.R.cols() == 0) throw std::invalid_argument("returns panel is empty");
  if (panel.r.size() != panel.R.cols()) throw DimensionError("mean vector length differs from asset count");
  return panel.R.rowwise() - panel.r.transpose();
}

Vec theta_schedule(double c0, const Vec& f) {
  if (!(c0 > 0)) throw std::invalid_argument("risk aversion c0 must be positive");
  const auto T = f.size();
  Vec theta(T);
  if (T == 0) return theta;
  theta[T - 1] = -c0 * f[T - 1];
  double tail = 0.0;  // f_t + ... + f_{T-1}
  for (Eigen::Index t = T - 2; t >= 0; --t) {
    tail += f[t];
    theta[t] = c0 * (tail - f[T - 1]);
  }
  return theta;
}

MadModel MadModel::make(const ReturnsPanel& panel, double c0, Vec f, int jstar) {
  if (!(c0 > 0)) throw std::invalid_argument("risk aversion c0 must be positive");
  if (f.size() != panel.periods()) {
    throw DimensionError("cost weights f need one entry per period (" + std::to_string(panel.periods()) + ")");
  }
  if (jstar < 0 || jstar >= panel.periods()) throw std::out_of_range("j* outside the panel");
  const double norm = disturbances(panel).row(jstar).norm();
  if (!(norm > 0)) throw std::domain_error("||U_j*|| must be positive");
  return {c0, std::move(f), jstar, norm};
}

double MadModel::general_level() const {
  const Vec th = theta();
  return c0 * f.sum() + 2.0 * th[th.size() - 1];
}

double beta_quadratic(const Vec& r, double norm_U, double level, double beta) {
  const double n = static_cast<double>(r.size());
  const double a = r.sum() / norm_U;
  const double b = r.squaredNorm() / (norm_U * norm_U);
  return n * beta * beta - 2.0 * a * beta + b - level * level;
}

std::optional<BetaRoots> beta_roots(const Vec& r, double norm_U, double level) {
  if (!(norm_U > 0)) throw std::domain_error("||U_j*|| must be positive");
  const double n = static_cast<double>(r.size());
  const double a = r.sum() / norm_U;
  const double b = r.squaredNorm() / (norm_U * norm_U);
  // Quarter discriminant of n b^2 - 2 a b + (b - level^2).
  const double disc = a * a - n * (b - level * level);
  if (disc < 0) return std::nullopt;
  const double sq = std::sqrt(disc);
  // Avoid cancellation: take the larger-magnitude root first.
  const double big = a >= 0 ? (a + sq) / n : (a - sq) / n;
  const double c = b - level * level;
  const double other = big != 0.0 ? c / (n * big) : (a >= 0 ? (a - sq) / n : (a + sq) / n);
  BetaRoots roots;
  roots.plus = std::max(big, other);
  roots.minus = std::min(big, other);
  return roots;
}

std::optional<BetaRoots> beta_roots_general(const MadModel& model, const ReturnsPanel& panel) {
  return beta_roots(panel.r, model.norm_Ujstar, model.general_level());
}

std::optional<BetaRoots> beta_roots_degenerate(const MadModel& model, const ReturnsPanel& panel) {
  return beta_roots(panel.r, model.norm_Ujstar, model.theta()[0]);
}

std::string to_string(CaseTag tag) { return tag == CaseTag::Degenerate ? "degenerate" : "general"; }

namespace {

Vec closed_form_w(const Vec& r, double norm_U, double beta, double tol) {
  const double n = static_cast<double>(r.size());
  const double denom = r.sum() - n * beta * norm_U;
  if (std::abs(denom) <= tol * (1.0 + std::abs(r.sum()) + n * std::abs(beta) * norm_U)) {
    throw std::domain_error("degenerate denominator <r, e> - n beta ||U_j*||");
  }
  Vec w = (r - Vec::Constant(r.size(), beta * norm_U)) / denom;
  // eᵀw = 1 holds algebraically; renormalizing removes the rounding drift.
  return w / w.sum();
}

}  // namespace

PortfolioSolution weights_closed_form(const MadModel& model, const ReturnsPanel& panel, double beta,
                                      double tol) {
  PortfolioSolution sol;
  sol.w = closed_form_w(panel.r, model.norm_Ujstar, beta, tol);
  sol.u = sol.w * model.norm_Ujstar;
  sol.beta = beta;
  sol.theta = model.theta();
  sol.case_tag = CaseTag::General;
  const double norm_u = sol.u.norm();
  if (norm_u > 0) {
    sol.lambda = (model.general_level() - sol.theta[0]) / norm_u;
  }
  sol.lambda_flagged = !sol.lambda || *sol.lambda <= 0.0;
  return sol;
}

std::optional<PortfolioSolution> solve_degenerate_case(const MadModel& model, const ReturnsPanel& panel,
                                                       double tol) {
  const Vec theta = model.theta();
  const double theta1 = theta[0];
  if (std::abs(theta1) <= 1e-14 * (1.0 + model.c0 * model.f.cwiseAbs().sum())) {
    throw std::domain_error("theta_1 vanishes; the degenerate case is undefined");
  }
  const auto roots = beta_roots_degenerate(model, panel);
  if (!roots) return std::nullopt;

  const double s = model.norm_Ujstar;
  for (double beta : {roots->plus, roots->minus}) {
    Vec w;
    try {
      w = closed_form_w(panel.r, s, beta, 1e-12);
    } catch (const std::domain_error&) {
      continue;
    }
    const Vec u = w * s;
    const double norm_u = u.norm();
    // r ||u|| / s - theta_1 u must be the constant vector beta ||u|| e. With a
    // single asset every root gives a constant vector, so the level matters too.
    const Vec level = panel.r * (norm_u / s) - theta1 * u;
    const Vec excess = level - Vec::Constant(level.size(), beta * norm_u);
    if (excess.cwiseAbs().maxCoeff() > tol * (1.0 + level.cwiseAbs().maxCoeff())) continue;

    PortfolioSolution sol;
    sol.w = w;
    sol.u = u;
    sol.beta = beta;
    sol.theta = theta;
    sol.case_tag = CaseTag::Degenerate;
    sol.lambda_flagged = true;
    return sol;
  }
  return std::nullopt;
}

KktReport kkt_residuals(const MadModel& model, const ReturnsPanel& panel, const PortfolioSolution& sol,
                        double tol) {
  const int T = static_cast<int>(model.f.size());
  const int n = panel.assets();
  if (T < 2) throw DimensionError("the KKT pair needs at least two periods");
  if (sol.w.size() != n) throw DimensionError("weights do not match the asset count");

  const double s = model.norm_Ujstar;
  const Vec u = sol.w * s;
  const double norm_u = u.norm();
  if (!(norm_u > 0)) throw std::domain_error("||u|| = 0; the KKT pair is undefined");

  const Vec theta = theta_schedule(model.c0, model.f);

  // dL/dy_t = c0 f_t + theta_{t+1} - theta_t (t < T), c0 f_T + theta_T.
  Vec grad_y(T);
  for (int t = 0; t + 1 < T; ++t) grad_y[t] = model.c0 * model.f[t] + theta[t + 1] - theta[t];
  grad_y[T - 1] = model.c0 * model.f[T - 1] + theta[T - 1];
  const Vec grad_u = -panel.r / s + theta[0] * u / norm_u + Vec::Constant(n, sol.beta);

  KktReport rep;
  // Cone order is y_T >= ... >= y_1 >= ||u||; all bounds sit at the binding level.
  rep.primal = ConePoint{Vec::Constant(T, norm_u), u};
  rep.dual = ConePoint{grad_y.reverse(), grad_u};
  rep.certificate = classify_pair(rep.primal, rep.dual, tol);

  auto& res = rep.residuals;
  res["mesoc_gap"] = mesoc_gap(rep.primal);
  res["dual_gap"] = dual_gap(rep.dual);
  res["orthogonality"] = rep.primal.dot(rep.dual);
  res["stationarity_y"] = grad_y.lpNorm<Eigen::Infinity>();
  res["stationarity_u"] = grad_u.lpNorm<Eigen::Infinity>();
  res["budget"] = sol.w.sum() - 1.0;
  res["ymin_minus_norm_u"] = rep.primal.x.minCoeff() - norm_u;
  // c0 sum f + 2 theta_T - theta_1 against ||dL/du||.
  res["level_minus_norm_grad_u"] = grad_y.sum() - grad_u.norm();

  const auto tag = rep.certificate.case_tag;
  rep.accepted = rep.certificate.in_set &&
                 (tag == mesoc::CaseTag::Generic || tag == mesoc::CaseTag::VZero) &&
                 std::abs(res["budget"]) <= 1e-12;
  return rep;
}

int argmin_exposure(const ReturnsPanel& panel, const Vec& w) {
  const Mat U = disturbances(panel);
  if (w.size() != U.cols()) throw DimensionError("weights do not match the asset count");
  int best = -1;
  double best_val = 0.0;
  for (int j = 0; j < U.rows(); ++j) {
    if (!(U.row(j).norm() > 0)) continue;
    const double val = std::abs(U.row(j).dot(w));
    if (best < 0 || val < best_val) {
      best = j;
      best_val = val;
    }
  }
  if (best < 0) throw std::domain_error("all disturbances U_j vanish");
  return best;
}

namespace {

double max_kkt(const KktReport& rep) {
  double m = 0.0;
  for (const char* key : {"mesoc_gap", "dual_gap", "orthogonality", "stationarity_y", "stationarity_u", "budget"}) {
    m = std::max(m, std::abs(rep.residuals.at(key)));
  }
  return m;
}

std::optional<Vec> chosen_weights(const PortfolioRun& run) {
  if (!run.chosen) return std::nullopt;
  return run.candidates[*run.chosen].solution.w;
}

}  // namespace

JstarSelection select_jstar(const ReturnsPanel& panel, const JstarRequest& request, double tol) {
  const Mat U = disturbances(panel);
  if (!(U.rowwise().norm().maxCoeff() > 0)) throw std::domain_error("all disturbances U_j vanish");

  JstarSelection sel;
  switch (request.mode) {
    case JstarMode::Fixed:
      if (request.fixed_index < 0 || request.fixed_index >= panel.periods()) {
        throw std::out_of_range("fixed j* outside the panel");
      }
      sel.index = request.fixed_index;
      return sel;
    case JstarMode::GivenW:
      sel.index = argmin_exposure(panel, request.w);
      return sel;
    case JstarMode::FixedPoint: break;
  }

  const Vec seed = request.w.size() ? request.w : Vec::Constant(panel.assets(), 1.0 / panel.assets());
  int current = argmin_exposure(panel, seed);
  sel.converged = false;
  for (int round = 1; round <= request.max_rounds; ++round) {
    sel.rounds = round;
    const auto run = solve_portfolio(panel, request.c0, request.f, current, tol);
    const auto w = chosen_weights(run);
    if (!w) break;
    const int next = argmin_exposure(panel, *w);
    if (next == current) {
      sel.converged = true;
      break;
    }
    current = next;
  }
  sel.index = current;
  return sel;
}

PortfolioRun solve_portfolio(const ReturnsPanel& panel, double c0, const Vec& f, int jstar, double tol) {
  PortfolioRun run{MadModel::make(panel, c0, f, jstar), std::nullopt, {}, std::nullopt};
  const MadModel& model = run.model;

  run.roots = beta_roots_general(model, panel);
  if (run.roots) {
    for (auto [name, beta] : {std::pair{"plus", run.roots->plus}, std::pair{"minus", run.roots->minus}}) {
      try {
        Candidate c{name, weights_closed_form(model, panel, beta), {}};
        c.kkt = kkt_residuals(model, panel, c.solution, tol);
        c.solution.kkt_residuals = c.kkt.residuals;
        run.candidates.push_back(std::move(c));
      } catch (const std::domain_error&) {
        // vanishing denominator for this root
      }
    }
  }
  try {
    if (auto sol = solve_degenerate_case(model, panel, tol)) {
      Candidate c{"degenerate", std::move(*sol), {}};
      c.kkt = kkt_residuals(model, panel, c.solution, tol);
      c.solution.kkt_residuals = c.kkt.residuals;
      run.candidates.push_back(std::move(c));
    }
  } catch (const std::domain_error&) {
    // theta_1 = 0
  }

  std::optional<std::size_t> best;
  auto key = [&](std::size_t i) {
    const auto& c = run.candidates[i];
    const bool lambda_pos = c.solution.lambda && *c.solution.lambda > tol;
    return std::tuple{!c.kkt.accepted, !lambda_pos, max_kkt(c.kkt), i};
  };
  for (std::size_t i = 0; i < run.candidates.size(); ++i) {
    if (!run.candidates[i].kkt.accepted) continue;
    if (!best || key(i) < key(*best)) best = i;
  }
  run.chosen = best;
  return run;
}

}  // namespace mesoc::portfolio
