#include "mesoc/semismooth.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <sstream>

namespace mesoc {

double fb_scalar(double a, double b) {
  const double r = std::hypot(a, b);
  const double s = a + b;
  // For a + b > 0 the difference cancels; use r - s = -2ab / (r + s) instead.
  return s > 0 ? -2.0 * a * b / (r + s) : r - s;
}

void NewtonConfig::validate() const {
  if (!(tol_residual > 0) || max_iter <= 0 || !(min_step > 0) || !(kink_perturbation > 0) ||
      !(certify_tol > 0)) {
    throw std::invalid_argument("newton config: tolerances and iteration limits must be positive");
  }
  if (!(armijo_sigma > 0 && armijo_sigma < 0.5)) {
    throw std::invalid_argument("newton config: armijo_sigma must lie in (0, 1/2)");
  }
  if (!(backtrack_factor > 0 && backtrack_factor < 1)) {
    throw std::invalid_argument("newton config: backtrack_factor must lie in (0, 1)");
  }
}

// ---------------------------------------------------------------------------
// Systems

Vec ReformulatedSystem::G(const Vec& z) const {
  return eval_G_tilde(inst_, ReformPoint::from_stacked(z, inst_.dims()));
}

Vec ReformulatedSystem::H(const Vec& z) const {
  return eval_H_tilde(inst_, ReformPoint::from_stacked(z, inst_.dims()));
}

Mat ReformulatedSystem::jacobian(const Vec& z) const {
  return jacobian_blocks(inst_, ReformPoint::from_stacked(z, inst_.dims())).assembled();
}

AffineSystem::AffineSystem(Mat M, Vec q, int num_complementarity)
    : M_(std::move(M)), q_(std::move(q)), m_(num_complementarity) {
  if (M_.rows() != M_.cols() || M_.rows() != q_.size() || m_ < 0 || m_ > q_.size()) {
    throw DimensionError("affine system: inconsistent shapes");
  }
}

Vec AffineSystem::G(const Vec& z) const { return (M_ * z + q_).head(m_); }

Vec AffineSystem::H(const Vec& z) const { return (M_ * z + q_).tail(q_.size() - m_); }

// ---------------------------------------------------------------------------
// Residual and Jacobian

FbResidual fb_residual(const MixedComplementaritySystem& sys, const Vec& z) {
  const int m = sys.num_complementarity();
  const int k = sys.num_free();
  if (z.size() != m + k) throw DimensionError("fb_residual: point has wrong length");
  FbResidual res;
  res.phi.resize(m + k);
  const Vec g = sys.G(z);
  for (int i = 0; i < m; ++i) res.phi[i] = fb_scalar(z[i], g[i]);
  res.phi.tail(k) = sys.H(z);
  res.merit = 0.5 * res.phi.squaredNorm();
  return res;
}

FbResidual fb_residual(const LcpInstance& inst, const ReformPoint& pt) {
  return fb_residual(ReformulatedSystem(inst), pt.stacked());
}

GenJacobianElement generalized_jacobian(const MixedComplementaritySystem& sys, const Vec& z,
                                        const NewtonConfig& config) {
  const int m = sys.num_complementarity();
  const int n = sys.size();
  if (z.size() != n) throw DimensionError("generalized_jacobian: point has wrong length");

  GenJacobianElement el;
  el.matrix = sys.jacobian(z);
  el.d1.resize(m);
  el.d2.resize(m);
  const Vec g = sys.G(z);
  const double kink = 1.0 / std::sqrt(2.0) - 1.0;

  for (int i = 0; i < m; ++i) {
    const double r = std::hypot(z[i], g[i]);
    if (r <= config.kink_perturbation) {
      el.d1[i] = kink;
      el.d2[i] = kink;
      el.kink_indices.push_back(i);
    } else {
      el.d1[i] = z[i] / r - 1.0;
      el.d2[i] = g[i] / r - 1.0;
    }
    el.matrix.row(i) *= el.d2[i];
    el.matrix(i, i) += el.d1[i];
  }
  el.selection_tag =
      el.kink_indices.empty() ? "smooth" : "symmetric-kink:" + std::to_string(el.kink_indices.size());
  return el;
}

GenJacobianElement generalized_jacobian(const LcpInstance& inst, const ReformPoint& pt,
                                        const NewtonConfig& config) {
  return generalized_jacobian(ReformulatedSystem(inst), pt.stacked(), config);
}

std::string format_trace(const IterationTrace& trace) {
  std::ostringstream out;
  out.precision(6);
  out << std::scientific;
  for (const auto& rec : trace) {
    out << rec.iteration << ' ' << rec.merit << ' ' << rec.residual << ' ' << rec.step << ' '
        << (rec.fallback ? 1 : 0) << ' ' << rec.condition << '\n';
  }
  return out.str();
}

std::string to_string(NewtonStatus status) {
  switch (status) {
    case NewtonStatus::Converged: return "converged";
    case NewtonStatus::Stalled: return "stalled";
    case NewtonStatus::MaxIter: return "max_iter";
    case NewtonStatus::Diverged: return "diverged";
  }
  return "unknown";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Solved: return "solved";
    case SolveStatus::Uncertified: return "uncertified";
    case SolveStatus::Stalled: return "stalled";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::Diverged: return "diverged";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Newton iteration

namespace {

bool all_finite(const Vec& v) { return v.allFinite(); }

// Backtracking on Psi. Returns the accepted step, or 0 when none was found.
double armijo(const MixedComplementaritySystem& sys, const Vec& z, const Vec& d, double merit,
              double slope, const NewtonConfig& config) {
  double alpha = 1.0;
  while (alpha >= config.min_step) {
    const Vec trial = z + alpha * d;
    const double trial_merit = fb_residual(sys, trial).merit;
    if (std::isfinite(trial_merit) && trial_merit <= merit + config.armijo_sigma * alpha * slope) {
      return alpha;
    }
    alpha *= config.backtrack_factor;
  }
  return 0.0;
}

}  // namespace

NewtonResult newton_micp(const MixedComplementaritySystem& sys, Vec start, const NewtonConfig& config) {
  config.validate();
  if (start.size() != sys.size()) throw DimensionError("newton: start has wrong length");

  NewtonResult result;
  result.z = std::move(start);

  for (int iter = 0;; ++iter) {
    const FbResidual res = fb_residual(sys, result.z);
    result.residual = res.inf_norm();
    result.iterations = iter;
    if (!all_finite(res.phi) || !all_finite(result.z)) {
      result.status = NewtonStatus::Diverged;
      return result;
    }
    if (result.residual <= config.tol_residual) {
      result.status = NewtonStatus::Converged;
      return result;
    }
    if (iter >= config.max_iter) {
      result.status = NewtonStatus::MaxIter;
      return result;
    }

    const GenJacobianElement el = generalized_jacobian(sys, result.z, config);
    const Vec grad = el.matrix.transpose() * res.phi;

    IterationRecord rec;
    rec.iteration = iter;
    rec.merit = res.merit;
    rec.residual = result.residual;

    Eigen::PartialPivLU<Mat> lu(el.matrix);
    const double rcond = lu.rcond();
    rec.condition = rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();

    double alpha = 0.0;
    Vec d;
    if (rec.condition <= config.max_condition) {
      d = lu.solve(-res.phi);
      const double slope = grad.dot(d);
      if (all_finite(d) && slope < 0) alpha = armijo(sys, result.z, d, res.merit, slope, config);
    }
    if (alpha == 0.0 && config.gradient_fallback) {
      d = -grad;
      rec.fallback = true;
      alpha = armijo(sys, result.z, d, res.merit, -grad.squaredNorm(), config);
    }
    if (alpha == 0.0) {
      rec.step = 0.0;
      result.trace.push_back(rec);
      result.status = NewtonStatus::Stalled;
      return result;
    }

    rec.step = alpha;
    result.trace.push_back(rec);
    result.z += alpha * d;
  }
}

// ---------------------------------------------------------------------------
// LCP driver

namespace {

std::optional<ComplementarityCertificate> certify(const LcpInstance& inst, const ConePoint& z,
                                                  double tol) {
  auto cert = classify_pair(z, affine_image(inst, z), tol);
  if (cert.in_set) return cert;
  return std::nullopt;
}

}  // namespace

LcpSolveResult newton_solve(const LcpInstance& inst, const ReformPoint& start, const NewtonConfig& config) {
  const ReformulatedSystem sys(inst);
  NewtonResult run = newton_micp(sys, start.stacked(), config);

  LcpSolveResult out;
  out.point = ReformPoint::from_stacked(run.z, inst.dims());
  out.trace = std::move(run.trace);
  out.residual = run.residual;
  out.iterations = run.iterations;
  out.z = ConePoint{x_from_reform(out.point.w_hat, std::abs(out.point.t)), out.point.u};

  switch (run.status) {
    case NewtonStatus::Stalled: out.status = SolveStatus::Stalled; return out;
    case NewtonStatus::MaxIter: out.status = SolveStatus::MaxIter; return out;
    case NewtonStatus::Diverged: out.status = SolveStatus::Diverged; return out;
    case NewtonStatus::Converged: break;
  }

  out.status = SolveStatus::Uncertified;
  if (out.point.t < -config.certify_tol) {
    out.certificate = classify_pair(out.z, affine_image(inst, out.z), config.certify_tol);
    return out;
  }
  if (auto cert = certify(inst, out.z, config.certify_tol)) {
    out.certificate = std::move(cert);
    out.status = SolveStatus::Solved;
    return out;
  }
  if (std::abs(out.point.t) <= config.zero_snap && out.point.u.norm() <= config.zero_snap) {
    const ConePoint snapped{x_from_reform(out.point.w_hat, 0.0), Vec::Zero(inst.dims().q)};
    if (auto cert = certify(inst, snapped, config.certify_tol)) {
      out.z = snapped;
      out.certificate = std::move(cert);
      out.zero_snapped = true;
      out.status = SolveStatus::Solved;
      return out;
    }
  }
  out.certificate = classify_pair(out.z, affine_image(inst, out.z), config.certify_tol);
  return out;
}

std::vector<ReformPoint> default_starts(const ConeDims& dims, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto direction = [&] {
    Vec u(dims.q);
    do {
      for (auto& ui : u) ui = normal(rng);
    } while (u.norm() < 1e-8);
    return Vec(u / u.norm());
  };

  std::vector<ReformPoint> starts;
  starts.reserve(std::max(count, 0));
  for (int k = 0; k < count; ++k) {
    ReformPoint pt;
    if (k == 0) {
      pt.w_hat = Vec::Zero(dims.p - 1);
      pt.u = 0.1 * direction();
      pt.t = 0.1;
    } else {
      const double t = std::pow(10.0, 2.0 * unit(rng) - 1.0);
      pt.w_hat.resize(dims.p - 1);
      for (auto& w : pt.w_hat) w = t * unit(rng);
      pt.u = t * direction();
      pt.t = t;
    }
    starts.push_back(std::move(pt));
  }
  return starts;
}

MultiStartResult solve_multistart(const LcpInstance& inst, const MultiStartOptions& options,
                                  const NewtonConfig& config) {
  auto starts = default_starts(inst.dims(), options.starts, options.seed);
  for (const auto& s : options.extra_starts) starts.push_back(s);
  if (starts.empty()) throw std::invalid_argument("multi-start needs at least one start");

  MultiStartResult out;
  out.runs.resize(starts.size());
  if (options.parallel) {
    std::vector<std::future<LcpSolveResult>> futures;
    for (const auto& s : starts) {
      futures.push_back(std::async(std::launch::async, [&inst, &config, s] {
        return newton_solve(inst, s, config);
      }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) out.runs[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < starts.size(); ++i) out.runs[i] = newton_solve(inst, starts[i], config);
  }
  for (std::size_t i = 0; i < out.runs.size(); ++i) out.runs[i].start_index = static_cast<int>(i);

  auto better = [](const LcpSolveResult& a, const LcpSolveResult& b) {
    const bool sa = a.status == SolveStatus::Solved;
    const bool sb = b.status == SolveStatus::Solved;
    if (sa != sb) return sa;
    const double ra = std::isfinite(a.residual) ? a.residual : std::numeric_limits<double>::infinity();
    const double rb = std::isfinite(b.residual) ? b.residual : std::numeric_limits<double>::infinity();
    if (ra != rb) return ra < rb;
    return a.start_index < b.start_index;
  };
  out.best = *std::min_element(out.runs.begin(), out.runs.end(), better);
  return out;
}

// ---------------------------------------------------------------------------
// Diagnostics

namespace {

double condition_number(const Mat& M) {
  if (M.size() == 0) return 1.0;
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& s = svd.singularValues();
  const double smin = s[s.size() - 1];
  return smin > 0 ? s[0] / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

StationarityReport stationarity_check(const LcpInstance& inst, const ReformPoint& pt, double tol,
                                      const NewtonConfig& config) {
  const ReformulatedSystem sys(inst);
  const Vec z = pt.stacked();
  const FbResidual res = fb_residual(sys, z);
  const GenJacobianElement el = generalized_jacobian(sys, z, config);

  StationarityReport rep;
  rep.gradient = el.matrix.transpose() * res.phi;
  rep.gradient_inf = rep.gradient.lpNorm<Eigen::Infinity>();

  const Vec g = sys.G(z);
  for (int i = 0; i < sys.num_complementarity(); ++i) {
    const double a = pt.w_hat[i];
    const double b = g[i];
    if (approx_ge(a, 0.0, tol) && approx_ge(b, 0.0, tol) && std::abs(a * b) <= tol * (1.0 + a * a + b * b)) {
      rep.complementary.push_back(i);
    } else if (a > 0 && b > 0) {
      rep.positive.push_back(i);
    } else {
      rep.negative.push_back(i);
    }
  }

  const JacobianBlocks blocks = jacobian_blocks(inst, pt);
  rep.a_tilde_condition = condition_number(blocks.A_tilde);
  rep.d_tilde_condition = condition_number(blocks.D_tilde);
  rep.a_tilde_nonsingular = rep.a_tilde_condition <= config.max_condition;
  rep.d_tilde_nonsingular = rep.d_tilde_condition <= config.max_condition;
  if (rep.d_tilde_nonsingular) {
    rep.schur_complement =
        blocks.A_tilde - blocks.B_tilde * blocks.D_tilde.partialPivLu().solve(blocks.C_tilde);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Sub-solvers for the special cases

std::optional<Vec> solve_orthant_lcp(const Mat& M, const Vec& q, const NewtonConfig& config, int starts,
                                     std::uint64_t seed) {
  if (M.rows() != M.cols() || M.rows() != q.size()) throw DimensionError("orthant LCP: shape mismatch");
  const int n = static_cast<int>(q.size());
  const AffineSystem sys(M, q, n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto accept = [&](const Vec& w) {
    const Vec g = M * w + q;
    return orthant_contains(w, config.certify_tol) && orthant_contains(g, config.certify_tol) &&
           std::abs(w.dot(g)) <= config.certify_tol * (1.0 + w.norm() * g.norm());
  };

  for (int k = 0; k < std::max(starts, 1); ++k) {
    Vec w0 = Vec::Zero(n);
    if (k > 0) {
      for (auto& wi : w0) wi = unit(rng);
    }
    NewtonResult run = newton_micp(sys, w0, config);
    if (run.status != NewtonStatus::Converged) continue;
    Vec w = run.z.cwiseMax(0.0);
    if (accept(w)) return w;
  }
  return std::nullopt;
}

std::optional<Vec> solve_monotone_lcp(const Mat& M, const Vec& q, const NewtonConfig& config) {
  if (M.rows() != M.cols() || M.rows() != q.size()) throw DimensionError("monotone LCP: shape mismatch");
  const int n = static_cast<int>(q.size());
  const Mat L = lower_ones(n);
  const Mat U = upper_ones(n);
  const auto w = solve_orthant_lcp(L * M * U, L * q, config);
  if (!w) return std::nullopt;
  return Vec(U * *w);
}

std::optional<ConePoint> solve_monotone_micp(const LcpInstance& inst, const NewtonConfig& config) {
  const int p = inst.dims().p;
  const int q = inst.dims().q;
  const auto& T = inst.T();
  const Mat L = lower_ones(p);
  const Mat U = upper_ones(p);

  Mat M(p + q, p + q);
  M << L * T.A * U, L * T.B, T.C * U, T.D;
  Vec c(p + q);
  c << L * inst.y(), inst.v();
  const AffineSystem sys(M, c, p);

  NewtonResult run = newton_micp(sys, Vec::Zero(p + q), config);
  if (run.status != NewtonStatus::Converged) return std::nullopt;
  const Vec w = run.z.head(p).cwiseMax(0.0);
  return ConePoint{U * w, run.z.tail(q)};
}

}  // namespace mesoc
