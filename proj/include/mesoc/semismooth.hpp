#pragma once

#include "mesoc/cone.hpp"
#include "mesoc/lcp.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mesoc {

/// Fischer-Burmeister function sqrt(a^2 + b^2) - (a + b).
double fb_scalar(double a, double b);

struct NewtonConfig {
  double tol_residual = 1e-10;  // on ||Phi||_inf
  int max_iter = 200;
  double armijo_sigma = 1e-4;
  double backtrack_factor = 0.5;
  double min_step = 1e-12;
  bool gradient_fallback = true;
  double kink_perturbation = 1e-12;
  double max_condition = 1e14;
  // Acceptance of a converged point as an LCP solution.
  double certify_tol = 1e-8;
  // A converged point with |t|, ||u|| below this is also tried with u = 0.
  double zero_snap = 1e-4;

  void validate() const;
};

/// Phi = (phi(w_k, G~_k))_k stacked over H~; merit = 0.5 ||Phi||^2.
struct FbResidual {
  Vec phi;
  double merit = 0.0;

  double inf_norm() const { return phi.size() ? phi.lpNorm<Eigen::Infinity>() : 0.0; }
};

/// One element of the B-subdifferential of Phi.
struct GenJacobianElement {
  Mat matrix;
  Vec d1;  // d_ii, coefficient of the identity part
  Vec d2;  // d'_ii, coefficient of the G row
  std::vector<int> kink_indices;
  std::string selection_tag;
};

/// Mixed complementarity system: the first m variables are paired with G
/// (nonnegative, complementary), the remaining k are free and H = 0.
class MixedComplementaritySystem {
 public:
  virtual ~MixedComplementaritySystem() = default;
  virtual int num_complementarity() const = 0;
  virtual int num_free() const = 0;
  int size() const { return num_complementarity() + num_free(); }

  virtual Vec G(const Vec& z) const = 0;
  virtual Vec H(const Vec& z) const = 0;
  /// Jacobian of (G; H), size() x size().
  virtual Mat jacobian(const Vec& z) const = 0;
};

/// The (w_hat, u, t) system built from an LCP on L.
class ReformulatedSystem final : public MixedComplementaritySystem {
 public:
  explicit ReformulatedSystem(const LcpInstance& inst) : inst_(inst) {}

  int num_complementarity() const override { return inst_.dims().p - 1; }
  int num_free() const override { return inst_.dims().q + 1; }
  Vec G(const Vec& z) const override;
  Vec H(const Vec& z) const override;
  Mat jacobian(const Vec& z) const override;

 private:
  const LcpInstance& inst_;
};

/// Affine system: G = M_cc zc + M_cf zf + q_c, H = M_fc zc + M_ff zf + q_f,
/// with M partitioned conformally to (zc, zf).
class AffineSystem final : public MixedComplementaritySystem {
 public:
  AffineSystem(Mat M, Vec q, int num_complementarity);

  int num_complementarity() const override { return m_; }
  int num_free() const override { return static_cast<int>(q_.size()) - m_; }
  Vec G(const Vec& z) const override;
  Vec H(const Vec& z) const override;
  Mat jacobian(const Vec&) const override { return M_; }

 private:
  Mat M_;
  Vec q_;
  int m_;
};

FbResidual fb_residual(const MixedComplementaritySystem& sys, const Vec& z);
FbResidual fb_residual(const LcpInstance& inst, const ReformPoint& pt);

GenJacobianElement generalized_jacobian(const MixedComplementaritySystem& sys, const Vec& z,
                                        const NewtonConfig& config = {});
GenJacobianElement generalized_jacobian(const LcpInstance& inst, const ReformPoint& pt,
                                        const NewtonConfig& config = {});

struct IterationRecord {
  int iteration = 0;
  double merit = 0.0;
  double residual = 0.0;  // ||Phi||_inf at the start of the iteration
  double step = 0.0;
  bool fallback = false;
  double condition = 0.0;
};

using IterationTrace = std::vector<IterationRecord>;

/// Line-oriented rendering: "iter merit residual step fallback cond" per record.
std::string format_trace(const IterationTrace& trace);

enum class NewtonStatus { Converged, Stalled, MaxIter, Diverged };

struct NewtonResult {
  Vec z;
  NewtonStatus status = NewtonStatus::MaxIter;
  IterationTrace trace;
  double residual = 0.0;
  int iterations = 0;
};

/// Globalized semismooth Newton on Phi = 0 for a generic mixed system.
NewtonResult newton_micp(const MixedComplementaritySystem& sys, Vec start, const NewtonConfig& config);

enum class SolveStatus { Solved, Uncertified, Stalled, MaxIter, Diverged };

std::string to_string(NewtonStatus status);
std::string to_string(SolveStatus status);

struct LcpSolveResult {
  ReformPoint point;
  ConePoint z;  // reconstructed candidate
  SolveStatus status = SolveStatus::MaxIter;
  IterationTrace trace;
  double residual = 0.0;  // final ||Phi||_inf
  int iterations = 0;
  int start_index = 0;
  bool zero_snapped = false;
  std::optional<ComplementarityCertificate> certificate;
};

/// One Newton run from `start`; status Solved only when the reconstructed
/// z = (x(w_hat, |t|), u) passes classify_pair at config.certify_tol.
LcpSolveResult newton_solve(const LcpInstance& inst, const ReformPoint& start,
                            const NewtonConfig& config = {});

struct MultiStartOptions {
  int starts = 20;
  std::uint64_t seed = 0;
  std::vector<ReformPoint> extra_starts;  // tried after the generated ones
  bool parallel = false;
};

/// Start 0: w_hat = 0, ||u|| = t = 0.1 with a random direction. Later starts
/// draw t log-uniformly in [0.1, 10], w_hat uniformly in [0, t], u in a
/// random direction with ||u|| = t.
std::vector<ReformPoint> default_starts(const ConeDims& dims, int count, std::uint64_t seed);

struct MultiStartResult {
  LcpSolveResult best;
  std::vector<LcpSolveResult> runs;
};

/// Runs every start and keeps the best: certified runs first, then the
/// lowest final ||Phi||_inf, ties broken by start index.
MultiStartResult solve_multistart(const LcpInstance& inst, const MultiStartOptions& options = {},
                                  const NewtonConfig& config = {});

struct StationarityReport {
  Vec gradient;  // grad Psi = G^T Phi
  double gradient_inf = 0.0;
  std::vector<int> complementary;  // C
  std::vector<int> positive;       // P
  std::vector<int> negative;       // N
  double a_tilde_condition = 0.0;
  double d_tilde_condition = 0.0;
  bool a_tilde_nonsingular = false;
  bool d_tilde_nonsingular = false;
  std::optional<Mat> schur_complement;  // A~ - B~ D~^{-1} C~ when D~ is nonsingular
};

StationarityReport stationarity_check(const LcpInstance& inst, const ReformPoint& pt, double tol,
                                      const NewtonConfig& config = {});

/// LCP(M, q) on the nonnegative orthant via the FB Newton method.
std::optional<Vec> solve_orthant_lcp(const Mat& M, const Vec& q, const NewtonConfig& config = {},
                                     int starts = 8, std::uint64_t seed = 0);

/// LCP(M, q) on the monotone nonnegative cone, through x = U w with w >= 0.
std::optional<Vec> solve_monotone_lcp(const Mat& M, const Vec& q, const NewtonConfig& config = {});

/// The mixed problem of the Cx + Du + v = 0 ansatz, solved through the same
/// substitution x = U w.
std::optional<ConePoint> solve_monotone_micp(const LcpInstance& inst, const NewtonConfig& config = {});

}  // namespace mesoc
