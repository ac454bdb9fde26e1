#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmle/gaussian.hpp"

namespace cmle {

/// Mean update used by the four-block iteration.
enum class MeanUpdate {
  kPrinted,       ///< mu <- Sigma_k (xbar - (I - Sigma_k) alpha2_k / n)
  kStationarity,  ///< mu <- xbar - (I - Sigma_k) alpha2_k / n
};

/// Fixed-point map used by the intermediate-constraint iteration.
enum class IntermediateMap {
  kPrinted,       ///< closed form as published, (n-1) S b numerator
  kStationarity,  ///< rearrangement of the stationarity system with A(xbar) = nS
};

struct SolverConfig {
  int max_iter = 1000;
  double tol = 1e-6;
  int inner_max_iter = 100;
  double epsilon = 0.1;
  MeanUpdate mean_update = MeanUpdate::kPrinted;
  IntermediateMap intermediate_map = IntermediateMap::kPrinted;
  /// Rebuild the A&S coefficient matrix every k iterations; 0 keeps the one
  /// built at the starting point.
  int as_refresh_every = 0;
  bool record_trace = true;

  void validate() const;
};

/// Lagrange multipliers. alpha2 has length p for the vector constraint and
/// length 1 for the scalar S&C constraint.
struct LagrangeState {
  double alpha1 = 0.0;
  Vec alpha2;
};

enum class SolverStatus {
  kConverged,
  kMaxIterations,
  kDiverged,         ///< a determinant that must be positive was not
  kSingularStep,     ///< a step denominator or coefficient matrix vanished
  kNonFinite,
  kRepairFailed,     ///< PD repair met two non-positive eigenvalues
};

std::string to_string(SolverStatus s);

/// Per-iteration diagnostics: successive-change norms of each parameter block
/// (in the solver's own block order) and the constraint residual norm.
struct TraceEntry {
  int iteration = 0;
  std::vector<double> block_change;
  double residual = 0.0;
};

struct SolverReport {
  std::string method;
  EstimatePair estimate;
  LagrangeState multipliers;
  int iterations_used = 0;
  bool converged = false;
  SolverStatus status = SolverStatus::kMaxIterations;
  std::string message;
  std::vector<std::string> block_names;
  std::vector<bool> block_converged;
  ConstraintResiduals residuals;
  /// Norm of Sigma b - mu for the intermediate constraint; unset otherwise.
  std::optional<double> target_residual;
  bool pd_flag = false;
  double symmetry_gap = 0.0;
  std::vector<TraceEntry> trace;
};

/// Closed-form shape-matrix MLE under |Sigma| = 1 alone: (xbar, A(xbar)/|A(xbar)|^{1/p}).
SolverReport shape_mle(const Dataset& data);

/// Fixed-point iteration on alpha2 for Sigma b = mu, |Sigma| = 1.
SolverReport intermediate_mle(const Dataset& data, const Vec& b, const SolverConfig& config = {});

/// The map alpha2 -> f(alpha2) iterated by intermediate_mle.
Vec intermediate_map(const SufficientStats& stats, const Vec& b, const Vec& alpha2, IntermediateMap variant);

/// Four-block iteration over (alpha1, Sigma, alpha2, mu) for Sigma mu = mu, |Sigma| = 1.
SolverReport smle(const Dataset& data, const SolverConfig& config = {});

/// Double iteration over the canonical statistic with the multiplier computed
/// explicitly from a first-order expansion of the scalar constraint.
SolverReport sc_mle(const Dataset& data, const SolverConfig& config = {});

/// Newton-type iteration on the Lagrangian score with the coefficient matrix
/// inverted once at theta0 = (xbar, vec S), confined to the ball of radius
/// |theta0| around theta0.
SolverReport as_mle(const Dataset& data, const SolverConfig& config = {});

/// Point where the segment from center to outside meets the sphere of the
/// given radius around center.
Vec project_to_ball(const Vec& center, double radius, const Vec& outside);

/// Blocks of the inverse of E = [B, -H; -H', 0] at (mu, Sigma), where
/// B = diag(Sigma^{-1}, Sigma^{-1} (x) Sigma^{-1}) and H the constraint Jacobian.
struct AsymptoticCovariance {
  Mat p_block;  ///< (p + p^2) x (p + p^2)
  Mat q_block;  ///< (p + p^2) x p, sign chosen so that B P + H Q' = I
  Mat r_block;  ///< p x p, -[(Sigma - I) Sigma (Sigma - I) + (mu' Sigma mu) Sigma]^{-1}
};

AsymptoticCovariance as_asymptotic_covariance(const EstimatePair& est);

/// B_theta = diag(Sigma^{-1}, Sigma^{-1} (x) Sigma^{-1}).
Mat as_information_matrix(const Mat& sigma);

/// theta = (mu, vec Sigma) and back.
Vec pack_theta(const EstimatePair& est);
EstimatePair unpack_theta(const Vec& theta, Eigen::Index p);

}  // namespace cmle
