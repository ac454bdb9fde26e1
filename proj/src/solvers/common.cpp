#include "common.hpp"

#include <sstream>

namespace cmle {

void SolverConfig::validate() const {
  if (max_iter < 0 || !(tol > 0.0) || inner_max_iter <= 0 || !(epsilon > 0.0) || as_refresh_every < 0)
    throw DomainError("SolverConfig: iteration caps and tolerances must be positive");
}

std::string to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::kConverged: return "converged";
    case SolverStatus::kMaxIterations: return "max_iterations";
    case SolverStatus::kDiverged: return "diverged";
    case SolverStatus::kSingularStep: return "singular_step";
    case SolverStatus::kNonFinite: return "non_finite";
    case SolverStatus::kRepairFailed: return "repair_failed";
  }
  return "unknown";
}

Vec project_to_ball(const Vec& center, double radius, const Vec& outside) {
  if (center.size() != outside.size()) throw DimensionError("project_to_ball: length mismatch");
  const double dist = (center - outside).norm();
  if (dist == 0.0) return center;
  const double t = radius / dist;
  return (1.0 - t) * center + t * outside;
}

Vec pack_theta(const EstimatePair& est) {
  const Eigen::Index p = est.p();
  Vec theta(p + p * p);
  theta.head(p) = est.mean;
  theta.tail(p * p) = vec(est.cov);
  return theta;
}

EstimatePair unpack_theta(const Vec& theta, Eigen::Index p) {
  if (theta.size() != p + p * p) throw DimensionError("unpack_theta: length is not p + p^2");
  return {theta.head(p), unvec(theta.tail(p * p), p)};
}

namespace detail {

void finalize(SolverReport& report) {
  report.converged = report.status == SolverStatus::kConverged;
  report.residuals = constraint_residuals(report.estimate);
  report.pd_flag = is_positive_definite(report.estimate.cov);
  report.symmetry_gap = symmetry_gap(report.estimate.cov);
}

}  // namespace detail

SolverReport shape_mle(const Dataset& data) {
  detail::require_sample(data, "shape_mle");
  const SufficientStats stats = sufficient_stats(data);
  const Mat a = stats.a_matrix(stats.mean);
  const auto [log_abs, sign] = log_abs_determinant(a);
  if (sign <= 0 || !is_positive_definite(a)) throw DomainError("shape_mle: A(xbar) is rank deficient");

  SolverReport report;
  report.method = "shape";
  report.estimate.mean = stats.mean;
  report.estimate.cov = symmetrize(a / std::exp(log_abs / static_cast<double>(stats.mean.size())));
  report.multipliers.alpha1 = 0.5 * (std::exp(log_abs / static_cast<double>(stats.mean.size())) - stats.n);
  report.multipliers.alpha2 = Vec::Zero(stats.mean.size());
  report.status = SolverStatus::kConverged;
  detail::finalize(report);
  return report;
}

}  // namespace cmle
