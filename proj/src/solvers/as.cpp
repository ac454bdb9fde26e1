#include <Eigen/LU>

#include "common.hpp"

namespace cmle {

namespace {

Mat dense_inverse(const Mat& m, const char* what) {
  Eigen::PartialPivLU<Mat> lu(m);
  if (!(lu.rcond() > 1e-14)) throw NumericError(std::string(what) + ": matrix is numerically singular");
  return lu.inverse();
}

/// E = [B, -H; -H', 0] at theta.
Mat coefficient_matrix(const EstimatePair& est) {
  const Eigen::Index p = est.p();
  const Eigen::Index q = p + p * p;
  const Mat h = constraint_jacobian(est);
  Mat e = Mat::Zero(q + p, q + p);
  e.topLeftCorner(q, q) = as_information_matrix(est.cov);
  e.topRightCorner(q, p) = -h;
  e.bottomLeftCorner(p, q) = -h.transpose();
  return e;
}

Eigen::PartialPivLU<Mat> factor_coefficients(const EstimatePair& est) {
  Eigen::PartialPivLU<Mat> lu(coefficient_matrix(est));
  const double rcond = lu.rcond();
  if (!(rcond >= 1e-12))
    throw NumericError("as_mle: coefficient matrix is ill-conditioned (reciprocal condition " + std::to_string(rcond) + ")");
  return lu;
}

}  // namespace

Mat as_information_matrix(const Mat& sigma) {
  if (sigma.rows() != sigma.cols()) throw DimensionError("as_information_matrix: sigma is not square");
  const Eigen::Index p = sigma.rows();
  const Mat inv = dense_inverse(sigma, "as_information_matrix");
  Mat b = Mat::Zero(p + p * p, p + p * p);
  b.topLeftCorner(p, p) = inv;
  b.bottomRightCorner(p * p, p * p) = kron(inv, inv);
  return b;
}

AsymptoticCovariance as_asymptotic_covariance(const EstimatePair& est) {
  const Eigen::Index p = est.p();
  if (est.cov.rows() != p || est.cov.cols() != p) throw DimensionError("as_asymptotic_covariance: shape mismatch");
  if (!is_positive_definite(est.cov)) throw DomainError("as_asymptotic_covariance: Sigma must be positive definite");
  const Mat& sigma = est.cov;
  const Mat eye = Mat::Identity(p, p);
  const Mat inner = (sigma - eye) * sigma * (sigma - eye) + est.mean.dot(sigma * est.mean) * sigma;

  Eigen::PartialPivLU<Mat> lu(inner);
  if (!(lu.rcond() > 1e-14))
    throw NumericError("as_asymptotic_covariance: R block inner matrix (Sigma-I)Sigma(Sigma-I) + (mu'Sigma mu)Sigma is singular");

  const Eigen::Index q = p + p * p;
  Mat b_inv = Mat::Zero(q, q);
  b_inv.topLeftCorner(p, p) = sigma;
  b_inv.bottomRightCorner(p * p, p * p) = kron(sigma, sigma);
  const Mat h = constraint_jacobian(est);

  AsymptoticCovariance out;
  out.r_block = -lu.inverse();
  out.q_block = -b_inv * h * out.r_block;
  out.p_block = b_inv * (Mat::Identity(q, q) - h * out.q_block.transpose());
  return out;
}

SolverReport as_mle(const Dataset& data, const SolverConfig& config) {
  config.validate();
  detail::require_sample(data, "as_mle");
  const SufficientStats stats = sufficient_stats(data);
  const Eigen::Index p = data.p();
  const Eigen::Index q = p + p * p;
  const double n = static_cast<double>(data.n());

  SolverReport report;
  report.method = "AS";
  report.block_names = {"theta", "alpha2"};
  report.block_converged.assign(2, false);
  report.status = SolverStatus::kMaxIterations;

  const EstimatePair start{stats.mean, stats.scatter};
  if (!is_positive_definite(start.cov)) throw DomainError("as_mle: sample covariance is not positive definite");
  const Vec theta0 = pack_theta(start);
  const double radius = theta0.norm();

  Eigen::PartialPivLU<Mat> lu = factor_coefficients(start);
  Vec theta = theta0;
  Vec a = Vec::Zero(p);  // alpha2 / n

  try {
    for (int j = 0; j < config.max_iter; ++j) {
      const EstimatePair cur = unpack_theta(theta, p);
      if (config.as_refresh_every > 0 && j > 0 && j % config.as_refresh_every == 0) lu = factor_coefficients(cur);

      const Score g = score(cur, stats);
      const Mat h_jac = constraint_jacobian(cur);
      Vec rhs(q + p);
      rhs.head(p) = g.d_mean / n;
      rhs.segment(p, p * p) = vec(g.d_cov) / n;
      rhs.head(q) += h_jac * a;
      rhs.tail(p) = cur.cov * cur.mean - cur.mean;

      const Vec step = lu.solve(rhs);
      if (!step.allFinite()) throw detail::IterationFailure{SolverStatus::kNonFinite, "as_mle: non-finite step"};

      EstimatePair next = unpack_theta(theta + step.head(q), p);
      next.cov = symmetrize(next.cov);
      Vec next_theta = pack_theta(next);
      if ((next_theta - theta0).norm() > radius) next_theta = project_to_ball(theta0, radius, next_theta);
      const Vec next_a = a + step.tail(p);

      const double change = (next_theta - theta).norm();
      const double a_change = (next_a - a).norm();
      const double ref = theta.norm();
      const double a_ref = a.norm();
      theta = next_theta;
      a = next_a;
      report.iterations_used = j + 1;
      if (config.record_trace) {
        const EstimatePair now = unpack_theta(theta, p);
        report.trace.push_back({j + 1, {change, a_change}, (now.cov * now.mean - now.mean).norm()});
      }
      report.block_converged[0] = detail::small_change(change, ref, config.tol);
      report.block_converged[1] = detail::small_change(a_change, a_ref, config.tol);
      if (report.block_converged[0]) {
        report.status = SolverStatus::kConverged;
        break;
      }
    }
  } catch (const detail::IterationFailure& f) {
    report.status = f.status;
    report.message = f.message;
  } catch (const NumericError& e) {
    report.status = SolverStatus::kSingularStep;
    report.message = e.what();
  }

  report.estimate = unpack_theta(theta, p);
  report.multipliers.alpha1 = 0.0;
  report.multipliers.alpha2 = n * a;
  detail::finalize(report);
  return report;
}

}  // namespace cmle
