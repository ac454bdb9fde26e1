#pragma once

#include "cmle/linalg.hpp"

namespace cmle {

/// n x p matrix of observations, one row per observation. Immutable.
class Dataset {
 public:
  explicit Dataset(Mat rows);

  Eigen::Index n() const { return rows_.rows(); }
  Eigen::Index p() const { return rows_.cols(); }
  const Mat& rows() const { return rows_; }

 private:
  Mat rows_;
};

/// Sample mean and scatter S with divisor n, so that A(xbar) = nS.
struct SufficientStats {
  Vec mean;
  Mat scatter;
  Eigen::Index n = 0;

  /// A(mu) = sum_i (x_i - mu)(x_i - mu)' = nS + n (xbar - mu)(xbar - mu)'.
  Mat a_matrix(const Vec& mu) const;
};

/// Mean vector and covariance matrix. Positive definiteness is tracked by
/// callers, never assumed.
struct EstimatePair {
  Vec mean;
  Mat cov;

  Eigen::Index p() const { return mean.size(); }
};

SufficientStats sufficient_stats(const Dataset& data);

/// -(n/2) log|Sigma| - (1/2) sum_i (x_i - mu)' Sigma^{-1} (x_i - mu), constants dropped.
double log_likelihood(const EstimatePair& est, const Dataset& data);
double log_likelihood(const EstimatePair& est, const SufficientStats& stats);

/// Gradients of the log-likelihood. d_cov treats Sigma as an unconstrained
/// p x p matrix: -(1/2)(n Sigma^{-1} - Sigma^{-1} A(mu) Sigma^{-1}).
struct Score {
  Vec d_mean;
  Mat d_cov;
};

Score score(const EstimatePair& est, const Dataset& data);
Score score(const EstimatePair& est, const SufficientStats& stats);

/// Blocks of the (p + p^2) x (p + p^2) Hessian with respect to (mu, vec Sigma),
/// vec column-stacking and Sigma a full matrix variable.
struct HessianBlocks {
  Mat mean_mean;  ///< p x p
  Mat mean_cov;   ///< p x p^2, d/d vec(Sigma) of d l/d mu
  Mat cov_mean;   ///< p^2 x p, d/d mu of vec(d l/d Sigma)
  Mat cov_cov;    ///< p^2 x p^2

  Mat assemble() const;
};

HessianBlocks hessian_blocks(const EstimatePair& est, const Dataset& data);
HessianBlocks hessian_blocks(const EstimatePair& est, const SufficientStats& stats);

/// h = Sigma mu - mu and det_gap = ||Sigma| - 1|.
struct ConstraintResiduals {
  Vec h;
  double det_gap = 0.0;

  double h_norm() const { return h.norm(); }
};

ConstraintResiduals constraint_residuals(const EstimatePair& est);

/// (p + p^2) x p Jacobian of Sigma mu - mu, stacked as [Sigma - I; mu (x) I].
Mat constraint_jacobian(const EstimatePair& est);

/// Canonical statistic T, its expectation m and covariance V.
struct NaturalParamState {
  Vec t;
  Vec m;
  Mat v;
};

/// T = (xbar, vec((1/n) sum_i x_i x_i')).
Vec canonical_statistic(const Dataset& data);
Vec canonical_statistic(const SufficientStats& stats);

/// m = (mu, vec(Sigma + mu mu')).
Vec mean_parameter(const EstimatePair& est);

/// Inverse of mean_parameter: mu = m_1, Sigma = unvec(m_2) - m_1 m_1'.
EstimatePair unpack_mean_parameter(const Vec& m, Eigen::Index p);

/// Covariance of T for a sample of size n drawn from N(mu, Sigma).
Mat canonical_covariance(const EstimatePair& est, Eigen::Index n);

/// Scalar form of Sigma mu = mu over the mean parameter:
/// h(m) = [m_2 - m_1 (x) m_1 - vec(I)]' (1 (x) m_1).
double scalar_constraint(const Vec& m, Eigen::Index p);
Vec scalar_constraint_gradient(const Vec& m, Eigen::Index p);

struct NaturalParamMaps {
  NaturalParamState state;
  double h_m = 0.0;
  Vec grad_h_m;
  Vec grad_h_t;
};

NaturalParamMaps natural_param_maps(const EstimatePair& est, const Dataset& data);

}  // namespace cmle
