#pragma once

#include <cstdint>

#include "cmle/linalg.hpp"

namespace cmle {

/// Inputs of the second directional derivative of the Lagrangian in Sigma.
struct CurvatureQuery {
  Mat sigma;      ///< point of evaluation, PD
  Mat direction;  ///< symmetric D
  Mat scatter;    ///< S with divisor n
  Mat mean_gap;   ///< (xbar - mu)(xbar - mu)', zero when mu = xbar; empty means zero
  Eigen::Index n = 0;
};

/// True iff Sigma and 2S - Sigma both have all eigenvalues above 1e-12.
bool in_delta_region(const Mat& sigma, const Mat& scatter);

/// -(n/2) tr[{2(S + B) - Sigma} Sigma^-1 D Sigma^-1 D Sigma^-1]. The multiplier
/// term of the Lagrangian is linear in Sigma and contributes nothing.
double directional_curvature(const CurvatureQuery& q);

/// D = Sigma u u' Sigma with u the unit eigenvector of the most negative
/// eigenvalue of 2S - Sigma. Throws ContractError if Sigma is in the region.
Mat counterexample_direction(const Mat& sigma, const Mat& scatter);

struct CoverageEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t hits = 0;
  std::int64_t reps = 0;
};

/// Monte-Carlo estimate of P[lambda_min(W) > n/2] for W ~ Wishart(n-1, I_p),
/// drawn as G'G with G an (n-1) x p standard normal matrix. Replication r uses
/// a stream derived from (seed, n, p, r), so the result does not depend on the
/// number of workers.
CoverageEstimate wishart_coverage(Eigen::Index n, Eigen::Index p, std::int64_t reps, std::uint64_t seed,
                                  int workers = 1);

}  // namespace cmle
