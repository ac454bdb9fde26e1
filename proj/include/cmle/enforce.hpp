#pragma once

#include <string>
#include <vector>

#include "cmle/gaussian.hpp"

namespace cmle {

enum class BasisStrategy { kGap, kKMeans2 };

enum class Modifier { kNone, kM1, kM2, kM3Gap, kM3KMeans };

std::string to_string(Modifier m);
/// Accepts none, M1, M2, M3-gap, M3-kmeans (case-insensitive). Throws DomainError otherwise.
Modifier parse_modifier(const std::string& tag);

/// Output of a modifier. The covariance satisfies Sigma* mu* = mu* and
/// |Sigma*| = 1 up to rounding.
struct ModifiedEstimate {
  EstimatePair estimate;
  Modifier method = Modifier::kNone;
  /// M2: {i0}; M3: the selected index set, ascending; M1: empty. Zero-based.
  std::vector<Eigen::Index> selected_indices;
  ConstraintResiduals residuals;
  double lambda_pr = 1.0;

  /// Orthonormal basis used to assemble Sigma*: column 0 is the unit mean
  /// direction, column k carries eigenvalue weights(k-1) before normalization.
  Mat basis;
  Vec weights;
  /// M2 only: (1 - lambda_i / c_i^2)^2 per eigenvector, +inf where c_i = 0.
  Vec criterion;
  /// M3 only: b_k' Sigma~ b_k for the re-aligned vectors b_1..b_{j0-1}.
  Vec lambda_hat;
};

/// Keeps the mean and rotates the eigenvectors so the mean direction becomes
/// a unit-eigenvalue eigenvector. The smallest eigenvalue is discarded.
ModifiedEstimate modify_m1(const EstimatePair& pre);

/// Moves the mean onto the single eigenvector whose eigenvalue best matches
/// the squared coefficient of the mean along it.
ModifiedEstimate modify_m2(const EstimatePair& pre);

/// Indices (ascending, zero-based) of the high-magnitude group of |c|.
std::vector<Eigen::Index> select_basis(const Vec& coeffs, BasisStrategy strategy);

/// Projects the mean onto the selected eigenvectors, re-orthogonalizes them
/// around the projection and re-estimates their eigenvalues from Sigma~.
ModifiedEstimate modify_m3(const EstimatePair& pre, BasisStrategy strategy);

/// Dispatch on tag. kNone returns the input with residuals filled in.
ModifiedEstimate apply_modifier(const EstimatePair& pre, Modifier m);

}  // namespace cmle
