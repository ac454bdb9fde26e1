#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cmle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Eigenvalues in descending order with the matching orthonormal eigenvectors
/// stored column by column.
struct SpectralDecomposition {
  Vec eigenvalues;
  Mat eigenvectors;

  Mat reconstruct() const;
};

/// Pair (a, b) defining the symmetric rank-two matrix ab' + ba'.
struct RankTwoPair {
  Vec a;
  Vec b;
};

/// Returns (M + M')/2 with the upper triangle copied from the lower one, so the
/// result is bitwise symmetric.
Mat symmetrize(const Mat& m);

/// Largest absolute entry of M - M'.
double symmetry_gap(const Mat& m);

/// Symmetric eigendecomposition, eigenvalues descending. Each eigenvector is
/// signed so that its largest-magnitude entry is positive (first such entry on
/// ties). Throws ContractError when S is not symmetric within 1e-10 (relative to
/// max(1, max|S_ij|)).
SpectralDecomposition spectral_decompose(const Mat& s);

/// Non-zero eigenvalues a'b +/- |a||b| of ab' + ba', larger one first.
std::pair<double, double> rank_two_eigenvalues(const RankTwoPair& pair);

/// Restores positive definiteness of a symmetric matrix whose only
/// non-positive eigenvalue is the smallest one: that eigenvalue is replaced by
/// the reciprocal of the product of the others. PD inputs are returned as is.
/// Two or more non-positive eigenvalues raise ContractError.
Mat repair_positive_definite(const Mat& m);

/// Orthonormal basis of R^p whose first column is first/|first|. The remaining
/// vectors are orthogonalized in the given order (classical Gram-Schmidt with
/// one reorthogonalization pass). A vector whose residual falls below 1e-10 of
/// its own norm is dropped; missing directions are filled from e_1, e_2, ...
///
/// If sources is given it receives, per output column, the index into rest the
/// column came from; the first column and unit-axis fills are marked -1.
Mat gram_schmidt_from(const Vec& first, std::span<const Vec> rest, std::vector<Eigen::Index>* sources = nullptr);

bool is_positive_definite(const Mat& m);
double min_eigenvalue(const Mat& m);

/// Column-stacking vec and its inverse.
Vec vec(const Mat& m);
Mat unvec(const Vec& v, Eigen::Index rows);

Mat kron(const Mat& a, const Mat& b);

/// Permutation K with K vec(A) = vec(A') for p x p matrices.
Mat commutation_matrix(Eigen::Index p);

/// log|det M| and sign of det M from a partial-pivot LU factorization.
std::pair<double, int> log_abs_determinant(const Mat& m);

}  // namespace cmle
