#include "cmle/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "cmle/errors.hpp"

namespace cmle {

namespace {

void require_square(const Mat& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

constexpr double kDropTolerance = 1e-10;

}  // namespace

Mat SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

Mat symmetrize(const Mat& m) {
  require_square(m, "symmetrize");
  Mat out = 0.5 * (m + m.transpose());
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose().triangularView<Eigen::StrictlyUpper>();
  return out;
}

double symmetry_gap(const Mat& m) {
  require_square(m, "symmetry_gap");
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

SpectralDecomposition spectral_decompose(const Mat& s) {
  require_square(s, "spectral_decompose");
  const Eigen::Index p = s.rows();
  if (!s.allFinite()) throw NumericError("spectral_decompose: non-finite entries");
  const double scale = std::max(1.0, p > 0 ? s.cwiseAbs().maxCoeff() : 0.0);
  if (symmetry_gap(s) > 1e-10 * scale) {
    std::ostringstream os;
    os << "spectral_decompose: matrix is not symmetric (gap " << symmetry_gap(s) << ")";
    throw ContractError(os.str());
  }

  Eigen::SelfAdjointEigenSolver<Mat> solver(symmetrize(s));
  if (solver.info() != Eigen::Success) throw NumericError("spectral_decompose: eigensolver failed");

  // Eigen returns ascending order.
  SpectralDecomposition out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < p; ++i) {
      const double a = std::abs(out.eigenvectors(i, j));
      // Strict comparison with a small slack keeps the lowest index on ties.
      if (a > best * (1.0 + 1e-12)) {
        best = a;
        arg = i;
      }
    }
    if (out.eigenvectors(arg, j) < 0.0) out.eigenvectors.col(j) *= -1.0;
  }
  return out;
}

std::pair<double, double> rank_two_eigenvalues(const RankTwoPair& pair) {
  if (pair.a.size() != pair.b.size()) throw DimensionError("rank_two_eigenvalues: length mismatch");
  const double na = pair.a.norm();
  const double nb = pair.b.norm();
  if (na == 0.0 || nb == 0.0) throw DomainError("rank_two_eigenvalues: zero vector");
  const double ab = pair.a.dot(pair.b);
  return {ab + na * nb, ab - na * nb};
}

Mat repair_positive_definite(const Mat& m) {
  const SpectralDecomposition sd = spectral_decompose(m);
  const Eigen::Index p = sd.eigenvalues.size();
  if (p == 0 || sd.eigenvalues(p - 1) > 0.0) return m;
  if (p >= 2 && sd.eigenvalues(p - 2) <= 0.0) {
    std::ostringstream os;
    os << "repair_positive_definite: two or more non-positive eigenvalues ("
       << sd.eigenvalues(p - 2) << ", " << sd.eigenvalues(p - 1) << ")";
    throw ContractError(os.str());
  }
  double log_prod = 0.0;
  for (Eigen::Index j = 0; j + 1 < p; ++j) log_prod += std::log(sd.eigenvalues(j));
  Vec lambda = sd.eigenvalues;
  lambda(p - 1) = std::exp(-log_prod);
  return symmetrize(sd.eigenvectors * lambda.asDiagonal() * sd.eigenvectors.transpose());
}

Mat gram_schmidt_from(const Vec& first, std::span<const Vec> rest, std::vector<Eigen::Index>* sources) {
  const Eigen::Index p = first.size();
  const double first_norm = first.norm();
  if (p == 0 || first_norm == 0.0) throw DomainError("gram_schmidt_from: first vector is zero");

  Mat basis(p, p);
  basis.col(0) = first / first_norm;
  Eigen::Index filled = 1;

  if (sources) sources->assign(1, -1);

  auto try_append = [&](const Vec& v, Eigen::Index source) {
    if (filled == p) return;
    const double own = v.norm();
    if (own == 0.0) return;
    Vec r = v;
    for (int pass = 0; pass < 2; ++pass) {
      const auto q = basis.leftCols(filled);
      r -= q * (q.transpose() * r);
    }
    const double rn = r.norm();
    if (rn < kDropTolerance * own) return;
    basis.col(filled++) = r / rn;
    if (sources) sources->push_back(source);
  };

  for (std::size_t k = 0; k < rest.size(); ++k) {
    if (rest[k].size() != p) throw DimensionError("gram_schmidt_from: vector length mismatch");
    try_append(rest[k], static_cast<Eigen::Index>(k));
  }
  for (Eigen::Index i = 0; i < p && filled < p; ++i) try_append(Vec::Unit(p, i), -1);
  return basis;
}

double min_eigenvalue(const Mat& m) {
  require_square(m, "min_eigenvalue");
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> solver(symmetrize(m), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

bool is_positive_definite(const Mat& m) {
  if (m.rows() != m.cols() || !m.allFinite()) return false;
  return min_eigenvalue(m) > 0.0;
}

Vec vec(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

Mat unvec(const Vec& v, Eigen::Index rows) {
  if (rows <= 0 || v.size() % rows != 0) throw DimensionError("unvec: length is not a multiple of rows");
  return Eigen::Map<const Mat>(v.data(), rows, v.size() / rows);
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat commutation_matrix(Eigen::Index p) {
  Mat k = Mat::Zero(p * p, p * p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) k(i * p + j, j * p + i) = 1.0;
  return k;
}

std::pair<double, int> log_abs_determinant(const Mat& m) {
  require_square(m, "log_abs_determinant");
  Eigen::PartialPivLU<Mat> lu(m);
  const Mat& f = lu.matrixLU();
  double log_abs = 0.0;
  int sign = lu.permutationP().determinant();
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const double d = f(i, i);
    if (d == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
    if (d < 0.0) sign = -sign;
    log_abs += std::log(std::abs(d));
  }
  return {log_abs, sign};
}

}  // namespace cmle
