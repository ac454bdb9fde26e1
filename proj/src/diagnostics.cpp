#include "cmle/diagnostics.hpp"

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "cmle/errors.hpp"
#include "cmle/random.hpp"

namespace cmle {

namespace {

constexpr double kRegionFloor = 1e-12;

void require_pair(const Mat& sigma, const Mat& scatter, const char* what) {
  if (sigma.rows() != sigma.cols() || scatter.rows() != scatter.cols() || sigma.rows() != scatter.rows())
    throw DimensionError(std::string(what) + ": Sigma and S must be square of equal size");
}

}  // namespace

bool in_delta_region(const Mat& sigma, const Mat& scatter) {
  require_pair(sigma, scatter, "in_delta_region");
  if (sigma.size() == 0) return false;
  return min_eigenvalue(sigma) > kRegionFloor && min_eigenvalue(2.0 * scatter - sigma) > kRegionFloor;
}

double directional_curvature(const CurvatureQuery& q) {
  require_pair(q.sigma, q.scatter, "directional_curvature");
  const Eigen::Index p = q.sigma.rows();
  if (q.direction.rows() != p || q.direction.cols() != p) throw DimensionError("directional_curvature: D has wrong shape");
  if (q.mean_gap.size() != 0 && (q.mean_gap.rows() != p || q.mean_gap.cols() != p))
    throw DimensionError("directional_curvature: B has wrong shape");
  if (q.n <= 0) throw DomainError("directional_curvature: n must be positive");
  if (symmetry_gap(q.direction) > 1e-10 * std::max(1.0, q.direction.cwiseAbs().maxCoeff()))
    throw ContractError("directional_curvature: direction is not symmetric");

  Eigen::LLT<Mat> llt(q.sigma);
  if (llt.info() != Eigen::Success) throw NumericError("directional_curvature: Sigma is not positive definite");
  const Mat inv = llt.solve(Mat::Identity(p, p));
  Mat weight = 2.0 * q.scatter - q.sigma;
  if (q.mean_gap.size() != 0) weight += 2.0 * q.mean_gap;
  const Mat m = inv * q.direction * inv;
  return -0.5 * static_cast<double>(q.n) * (weight * m * q.direction * inv).trace();
}

Mat counterexample_direction(const Mat& sigma, const Mat& scatter) {
  require_pair(sigma, scatter, "counterexample_direction");
  const SpectralDecomposition sd = spectral_decompose(symmetrize(2.0 * scatter - sigma));
  const Eigen::Index last = sd.eigenvalues.size() - 1;
  if (in_delta_region(sigma, scatter))
    throw ContractError("counterexample_direction: Sigma lies inside the concavity region, no counterexample exists");
  const Vec u = sd.eigenvectors.col(last);
  const Vec su = sigma * u;
  return su * su.transpose();
}

CoverageEstimate wishart_coverage(Eigen::Index n, Eigen::Index p, std::int64_t reps, std::uint64_t seed, int workers) {
  if (p < 1 || n <= p) throw DomainError("wishart_coverage: need n > p >= 1");
  if (reps < 1) throw DomainError("wishart_coverage: reps must be positive");
  const double threshold = 0.5 * static_cast<double>(n);

  std::vector<char> hit(static_cast<std::size_t>(reps), 0);
  std::atomic<std::int64_t> next{0};
  auto work = [&] {
    for (std::int64_t r = next++; r < reps; r = next++) {
      Rng rng(derive_seed({seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(r)}));
      const Mat g = standard_normal_matrix(rng, n - 1, p);
      const Mat w = g.transpose() * g;
      hit[static_cast<std::size_t>(r)] = min_eigenvalue(w) > threshold ? 1 : 0;
    }
  };
  const int count = std::max(1, workers);
  if (count == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < count; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  CoverageEstimate out;
  out.reps = reps;
  for (char h : hit) out.hits += h;
  out.estimate = static_cast<double>(out.hits) / static_cast<double>(reps);
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(reps));
  return out;
}

}  // namespace cmle
