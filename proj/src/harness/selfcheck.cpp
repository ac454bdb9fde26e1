#include <cmath>
#include <sstream>

#include "cmle/harness.hpp"
#include "cmle/random.hpp"

namespace cmle {

namespace {

Mat random_pd(Rng& rng, Eigen::Index p) {
  const Mat g = standard_normal_matrix(rng, p, p);
  return g * g.transpose() + 0.5 * Mat::Identity(p, p);
}

CheckResult summarize(const std::string& name, int failures, int trials, double worst) {
  std::ostringstream os;
  os << failures << "/" << trials << " failures, worst " << worst;
  return {name, failures == 0, os.str()};
}

}  // namespace

std::vector<CheckResult> run_self_check(std::uint64_t seed, int trials) {
  std::vector<CheckResult> out;
  Rng rng(seed);
  std::uniform_int_distribution<int> dim(2, 10);

  {
    int fails = 0;
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      const Eigen::Index p = dim(rng);
      const EstimatePair pre{standard_normal_matrix(rng, p, 1).col(0), random_pd(rng, p)};
      for (Modifier m : {Modifier::kM1, Modifier::kM2, Modifier::kM3Gap, Modifier::kM3KMeans}) {
        const ModifiedEstimate me = apply_modifier(pre, m);
        const double r = std::max(me.residuals.h_norm() / std::max(1.0, me.estimate.mean.norm()), me.residuals.det_gap);
        worst = std::max(worst, r);
        if (!(r <= 1e-8) || !is_positive_definite(me.estimate.cov)) ++fails;
      }
    }
    out.push_back(summarize("modifier constraint exactness", fails, 4 * trials, worst));
  }
  {
    int fails = 0;
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      const Eigen::Index p = dim(rng);
      const RankTwoPair pr{standard_normal_matrix(rng, p, 1).col(0), standard_normal_matrix(rng, p, 1).col(0)};
      const auto [hi, lo] = rank_two_eigenvalues(pr);
      const SpectralDecomposition sd = spectral_decompose(symmetrize(pr.a * pr.b.transpose() + pr.b * pr.a.transpose()));
      const double err = std::max(std::abs(hi - sd.eigenvalues(0)), std::abs(lo - sd.eigenvalues(p - 1)));
      worst = std::max(worst, err);
      if (!(err <= 1e-10 * std::max(1.0, std::abs(hi)))) ++fails;
    }
    out.push_back(summarize("rank-two eigenvalues", fails, trials, worst));
  }
  {
    int fails = 0;
    for (int t = 0; t < trials; ++t) {
      const Eigen::Index p = dim(rng);
      const Vec a = 3.0 * standard_normal_matrix(rng, p, 1).col(0);
      const Vec b = 3.0 * standard_normal_matrix(rng, p, 1).col(0);
      const Mat m = symmetrize(random_pd(rng, p) + a * b.transpose() + b * a.transpose());
      if (!is_positive_definite(repair_positive_definite(m))) ++fails;
    }
    out.push_back(summarize("positive-definite repair", fails, trials, 0.0));
  }
  {
    int fails = 0;
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      const Eigen::Index p = std::min<Eigen::Index>(dim(rng), 5);
      const Dataset data(standard_normal_matrix(rng, 3 * p, p));
      const EstimatePair est{standard_normal_matrix(rng, p, 1).col(0), random_pd(rng, p)};
      const Score s = score(est, data);
      const double h = 1e-5;
      for (Eigen::Index i = 0; i < p; ++i) {
        EstimatePair up = est, dn = est;
        up.mean(i) += h;
        dn.mean(i) -= h;
        const double fd = (log_likelihood(up, data) - log_likelihood(dn, data)) / (2 * h);
        const double err = std::abs(fd - s.d_mean(i)) / std::max(1.0, std::abs(fd));
        worst = std::max(worst, err);
        if (!(err <= 1e-5)) ++fails;
      }
    }
    out.push_back(summarize("mean score against finite differences", fails, trials, worst));
  }
  return out;
}

}  // namespace cmle
