#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "cmle/enforce.hpp"
#include "cmle/errors.hpp"
#include "support/oracles.hpp"

using namespace cmle;

namespace {

Mat diag(std::initializer_list<double> d) {
  Vec v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

void check_constraints(const ModifiedEstimate& m) {
  const Vec& mu = m.estimate.mean;
  const Mat& s = m.estimate.cov;
  CHECK((s * mu - mu).norm() <= 1e-8 * std::max(1.0, mu.norm()));
  CHECK(std::abs(oracle::determinant(s) - 1.0) <= 1e-8);
  CHECK(oracle::eigenvalues(s)(s.rows() - 1) > 0.0);
  CHECK((s - s.transpose()).norm() == 0.0);
}

/// Random PD covariance with a spread-out spectrum and a random mean.
EstimatePair random_pair(oracle::Gen& g, Eigen::Index p) {
  const Mat q = g.orthogonal(p);
  Vec ev(p);
  for (Eigen::Index i = 0; i < p; ++i) ev(i) = std::exp(g.uniform(-2.0, 2.0));
  return {g.vec(p) * g.uniform(0.2, 3.0), q * ev.asDiagonal() * q.transpose()};
}

}  // namespace

TEST_CASE("modifier tags round-trip") {
  for (Modifier m : {Modifier::kNone, Modifier::kM1, Modifier::kM2, Modifier::kM3Gap, Modifier::kM3KMeans})
    CHECK(parse_modifier(to_string(m)) == m);
  CHECK(parse_modifier("m3-KMEANS") == Modifier::kM3KMeans);
  CHECK_THROWS_AS(parse_modifier("M4"), DomainError);
}

TEST_CASE("modify_m1 examples") {
  const ModifiedEstimate id = modify_m1({Vec::Unit(3, 0), Mat::Identity(3, 3)});
  CHECK((id.estimate.cov - Mat::Identity(3, 3)).norm() <= 1e-12);
  CHECK(id.lambda_pr == doctest::Approx(1.0));

  const ModifiedEstimate m = modify_m1({Vec::Unit(2, 1) * 3.0, diag({4, 1})});
  CHECK((m.estimate.cov - Mat::Identity(2, 2)).norm() <= 1e-12);
  CHECK(m.lambda_pr == doctest::Approx(4.0));
  CHECK((m.estimate.mean - Vec::Unit(2, 1) * 3.0).norm() == 0.0);
  check_constraints(m);

  CHECK_THROWS_AS(modify_m1({Vec::Zero(2), diag({4, 1})}), DomainError);
  CHECK_THROWS_AS(modify_m1({Vec::Ones(2), diag({4, -1})}), DomainError);
}

TEST_CASE("modify_m2 examples") {
  Vec mu(2);
  mu << 1, 2;
  const ModifiedEstimate m = modify_m2({mu, diag({4, 1})});
  REQUIRE(m.selected_indices.size() == 1);
  CHECK(m.selected_indices[0] == 1);
  CHECK(m.criterion(0) == doctest::Approx(9.0));
  CHECK(m.criterion(1) == doctest::Approx(0.5625));
  CHECK((m.estimate.mean - Vec::Unit(2, 1) * 2.0).norm() <= 1e-12);
  check_constraints(m);

  // Mean already an eigenvector whose eigenvalue is its squared norm.
  Vec e(3);
  e << 0, 0, 1.5;
  const ModifiedEstimate f = modify_m2({e, diag({3, 0.5, 2.25})});
  CHECK(f.selected_indices[0] == 1);  // eigenvalue 2.25 sits second in descending order
  CHECK(f.criterion(1) == doctest::Approx(0.0));
  CHECK((f.estimate.mean - e).norm() <= 1e-12);
  CHECK(std::isinf(f.criterion(0)));

  CHECK_THROWS_AS(modify_m2({Vec::Zero(2), diag({4, 1})}), DomainError);
}

TEST_CASE("select_basis examples") {
  Vec c(4);
  c << 10, 9, 0.1, 0.05;
  const std::vector<Eigen::Index> want{0, 1};
  CHECK(select_basis(c, BasisStrategy::kGap) == want);
  CHECK(select_basis(c, BasisStrategy::kKMeans2) == want);

  const std::vector<Eigen::Index> all{0, 1, 2};
  CHECK(select_basis(Vec::Constant(3, 5.0), BasisStrategy::kGap) == all);
  CHECK(select_basis(Vec::Constant(3, -5.0), BasisStrategy::kKMeans2) == all);

  Vec signs(3);
  signs << -0.1, 4.0, -3.9;
  const std::vector<Eigen::Index> big{1, 2};
  CHECK(select_basis(signs, BasisStrategy::kKMeans2) == big);

  CHECK_THROWS_AS(select_basis(Vec::Zero(3), BasisStrategy::kGap), DomainError);
}

TEST_CASE("kmeans basis selection matches exhaustive search") {
  oracle::Gen g(50);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index p = g.integer(2, 12);
    Vec c(p);
    for (Eigen::Index i = 0; i < p; ++i) c(i) = (g.uniform(0, 1) < 0.4 ? g.uniform(5, 8) : g.uniform(0, 1)) * (g.uniform(0, 1) < 0.5 ? -1 : 1);
    if (c.cwiseAbs().maxCoeff() - c.cwiseAbs().minCoeff() < 1e-9) continue;
    CHECK(select_basis(c, BasisStrategy::kKMeans2) == oracle::brute_force_two_means(c));
    const auto gap = select_basis(c, BasisStrategy::kGap);
    CHECK(!gap.empty());
    CHECK(static_cast<Eigen::Index>(gap.size()) < p);
  }
}

TEST_CASE("modify_m3 examples") {
  // Fixed point: unit-norm eigenvector mean with Sigma already constrained.
  const Mat s = diag({2.0, 1.0, 0.5});
  const Vec mu = Vec::Unit(3, 1);
  for (BasisStrategy st : {BasisStrategy::kGap, BasisStrategy::kKMeans2}) {
    const ModifiedEstimate m = modify_m3({mu, s}, st);
    CHECK((m.estimate.mean - mu).norm() <= 1e-8);
    CHECK((m.estimate.cov - s).norm() <= 1e-8);
  }

  Vec mu2(3);
  mu2 << 1, 1, 0;
  mu2 /= std::sqrt(2.0);
  const ModifiedEstimate h = modify_m3({mu2, s}, BasisStrategy::kKMeans2);
  const std::vector<Eigen::Index> want{0, 1};
  CHECK(h.selected_indices == want);
  CHECK((h.estimate.mean - mu2).norm() <= 1e-12);
  REQUIRE(h.lambda_hat.size() == 1);
  CHECK(h.lambda_hat(0) == doctest::Approx(1.5));
  Vec b1(3);
  b1 << 1, -1, 0;
  b1 /= std::sqrt(2.0);
  CHECK(std::abs(h.basis.col(1).dot(b1)) == doctest::Approx(1.0));
  check_constraints(h);

  CHECK_THROWS_AS(modify_m3({Vec::Zero(3), s}, BasisStrategy::kGap), DomainError);
}

TEST_CASE("modifiers satisfy both constraints exactly") {
  oracle::Gen g(51);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index p = g.integer(2, 30);
    const EstimatePair pre = random_pair(g, p);
    for (Modifier mod : {Modifier::kM1, Modifier::kM2, Modifier::kM3Gap, Modifier::kM3KMeans}) {
      const ModifiedEstimate m = apply_modifier(pre, mod);
      CHECK(m.method == mod);
      check_constraints(m);
      CHECK(m.residuals.h_norm() == constraint_residuals(m.estimate).h_norm());
      if (mod == Modifier::kM1) CHECK(m.estimate.mean == pre.mean);
    }
  }
}

TEST_CASE("M2 selects the global minimum of the criterion") {
  oracle::Gen g(52);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index p = g.integer(2, 10);
    const EstimatePair pre = random_pair(g, p);
    const ModifiedEstimate m = modify_m2(pre);
    const auto [vals, vecs] = oracle::jacobi_eigen(pre.cov);
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < p; ++i) {
      const double c = vecs.col(i).dot(pre.mean);
      const double r = 1.0 - vals(i) / (c * c);
      best = std::min(best, r * r);
    }
    CHECK(m.criterion(m.selected_indices[0]) == doctest::Approx(best).epsilon(1e-8));
  }
}

TEST_CASE("M2 error bound") {
  // Printed bound: |1 - 1/lambda_pr| |sum_{i != i0} lambda_i P_i P_i'| + |lambda_i0 / c^2 - 1| |mu* mu*'|.
  // It is the triangle inequality for the rank-one term mu* mu*'. The library
  // uses the unit projector instead, whose matching second term is |lambda_i0 - 1|.
  oracle::Gen g(53);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index p = g.integer(2, 10);
    const EstimatePair pre = random_pair(g, p);
    const ModifiedEstimate m = modify_m2(pre);
    const SpectralDecomposition sd = spectral_decompose(pre.cov);
    const Eigen::Index i0 = m.selected_indices[0];
    Mat others = Mat::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
      if (i != i0) others += sd.eigenvalues(i) * sd.eigenvectors.col(i) * sd.eigenvectors.col(i).transpose();
    const double c2 = m.estimate.mean.squaredNorm();
    const double first = std::abs(1.0 - 1.0 / m.lambda_pr) * others.norm();
    const Mat rank_one_form = others / m.lambda_pr + m.estimate.mean * m.estimate.mean.transpose();
    const double printed = first + std::abs(sd.eigenvalues(i0) / c2 - 1.0) * c2;
    CHECK((pre.cov - rank_one_form).norm() <= printed * (1.0 + 1e-10) + 1e-12);
    const double projector = first + std::abs(sd.eigenvalues(i0) - 1.0);
    CHECK((pre.cov - m.estimate.cov).norm() <= projector * (1.0 + 1e-10) + 1e-12);
  }
  // With the unit projector the printed bound can fail: it is zero here.
  const ModifiedEstimate m = modify_m2({Vec::Unit(2, 0) * 2.0, diag({4, 1})});
  CHECK((diag({4, 1}) - m.estimate.cov).norm() == doctest::Approx(3.0));
}

TEST_CASE("M3 eigenvalue estimates minimize the Frobenius objective") {
  oracle::Gen g(54);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index p = g.integer(3, 10);
    const EstimatePair pre = random_pair(g, p);
    for (BasisStrategy st : {BasisStrategy::kGap, BasisStrategy::kKMeans2}) {
      const ModifiedEstimate m = modify_m3(pre, st);
      // Un-normalized fit: u u' + sum_k w_k b_k b_k'.
      Vec w(p);
      w(0) = 1.0;
      w.tail(p - 1) = m.weights;
      for (Eigen::Index k = 1; k < p; ++k) {
        const Vec b = m.basis.col(k);
        const double rq = b.dot(pre.cov * b);
        if (std::abs(w(k) - rq) > 1e-12 * std::max(1.0, rq)) continue;  // not a re-estimated column
        auto objective = [&](double lambda) {
          Vec ww = w;
          ww(k) = lambda;
          const Mat fit = m.basis * ww.asDiagonal() * m.basis.transpose();
          return (pre.cov - fit).squaredNorm();
        };
        const double f0 = objective(w(k));
        CHECK(objective(w(k) * 1.01) > f0);
        CHECK(objective(w(k) * 0.99) > f0);
        ++checked;
      }
      for (Eigen::Index i = 0; i < m.lambda_hat.size(); ++i) CHECK(m.lambda_hat(i) > 0.0);
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("PD inputs stay PD and lambda_pr normalizes the determinant") {
  oracle::Gen g(55);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index p = g.integer(2, 8);
    const EstimatePair pre{g.vec(p), g.pd(p, 0.01)};
    for (Modifier mod : {Modifier::kM1, Modifier::kM2, Modifier::kM3Gap, Modifier::kM3KMeans}) {
      const ModifiedEstimate m = apply_modifier(pre, mod);
      double prod = 1.0;
      for (Eigen::Index i = 0; i < m.weights.size(); ++i) prod *= m.weights(i);
      CHECK(std::pow(prod, 1.0 / static_cast<double>(p - 1)) == doctest::Approx(m.lambda_pr).epsilon(1e-10));
      CHECK(oracle::eigenvalues(m.estimate.cov)(p - 1) > 0.0);
    }
  }
}

TEST_CASE("apply_modifier none reports residuals of the input") {
  Vec mu(2);
  mu << 1, 0;
  const ModifiedEstimate m = apply_modifier({mu, diag({2, 0.5})}, Modifier::kNone);
  CHECK(m.residuals.h(0) == doctest::Approx(1.0));
  CHECK(m.estimate.cov == diag({2, 0.5}));
}
