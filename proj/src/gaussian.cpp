#include "cmle/gaussian.hpp"

#include <cmath>
#include <sstream>

#include "cmle/errors.hpp"

namespace cmle {

namespace {

// Inverse of a covariance argument. With require_pd anything that is not
// numerically PD is rejected; otherwise only singular matrices are. Failures
// report the extreme eigenvalues of the symmetric part.
Mat covariance_inverse(const Mat& sigma, const char* what, bool require_pd) {
  if (sigma.rows() != sigma.cols()) throw DimensionError(std::string(what) + ": covariance is not square");
  auto fail = [&](const char* reason) {
    std::ostringstream os;
    os << what << ": covariance is " << reason;
    if (sigma.allFinite()) {
      Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(sigma), Eigen::EigenvaluesOnly);
      const Vec& ev = es.eigenvalues();
      os << " (eigenvalue range [" << ev(0) << ", " << ev(ev.size() - 1) << "]";
      if (ev(0) > 0.0) os << ", condition " << ev(ev.size() - 1) / ev(0);
      os << ")";
    }
    throw NumericError(os.str());
  };
  if (!sigma.allFinite()) fail("non-finite");
  const Eigen::Index p = sigma.rows();
  if (require_pd) {
    Eigen::LLT<Mat> llt(symmetrize(sigma));
    if (llt.info() != Eigen::Success) fail("singular or not positive definite");
    return llt.solve(Mat::Identity(p, p));
  }
  Eigen::PartialPivLU<Mat> lu(sigma);
  if (!(lu.rcond() > 1e-14)) fail("singular");
  return lu.inverse();
}

void require_match(const EstimatePair& est, Eigen::Index p, const char* what) {
  if (est.mean.size() != p || est.cov.rows() != p || est.cov.cols() != p) {
    std::ostringstream os;
    os << what << ": estimate dimension does not match data dimension " << p;
    throw DimensionError(os.str());
  }
}

}  // namespace

Dataset::Dataset(Mat rows) : rows_(std::move(rows)) {
  if (!rows_.allFinite()) throw DomainError("Dataset: non-finite observation");
}

Mat SufficientStats::a_matrix(const Vec& mu) const {
  const Vec d = mean - mu;
  return static_cast<double>(n) * (scatter + d * d.transpose());
}

SufficientStats sufficient_stats(const Dataset& data) {
  if (data.n() < 2) throw DomainError("sufficient_stats: need at least two observations");
  SufficientStats s;
  s.n = data.n();
  s.mean = data.rows().colwise().mean().transpose();
  const Mat centered = data.rows().rowwise() - s.mean.transpose();
  s.scatter = symmetrize(centered.transpose() * centered / static_cast<double>(s.n));
  return s;
}

double log_likelihood(const EstimatePair& est, const SufficientStats& stats) {
  require_match(est, stats.mean.size(), "log_likelihood");
  const Mat inv = covariance_inverse(est.cov, "log_likelihood", true);
  const double log_det = log_abs_determinant(est.cov).first;
  const double n = static_cast<double>(stats.n);
  return -0.5 * n * log_det - 0.5 * (stats.a_matrix(est.mean).cwiseProduct(inv)).sum();
}

double log_likelihood(const EstimatePair& est, const Dataset& data) {
  return log_likelihood(est, sufficient_stats(data));
}

Score score(const EstimatePair& est, const SufficientStats& stats) {
  require_match(est, stats.mean.size(), "score");
  const Mat inv = covariance_inverse(est.cov, "score", false);
  const double n = static_cast<double>(stats.n);
  Score g;
  g.d_mean = n * inv * (stats.mean - est.mean);
  g.d_cov = -0.5 * (n * inv - inv * stats.a_matrix(est.mean) * inv);
  return g;
}

Score score(const EstimatePair& est, const Dataset& data) { return score(est, sufficient_stats(data)); }

Mat HessianBlocks::assemble() const {
  const Eigen::Index p = mean_mean.rows();
  const Eigen::Index q = cov_cov.rows();
  Mat h(p + q, p + q);
  h.topLeftCorner(p, p) = mean_mean;
  h.topRightCorner(p, q) = mean_cov;
  h.bottomLeftCorner(q, p) = cov_mean;
  h.bottomRightCorner(q, q) = cov_cov;
  return h;
}

HessianBlocks hessian_blocks(const EstimatePair& est, const SufficientStats& stats) {
  const Eigen::Index p = stats.mean.size();
  require_match(est, p, "hessian_blocks");
  const Mat inv = covariance_inverse(est.cov, "hessian_blocks", false);
  const double n = static_cast<double>(stats.n);
  const Vec w = inv * (stats.mean - est.mean);
  const Mat wc = w;  // p x 1
  const Mat inner = inv * stats.a_matrix(est.mean) * inv;

  HessianBlocks h;
  h.mean_mean = -n * inv;
  h.cov_mean = -0.5 * n * (kron(inv, wc) + kron(wc, inv));
  h.mean_cov = h.cov_mean.transpose();
  h.cov_cov = (0.5 * n * kron(inv, inv) - 0.5 * (kron(inner, inv) + kron(inv, inner))) * commutation_matrix(p);
  return h;
}

HessianBlocks hessian_blocks(const EstimatePair& est, const Dataset& data) {
  return hessian_blocks(est, sufficient_stats(data));
}

ConstraintResiduals constraint_residuals(const EstimatePair& est) {
  const Eigen::Index p = est.p();
  if (est.cov.rows() != p || est.cov.cols() != p) throw DimensionError("constraint_residuals: shape mismatch");
  ConstraintResiduals r;
  r.h = est.cov * est.mean - est.mean;
  r.det_gap = std::abs(est.cov.determinant() - 1.0);
  return r;
}

Mat constraint_jacobian(const EstimatePair& est) {
  const Eigen::Index p = est.p();
  if (est.cov.rows() != p || est.cov.cols() != p) throw DimensionError("constraint_jacobian: shape mismatch");
  Mat j(p + p * p, p);
  j.topRows(p) = est.cov - Mat::Identity(p, p);
  j.bottomRows(p * p) = kron(Mat(est.mean), Mat::Identity(p, p));
  return j;
}

Vec canonical_statistic(const SufficientStats& stats) {
  const Eigen::Index p = stats.mean.size();
  Vec t(p + p * p);
  t.head(p) = stats.mean;
  t.tail(p * p) = vec(stats.scatter + stats.mean * stats.mean.transpose());
  return t;
}

Vec canonical_statistic(const Dataset& data) {
  const Eigen::Index p = data.p();
  Vec t(p + p * p);
  const double n = static_cast<double>(data.n());
  t.head(p) = data.rows().colwise().mean().transpose();
  t.tail(p * p) = vec(data.rows().transpose() * data.rows() / n);
  return t;
}

Vec mean_parameter(const EstimatePair& est) {
  const Eigen::Index p = est.p();
  Vec m(p + p * p);
  m.head(p) = est.mean;
  m.tail(p * p) = vec(est.cov + est.mean * est.mean.transpose());
  return m;
}

EstimatePair unpack_mean_parameter(const Vec& m, Eigen::Index p) {
  if (m.size() != p + p * p) throw DimensionError("unpack_mean_parameter: length is not p + p^2");
  EstimatePair est;
  est.mean = m.head(p);
  est.cov = unvec(m.tail(p * p), p) - est.mean * est.mean.transpose();
  return est;
}

Mat canonical_covariance(const EstimatePair& est, Eigen::Index n) {
  const Eigen::Index p = est.p();
  if (n <= 0) throw DomainError("canonical_covariance: n must be positive");
  const double inv_n = 1.0 / static_cast<double>(n);
  const Mat& sigma = est.cov;
  const Mat mu = est.mean;  // p x 1
  const Mat mm = est.mean * est.mean.transpose();
  const Eigen::Index q = p * p;

  Mat v(p + q, p + q);
  v.topLeftCorner(p, p) = inv_n * sigma;
  // Cov(vec(x x'), x) = Sigma (x) mu + mu (x) Sigma.
  v.bottomLeftCorner(q, p) = inv_n * (kron(sigma, mu) + kron(mu, sigma));
  v.topRightCorner(p, q) = v.bottomLeftCorner(q, p).transpose();
  const Mat core = kron(sigma, sigma) + kron(sigma, mm) + kron(mm, sigma);
  // K core permutes rows: row i + j p of K core is row j + i p of core.
  Mat kcore(q, q);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < p; ++i) kcore.row(i + j * p) = core.row(j + i * p);
  v.bottomRightCorner(q, q) = inv_n * (core + kcore);
  return v;
}

double scalar_constraint(const Vec& m, Eigen::Index p) {
  if (m.size() != p + p * p) throw DimensionError("scalar_constraint: length is not p + p^2");
  const auto m1 = m.head(p);
  double h = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < p; ++i) {
      const double delta = i == j ? 1.0 : 0.0;
      h += (m(p + i + j * p) - m1(i) * m1(j) - delta) * m1(i);
    }
  }
  return h;
}

Vec scalar_constraint_gradient(const Vec& m, Eigen::Index p) {
  if (m.size() != p + p * p) throw DimensionError("scalar_constraint_gradient: length is not p + p^2");
  const Vec m1 = m.head(p);
  const double sum1 = m1.sum();
  const double sq1 = m1.squaredNorm();
  const Mat m2 = unvec(m.tail(p * p), p);
  Vec g(p + p * p);
  // d h / d m_1 = (1 (x) I)'(m_2 - vec I) - (1 (x) I)'(m_1 (x) m_1) - (m_1 (x) I + I (x) m_1)'(1 (x) m_1)
  g.head(p) = m2.rowwise().sum() - Vec::Ones(p) - 2.0 * sum1 * m1 - Vec::Constant(p, sq1);
  // d h / d m_2 = 1 (x) m_1
  for (Eigen::Index j = 0; j < p; ++j) g.segment(p + j * p, p) = m1;
  return g;
}

NaturalParamMaps natural_param_maps(const EstimatePair& est, const Dataset& data) {
  const Eigen::Index p = data.p();
  require_match(est, p, "natural_param_maps");
  NaturalParamMaps out;
  out.state.t = canonical_statistic(data);
  out.state.m = mean_parameter(est);
  out.state.v = canonical_covariance(est, data.n());
  out.h_m = scalar_constraint(out.state.m, p);
  out.grad_h_m = scalar_constraint_gradient(out.state.m, p);
  out.grad_h_t = scalar_constraint_gradient(out.state.t, p);
  return out;
}

}  // namespace cmle
