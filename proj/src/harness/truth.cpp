#include <algorithm>
#include <cctype>
#include <cmath>

#include "cmle/errors.hpp"
#include "cmle/harness.hpp"
#include "cmle/random.hpp"

namespace cmle {

std::string to_string(Method m) {
  switch (m) {
    case Method::kSMLE: return "SMLE";
    case Method::kSC: return "SC";
    case Method::kAS: return "AS";
  }
  return "unknown";
}

Method parse_method(const std::string& tag) {
  std::string t;
  for (char c : tag)
    if (c != '&') t.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (t == "SMLE") return Method::kSMLE;
  if (t == "SC") return Method::kSC;
  if (t == "AS") return Method::kAS;
  throw DomainError("unknown method '" + tag + "'");
}

SolverReport run_method(Method m, const Dataset& data, const SolverConfig& config) {
  switch (m) {
    case Method::kSMLE: return smle(data, config);
    case Method::kSC: return sc_mle(data, config);
    case Method::kAS: return as_mle(data, config);
  }
  throw DomainError("run_method: unknown method");
}

EstimatePair generate_truth_raw(Eigen::Index p, std::uint64_t seed) {
  if (p < 1) throw DomainError("generate_truth: p must be positive");
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Mat l = Mat::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) l(i, j) = i == j ? 5.0 + z(rng) : z(rng);
  Vec mu(p);
  for (Eigen::Index i = 0; i < p; ++i) mu(i) = z(rng);
  return {mu, l * l.transpose()};
}

EstimatePair generate_truth(Eigen::Index p, std::uint64_t seed) {
  if (p < 2) throw DomainError("generate_truth: p must be at least 2");
  return modify_m1(generate_truth_raw(p, seed)).estimate;
}

Dataset sample_dataset(const EstimatePair& truth, Eigen::Index n, std::uint64_t seed) {
  const Eigen::Index p = truth.p();
  if (n < 1) throw DomainError("sample_dataset: n must be positive");
  if (truth.cov.rows() != p || truth.cov.cols() != p) throw DimensionError("sample_dataset: shape mismatch");
  const SpectralDecomposition sd = spectral_decompose(truth.cov);
  if (!(sd.eigenvalues(p - 1) > 0.0)) throw DomainError("sample_dataset: covariance is not positive definite");
  const Mat root = sd.eigenvectors * sd.eigenvalues.cwiseSqrt().asDiagonal() * sd.eigenvectors.transpose();
  Rng rng(seed);
  Mat x = standard_normal_matrix(rng, n, p) * root;
  x.rowwise() += truth.mean.transpose();
  return Dataset(std::move(x));
}

RiskMetrics risk_metrics(const EstimatePair& est, const EstimatePair& truth) {
  const Eigen::Index p = truth.p();
  if (est.p() != p || est.cov.rows() != p || est.cov.cols() != p || truth.cov.rows() != p)
    throw DimensionError("risk_metrics: dimension mismatch");
  RiskMetrics r;
  const double scale = 1.0 / static_cast<double>(p);
  r.mu_loss = scale * (est.mean - truth.mean).squaredNorm();
  r.sigma_frob = scale * (est.cov - truth.cov).squaredNorm();

  Eigen::LLT<Mat> truth_llt(truth.cov);
  if (truth_llt.info() != Eigen::Success) throw DomainError("risk_metrics: true covariance is not positive definite");
  Eigen::LLT<Mat> est_llt(est.cov);
  if (est_llt.info() == Eigen::Success && is_positive_definite(est.cov)) {
    const Mat ratio = truth_llt.solve(est.cov);  // Sigma^-1 Sigma^, same trace and determinant
    const double log_det = 2.0 * (est_llt.matrixLLT().diagonal().array().log().sum() -
                                  truth_llt.matrixLLT().diagonal().array().log().sum());
    r.sigma_stein = ratio.trace() - log_det - static_cast<double>(p);
  }
  return r;
}

}  // namespace cmle
