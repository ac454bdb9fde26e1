#include <sstream>

#include "common.hpp"

namespace cmle {

SolverReport smle(const Dataset& data, const SolverConfig& config) {
  config.validate();
  detail::require_sample(data, "smle");
  const SufficientStats stats = sufficient_stats(data);
  const Eigen::Index p = data.p();
  const double n = static_cast<double>(data.n());
  const Vec& xbar = stats.mean;
  const Mat eye = Mat::Identity(p, p);

  SolverReport report;
  report.method = "SMLE";
  report.block_names = {"alpha1", "sigma", "alpha2", "mu"};
  report.block_converged.assign(4, false);

  // (Sigma, alpha2, mu) = (S, xbar, xbar); alpha1^(0) is taken equal to alpha1^(1).
  Mat sigma = stats.scatter;
  Vec alpha2 = xbar;
  Vec mu = xbar;
  double alpha1 = 0.0;

  auto numerator = [&](const Vec& m, const Vec& a2) -> Mat { return stats.a_matrix(m) + 2.0 * a2 * m.transpose(); };

  // Iterate with the smallest |Sigma mu - mu| so far, returned when the
  // iteration breaks down; a run that merely hits max_iter returns the last one.
  struct Snapshot {
    int iteration;
    double residual;
    double alpha1;
    Mat sigma;
    Vec alpha2;
    Vec mu;
  };
  Snapshot best{0, (sigma * mu - mu).norm(), 0.0, sigma, alpha2, mu};

  report.status = SolverStatus::kMaxIterations;
  try {
    alpha1 = 0.5 * (detail::positive_det_root(numerator(mu, alpha2), "smle") - n);
    best.alpha1 = alpha1;
    for (int k = 0; k < config.max_iter; ++k) {
      const Mat u = numerator(mu, alpha2);
      const double root = detail::positive_det_root(u, "smle: |A(mu) + 2 alpha2 mu'|");
      const double scale = n + 2.0 * alpha1;

      const double alpha1_next = 0.5 * (root - n);
      Mat sigma_next = symmetrize(u / scale);
      try {
        sigma_next = repair_positive_definite(sigma_next);
      } catch (const ContractError& e) {
        throw detail::IterationFailure{SolverStatus::kRepairFailed, e.what()};
      }
      const Vec alpha2_next = 0.5 * (scale * sigma - stats.a_matrix(mu)) * mu;
      const Vec shifted = xbar - (eye - sigma) * alpha2 / n;
      const Vec mu_next = config.mean_update == MeanUpdate::kPrinted ? Vec(sigma * shifted) : shifted;

      if (!std::isfinite(alpha1_next) || !sigma_next.allFinite() || !alpha2_next.allFinite() || !mu_next.allFinite())
        throw detail::IterationFailure{SolverStatus::kNonFinite, "smle: non-finite iterate"};

      const double changes[4] = {std::abs(alpha1_next - alpha1), (sigma_next - sigma).norm(),
                                 (alpha2_next - alpha2).norm(), (mu_next - mu).norm()};
      const double refs[4] = {std::abs(alpha1), sigma.norm(), alpha2.norm(), mu.norm()};

      alpha1 = alpha1_next;
      sigma = sigma_next;
      alpha2 = alpha2_next;
      mu = mu_next;
      report.iterations_used = k + 1;
      const double residual = (sigma * mu - mu).norm();
      if (residual <= best.residual) best = {k + 1, residual, alpha1, sigma, alpha2, mu};

      if (config.record_trace) report.trace.push_back({k + 1, {changes, changes + 4}, residual});

      // The first alpha1 change is zero by construction, so blocks are only
      // compared from the second iteration on.
      if (k >= 1) {
        int count = 0;
        for (int b = 0; b < 4; ++b) {
          report.block_converged[b] = detail::small_change(changes[b], refs[b], config.tol);
          count += report.block_converged[b] ? 1 : 0;
        }
        if (count >= 2) {
          report.status = SolverStatus::kConverged;
          break;
        }
      }
    }
  } catch (const detail::IterationFailure& f) {
    report.status = f.status;
    report.message = f.message;
  } catch (const NumericError& e) {
    report.status = SolverStatus::kNonFinite;
    report.message = e.what();
  }
  if (report.status != SolverStatus::kConverged && report.status != SolverStatus::kMaxIterations) {
    alpha1 = best.alpha1;
    sigma = best.sigma;
    alpha2 = best.alpha2;
    mu = best.mu;
    report.message += "; returned iterate " + std::to_string(best.iteration);
  }

  report.estimate = {mu, sigma};
  report.multipliers = {alpha1, alpha2};
  detail::finalize(report);
  return report;
}

}  // namespace cmle
