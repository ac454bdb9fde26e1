#include "common.hpp"

namespace cmle {

SolverReport sc_mle(const Dataset& data, const SolverConfig& config) {
  config.validate();
  detail::require_sample(data, "sc_mle");
  const SufficientStats stats = sufficient_stats(data);
  const Eigen::Index p = data.p();

  SolverReport report;
  report.method = "SC";
  report.block_names = {"m"};
  report.block_converged.assign(1, false);
  report.status = SolverStatus::kMaxIterations;

  Vec t = canonical_statistic(stats);
  Vec m = t;
  double multiplier = 0.0;
  bool done = false;
  try {
    for (int l = 0; l < config.inner_max_iter; ++l) {
      m = t;
      const Mat v = canonical_covariance(unpack_mean_parameter(m, p), stats.n);
      const Vec v_grad_m = v * scalar_constraint_gradient(m, p);

      for (int k = 0; k < config.inner_max_iter; ++k) {
        const double h_t = scalar_constraint(t, p);
        if (h_t == 0.0) {
          multiplier = 0.0;
          break;  // T is already feasible; the step is zero.
        }
        const double den = v_grad_m.dot(scalar_constraint_gradient(t, p));
        if (std::abs(den) < 1e-12)
          throw detail::IterationFailure{SolverStatus::kSingularStep, "sc_mle: multiplier denominator vanished"};
        multiplier = -h_t / den;
        const Vec step = v_grad_m * (h_t / den);
        if (!step.allFinite()) throw detail::IterationFailure{SolverStatus::kNonFinite, "sc_mle: non-finite step"};
        t -= step;
        if (step.norm() <= config.epsilon) break;
      }

      const double gap = (t - m).norm();
      report.iterations_used = l + 1;
      if (config.record_trace) report.trace.push_back({l + 1, {gap}, std::abs(scalar_constraint(t, p))});
      if (gap <= config.epsilon) {
        report.block_converged[0] = true;
        report.status = SolverStatus::kConverged;
        done = true;
        break;
      }
    }
  } catch (const detail::IterationFailure& f) {
    report.status = f.status;
    report.message = f.message;
  }

  // On convergence the estimate is m^(l); otherwise the last T.
  const Vec& final_m = done ? m : (t.allFinite() ? t : m);
  EstimatePair est = unpack_mean_parameter(final_m, p);
  est.cov = symmetrize(est.cov);
  report.estimate = est;
  report.multipliers.alpha1 = 0.0;
  report.multipliers.alpha2 = Vec::Constant(1, multiplier);
  detail::finalize(report);
  return report;
}

}  // namespace cmle
