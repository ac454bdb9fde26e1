#include "common.hpp"

namespace cmle {

namespace {

struct IntermediateState {
  Vec mu;
  Mat sigma;  // U / |U|^{1/p}, not symmetric in general
  double root = 0.0;
};

IntermediateState evaluate(const SufficientStats& stats, const Vec& alpha2) {
  const double n = static_cast<double>(stats.n);
  IntermediateState s;
  s.mu = stats.mean - alpha2 / n;
  const Mat u = stats.a_matrix(s.mu) + 2.0 * alpha2 * s.mu.transpose();
  s.root = detail::positive_det_root(u, "intermediate_mle: |U(alpha2)|");
  s.sigma = u / s.root;
  return s;
}

}  // namespace

Vec intermediate_map(const SufficientStats& stats, const Vec& b, const Vec& alpha2, IntermediateMap variant) {
  const double n = static_cast<double>(stats.n);
  const IntermediateState s = evaluate(stats, alpha2);
  const Vec& xbar = stats.mean;
  Vec num;
  double den = 0.0;
  if (variant == IntermediateMap::kPrinted) {
    const auto [log_abs, sign] = log_abs_determinant(s.sigma);
    const double d = sign > 0 ? std::exp(log_abs / static_cast<double>(xbar.size())) : 0.0;
    num = d * xbar - (n - 1.0) * stats.scatter * b - alpha2 * alpha2.dot(b) / (n * n);
    den = 2.0 * (xbar.dot(b) - alpha2.dot(b) / n) - d / n;
  } else {
    // U b = |U|^{1/p} mu with U = nS + 2 alpha2 xbar' - alpha2 alpha2'/n solved for alpha2.
    num = s.root * xbar - n * stats.scatter * b;
    den = 2.0 * xbar.dot(b) - alpha2.dot(b) / n + s.root / n;
  }
  if (std::abs(den) < 1e-12) throw detail::IterationFailure{SolverStatus::kSingularStep, "intermediate_mle: denominator vanished"};
  return num / den;
}

SolverReport intermediate_mle(const Dataset& data, const Vec& b, const SolverConfig& config) {
  config.validate();
  detail::require_sample(data, "intermediate_mle");
  if (b.size() != data.p()) throw DimensionError("intermediate_mle: b has wrong length");
  if (b.norm() == 0.0) throw DomainError("intermediate_mle: b must be nonzero");
  const SufficientStats stats = sufficient_stats(data);

  SolverReport report;
  report.method = "intermediate";
  report.block_names = {"alpha2"};
  report.block_converged.assign(1, false);
  report.status = SolverStatus::kMaxIterations;

  Vec alpha2 = stats.mean;
  IntermediateState state;
  try {
    state = evaluate(stats, alpha2);
    for (int k = 0; k < config.max_iter; ++k) {
      const Vec next = intermediate_map(stats, b, alpha2, config.intermediate_map);
      if (!next.allFinite()) throw detail::IterationFailure{SolverStatus::kNonFinite, "intermediate_mle: non-finite iterate"};
      const double change = (next - alpha2).norm();
      const double ref = alpha2.norm();
      const IntermediateState next_state = evaluate(stats, next);
      alpha2 = next;
      state = next_state;
      report.iterations_used = k + 1;
      if (config.record_trace) report.trace.push_back({k + 1, {change}, (state.sigma * b - state.mu).norm()});
      if (detail::small_change(change, ref, config.tol)) {
        report.block_converged[0] = true;
        report.status = SolverStatus::kConverged;
        break;
      }
    }
  } catch (const detail::IterationFailure& f) {
    report.status = f.status;
    report.message = f.message;
  }

  const double n = static_cast<double>(stats.n);
  if (state.sigma.size() == 0) {
    // The starting point itself was infeasible.
    state.mu = stats.mean - alpha2 / n;
    state.sigma = stats.scatter;
  }
  report.estimate = {state.mu, symmetrize(state.sigma)};
  report.multipliers.alpha1 = 0.5 * (state.root - n);
  report.multipliers.alpha2 = alpha2;
  detail::finalize(report);
  report.symmetry_gap = symmetry_gap(state.sigma);
  report.target_residual = (report.estimate.cov * b - report.estimate.mean).norm();
  return report;
}

}  // namespace cmle
