#pragma once

#include <cmath>
#include <string>

#include "cmle/errors.hpp"
#include "cmle/solvers.hpp"

namespace cmle::detail {

/// Raised inside an iteration loop; caught by the solver and turned into a
/// report with the matching status.
struct IterationFailure {
  SolverStatus status;
  std::string message;
};

inline bool small_change(double change, double reference_norm, double tol) {
  return change <= tol * (1.0 + reference_norm);
}

/// p-th root of a determinant that must be positive.
inline double positive_det_root(const Mat& m, const char* what) {
  const auto [log_abs, sign] = log_abs_determinant(m);
  if (sign <= 0) throw IterationFailure{SolverStatus::kDiverged, std::string(what) + ": determinant is not positive"};
  const double root = std::exp(log_abs / static_cast<double>(m.rows()));
  if (!std::isfinite(root)) throw IterationFailure{SolverStatus::kNonFinite, std::string(what) + ": determinant overflow"};
  return root;
}

inline void require_sample(const Dataset& data, const char* what) {
  if (data.n() <= data.p()) throw DomainError(std::string(what) + ": need n > p observations");
  if (data.p() < 1) throw DomainError(std::string(what) + ": empty dimension");
}

/// Fills the diagnostics that are always recomputed from the final estimate.
void finalize(SolverReport& report);

}  // namespace cmle::detail
