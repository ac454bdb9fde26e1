#include "cmle/enforce.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "cmle/errors.hpp"

namespace cmle {

namespace {

void check_input(const EstimatePair& pre, const char* what) {
  const Eigen::Index p = pre.p();
  if (p < 1 || pre.cov.rows() != p || pre.cov.cols() != p) throw DimensionError(std::string(what) + ": shape mismatch");
  if (!pre.mean.allFinite() || !pre.cov.allFinite()) throw DomainError(std::string(what) + ": non-finite input");
  if (!is_positive_definite(pre.cov)) throw DomainError(std::string(what) + ": covariance must be positive definite");
}

/// Geometric mean computed in log space.
double geometric_mean(const Vec& w) {
  if (w.size() == 0) return 1.0;
  return std::exp(w.array().log().sum() / static_cast<double>(w.size()));
}

/// Sigma* = sum_k w_k / lambda_pr b_k b_k' + u u', with u = basis.col(0).
void assemble(ModifiedEstimate& out) {
  out.lambda_pr = geometric_mean(out.weights);
  const Eigen::Index p = out.basis.rows();
  Vec diag(p);
  diag(0) = 1.0;
  diag.tail(p - 1) = out.weights / out.lambda_pr;
  out.estimate.cov = symmetrize(out.basis * diag.asDiagonal() * out.basis.transpose());
  out.residuals = constraint_residuals(out.estimate);
}

/// Weight of a re-aligned column: the source eigenvalue when the column is a
/// direct copy, else its Rayleigh quotient under sigma.
double column_weight(const Mat& sigma, const Vec& b, Eigen::Index source, const std::vector<double>& source_values) {
  if (source >= 0 && !std::isnan(source_values[static_cast<std::size_t>(source)]))
    return source_values[static_cast<std::size_t>(source)];
  return b.dot(sigma * b);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::string to_string(Modifier m) {
  switch (m) {
    case Modifier::kNone: return "none";
    case Modifier::kM1: return "M1";
    case Modifier::kM2: return "M2";
    case Modifier::kM3Gap: return "M3-gap";
    case Modifier::kM3KMeans: return "M3-kmeans";
  }
  return "unknown";
}

Modifier parse_modifier(const std::string& tag) {
  const std::string t = lower(tag);
  if (t == "none" || t == "raw") return Modifier::kNone;
  if (t == "m1") return Modifier::kM1;
  if (t == "m2") return Modifier::kM2;
  if (t == "m3-gap" || t == "m3gap") return Modifier::kM3Gap;
  if (t == "m3-kmeans" || t == "m3kmeans" || t == "m3") return Modifier::kM3KMeans;
  throw DomainError("unknown modifier '" + tag + "'");
}

ModifiedEstimate modify_m1(const EstimatePair& pre) {
  check_input(pre, "modify_m1");
  const double norm = pre.mean.norm();
  if (norm == 0.0) throw DomainError("modify_m1: mean is zero, constraint direction undefined");
  const Eigen::Index p = pre.p();
  const SpectralDecomposition sd = spectral_decompose(pre.cov);

  // Order P_{p-1}, ..., P_1, then P_p as a fallback for a dropped vector.
  std::vector<Vec> rest;
  std::vector<double> values;
  for (Eigen::Index j = p - 2; j >= 0; --j) {
    rest.push_back(sd.eigenvectors.col(j));
    values.push_back(sd.eigenvalues(j));
  }
  rest.push_back(sd.eigenvectors.col(p - 1));
  values.push_back(sd.eigenvalues(p - 1));

  ModifiedEstimate out;
  out.method = Modifier::kM1;
  std::vector<Eigen::Index> sources;
  out.basis = gram_schmidt_from(pre.mean, rest, &sources);
  out.weights.resize(p - 1);
  for (Eigen::Index k = 1; k < p; ++k)
    out.weights(k - 1) = column_weight(pre.cov, out.basis.col(k), sources[static_cast<std::size_t>(k)], values);
  out.estimate.mean = pre.mean;
  assemble(out);
  return out;
}

ModifiedEstimate modify_m2(const EstimatePair& pre) {
  check_input(pre, "modify_m2");
  const Eigen::Index p = pre.p();
  const SpectralDecomposition sd = spectral_decompose(pre.cov);
  const Vec c = sd.eigenvectors.transpose() * pre.mean;

  ModifiedEstimate out;
  out.method = Modifier::kM2;
  out.criterion.resize(p);
  Eigen::Index best = -1;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (c(i) == 0.0) {
      out.criterion(i) = std::numeric_limits<double>::infinity();
      continue;
    }
    const double r = 1.0 - sd.eigenvalues(i) / (c(i) * c(i));
    out.criterion(i) = r * r;
    if (best < 0 || out.criterion(i) < out.criterion(best)) best = i;
  }
  if (best < 0) throw DomainError("modify_m2: mean is orthogonal to every eigenvector");

  out.selected_indices = {best};
  out.estimate.mean = c(best) * sd.eigenvectors.col(best);
  out.basis.resize(p, p);
  out.basis.col(0) = sd.eigenvectors.col(best);
  out.weights.resize(p - 1);
  Eigen::Index k = 1;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (j == best) continue;
    out.basis.col(k) = sd.eigenvectors.col(j);
    out.weights(k - 1) = sd.eigenvalues(j);
    ++k;
  }
  assemble(out);
  return out;
}

std::vector<Eigen::Index> select_basis(const Vec& coeffs, BasisStrategy strategy) {
  const Eigen::Index p = coeffs.size();
  if (p == 0) throw DimensionError("select_basis: empty coefficient vector");
  if (!coeffs.allFinite()) throw DomainError("select_basis: non-finite coefficients");
  const Vec a = coeffs.cwiseAbs();
  if (a.maxCoeff() == 0.0) throw DomainError("select_basis: coefficient vector is zero");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x) > a(y); });
  std::vector<double> s(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) s[i] = a(order[i]);

  std::size_t top = order.size();  // size of the selected group
  if (s.front() != s.back()) {
    if (strategy == BasisStrategy::kGap) {
      double best_gap = -1.0;
      for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        const double gap = s[k] - s[k + 1];
        if (gap > best_gap) {
          best_gap = gap;
          top = k + 1;
        }
      }
    } else {
      // Exact 1-d 2-means: the optimal clusters are contiguous in sorted order.
      std::vector<double> prefix(s.size() + 1, 0.0), prefix_sq(s.size() + 1, 0.0);
      for (std::size_t i = 0; i < s.size(); ++i) {
        prefix[i + 1] = prefix[i] + s[i];
        prefix_sq[i + 1] = prefix_sq[i] + s[i] * s[i];
      }
      auto sse = [&](std::size_t lo, std::size_t hi) {
        const double cnt = static_cast<double>(hi - lo);
        const double sum = prefix[hi] - prefix[lo];
        return std::max(0.0, (prefix_sq[hi] - prefix_sq[lo]) - sum * sum / cnt);
      };
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 1; k < s.size(); ++k) {
        const double cost = sse(0, k) + sse(k, s.size());
        if (cost < best) {
          best = cost;
          top = k;
        }
      }
    }
  }
  std::vector<Eigen::Index> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top));
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

ModifiedEstimate modify_m3(const EstimatePair& pre, BasisStrategy strategy) {
  check_input(pre, "modify_m3");
  if (pre.mean.norm() == 0.0) throw DomainError("modify_m3: mean is zero, constraint direction undefined");
  const Eigen::Index p = pre.p();
  const SpectralDecomposition sd = spectral_decompose(pre.cov);
  const Vec c = sd.eigenvectors.transpose() * pre.mean;

  ModifiedEstimate out;
  out.method = strategy == BasisStrategy::kGap ? Modifier::kM3Gap : Modifier::kM3KMeans;
  out.selected_indices = select_basis(c, strategy);
  const auto& sel = out.selected_indices;

  Vec mu_star = Vec::Zero(p);
  std::size_t g = 0;
  for (std::size_t k = 0; k < sel.size(); ++k) {
    mu_star += c(sel[k]) * sd.eigenvectors.col(sel[k]);
    if (std::abs(c(sel[k])) > std::abs(c(sel[g]))) g = k;
  }
  if (!(mu_star.norm() > 1e-14 * pre.mean.norm()))
    throw DomainError("modify_m3: mean projects to zero on the selected eigenvectors; try the other selection strategy");

  // Selected eigenvectors other than P_g are re-aligned around mu*; the
  // unselected ones are orthogonal to mu* and pass through.
  std::vector<Vec> rest;
  std::vector<double> values;
  std::vector<bool> in_set(static_cast<std::size_t>(p), false);
  for (std::size_t k = 0; k < sel.size(); ++k) {
    in_set[static_cast<std::size_t>(sel[k])] = true;
    if (k == g) continue;
    rest.push_back(sd.eigenvectors.col(sel[k]));
    values.push_back(std::numeric_limits<double>::quiet_NaN());
  }
  const std::size_t n_realigned = rest.size();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (in_set[static_cast<std::size_t>(j)]) continue;
    rest.push_back(sd.eigenvectors.col(j));
    values.push_back(sd.eigenvalues(j));
  }

  std::vector<Eigen::Index> sources;
  out.basis = gram_schmidt_from(mu_star, rest, &sources);
  out.weights.resize(p - 1);
  std::vector<double> hat;
  for (Eigen::Index k = 1; k < p; ++k) {
    const Eigen::Index src = sources[static_cast<std::size_t>(k)];
    out.weights(k - 1) = column_weight(pre.cov, out.basis.col(k), src, values);
    if (src < 0 || static_cast<std::size_t>(src) < n_realigned) hat.push_back(out.weights(k - 1));
  }
  out.lambda_hat = Eigen::Map<const Vec>(hat.data(), static_cast<Eigen::Index>(hat.size()));
  out.estimate.mean = mu_star;
  assemble(out);
  return out;
}

ModifiedEstimate apply_modifier(const EstimatePair& pre, Modifier m) {
  switch (m) {
    case Modifier::kM1: return modify_m1(pre);
    case Modifier::kM2: return modify_m2(pre);
    case Modifier::kM3Gap: return modify_m3(pre, BasisStrategy::kGap);
    case Modifier::kM3KMeans: return modify_m3(pre, BasisStrategy::kKMeans2);
    case Modifier::kNone: break;
  }
  ModifiedEstimate out;
  out.estimate = pre;
  out.method = Modifier::kNone;
  out.residuals = constraint_residuals(pre);
  return out;
}

}  // namespace cmle
