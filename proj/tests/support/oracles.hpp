#pragma once
// Reference implementations used only by tests. None of them call into the
// library's numerical routines, so agreement is an independent check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Seeded generator for property tests.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  Vec vec(Eigen::Index p) {
    Vec v(p);
    for (Eigen::Index i = 0; i < p; ++i) v(i) = normal();
    return v;
  }
  Mat mat(Eigen::Index r, Eigen::Index c) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = normal();
    return m;
  }
  Mat symmetric(Eigen::Index p) {
    Mat m = mat(p, p);
    return 0.5 * (m + m.transpose());
  }
  /// G G' / p + ridge I, well conditioned.
  Mat pd(Eigen::Index p, double ridge = 0.5) {
    Mat g = mat(p, p);
    return g * g.transpose() / static_cast<double>(p) + ridge * Mat::Identity(p, p);
  }
  /// Random orthogonal matrix from Gram-Schmidt of a Gaussian matrix.
  Mat orthogonal(Eigen::Index p) {
    Mat q = mat(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
      q.col(j) /= q.col(j).norm();
    }
    return q;
  }
};

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix. Returns the
/// eigenvalues in descending order; vectors (columns) in matching order.
inline std::pair<Vec, Mat> jacobi_eigen(Mat a) {
  const Eigen::Index n = a.rows();
  Mat v = Mat::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
  Vec vals(n);
  Mat vecs(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    vals(k) = a(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(k)]);
    vecs.col(k) = v.col(idx[static_cast<std::size_t>(k)]);
  }
  return {vals, vecs};
}

inline Vec eigenvalues(const Mat& a) { return jacobi_eigen(a).first; }

/// Determinant by Gaussian elimination with partial pivoting.
inline double determinant(Mat a) {
  const Eigen::Index n = a.rows();
  double det = 1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index piv = k;
    for (Eigen::Index i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) return 0.0;
    if (piv != k) {
      a.row(k).swap(a.row(piv));
      det = -det;
    }
    det *= a(k, k);
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (Eigen::Index j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return det;
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
inline Mat inverse(Mat a) {
  const Eigen::Index n = a.rows();
  Mat inv = Mat::Identity(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index piv = k;
    for (Eigen::Index i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    a.row(k).swap(a.row(piv));
    inv.row(k).swap(inv.row(piv));
    const double d = a(k, k);
    a.row(k) /= d;
    inv.row(k) /= d;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == k) continue;
      const double f = a(i, k);
      a.row(i) -= f * a.row(k);
      inv.row(i) -= f * inv.row(k);
    }
  }
  return inv;
}

/// Solve A x = b via the Gauss-Jordan inverse.
inline Vec solve(const Mat& a, const Vec& b) { return inverse(a) * b; }

/// Column-stacking vec, written out element by element.
inline Vec vec(const Mat& m) {
  Vec v(m.size());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) v(i + j * m.rows()) = m(i, j);
  return v;
}

inline Mat unvec(const Vec& v, Eigen::Index p) {
  Mat m(p, v.size() / p);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < p; ++i) m(i, j) = v(i + j * p);
  return m;
}

/// Log-likelihood with constants dropped, summing per-observation quadratic
/// forms obtained from an explicit linear solve.
inline double log_likelihood(const Vec& mu, const Mat& sigma, const Mat& x) {
  const double n = static_cast<double>(x.rows());
  double quad = 0.0;
  const Mat inv = inverse(sigma);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vec d = x.row(i).transpose() - mu;
    quad += d.dot(inv * d);
  }
  return -0.5 * n * std::log(determinant(sigma)) - 0.5 * quad;
}

/// Central difference of a scalar function along a direction.
inline double central_difference(const std::function<double(double)>& f, double h) {
  return (f(h) - f(-h)) / (2.0 * h);
}

/// Second central difference f(h) - 2 f(0) + f(-h) over h^2.
inline double second_difference(const std::function<double(double)>& f, double h) {
  return (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
}

/// h(m) written as the trace contraction tr[(M - I)' R] with
/// M = unvec(m2) - m1 m1' and R = m1 1'. M need not be symmetric.
inline double scalar_constraint(const Vec& m, Eigen::Index p) {
  const Vec mu = m.head(p);
  const Mat sigma = unvec(m.tail(p * p), p) - mu * mu.transpose();
  const Mat r = mu * Vec::Ones(p).transpose();
  return ((sigma - Mat::Identity(p, p)).transpose() * r).trace();
}

/// Within-cluster sum of squares of a 1-d set.
inline double wcss(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s;
}

/// Exhaustive 2-means over every bipartition of |c|; returns the indices of
/// the cluster with the larger center, ascending. Exponential in p.
inline std::vector<Eigen::Index> brute_force_two_means(const Vec& c) {
  const Eigen::Index p = c.size();
  double best = INFINITY;
  std::uint64_t best_mask = 0;
  for (std::uint64_t mask = 1; mask + 1 < (1ULL << p); ++mask) {
    std::vector<double> a, b;
    for (Eigen::Index i = 0; i < p; ++i) ((mask >> i) & 1ULL ? a : b).push_back(std::abs(c(i)));
    const double cost = wcss(a) + wcss(b);
    if (cost < best - 1e-15) {
      best = cost;
      best_mask = mask;
    }
  }
  double ma = 0.0, mb = 0.0;
  int na = 0, nb = 0;
  for (Eigen::Index i = 0; i < p; ++i) {
    if ((best_mask >> i) & 1ULL) {
      ma += std::abs(c(i));
      ++na;
    } else {
      mb += std::abs(c(i));
      ++nb;
    }
  }
  const bool a_high = ma / na > mb / nb;
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < p; ++i)
    if ((((best_mask >> i) & 1ULL) != 0) == a_high) out.push_back(i);
  return out;
}

/// Wishart(df, I_p) draw by the Bartlett decomposition: W = L L' with
/// L lower triangular, L_ii^2 ~ chi^2(df - i), L_ij ~ N(0,1) below the diagonal.
inline Mat bartlett_wishart(Gen& g, int df, Eigen::Index p) {
  Mat l = Mat::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    std::chi_squared_distribution<double> chi(static_cast<double>(df - i));
    l(i, i) = std::sqrt(chi(g.rng));
    for (Eigen::Index j = 0; j < i; ++j) l(i, j) = g.normal();
  }
  return l * l.transpose();
}

/// Binomial proportion and standard error.
struct Proportion {
  double p = 0.0;
  double se = 0.0;
};

inline Proportion wishart_coverage_bartlett(std::uint64_t seed, int n, Eigen::Index p, int reps) {
  Gen g(seed);
  int hits = 0;
  for (int r = 0; r < reps; ++r) {
    const Vec ev = eigenvalues(bartlett_wishart(g, n - 1, p));
    if (ev(p - 1) > 0.5 * n) ++hits;
  }
  Proportion out;
  out.p = static_cast<double>(hits) / reps;
  out.se = std::sqrt(std::max(out.p * (1.0 - out.p), 1.0 / reps) / reps);
  return out;
}

}  // namespace oracle
