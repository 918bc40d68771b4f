#pragma once

// Reference computations written independently of the library code paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Plain sum of densities, no max shift. Y is centered d x n, betas n x K.
inline double naive_log_likelihood(const MatrixXd& Y, const VectorXd& weights,
                                   const MatrixXd& betas, const VectorXd& variances) {
  const int d = static_cast<int>(Y.rows());
  double total = 0.0;
  for (int i = 0; i < Y.cols(); ++i) {
    double p = 0.0;
    for (int k = 0; k < weights.size(); ++k) {
      double r2 = 0.0;
      for (int j = 0; j < d; ++j) {
        double mu = 0.0;
        for (int l = 0; l < Y.cols(); ++l) mu += Y(j, l) * betas(l, k);
        r2 += (Y(j, i) - mu) * (Y(j, i) - mu);
      }
      p += weights[k] * std::pow(2.0 * std::numbers::pi * variances[k], -0.5 * d) *
           std::exp(-r2 / (2.0 * variances[k]));
    }
    total += std::log(p);
  }
  return total;
}

// (s/(2 sigma2)) ||m - X b||^2 + lambda ||b||_1
inline double lasso_value(const MatrixXd& X, const VectorXd& m, double s, double sigma2,
                          double lambda, const VectorXd& b) {
  return s / (2.0 * sigma2) * (m - X * b).squaredNorm() + lambda * b.lpNorm<1>();
}

// Minimum over every sign pattern in {-1, 0, +1}^n of the stationary point of
// the smooth problem restricted to that pattern. The global minimizer is one
// of these candidates whenever the active Gram block is invertible.
inline double lasso_enumeration_min(const MatrixXd& X, const VectorXd& m, double s, double sigma2,
                                    double lambda) {
  const int n = static_cast<int>(X.cols());
  const double c = s / sigma2;
  int patterns = 1;
  for (int j = 0; j < n; ++j) patterns *= 3;
  double best = lasso_value(X, m, s, sigma2, lambda, VectorXd::Zero(n));
  for (int code = 1; code < patterns; ++code) {
    std::vector<int> active, sign;
    int rest = code;
    for (int j = 0; j < n; ++j, rest /= 3) {
      const int z = rest % 3;
      if (z == 0) continue;
      active.push_back(j);
      sign.push_back(z == 1 ? 1 : -1);
    }
    const int a = static_cast<int>(active.size());
    MatrixXd XA(X.rows(), a);
    VectorXd zA(a);
    for (int t = 0; t < a; ++t) {
      XA.col(t) = X.col(active[t]);
      zA[t] = sign[t];
    }
    const MatrixXd G = c * XA.transpose() * XA;
    Eigen::FullPivLU<MatrixXd> lu(G);
    if (lu.rank() < a) continue;
    const VectorXd bA = lu.solve(c * XA.transpose() * m - lambda * zA);
    bool consistent = true;
    for (int t = 0; t < a; ++t) consistent = consistent && bA[t] * zA[t] > 0.0;
    if (!consistent) continue;
    VectorXd b = VectorXd::Zero(n);
    for (int t = 0; t < a; ++t) b[active[t]] = bA[t];
    best = std::min(best, lasso_value(X, m, s, sigma2, lambda, b));
  }
  return best;
}

// max over all permutations, generated recursively.
inline int brute_force_correct(const std::vector<int>& a, const std::vector<int>& t, int K) {
  std::vector<int> perm(K, -1);
  std::vector<bool> used(K, false);
  int best = 0;
  std::function<void(int)> rec = [&](int pos) {
    if (pos == K) {
      int hits = 0;
      for (std::size_t i = 0; i < a.size(); ++i) hits += perm[a[i]] == t[i];
      best = std::max(best, hits);
      return;
    }
    for (int v = 0; v < K; ++v) {
      if (used[v]) continue;
      used[v] = true;
      perm[pos] = v;
      rec(pos + 1);
      used[v] = false;
    }
  };
  rec(0);
  return best;
}

// One-sample Kolmogorov-Smirnov statistic against Uniform[lo, hi].
inline double ks_uniform(std::vector<double> x, double lo, double hi) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double dmax = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = std::clamp((x[i] - lo) / (hi - lo), 0.0, 1.0);
    dmax = std::max({dmax, (i + 1) / n - F, F - i / n});
  }
  return dmax;
}

// Independent random source for building test instances.
struct Gen {
  std::mt19937 eng;
  explicit Gen(unsigned seed) : eng(seed) {}
  double unif(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  double norm() { return std::normal_distribution<double>(0.0, 1.0)(eng); }
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
  MatrixXd gauss(int r, int c) {
    MatrixXd m(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) m(i, j) = norm();
    return m;
  }
  VectorXd simplex(int K) {
    VectorXd w(K);
    for (int k = 0; k < K; ++k) w[k] = unif(0.2, 1.0);
    return w / w.sum();
  }
};

}  // namespace oracle
