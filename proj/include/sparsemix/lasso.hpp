#pragma once

// Weighted l1-penalized least squares by cyclic coordinate descent.
//
// Minimizes F(beta) = (s / (2 sigma2)) * ||m - Y beta||^2 + lambda * ||beta||_1,
// which is the beta_k block of the penalized M-step once the responsibility
// weights are folded into the target m = Y tau_k / s.

#include "sparsemix/model.hpp"

namespace sparsemix {

struct WeightedLassoProblem {
  Matrix design;        // d x n
  Vector target;        // d
  double total_weight;  // s > 0
  double sigma2;        // > 0
  double lambda;        // >= 0

  /// Coefficient of the quadratic term, s / sigma2.
  double curvature() const noexcept { return total_weight / sigma2; }
  void validate() const;
};

struct LassoSolution {
  Vector beta;
  double kkt_residual = 0.0;
  int iterations = 0;  // full coordinate sweeps performed
  bool converged = false;
};

inline double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

double lasso_objective(const WeightedLassoProblem& problem, const Vector& beta);

/// Gradient of the smooth part, (s/sigma2) * Y^T (Y beta - m).
Vector lasso_smooth_gradient(const WeightedLassoProblem& problem, const Vector& beta);

/// Max over coordinates of the subgradient stationarity violation:
/// |g_j + lambda sign(beta_j)| on the support, max(|g_j| - lambda, 0) off it.
double kkt_residual(const WeightedLassoProblem& problem, const Vector& beta);

/// Generic form of the residual above for an arbitrary smooth gradient g.
double l1_stationarity_residual(const Vector& gradient, const Vector& beta, double lambda);

/// Smallest lambda for which beta = 0 is optimal: (s/sigma2) * ||Y^T m||_inf.
double critical_lambda(const WeightedLassoProblem& problem);

/// 1e-8 * (s/sigma2) * ||m|| * max column norm, floored away from zero.
double default_lasso_tolerance(const WeightedLassoProblem& problem);

/// Warm-started coordinate descent. Stops once kkt_residual <= tol or after
/// max_sweeps full sweeps. Zero design columns pin their coefficient to 0.
/// Throws EmptyClusterError when total_weight < 1e-12 and NumericalFailure on
/// non-finite iterates.
LassoSolution solve_weighted_lasso(const WeightedLassoProblem& problem, const Vector& beta_init,
                                   int max_sweeps, double tol);

/// Defaults: max(1000, 10 n) sweeps, default_lasso_tolerance().
LassoSolution solve_weighted_lasso(const WeightedLassoProblem& problem, const Vector& beta_init);

}  // namespace sparsemix
