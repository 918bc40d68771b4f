#include "sparsemix/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sparsemix {

namespace {

constexpr double kMinWeight = 1e-12;

// Squared column norms at or below this fraction of the largest one are
// treated as zero columns.
constexpr double kZeroColumn = 1e-24;

double coordinate_violation(double g, double b, double lambda) {
  if (b > 0.0) return std::abs(g + lambda);
  if (b < 0.0) return std::abs(g - lambda);
  return std::max(std::abs(g) - lambda, 0.0);
}

}  // namespace

void WeightedLassoProblem::validate() const {
  if (design.rows() != target.size())
    throw std::invalid_argument("lasso: design rows must match target length");
  if (design.cols() < 1) throw std::invalid_argument("lasso: empty design");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("lasso: sigma2 must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lasso: lambda must be >= 0");
  if (!design.allFinite() || !target.allFinite() || !std::isfinite(total_weight))
    throw std::invalid_argument("lasso: non-finite problem data");
}

double lasso_objective(const WeightedLassoProblem& problem, const Vector& beta) {
  const double fit = (problem.target - problem.design * beta).squaredNorm();
  return 0.5 * problem.curvature() * fit + problem.lambda * beta.lpNorm<1>();
}

Vector lasso_smooth_gradient(const WeightedLassoProblem& problem, const Vector& beta) {
  return problem.curvature() *
         (problem.design.transpose() * (problem.design * beta - problem.target));
}

double l1_stationarity_residual(const Vector& gradient, const Vector& beta, double lambda) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    worst = std::max(worst, coordinate_violation(gradient[j], beta[j], lambda));
  return worst;
}

double kkt_residual(const WeightedLassoProblem& problem, const Vector& beta) {
  return l1_stationarity_residual(lasso_smooth_gradient(problem, beta), beta, problem.lambda);
}

double critical_lambda(const WeightedLassoProblem& problem) {
  return problem.curvature() * (problem.design.transpose() * problem.target).lpNorm<Eigen::Infinity>();
}

double default_lasso_tolerance(const WeightedLassoProblem& problem) {
  const double max_col = problem.design.colwise().norm().maxCoeff();
  const double scale = problem.curvature() * problem.target.norm() * max_col;
  return 1e-8 * std::max(scale, std::numeric_limits<double>::min() * 1e8);
}

LassoSolution solve_weighted_lasso(const WeightedLassoProblem& problem, const Vector& beta_init,
                                   int max_sweeps, double tol) {
  problem.validate();
  if (problem.total_weight < kMinWeight) throw EmptyClusterError(-1, problem.total_weight);
  const Eigen::Index n = problem.design.cols();
  if (beta_init.size() != n) throw std::invalid_argument("lasso: beta_init has wrong length");
  if (!beta_init.allFinite()) throw std::invalid_argument("lasso: beta_init must be finite");

  const double a = problem.curvature();
  const double lambda = problem.lambda;
  const Matrix gram = problem.design.transpose() * problem.design;
  const Vector corr = problem.design.transpose() * problem.target;
  const double max_diag = gram.diagonal().maxCoeff();

  LassoSolution sol;
  sol.beta = beta_init;
  for (Eigen::Index j = 0; j < n; ++j)
    if (gram(j, j) <= kZeroColumn * max_diag) sol.beta[j] = 0.0;

  // gram_beta tracks G * beta so a coordinate update costs O(n).
  Vector gram_beta = gram * sol.beta;
  auto residual = [&] {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      worst = std::max(worst, coordinate_violation(a * (gram_beta[j] - corr[j]), sol.beta[j], lambda));
    return worst;
  };

  sol.kkt_residual = residual();
  while (sol.kkt_residual > tol && sol.iterations < max_sweeps) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double gjj = gram(j, j);
      if (gjj <= kZeroColumn * max_diag) continue;
      const double old = sol.beta[j];
      const double partial = corr[j] - (gram_beta[j] - gjj * old);
      const double updated = soft_threshold(a * partial, lambda) / (a * gjj);
      if (updated != old) {
        gram_beta += (updated - old) * gram.col(j);
        sol.beta[j] = updated;
      }
    }
    ++sol.iterations;
    if (!sol.beta.allFinite()) throw NumericalFailure("lasso: non-finite coefficient");
    sol.kkt_residual = residual();
  }
  sol.converged = sol.kkt_residual <= tol;
  return sol;
}

LassoSolution solve_weighted_lasso(const WeightedLassoProblem& problem, const Vector& beta_init) {
  const int sweeps = static_cast<int>(std::max<Eigen::Index>(1000, 10 * problem.design.cols()));
  return solve_weighted_lasso(problem, beta_init, sweeps, default_lasso_tolerance(problem));
}

}  // namespace sparsemix
