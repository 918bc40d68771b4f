#pragma once

// Data and parameter types for the self-regression Gaussian mixture, and the
// objectives every estimator in the library evaluates.
//
// Conventions: observations are the columns of a d x n matrix Y. Component k
// has weight pi_k, spherical variance sigma_k^2, and mean Y * beta_k where
// beta_k lives in R^n. Component labels are 0-based throughout the API.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sparsemix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a mixture component carries (numerically) no responsibility mass.
class EmptyClusterError : public std::runtime_error {
 public:
  EmptyClusterError(int component, double mass)
      : std::runtime_error("component " + std::to_string(component) +
                           " has responsibility mass " + std::to_string(mass)),
        component_(component) {}
  int component() const noexcept { return component_; }

 private:
  int component_;
};

/// Raised when an iteration produces a non-finite intermediate.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Centered sample. Construction subtracts the column mean and keeps it as
 * center_offset() so fitted means can be mapped back to input coordinates.
 */
class SampleSet {
 public:
  /// `columns` is d x n, one observation per column. Throws std::invalid_argument
  /// on empty input or non-finite entries.
  explicit SampleSet(const Matrix& columns);

  /// Builds from an n x d matrix (one observation per row).
  static SampleSet from_rows(const Matrix& rows) { return SampleSet(rows.transpose()); }

  const Matrix& data() const noexcept { return data_; }
  const Vector& center_offset() const noexcept { return offset_; }
  Eigen::Index n() const noexcept { return data_.cols(); }
  Eigen::Index d() const noexcept { return data_.rows(); }

  /// Trace of the (biased) sample covariance: sum_i ||Y_i||^2 / n.
  double total_variance() const noexcept { return total_variance_; }

  /// Largest Euclidean norm among the centered observations.
  double max_column_norm() const noexcept { return max_column_norm_; }

 private:
  Matrix data_;
  Vector offset_;
  double total_variance_ = 0.0;
  double max_column_norm_ = 0.0;
};

struct MixtureParams {
  Vector weights;    // K
  Matrix betas;      // n x K, column k is beta_k
  Vector variances;  // K

  Eigen::Index num_components() const noexcept { return weights.size(); }

  /// d x K matrix whose column k is Y * beta_k.
  Matrix means(const SampleSet& Y) const { return Y.data() * betas; }

  /// Throws std::invalid_argument if shapes disagree with Y, weights are off the
  /// simplex, or some variance is below `variance_floor`.
  void validate(const SampleSet& Y, double variance_floor = 0.0) const;
};

/// n x K posterior membership probabilities.
struct Responsibilities {
  Matrix tau;

  Eigen::Index n() const noexcept { return tau.rows(); }
  Eigen::Index num_components() const noexcept { return tau.cols(); }
  /// Column sums s_k = sum_i tau(i, k).
  Vector masses() const { return tau.colwise().sum().transpose(); }
};

struct Hyperparams {
  // Fixed l1 weight. When empty, component k uses
  // lambda_scale * sqrt(2 log n) * max_i ||Y_i|| / sigma_k.
  std::optional<double> lambda;
  double lambda_scale = 1.0;
  int max_cycles = 500;
  double tol = 1e-10;
  // Absolute variance floor. When empty: 1e-4 * total_variance / d.
  std::optional<double> variance_floor;
  int restarts = 5;
  std::uint64_t seed = 0;
  // Averaging factor for beta and sigma^2 updates; 1 disables averaging.
  double relaxation = 1.0;

  void validate() const;
};

double default_variance_floor(const SampleSet& Y);
double resolve_variance_floor(const Hyperparams& hp, const SampleSet& Y);

/// The l1 weight in effect for a component with variance `sigma2`.
double resolve_lambda(const Hyperparams& hp, double sigma2, const SampleSet& Y);

/// Per-component l1 weights for the current parameters.
Vector resolve_lambdas(const Hyperparams& hp, const MixtureParams& params, const SampleSet& Y);

/// log N(y; Y*beta, sigma2 * I_d).
double component_log_density(const Vector& y, const Vector& beta, double sigma2,
                             const SampleSet& Y);

/// n x K matrix of component log densities (without the log pi_k term).
Matrix component_log_densities(const MixtureParams& params, const SampleSet& Y);

/// sum_i log sum_k pi_k N(Y_i; Y beta_k, sigma_k^2 I), log-sum-exp stabilized.
double self_regression_log_likelihood(const MixtureParams& params, const SampleSet& Y);

double penalized_objective(const MixtureParams& params, const SampleSet& Y, double lambda);
/// Variant with one l1 weight per component.
double penalized_objective(const MixtureParams& params, const SampleSet& Y,
                           const Vector& lambdas);

/// Posterior probabilities t_ik(theta), normalized per row in log space.
Responsibilities membership_probabilities(const MixtureParams& params, const SampleSet& Y);

/// Expected complete-data log-likelihood sum_ik tau_ik [log pi_k + log f_k(Y_i)].
/// Returns -infinity when some pi_k = 0 carries positive responsibility.
double q_function(const MixtureParams& params, const Responsibilities& tau, const SampleSet& Y);

/// sum_ik t_ik(theta_bar) log(t_ik(theta_bar) / t_ik(theta)); +infinity when the
/// support of t(theta_bar) is not contained in that of t(theta).
double kullback_penalty(const MixtureParams& theta, const MixtureParams& theta_bar,
                        const SampleSet& Y);

/// Same divergence evaluated directly on responsibility matrices.
double kullback_penalty(const Responsibilities& t_theta, const Responsibilities& t_theta_bar);

}  // namespace sparsemix
