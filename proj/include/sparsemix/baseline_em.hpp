#pragma once

// Classic maximum-likelihood EM for mixtures of spherical Gaussians
// N(mu_k, sigma_k^2 I). Shares initialization, variance floor, restart and
// convergence conventions with the sparse estimator so the two can be
// compared on equal terms.

#include <optional>
#include <string>
#include <vector>

#include "sparsemix/model.hpp"

namespace sparsemix {

struct SphericalParams {
  Vector weights;    // K
  Matrix means;      // d x K
  Vector variances;  // K

  Eigen::Index num_components() const noexcept { return weights.size(); }
};

struct BaselineReport {
  SphericalParams params;
  std::vector<double> loglik_trace;  // entry 0 at the start, one per iteration after
  std::vector<std::size_t> reseed_points;
  int iterations = 0;
  bool converged = false;
  std::vector<int> assignments;
  int restart_index = 0;
  std::string diagnostic;

  double final_loglik() const { return loglik_trace.back(); }
};

/// Unpenalized spherical mixture log-likelihood.
double spherical_log_likelihood(const SphericalParams& params, const SampleSet& Y);

Responsibilities spherical_e_step(const SphericalParams& params, const SampleSet& Y);

/// Closed-form M-step: pi_k = s_k/n, mu_k = weighted mean,
/// sigma_k^2 = weighted mean squared residual / d, floored.
SphericalParams spherical_m_step(const Responsibilities& tau, const SampleSet& Y,
                                 double variance_floor);

/// Means at the chosen data points, uniform weights, sigma^2 = total variance / (d K).
SphericalParams point_initialization(const SampleSet& Y, const std::vector<int>& indices,
                                     double variance_floor);

BaselineReport fit_baseline_from(const SampleSet& Y, const SphericalParams& init,
                                 const Hyperparams& hp);

/// Best of hp.restarts starts; restart r draws the same indices as fit_sparse.
BaselineReport fit_baseline(const SampleSet& Y, int num_components, const Hyperparams& hp,
                            const std::optional<SphericalParams>& init = std::nullopt);

}  // namespace sparsemix
