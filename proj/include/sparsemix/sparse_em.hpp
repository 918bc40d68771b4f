#pragma once

// Space-alternating l1-penalized EM for the self-regression mixture.
//
// Each partial step recomputes the responsibilities at the current parameters
// and then maximizes the penalized Q-function over a single block: the weight
// vector, one beta_k, or one sigma_k^2. A full cycle visits
// Weights, Beta(0..K-1), Sigma(0..K-1) in that order.

#include <optional>
#include <string>
#include <vector>

#include "sparsemix/model.hpp"

namespace sparsemix {

class Rng;

enum class StepKind { Weights, Beta, Sigma };

struct PartialStep {
  StepKind kind;
  int component;  // ignored for Weights

  friend bool operator==(const PartialStep&, const PartialStep&) = default;
};

class CycleSchedule {
 public:
  /// Weights, then Beta(k) for every k, then Sigma(k) for every k.
  static CycleSchedule standard(int num_components);

  const std::vector<PartialStep>& order() const noexcept { return order_; }
  int num_components() const noexcept { return num_components_; }

 private:
  CycleSchedule(std::vector<PartialStep> order, int k) : order_(std::move(order)), num_components_(k) {}
  std::vector<PartialStep> order_;
  int num_components_;
};

struct FitReport {
  MixtureParams params;
  // Penalized objective after every partial step; entry 0 is the starting point.
  std::vector<double> objective_trace;
  // Trace indices at which a cluster was re-seeded; monotonicity restarts there.
  std::vector<std::size_t> reseed_points;
  Vector beta_kkt_residuals;  // lasso subproblem residual of each last beta-step
  Vector lambdas;             // l1 weights in effect at the final parameters
  int cycles_run = 0;
  bool converged = false;
  std::vector<int> assignments;
  int restart_index = 0;
  std::string diagnostic;

  double final_objective() const { return objective_trace.back(); }
};

Responsibilities e_step(const MixtureParams& params, const SampleSet& Y);

/// pi_k = s_k / n.
Vector update_weights(const Responsibilities& tau);

/// Weighted lasso fit of beta_k, warm-started at the current beta_k. Throws
/// EmptyClusterError if the component's mass is below 1e-8 * n.
Vector update_beta(int k, const MixtureParams& params, const Responsibilities& tau,
                   const SampleSet& Y, const Hyperparams& hp);

/// Same as update_beta but also reports the subproblem's KKT residual.
Vector update_beta(int k, const MixtureParams& params, const Responsibilities& tau,
                   const SampleSet& Y, const Hyperparams& hp, double* kkt_out);

/// max(floor, sum_i tau_ik ||Y_i - Y beta_k||^2 / (d s_k)).
double update_sigma(int k, const MixtureParams& params, const Responsibilities& tau,
                    const SampleSet& Y, const Hyperparams& hp);

/// argmax_k of each row, lowest index on ties.
std::vector<int> hard_assignments(const Responsibilities& tau);

/// Distinct indices in [0, n) chosen uniformly; shared by both estimators so
/// that paired fits start from equivalent points.
std::vector<int> draw_initial_indices(Eigen::Index n, int num_components, Rng& rng);

/// beta_k = e_{j_k}, uniform weights, sigma^2 = total variance / (d K), floored.
MixtureParams indicator_initialization(const SampleSet& Y, const std::vector<int>& indices,
                                       double variance_floor);

/// Single start from `init`. `init` must satisfy MixtureParams::validate.
FitReport fit_sparse_from(const SampleSet& Y, const MixtureParams& init, const Hyperparams& hp);

/// Best of hp.restarts random starts, or a single start from `init` when given.
/// Throws std::invalid_argument when n < K.
FitReport fit_sparse(const SampleSet& Y, int num_components, const Hyperparams& hp,
                     const std::optional<MixtureParams>& init = std::nullopt);

/// Gradient of the unpenalized self-regression log-likelihood with respect to
/// every beta_k: column k is sum_i t_ik (1/sigma_k^2) Y^T (Y_i - Y beta_k).
Matrix beta_gradient(const MixtureParams& params, const SampleSet& Y);

struct StationarityReport {
  // Per component; empty for components with zero weight.
  std::vector<std::optional<double>> residuals;
  // Magnitude of the gradient terms that cancel at stationarity.
  Vector gradient_scale;
};

/// l1 subgradient stationarity of the penalized likelihood over each beta block.
StationarityReport theorem_stationarity_report(const FitReport& report, const SampleSet& Y,
                                               const Hyperparams& hp);

}  // namespace sparsemix
