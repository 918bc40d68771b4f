#include "sparsemix/sparse_em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sparsemix/lasso.hpp"
#include "sparsemix/random.hpp"

namespace sparsemix {

namespace {

constexpr int kMaxReseeds = 3;

double empty_threshold(const SampleSet& Y) { return 1e-8 * static_cast<double>(Y.n()); }

double component_mass(const Responsibilities& tau, int k) { return tau.tau.col(k).sum(); }

void check_component(int k, const MixtureParams& params) {
  if (k < 0 || k >= params.num_components())
    throw std::invalid_argument("component index out of range");
}

double objective(const MixtureParams& params, const SampleSet& Y, const Hyperparams& hp) {
  return penalized_objective(params, Y, resolve_lambdas(hp, params, Y));
}

double default_variance(const SampleSet& Y, int num_components, double floor) {
  const double v = Y.total_variance() / (static_cast<double>(Y.d()) * num_components);
  return std::max(v, floor);
}

// Data point whose best membership is weakest.
Eigen::Index least_claimed_point(const Responsibilities& tau) {
  Eigen::Index best = 0;
  tau.tau.rowwise().maxCoeff().minCoeff(&best);
  return best;
}

void reseed(MixtureParams& params, int k, Eigen::Index point, double variance) {
  const auto K = params.num_components();
  params.betas.col(k).setZero();
  params.betas(point, k) = 1.0;
  params.variances[k] = variance;
  params.weights[k] = 0.0;
  const double rest = params.weights.sum();
  if (rest > 0.0) params.weights *= (1.0 - 1.0 / K) / rest;
  params.weights[k] = rest > 0.0 ? 1.0 / K : 1.0;
}

}  // namespace

CycleSchedule CycleSchedule::standard(int num_components) {
  if (num_components < 1) throw std::invalid_argument("schedule needs K >= 1");
  std::vector<PartialStep> order;
  order.reserve(1 + 2 * num_components);
  order.push_back({StepKind::Weights, 0});
  for (int k = 0; k < num_components; ++k) order.push_back({StepKind::Beta, k});
  for (int k = 0; k < num_components; ++k) order.push_back({StepKind::Sigma, k});
  return CycleSchedule(std::move(order), num_components);
}

Responsibilities e_step(const MixtureParams& params, const SampleSet& Y) {
  return membership_probabilities(params, Y);
}

Vector update_weights(const Responsibilities& tau) {
  // Rows normalize, so the double sum is n up to rounding; divide by the
  // actual total to keep the simplex constraint tight.
  const Vector mass = tau.masses();
  return mass / mass.sum();
}

Vector update_beta(int k, const MixtureParams& params, const Responsibilities& tau,
                   const SampleSet& Y, const Hyperparams& hp) {
  return update_beta(k, params, tau, Y, hp, nullptr);
}

Vector update_beta(int k, const MixtureParams& params, const Responsibilities& tau,
                   const SampleSet& Y, const Hyperparams& hp, double* kkt_out) {
  check_component(k, params);
  const double s = component_mass(tau, k);
  if (s <= empty_threshold(Y)) throw EmptyClusterError(k, s);
  WeightedLassoProblem problem{Y.data(), Y.data() * tau.tau.col(k) / s, s, params.variances[k],
                               resolve_lambda(hp, params.variances[k], Y)};
  const LassoSolution sol = solve_weighted_lasso(problem, params.betas.col(k));
  if (kkt_out) *kkt_out = sol.kkt_residual;
  if (hp.relaxation == 1.0) return sol.beta;
  return hp.relaxation * sol.beta + (1.0 - hp.relaxation) * params.betas.col(k);
}

double update_sigma(int k, const MixtureParams& params, const Responsibilities& tau,
                    const SampleSet& Y, const Hyperparams& hp) {
  check_component(k, params);
  const double s = component_mass(tau, k);
  if (s <= empty_threshold(Y)) throw EmptyClusterError(k, s);
  const Vector mean = Y.data() * params.betas.col(k);
  const Vector sq = (Y.data().colwise() - mean).colwise().squaredNorm().transpose();
  const double fitted = tau.tau.col(k).dot(sq) / (static_cast<double>(Y.d()) * s);
  const double floor = resolve_variance_floor(hp, Y);
  const double target = std::max(floor, fitted);
  if (!std::isfinite(target)) throw NumericalFailure("sigma update is not finite");
  return hp.relaxation * target + (1.0 - hp.relaxation) * params.variances[k];
}

std::vector<int> hard_assignments(const Responsibilities& tau) {
  std::vector<int> out(static_cast<std::size_t>(tau.n()));
  for (Eigen::Index i = 0; i < tau.n(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < tau.num_components(); ++k)
      if (tau.tau(i, k) > tau.tau(i, best)) best = k;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> draw_initial_indices(Eigen::Index n, int num_components, Rng& rng) {
  if (num_components > n) throw std::invalid_argument("need n >= K");
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int k = 0; k < num_components; ++k) {
    const auto j = static_cast<std::size_t>(k) + rng.below(static_cast<std::uint64_t>(n - k));
    std::swap(pool[static_cast<std::size_t>(k)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(num_components));
  return pool;
}

MixtureParams indicator_initialization(const SampleSet& Y, const std::vector<int>& indices,
                                       double variance_floor) {
  const int K = static_cast<int>(indices.size());
  MixtureParams p;
  p.weights = Vector::Constant(K, 1.0 / K);
  p.betas = Matrix::Zero(Y.n(), K);
  for (int k = 0; k < K; ++k) p.betas(indices[static_cast<std::size_t>(k)], k) = 1.0;
  p.variances = Vector::Constant(K, default_variance(Y, K, variance_floor));
  return p;
}

FitReport fit_sparse_from(const SampleSet& Y, const MixtureParams& init, const Hyperparams& hp) {
  hp.validate();
  const double floor = resolve_variance_floor(hp, Y);
  init.validate(Y, floor);
  const int K = static_cast<int>(init.num_components());
  const CycleSchedule schedule = CycleSchedule::standard(K);

  FitReport report;
  report.params = init;
  report.beta_kkt_residuals = Vector::Constant(K, std::numeric_limits<double>::quiet_NaN());
  MixtureParams& params = report.params;
  auto& trace = report.objective_trace;
  trace.push_back(objective(params, Y, hp));

  std::vector<int> reseeds(static_cast<std::size_t>(K), 0);
  bool failed = false;

  for (int cycle = 1; cycle <= hp.max_cycles && !failed; ++cycle) {
    const double start = trace.back();
    bool reseeded = false;
    for (const PartialStep& step : schedule.order()) {
      Responsibilities tau = e_step(params, Y);
      const int k = step.component;
      if (step.kind != StepKind::Weights) {
        while (component_mass(tau, k) <= empty_threshold(Y)) {
          auto& count = reseeds[static_cast<std::size_t>(k)];
          if (count == kMaxReseeds) {
            report.diagnostic = "component " + std::to_string(k) + " emptied after " +
                                std::to_string(kMaxReseeds) + " re-seeds";
            failed = true;
            break;
          }
          ++count;
          const Eigen::Index point = least_claimed_point(tau);
          Eigen::Index owner = 0;
          tau.tau.row(point).maxCoeff(&owner);
          reseed(params, k, point, params.variances[owner]);
          report.reseed_points.push_back(trace.size());
          trace.push_back(objective(params, Y, hp));
          tau = e_step(params, Y);
          reseeded = true;
        }
        if (failed) break;
      }
      switch (step.kind) {
        case StepKind::Weights:
          params.weights = update_weights(tau);
          break;
        case StepKind::Beta: {
          double kkt = 0.0;
          params.betas.col(k) = update_beta(k, params, tau, Y, hp, &kkt);
          report.beta_kkt_residuals[k] = kkt;
          break;
        }
        case StepKind::Sigma:
          params.variances[k] = update_sigma(k, params, tau, Y, hp);
          break;
      }
      const double value = objective(params, Y, hp);
      if (!std::isfinite(value)) throw NumericalFailure("penalized objective is not finite");
      trace.push_back(value);
    }
    report.cycles_run = cycle;
    if (failed) break;
    const double change = std::abs(trace.back() - start) / std::max(1.0, std::abs(trace.back()));
    if (!reseeded && change < hp.tol) {
      report.converged = true;
      break;
    }
  }

  report.assignments = hard_assignments(e_step(params, Y));
  report.lambdas = resolve_lambdas(hp, params, Y);
  if (!report.converged && report.diagnostic.empty())
    report.diagnostic = "cycle budget exhausted";
  return report;
}

FitReport fit_sparse(const SampleSet& Y, int num_components, const Hyperparams& hp,
                     const std::optional<MixtureParams>& init) {
  hp.validate();
  if (num_components < 1) throw std::invalid_argument("K must be >= 1");
  if (Y.n() < num_components) throw std::invalid_argument("need at least K observations");
  if (init) return fit_sparse_from(Y, *init, hp);

  const double floor = resolve_variance_floor(hp, Y);
  std::optional<FitReport> best;
  std::optional<NumericalFailure> last_failure;
  for (int r = 0; r < hp.restarts; ++r) {
    Rng rng(derive_seed({hp.seed, static_cast<std::uint64_t>(r)}));
    const auto indices = draw_initial_indices(Y.n(), num_components, rng);
    try {
      FitReport rep = fit_sparse_from(Y, indicator_initialization(Y, indices, floor), hp);
      rep.restart_index = r;
      if (!best || rep.final_objective() > best->final_objective()) best = std::move(rep);
    } catch (const NumericalFailure& e) {
      last_failure = e;
    }
  }
  if (!best) throw *last_failure;
  return std::move(*best);
}

Matrix beta_gradient(const MixtureParams& params, const SampleSet& Y) {
  const Responsibilities t = membership_probabilities(params, Y);
  const Matrix& data = Y.data();
  const Matrix mu = params.means(Y);
  Matrix grad(Y.n(), params.num_components());
  for (Eigen::Index k = 0; k < grad.cols(); ++k) {
    // sum_i t_ik (Y_i - mu_k) = Y t_k - s_k mu_k
    const Vector pull = data * t.tau.col(k) - t.tau.col(k).sum() * mu.col(k);
    grad.col(k) = data.transpose() * pull / params.variances[k];
  }
  return grad;
}

StationarityReport theorem_stationarity_report(const FitReport& report, const SampleSet& Y,
                                               const Hyperparams& hp) {
  const MixtureParams& params = report.params;
  const Responsibilities t = membership_probabilities(params, Y);
  const Matrix grad = beta_gradient(params, Y);
  const Matrix& data = Y.data();
  const Matrix gram = data.transpose() * data;
  const auto K = params.num_components();

  StationarityReport out;
  out.residuals.resize(static_cast<std::size_t>(K));
  out.gradient_scale = Vector::Zero(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double s2 = params.variances[k];
    const double lambda = resolve_lambda(hp, s2, Y);
    const double attract = (gram * t.tau.col(k)).lpNorm<Eigen::Infinity>() / s2;
    const double spread = t.tau.col(k).sum() * (gram * params.betas.col(k)).lpNorm<Eigen::Infinity>() / s2;
    out.gradient_scale[k] = std::max({attract, spread, lambda});
    if (params.weights[k] <= 0.0) continue;
    // Ascent form: 0 in grad - lambda * d||beta||_1, i.e. the lasso residual of -grad.
    out.residuals[static_cast<std::size_t>(k)] =
        l1_stationarity_residual(-grad.col(k), params.betas.col(k), lambda);
  }
  return out;
}

}  // namespace sparsemix
