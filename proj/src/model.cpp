#include "sparsemix/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace sparsemix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

// log sum_k exp(v_k), with the max shifted out.
double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

Eigen::RowVectorXd log_weights(const Vector& weights) {
  Eigen::RowVectorXd out(weights.size());
  for (Eigen::Index k = 0; k < weights.size(); ++k)
    out[k] = weights[k] > 0.0 ? std::log(weights[k]) : -kInf;
  return out;
}

}  // namespace

SampleSet::SampleSet(const Matrix& columns) {
  require(columns.rows() >= 1 && columns.cols() >= 1, "sample set needs n >= 1 and d >= 1");
  require(columns.allFinite(), "sample set contains non-finite entries");
  offset_ = columns.rowwise().mean();
  data_ = columns.colwise() - offset_;
  total_variance_ = data_.squaredNorm() / static_cast<double>(data_.cols());
  max_column_norm_ = data_.colwise().norm().maxCoeff();
}

void MixtureParams::validate(const SampleSet& Y, double variance_floor) const {
  const auto K = num_components();
  require(K >= 1, "mixture needs at least one component");
  require(betas.rows() == Y.n() && betas.cols() == K, "betas must be n x K");
  require(variances.size() == K, "variances must have K entries");
  require(weights.allFinite() && betas.allFinite() && variances.allFinite(),
          "mixture parameters must be finite");
  require((weights.array() >= 0.0).all(), "weights must be non-negative");
  require(std::abs(weights.sum() - 1.0) <= 1e-12 * static_cast<double>(K),
          "weights must sum to one");
  require((variances.array() > 0.0).all(), "variances must be positive");
  require((variances.array() >= variance_floor).all(), "variance below floor");
}

void Hyperparams::validate() const {
  require(!lambda || (std::isfinite(*lambda) && *lambda >= 0.0), "lambda must be >= 0");
  require(tol > 0.0, "tol must be positive");
  require(!variance_floor || *variance_floor > 0.0, "variance floor must be positive");
  require(max_cycles >= 1, "max_cycles must be >= 1");
  require(restarts >= 1, "restarts must be >= 1");
  require(lambda_scale >= 0.0 && std::isfinite(lambda_scale), "lambda_scale must be >= 0");
  require(relaxation > 0.0 && relaxation <= 1.0, "relaxation must lie in (0, 1]");
}

double default_variance_floor(const SampleSet& Y) {
  const double per_coord = Y.total_variance() / static_cast<double>(Y.d());
  // Constant data still needs a strictly positive floor.
  return per_coord > 0.0 ? 1e-4 * per_coord : 1e-12;
}

double resolve_variance_floor(const Hyperparams& hp, const SampleSet& Y) {
  return hp.variance_floor ? *hp.variance_floor : default_variance_floor(Y);
}

double resolve_lambda(const Hyperparams& hp, double sigma2, const SampleSet& Y) {
  if (hp.lambda) return *hp.lambda;
  // sigma * sqrt(2 log p) on the least-squares scale, times the column norm of
  // the unnormalized design, divided by sigma^2 to reach the likelihood scale.
  const double n = static_cast<double>(Y.n());
  return hp.lambda_scale * std::sqrt(2.0 * std::log(n)) * Y.max_column_norm() / std::sqrt(sigma2);
}

Vector resolve_lambdas(const Hyperparams& hp, const MixtureParams& params, const SampleSet& Y) {
  Vector out(params.num_components());
  for (Eigen::Index k = 0; k < out.size(); ++k)
    out[k] = resolve_lambda(hp, params.variances[k], Y);
  return out;
}

double component_log_density(const Vector& y, const Vector& beta, double sigma2,
                             const SampleSet& Y) {
  require(y.size() == Y.d() && beta.size() == Y.n(), "dimension mismatch");
  require(y.allFinite() && beta.allFinite() && std::isfinite(sigma2),
          "component_log_density: non-finite input");
  require(sigma2 > 0.0, "component_log_density: sigma2 must be positive");
  const double r2 = (y - Y.data() * beta).squaredNorm();
  const double d = static_cast<double>(Y.d());
  return -0.5 * d * std::log(2.0 * std::numbers::pi * sigma2) - r2 / (2.0 * sigma2);
}

Matrix component_log_densities(const MixtureParams& params, const SampleSet& Y) {
  const Matrix& data = Y.data();
  const Matrix mu = params.means(Y);
  const double d = static_cast<double>(Y.d());
  Matrix out(Y.n(), params.num_components());
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    const double s2 = params.variances[k];
    const double norm = -0.5 * d * std::log(2.0 * std::numbers::pi * s2);
    out.col(k) =
        (norm - (data.colwise() - mu.col(k)).colwise().squaredNorm().array() / (2.0 * s2))
            .transpose();
  }
  return out;
}

double self_regression_log_likelihood(const MixtureParams& params, const SampleSet& Y) {
  const Matrix logf = component_log_densities(params, Y);
  const Eigen::RowVectorXd logpi = log_weights(params.weights);
  double total = 0.0;
  for (Eigen::Index i = 0; i < logf.rows(); ++i) total += log_sum_exp(logf.row(i) + logpi);
  return total;
}

double penalized_objective(const MixtureParams& params, const SampleSet& Y, double lambda) {
  return penalized_objective(params, Y, Vector::Constant(params.num_components(), lambda));
}

double penalized_objective(const MixtureParams& params, const SampleSet& Y,
                           const Vector& lambdas) {
  require(lambdas.size() == params.num_components(), "one lambda per component");
  require((lambdas.array() >= 0.0).all(), "lambda must be >= 0");
  double penalty = 0.0;
  for (Eigen::Index k = 0; k < lambdas.size(); ++k)
    if (lambdas[k] != 0.0) penalty += lambdas[k] * params.betas.col(k).lpNorm<1>();
  return self_regression_log_likelihood(params, Y) - penalty;
}

Responsibilities membership_probabilities(const MixtureParams& params, const SampleSet& Y) {
  Matrix logp = component_log_densities(params, Y);
  logp.rowwise() += log_weights(params.weights);
  for (Eigen::Index i = 0; i < logp.rows(); ++i) {
    const double lse = log_sum_exp(logp.row(i));
    if (!std::isfinite(lse)) throw NumericalFailure("membership row is not normalizable");
    logp.row(i) = (logp.row(i).array() - lse).exp();
  }
  return {std::move(logp)};
}

double q_function(const MixtureParams& params, const Responsibilities& tau, const SampleSet& Y) {
  require(tau.n() == Y.n() && tau.num_components() == params.num_components(),
          "responsibilities shape mismatch");
  const Matrix logf = component_log_densities(params, Y);
  double total = 0.0;
  for (Eigen::Index k = 0; k < logf.cols(); ++k) {
    const double pi = params.weights[k];
    for (Eigen::Index i = 0; i < logf.rows(); ++i) {
      const double t = tau.tau(i, k);
      if (t == 0.0) continue;
      if (pi == 0.0) return -kInf;
      total += t * (std::log(pi) + logf(i, k));
    }
  }
  return total;
}

double kullback_penalty(const Responsibilities& t_theta, const Responsibilities& t_theta_bar) {
  require(t_theta.tau.rows() == t_theta_bar.tau.rows() &&
              t_theta.tau.cols() == t_theta_bar.tau.cols(),
          "responsibilities shape mismatch");
  double total = 0.0;
  for (Eigen::Index k = 0; k < t_theta.tau.cols(); ++k) {
    for (Eigen::Index i = 0; i < t_theta.tau.rows(); ++i) {
      const double p = t_theta_bar.tau(i, k);
      if (p == 0.0) continue;
      const double q = t_theta.tau(i, k);
      if (q == 0.0) return kInf;
      total += p * std::log(p / q);
    }
  }
  // Rounding can leave a tiny negative value for equal arguments.
  return std::max(total, 0.0);
}

double kullback_penalty(const MixtureParams& theta, const MixtureParams& theta_bar,
                        const SampleSet& Y) {
  return kullback_penalty(membership_probabilities(theta, Y),
                          membership_probabilities(theta_bar, Y));
}

}  // namespace sparsemix
