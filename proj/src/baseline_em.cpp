#include "sparsemix/baseline_em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sparsemix/random.hpp"
#include "sparsemix/sparse_em.hpp"

namespace sparsemix {

namespace {

constexpr int kMaxReseeds = 3;

Matrix log_joint(const SphericalParams& params, const SampleSet& Y) {
  const Matrix& data = Y.data();
  const double d = static_cast<double>(Y.d());
  Matrix out(Y.n(), params.num_components());
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    const double s2 = params.variances[k];
    const double logpi = params.weights[k] > 0.0 ? std::log(params.weights[k])
                                                  : -std::numeric_limits<double>::infinity();
    const double norm = logpi - 0.5 * d * std::log(2.0 * std::numbers::pi * s2);
    out.col(k) = (norm - (data.colwise() - params.means.col(k)).colwise().squaredNorm().array() /
                             (2.0 * s2))
                     .transpose();
  }
  return out;
}

double default_variance(const SampleSet& Y, Eigen::Index K, double floor) {
  return std::max(Y.total_variance() / (static_cast<double>(Y.d()) * static_cast<double>(K)), floor);
}

}  // namespace

double spherical_log_likelihood(const SphericalParams& params, const SampleSet& Y) {
  const Matrix lj = log_joint(params, Y);
  double total = 0.0;
  for (Eigen::Index i = 0; i < lj.rows(); ++i) {
    const double top = lj.row(i).maxCoeff();
    total += top + std::log((lj.row(i).array() - top).exp().sum());
  }
  return total;
}

Responsibilities spherical_e_step(const SphericalParams& params, const SampleSet& Y) {
  Matrix lj = log_joint(params, Y);
  for (Eigen::Index i = 0; i < lj.rows(); ++i) {
    const double top = lj.row(i).maxCoeff();
    if (!std::isfinite(top)) throw NumericalFailure("membership row is not normalizable");
    lj.row(i) = (lj.row(i).array() - top).exp();
    lj.row(i) /= lj.row(i).sum();
  }
  return {std::move(lj)};
}

SphericalParams spherical_m_step(const Responsibilities& tau, const SampleSet& Y,
                                 double variance_floor) {
  const Matrix& data = Y.data();
  const Vector mass = tau.masses();
  const auto K = tau.num_components();
  SphericalParams p;
  p.weights = mass / mass.sum();
  p.means = (data * tau.tau).array().rowwise() / mass.transpose().array();
  p.variances.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const Vector sq = (data.colwise() - p.means.col(k)).colwise().squaredNorm().transpose();
    p.variances[k] = std::max(variance_floor,
                              tau.tau.col(k).dot(sq) / (static_cast<double>(Y.d()) * mass[k]));
  }
  if (!p.means.allFinite() || !p.variances.allFinite())
    throw NumericalFailure("M-step produced non-finite parameters");
  return p;
}

SphericalParams point_initialization(const SampleSet& Y, const std::vector<int>& indices,
                                     double variance_floor) {
  const auto K = static_cast<Eigen::Index>(indices.size());
  SphericalParams p;
  p.weights = Vector::Constant(K, 1.0 / static_cast<double>(K));
  p.means.resize(Y.d(), K);
  for (Eigen::Index k = 0; k < K; ++k) p.means.col(k) = Y.data().col(indices[static_cast<std::size_t>(k)]);
  p.variances = Vector::Constant(K, default_variance(Y, K, variance_floor));
  return p;
}

BaselineReport fit_baseline_from(const SampleSet& Y, const SphericalParams& init,
                                 const Hyperparams& hp) {
  hp.validate();
  const double floor = resolve_variance_floor(hp, Y);
  const auto K = init.num_components();
  if (K < 1 || init.means.rows() != Y.d() || init.means.cols() != K || init.variances.size() != K)
    throw std::invalid_argument("baseline initialization has inconsistent shapes");

  BaselineReport report;
  report.params = init;
  SphericalParams& params = report.params;
  report.loglik_trace.push_back(spherical_log_likelihood(params, Y));
  const double empty = 1e-8 * static_cast<double>(Y.n());
  std::vector<int> reseeds(static_cast<std::size_t>(K), 0);

  for (int it = 1; it <= hp.max_cycles; ++it) {
    const double start = report.loglik_trace.back();
    Responsibilities tau = spherical_e_step(params, Y);
    bool reseeded = false;
    bool failed = false;
    for (Eigen::Index k = 0; k < K && !failed; ++k) {
      while (tau.tau.col(k).sum() <= empty) {
        auto& count = reseeds[static_cast<std::size_t>(k)];
        if (count == kMaxReseeds) {
          report.diagnostic = "component " + std::to_string(k) + " emptied after " +
                              std::to_string(kMaxReseeds) + " re-seeds";
          failed = true;
          break;
        }
        ++count;
        Eigen::Index point = 0;
        tau.tau.rowwise().maxCoeff().minCoeff(&point);
        Eigen::Index owner = 0;
        tau.tau.row(point).maxCoeff(&owner);
        params.means.col(k) = Y.data().col(point);
        params.variances[k] = params.variances[owner];
        params.weights[k] = 0.0;
        const double rest = params.weights.sum();
        if (rest > 0.0) params.weights *= (1.0 - 1.0 / static_cast<double>(K)) / rest;
        params.weights[k] = rest > 0.0 ? 1.0 / static_cast<double>(K) : 1.0;
        report.reseed_points.push_back(report.loglik_trace.size());
        report.loglik_trace.push_back(spherical_log_likelihood(params, Y));
        tau = spherical_e_step(params, Y);
        reseeded = true;
      }
    }
    report.iterations = it;
    if (failed) break;
    params = spherical_m_step(tau, Y, floor);
    const double value = spherical_log_likelihood(params, Y);
    if (!std::isfinite(value)) throw NumericalFailure("log-likelihood is not finite");
    report.loglik_trace.push_back(value);
    const double change = std::abs(value - start) / std::max(1.0, std::abs(value));
    if (!reseeded && change < hp.tol) {
      report.converged = true;
      break;
    }
  }

  report.assignments = hard_assignments(spherical_e_step(params, Y));
  if (!report.converged && report.diagnostic.empty())
    report.diagnostic = "iteration budget exhausted";
  return report;
}

BaselineReport fit_baseline(const SampleSet& Y, int num_components, const Hyperparams& hp,
                            const std::optional<SphericalParams>& init) {
  hp.validate();
  if (num_components < 1) throw std::invalid_argument("K must be >= 1");
  if (Y.n() < num_components) throw std::invalid_argument("need at least K observations");
  if (init) return fit_baseline_from(Y, *init, hp);

  const double floor = resolve_variance_floor(hp, Y);
  std::optional<BaselineReport> best;
  std::optional<NumericalFailure> last_failure;
  for (int r = 0; r < hp.restarts; ++r) {
    Rng rng(derive_seed({hp.seed, static_cast<std::uint64_t>(r)}));
    const auto indices = draw_initial_indices(Y.n(), num_components, rng);
    try {
      BaselineReport rep = fit_baseline_from(Y, point_initialization(Y, indices, floor), hp);
      rep.restart_index = r;
      if (!best || rep.final_loglik() > best->final_loglik()) best = std::move(rep);
    } catch (const NumericalFailure& e) {
      last_failure = e;
    }
  }
  if (!best) throw *last_failure;
  return std::move(*best);
}

}  // namespace sparsemix
