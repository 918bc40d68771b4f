#include "sparsemix/simulation.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "sparsemix/random.hpp"

namespace sparsemix {

void ScenarioConfig::validate() const {
  const auto K = static_cast<std::size_t>(num_components);
  if (dim < 1 || n_points < 1 || num_components < 1)
    throw std::invalid_argument("scenario: dim, n_points and K must be >= 1");
  if (weights.size() != K || variances.size() != K)
    throw std::invalid_argument("scenario: need one weight and one variance per component");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("scenario: weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("scenario: weights must sum to 1");
  for (double v : variances)
    if (!(v > 0.0)) throw std::invalid_argument("scenario: variances must be positive");
  if (!(dilation > 0.0)) throw std::invalid_argument("scenario: dilation must be positive");
  if (replicates < 1) throw std::invalid_argument("scenario: replicates must be >= 1");
}

Matrix gen_centers(const ScenarioConfig& config, Rng& rng) {
  Matrix centers(config.dim, config.num_components);
  for (Eigen::Index k = 0; k < centers.cols(); ++k)
    for (Eigen::Index j = 0; j < centers.rows(); ++j)
      centers(j, k) = config.dilation * rng.uniform(-0.5, 0.5);
  return centers;
}

LabeledSample gen_sample(const ScenarioConfig& config, const Matrix& centers, Rng& rng) {
  LabeledSample out;
  out.centers = centers;
  out.points.resize(config.dim, config.n_points);
  out.labels.resize(static_cast<std::size_t>(config.n_points));
  const int K = config.num_components;
  for (int i = 0; i < config.n_points; ++i) {
    const double u = rng.uniform();
    int k = 0;
    double acc = config.weights[0];
    while (k + 1 < K && u >= acc) acc += config.weights[static_cast<std::size_t>(++k)];
    out.labels[static_cast<std::size_t>(i)] = k;
    const double sd = std::sqrt(config.variances[static_cast<std::size_t>(k)]);
    for (int j = 0; j < config.dim; ++j) out.points(j, i) = centers(j, k) + sd * rng.normal();
  }
  return out;
}

std::uint64_t replicate_seed(std::uint64_t base_seed, int dim, double dilation, int replicate) {
  return derive_seed({base_seed, static_cast<std::uint64_t>(dim), double_key(dilation),
                      static_cast<std::uint64_t>(replicate)});
}

LabeledSample gen_replicate(const ScenarioConfig& config, int replicate) {
  config.validate();
  Rng rng(replicate_seed(config.seed, config.dim, config.dilation, replicate));
  const Matrix centers = gen_centers(config, rng);
  return gen_sample(config, centers, rng);
}

std::string sample_hash(const LabeledSample& sample) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  feed(static_cast<std::uint64_t>(sample.points.rows()));
  feed(static_cast<std::uint64_t>(sample.points.cols()));
  for (Eigen::Index i = 0; i < sample.points.size(); ++i)
    feed(std::bit_cast<std::uint64_t>(sample.points.data()[i]));
  for (int label : sample.labels) feed(static_cast<std::uint64_t>(label));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sparsemix
