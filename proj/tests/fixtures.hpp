#pragma once

#include "oracles.hpp"
#include "sparsemix/model.hpp"

namespace fixture {

using namespace sparsemix;

inline SampleSet random_sample(oracle::Gen& g, int d, int n, double scale = 1.0) {
  return SampleSet(scale * g.gauss(d, n));
}

// Valid parameters with small betas so means stay near the data.
inline MixtureParams random_params(oracle::Gen& g, const SampleSet& Y, int K) {
  MixtureParams p;
  p.weights = g.simplex(K);
  p.betas = 0.3 * g.gauss(static_cast<int>(Y.n()), K);
  p.variances.resize(K);
  for (int k = 0; k < K; ++k) p.variances[k] = g.unif(0.5, 3.0);
  return p;
}

// Clusters around far-apart centers, one observation per column.
inline Matrix separated_points(oracle::Gen& g, int d, const std::vector<int>& sizes,
                               double spacing, double sd, std::vector<int>* labels = nullptr) {
  int n = 0;
  for (int s : sizes) n += s;
  Matrix pts(d, n);
  int col = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    Vector center = Vector::Zero(d);
    center[static_cast<Eigen::Index>(k % static_cast<std::size_t>(d))] = spacing * (1.0 + static_cast<double>(k / static_cast<std::size_t>(d)));
    if (k % 2 == 1) center = -center;
    for (int i = 0; i < sizes[k]; ++i, ++col) {
      for (int j = 0; j < d; ++j) pts(j, col) = center[j] + sd * g.norm();
      if (labels) labels->push_back(static_cast<int>(k));
    }
  }
  return pts;
}

}  // namespace fixture
