#pragma once

// Seeded generator for the Monte Carlo design: n points from a K-component
// spherical mixture whose centers are drawn uniformly in a dilated unit cube.

#include <cstdint>
#include <vector>

#include "sparsemix/model.hpp"

namespace sparsemix {

class Rng;

struct ScenarioConfig {
  int dim = 2;
  int n_points = 10;
  int num_components = 3;
  std::vector<double> weights{0.3, 0.2, 0.5};
  std::vector<double> variances{5.0, 7.0, 10.0};
  double dilation = 10.0;
  int replicates = 1000;
  std::uint64_t seed = 0;

  /// Centers live in [-half_width, half_width]^dim.
  double cube_half_width() const noexcept { return dilation / 2.0; }
  void validate() const;
};

struct LabeledSample {
  Matrix points;            // dim x n, one observation per column
  std::vector<int> labels;  // 0-based true components
  Matrix centers;           // dim x K
};

/// K independent draws uniform on [-dilation/2, dilation/2]^dim (columns).
Matrix gen_centers(const ScenarioConfig& config, Rng& rng);

/// Label ~ Multinomial(weights), point ~ N(center_label, variance_label I).
LabeledSample gen_sample(const ScenarioConfig& config, const Matrix& centers, Rng& rng);

/// Seed for replicate r of the (dim, dilation) cell under `base_seed`.
std::uint64_t replicate_seed(std::uint64_t base_seed, int dim, double dilation, int replicate);

/// Centers and sample for one replicate; depends only on (config, replicate).
LabeledSample gen_replicate(const ScenarioConfig& config, int replicate);

/// FNV-1a over the raw bytes of the points and labels, as 16 hex digits.
std::string sample_hash(const LabeledSample& sample);

}  // namespace sparsemix
