#pragma once

// Class-recovery scoring and Monte Carlo cells.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparsemix/model.hpp"
#include "sparsemix/simulation.hpp"

namespace sparsemix {

enum class Method { Sparse, Baseline };

std::string_view method_name(Method m) noexcept;
/// Throws std::invalid_argument on unknown names.
Method parse_method(std::string_view name);

inline constexpr int kMaxScoredComponents = 5;

/// max over label permutations p of #{i : p(assignments[i]) == truth[i]}.
/// Labels are 0-based and must lie in [0, K); K is capped at 5.
int best_permutation_correct(std::span<const int> assignments, std::span<const int> truth,
                             int num_components);

struct ReplicateRecord {
  int replicate = 0;
  int correct = 0;
  bool converged = false;
  double seconds = 0.0;
  std::string data_hash;
  std::string diagnostic;
};

struct McCell {
  int dim = 0;
  double dilation = 0.0;
  Method method = Method::Sparse;
};

struct McResult {
  McCell cell;
  std::vector<ReplicateRecord> per_replicate;  // ordered by replicate index
  double ancrci = 0.0;
  int non_converged = 0;
  int failures = 0;  // replicates whose fit threw; scored as 0 correct
};

/// Fit seed used for replicate r; identical for every method so paired fits
/// share their random starts.
std::uint64_t fit_seed(std::uint64_t base_seed, int dim, double dilation, int replicate);

/// Generates, fits and scores one replicate.
ReplicateRecord run_replicate(const ScenarioConfig& scenario, Method method,
                              const Hyperparams& hp, int replicate);

/// Aggregates replicate records (already ordered by index) into a cell result.
McResult summarize_cell(const McCell& cell, std::vector<ReplicateRecord> records);

/// All replicates of one cell, spread over `jobs` worker threads.
McResult run_mc_cell(const ScenarioConfig& scenario, Method method, const Hyperparams& hp,
                     int jobs = 1);

}  // namespace sparsemix
