#include "sparsemix/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "sparsemix/baseline_em.hpp"
#include "sparsemix/random.hpp"
#include "sparsemix/sparse_em.hpp"

namespace sparsemix {

std::string_view method_name(Method m) noexcept {
  return m == Method::Sparse ? "sparse" : "baseline";
}

Method parse_method(std::string_view name) {
  if (name == "sparse") return Method::Sparse;
  if (name == "baseline") return Method::Baseline;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

int best_permutation_correct(std::span<const int> assignments, std::span<const int> truth,
                             int num_components) {
  if (num_components < 1 || num_components > kMaxScoredComponents)
    throw std::invalid_argument("best_permutation_correct supports 1 <= K <= 5");
  if (assignments.size() != truth.size())
    throw std::invalid_argument("assignments and truth differ in length");
  const int K = num_components;
  // confusion[a][t] = #{i : assignments[i] = a, truth[i] = t}
  std::vector<int> confusion(static_cast<std::size_t>(K * K), 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int a = assignments[i], t = truth[i];
    if (a < 0 || a >= K || t < 0 || t >= K) throw std::invalid_argument("label out of range");
    ++confusion[static_cast<std::size_t>(a * K + t)];
  }
  std::vector<int> perm(static_cast<std::size_t>(K));
  std::iota(perm.begin(), perm.end(), 0);
  int best = 0;
  do {
    int hits = 0;
    for (int a = 0; a < K; ++a) hits += confusion[static_cast<std::size_t>(a * K + perm[static_cast<std::size_t>(a)])];
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::uint64_t fit_seed(std::uint64_t base_seed, int dim, double dilation, int replicate) {
  return mix64(replicate_seed(base_seed, dim, dilation, replicate) ^ 0x66697421ULL);
}

ReplicateRecord run_replicate(const ScenarioConfig& scenario, Method method,
                              const Hyperparams& hp, int replicate) {
  const auto t0 = std::chrono::steady_clock::now();
  const LabeledSample sample = gen_replicate(scenario, replicate);
  ReplicateRecord rec;
  rec.replicate = replicate;
  rec.data_hash = sample_hash(sample);

  Hyperparams fit_hp = hp;
  fit_hp.seed = fit_seed(scenario.seed, scenario.dim, scenario.dilation, replicate);
  const SampleSet Y(sample.points);
  try {
    std::vector<int> assignments;
    if (method == Method::Sparse) {
      FitReport rep = fit_sparse(Y, scenario.num_components, fit_hp);
      assignments = std::move(rep.assignments);
      rec.converged = rep.converged;
      rec.diagnostic = std::move(rep.diagnostic);
    } else {
      BaselineReport rep = fit_baseline(Y, scenario.num_components, fit_hp);
      assignments = std::move(rep.assignments);
      rec.converged = rep.converged;
      rec.diagnostic = std::move(rep.diagnostic);
    }
    rec.correct = best_permutation_correct(assignments, sample.labels, scenario.num_components);
  } catch (const std::runtime_error& e) {
    rec.correct = 0;
    rec.converged = false;
    rec.diagnostic = std::string("fit failed: ") + e.what();
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

McResult summarize_cell(const McCell& cell, std::vector<ReplicateRecord> records) {
  McResult result;
  result.cell = cell;
  result.per_replicate = std::move(records);
  long total = 0;
  for (const auto& rec : result.per_replicate) {
    total += rec.correct;
    if (!rec.converged) ++result.non_converged;
    if (rec.diagnostic.starts_with("fit failed")) ++result.failures;
  }
  if (!result.per_replicate.empty())
    result.ancrci = static_cast<double>(total) / static_cast<double>(result.per_replicate.size());
  return result;
}

McResult run_mc_cell(const ScenarioConfig& scenario, Method method, const Hyperparams& hp,
                     int jobs) {
  scenario.validate();
  hp.validate();
  std::vector<ReplicateRecord> records(static_cast<std::size_t>(scenario.replicates));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < scenario.replicates; r = next++)
      records[static_cast<std::size_t>(r)] = run_replicate(scenario, method, hp, r);
  };
  const int threads = std::clamp(jobs, 1, scenario.replicates);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return summarize_cell({scenario.dim, scenario.dilation, method}, std::move(records));
}

}  // namespace sparsemix
