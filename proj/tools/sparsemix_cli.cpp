// sparsemix: fit a sample file, dump simulated replicates, or run Monte Carlo sweeps.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or input error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparsemix/baseline_em.hpp"
#include "sparsemix/evaluation.hpp"
#include "sparsemix/random.hpp"
#include "sparsemix/sample_io.hpp"
#include "sparsemix/sparse_em.hpp"
#include "sparsemix/sweep.hpp"

namespace fs = std::filesystem;
using namespace sparsemix;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

fs::path default_out_dir() {
  const char* env = std::getenv("SPARSEMIX_OUT");
  return env && *env ? fs::path(env) : fs::path("sparsemix_out");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Flags mirroring every Hyperparams field; applied over config values.
struct HyperFlags {
  double lambda = 0.0, lambda_scale = 1.0, tol = 0.0, variance_floor = 0.0, relaxation = 1.0;
  int max_cycles = 0, restarts = 0;
  std::uint64_t seed = 0;
  CLI::Option *o_lambda, *o_scale, *o_tol, *o_floor, *o_relax, *o_cycles, *o_restarts,
      *o_seed = nullptr;

  void add(CLI::App& app, bool with_seed) {
    o_lambda = app.add_option("--lambda", lambda, "fixed l1 weight (default: adaptive)");
    o_scale = app.add_option("--lambda-scale", lambda_scale, "multiplier of the adaptive l1 weight");
    o_tol = app.add_option("--tol", tol, "relative objective change for convergence");
    o_floor = app.add_option("--variance-floor", variance_floor, "absolute variance floor");
    o_relax = app.add_option("--relaxation", relaxation, "averaging factor in (0, 1]");
    o_cycles = app.add_option("--max-cycles", max_cycles, "full cycles per start");
    o_restarts = app.add_option("--restarts", restarts, "random starts");
    if (with_seed) o_seed = app.add_option("--seed", seed, "seed for random starts");
  }

  void apply(Hyperparams& hp) const {
    if (*o_lambda) hp.lambda = lambda;
    if (*o_scale) hp.lambda_scale = lambda_scale;
    if (*o_tol) hp.tol = tol;
    if (*o_floor) hp.variance_floor = variance_floor;
    if (*o_relax) hp.relaxation = relaxation;
    if (*o_cycles) hp.max_cycles = max_cycles;
    if (*o_restarts) hp.restarts = restarts;
    if (o_seed && *o_seed) hp.seed = seed;
  }
};

// Flags mirroring the sweep and scenario sections of the config.
struct SweepFlags {
  std::vector<int> dims;
  std::vector<double> dilations, weights, variances;
  std::vector<std::string> methods;
  int replicates = 0, n_points = 0, components = 0, jobs = 1;
  std::uint64_t seed = 0;
  std::string out, config;
  bool timings = false;
  CLI::Option *o_dims, *o_dil, *o_weights, *o_vars, *o_methods = nullptr, *o_reps, *o_n, *o_K,
      *o_jobs = nullptr, *o_seed, *o_out, *o_timings = nullptr;
  HyperFlags hyper;
  bool full = false;

  void add(CLI::App& app, bool with_fit_flags) {
    full = with_fit_flags;
    app.add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    o_dims = app.add_option("--dims", dims, "dimensions")->delimiter(',');
    o_dil = app.add_option("--dilations", dilations, "dilation factors")->delimiter(',');
    o_reps = app.add_option("--replicates", replicates, "replicates per cell");
    o_seed = app.add_option("--seed", seed, "base seed");
    o_out = app.add_option("--out", out, "output directory (default: $SPARSEMIX_OUT)");
    o_n = app.add_option("--n-points", n_points, "observations per replicate");
    o_K = app.add_option("-K,--components", components, "mixture components");
    o_weights = app.add_option("--weights", weights, "mixture weights")->delimiter(',');
    o_vars = app.add_option("--variances", variances, "component variances")->delimiter(',');
    if (full) {
      o_methods = app.add_option("--methods", methods, "sparse and/or baseline")->delimiter(',');
      o_jobs = app.add_option("--jobs", jobs, "worker threads");
      o_timings = app.add_flag("--timings", timings, "also write timings.csv");
      hyper.add(app, false);
    }
  }

  SweepSpec build() const {
    SweepSpec spec;
    spec.out_dir = default_out_dir();
    if (!config.empty()) spec = parse_sweep_config(read_text(config), spec);
    if (*o_dims) spec.dims = dims;
    if (*o_dil) spec.dilations = dilations;
    if (*o_reps) spec.replicates = replicates;
    if (*o_seed) spec.seed = seed;
    if (*o_out) spec.out_dir = out;
    if (*o_n) spec.scenario.n_points = n_points;
    if (*o_K) spec.scenario.num_components = components;
    if (*o_weights) spec.scenario.weights = weights;
    if (*o_vars) spec.scenario.variances = variances;
    if (o_methods && *o_methods) {
      spec.methods.clear();
      for (const auto& m : methods) spec.methods.push_back(parse_method(m));
    }
    if (o_jobs && *o_jobs) spec.jobs = jobs;
    if (o_timings && *o_timings) spec.record_timings = timings;
    if (full) hyper.apply(spec.hyperparams);
    spec.validate();
    return spec;
  }
};

Json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Json columns_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < m.cols(); ++k) out.push_back(vector_json(m.col(k)));
  return out;
}

Json labels_json(const std::vector<int>& a) {
  Json out = Json::array();
  for (int v : a) out.push_back(v + 1);
  return out;
}

// --- fit ---------------------------------------------------------------------

struct FitArgs {
  std::string input, method = "sparse", out, config;
  int components = 0;
  HyperFlags hyper;
};

int cmd_fit(const FitArgs& a, const CLI::Option* out_opt) {
  Hyperparams hp;
  if (!a.config.empty()) hp = parse_hyperparams_config(read_text(a.config), hp);
  a.hyper.apply(hp);
  hp.validate();
  const Method method = parse_method(a.method);

  const LoadedSample loaded = read_sample(a.input);
  const SampleSet Y(loaded.points);
  Json report;
  report["input"] = a.input;
  report["method"] = method_name(method);
  report["n"] = Y.n();
  report["d"] = Y.d();
  report["components"] = a.components;
  report["center_offset"] = vector_json(Y.center_offset());

  std::vector<int> assignments;
  std::string summary;
  if (method == Method::Sparse) {
    const FitReport fit = fit_sparse(Y, a.components, hp);
    const Matrix means = fit.params.means(Y).colwise() + Y.center_offset();
    report["converged"] = fit.converged;
    report["cycles"] = fit.cycles_run;
    report["restart"] = fit.restart_index;
    report["diagnostic"] = fit.diagnostic;
    report["objective"] = fit.final_objective();
    report["weights"] = vector_json(fit.params.weights);
    report["variances"] = vector_json(fit.params.variances);
    report["means"] = columns_json(means);
    report["betas"] = columns_json(fit.params.betas);
    report["lambdas"] = vector_json(fit.lambdas);
    report["kkt_residuals"] = vector_json(fit.beta_kkt_residuals);
    report["objective_trace"] = fit.objective_trace;
    report["reseed_points"] = fit.reseed_points;
    assignments = fit.assignments;
    summary = "objective " + format_number(fit.final_objective()) + ", cycles " +
              std::to_string(fit.cycles_run) + (fit.converged ? ", converged" : ", not converged");
  } else {
    const BaselineReport fit = fit_baseline(Y, a.components, hp);
    const Matrix means = fit.params.means.colwise() + Y.center_offset();
    report["converged"] = fit.converged;
    report["cycles"] = fit.iterations;
    report["restart"] = fit.restart_index;
    report["diagnostic"] = fit.diagnostic;
    report["objective"] = fit.final_loglik();
    report["weights"] = vector_json(fit.params.weights);
    report["variances"] = vector_json(fit.params.variances);
    report["means"] = columns_json(means);
    report["objective_trace"] = fit.loglik_trace;
    report["reseed_points"] = fit.reseed_points;
    assignments = fit.assignments;
    summary = "log-likelihood " + format_number(fit.final_loglik()) + ", iterations " +
              std::to_string(fit.iterations) + (fit.converged ? ", converged" : ", not converged");
  }
  report["assignments"] = labels_json(assignments);
  if (!loaded.labels.empty() && a.components <= kMaxScoredComponents &&
      loaded.num_components <= a.components) {
    const int correct = best_permutation_correct(assignments, loaded.labels, a.components);
    report["correct"] = correct;
    summary += ", correct " + std::to_string(correct) + "/" + std::to_string(Y.n());
  }

  const fs::path dir = *out_opt ? fs::path(a.out) : default_out_dir();
  fs::create_directories(dir);
  const fs::path path = dir / "fit_report.json";
  std::ofstream(path, std::ios::binary) << report.dump(2) << '\n';
  std::cout << method_name(method) << " K=" << a.components << ": " << summary << " -> "
            << path.string() << '\n';
  return 0;
}

// --- simulate ----------------------------------------------------------------

int cmd_simulate(const SweepFlags& f) {
  const SweepSpec spec = f.build();
  fs::create_directories(spec.out_dir);
  int files = 0;
  for (int d : spec.dims)
    for (double dil : spec.dilations) {
      const ScenarioConfig sc = spec.cell_scenario(d, dil);
      for (int r = 0; r < spec.replicates; ++r) {
        const auto name = "sample_d" + std::to_string(d) + "_dil" + format_number(dil) + "_r" +
                          std::to_string(r) + ".txt";
        write_labeled_sample((spec.out_dir / name).string(), gen_replicate(sc, r),
                             sc.num_components);
        ++files;
      }
    }
  std::cout << "wrote " << files << " samples to " << spec.out_dir.string() << '\n';
  return 0;
}

// --- sweep -------------------------------------------------------------------

int cmd_sweep(const SweepFlags& f) {
  const SweepSpec spec = f.build();
  const SweepResult result = run_sweep(spec);
  write_sweep_outputs(spec, result);
  for (const auto& c : result.cells)
    std::cout << method_name(c.cell.method) << " d=" << c.cell.dim
              << " dilation=" << format_number(c.cell.dilation)
              << " ancrci=" << format_number(c.ancrci) << " non_converged=" << c.non_converged
              << " failures=" << c.failures << '\n';
  std::cout << "outputs in " << spec.out_dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse self-regression Gaussian mixtures"};
  app.require_subcommand(1);

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit one sample file");
  fit_cmd->add_option("input", fit.input, "sample file")->required();
  fit_cmd->add_option("-K,--components", fit.components, "mixture components")
      ->required()
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--method", fit.method, "sparse or baseline");
  fit_cmd->add_option("--config", fit.config, "JSON config (hyperparams section)")
      ->check(CLI::ExistingFile);
  CLI::Option* fit_out = fit_cmd->add_option("--out", fit.out, "output directory");
  fit.hyper.add(*fit_cmd, true);

  SweepFlags sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "write simulated replicates");
  sim.add(*sim_cmd, false);

  SweepFlags sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo sweep");
  sweep.add(*sweep_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, fit_out);
    if (*sim_cmd) return cmd_simulate(sim);
    return cmd_sweep(sweep);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const EmptyClusterError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
