#include "sparsemix/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sparsemix/random.hpp"

namespace sparsemix {

namespace {

using Json = nlohmann::ordered_json;

void check_keys(const Json& obj, const char* section, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw std::invalid_argument(std::string(section) + " must be an object");
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!known.contains(key))
      throw std::invalid_argument("unknown key '" + key + "' in section '" + section + "'");
}

template <typename T>
void read_into(const Json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

void read_optional(const Json& obj, const char* key, std::optional<double>& dst) {
  if (!obj.contains(key)) return;
  const Json& v = obj.at(key);
  dst = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
}

Hyperparams hyperparams_from(const Json& h, Hyperparams hp) {
  check_keys(h, "hyperparams",
             {"lambda", "lambda_scale", "max_cycles", "tol", "variance_floor", "restarts", "seed",
              "relaxation"});
  read_optional(h, "lambda", hp.lambda);
  read_into(h, "lambda_scale", hp.lambda_scale);
  read_into(h, "max_cycles", hp.max_cycles);
  read_into(h, "tol", hp.tol);
  read_optional(h, "variance_floor", hp.variance_floor);
  read_into(h, "restarts", hp.restarts);
  read_into(h, "seed", hp.seed);
  read_into(h, "relaxation", hp.relaxation);
  return hp;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json hyperparams_json(const Hyperparams& hp) {
  Json h;
  h["lambda"] = optional_json(hp.lambda);
  h["lambda_scale"] = hp.lambda_scale;
  h["max_cycles"] = hp.max_cycles;
  h["tol"] = hp.tol;
  h["variance_floor"] = optional_json(hp.variance_floor);
  h["restarts"] = hp.restarts;
  h["seed"] = hp.seed;
  h["relaxation"] = hp.relaxation;
  return h;
}

Json spec_json(const SweepSpec& spec) {
  Json sweep;
  sweep["dims"] = spec.dims;
  sweep["dilations"] = spec.dilations;
  std::vector<std::string> methods;
  for (Method m : spec.methods) methods.emplace_back(method_name(m));
  sweep["methods"] = methods;
  sweep["replicates"] = spec.replicates;
  sweep["seed"] = spec.seed;
  sweep["out"] = spec.out_dir.string();
  sweep["jobs"] = spec.jobs;
  sweep["record_timings"] = spec.record_timings;
  Json scenario;
  scenario["n_points"] = spec.scenario.n_points;
  scenario["num_components"] = spec.scenario.num_components;
  scenario["weights"] = spec.scenario.weights;
  scenario["variances"] = spec.scenario.variances;
  Json root;
  root["sweep"] = sweep;
  root["scenario"] = scenario;
  root["hyperparams"] = hyperparams_json(spec.hyperparams);
  return root;
}

Json parse_root(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  check_keys(root, "top level", {"sweep", "scenario", "hyperparams"});
  return root;
}

// Dilation as it appears in file names and column headers.
std::string cube_label(double dilation) {
  const std::string h = format_number(dilation / 2.0);
  return "[-" + h + ":" + h + "]";
}

std::string cell_stem(const McCell& cell) {
  return std::string(method_name(cell.method)) + "_d" + std::to_string(cell.dim) + "_dil" +
         format_number(cell.dilation);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void SweepSpec::validate() const {
  if (dims.empty() || dilations.empty() || methods.empty())
    throw std::invalid_argument("dims, dilations and methods must be non-empty");
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  for (int d : dims)
    for (double dil : dilations) cell_scenario(d, dil).validate();
  hyperparams.validate();
}

ScenarioConfig SweepSpec::cell_scenario(int dim, double dilation) const {
  ScenarioConfig s = scenario;
  s.dim = dim;
  s.dilation = dilation;
  s.replicates = replicates;
  s.seed = seed;
  return s;
}

SweepSpec parse_sweep_config(const std::string& text, SweepSpec spec) {
  const Json root = parse_root(text);
  try {
    if (root.contains("sweep")) {
      const Json& s = root.at("sweep");
      check_keys(s, "sweep",
                 {"dims", "dilations", "methods", "replicates", "seed", "out", "jobs",
                  "record_timings"});
      read_into(s, "dims", spec.dims);
      read_into(s, "dilations", spec.dilations);
      if (s.contains("methods")) {
        spec.methods.clear();
        for (const auto& m : s.at("methods")) spec.methods.push_back(parse_method(m.get<std::string>()));
      }
      read_into(s, "replicates", spec.replicates);
      read_into(s, "seed", spec.seed);
      if (s.contains("out")) spec.out_dir = s.at("out").get<std::string>();
      read_into(s, "jobs", spec.jobs);
      read_into(s, "record_timings", spec.record_timings);
    }
    if (root.contains("scenario")) {
      const Json& s = root.at("scenario");
      check_keys(s, "scenario", {"n_points", "num_components", "weights", "variances"});
      read_into(s, "n_points", spec.scenario.n_points);
      read_into(s, "num_components", spec.scenario.num_components);
      read_into(s, "weights", spec.scenario.weights);
      read_into(s, "variances", spec.scenario.variances);
    }
    if (root.contains("hyperparams"))
      spec.hyperparams = hyperparams_from(root.at("hyperparams"), spec.hyperparams);
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return spec;
}

SweepSpec load_sweep_config(const std::filesystem::path& path, SweepSpec base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_sweep_config(text.str(), std::move(base));
}

std::string sweep_config_text(const SweepSpec& spec) { return spec_json(spec).dump(2) + "\n"; }

Hyperparams parse_hyperparams_config(const std::string& text, Hyperparams base) {
  const Json root = parse_root(text);
  if (!root.contains("hyperparams")) return base;
  try {
    return hyperparams_from(root.at("hyperparams"), std::move(base));
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<McCell> cells;
  for (Method m : spec.methods)
    for (int d : spec.dims)
      for (double dil : spec.dilations) cells.push_back({d, dil, m});

  const auto R = static_cast<std::size_t>(spec.replicates);
  const std::size_t total = cells.size() * R;
  std::vector<ReplicateRecord> records(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < total; t = next++) {
      const McCell& c = cells[t / R];
      records[t] = run_replicate(spec.cell_scenario(c.dim, c.dilation), c.method, spec.hyperparams,
                                 static_cast<int>(t % R));
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(spec.jobs), total);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  SweepResult result;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<ReplicateRecord> cell_records(records.begin() + static_cast<std::ptrdiff_t>(c * R),
                                              records.begin() + static_cast<std::ptrdiff_t>((c + 1) * R));
    result.cells.push_back(summarize_cell(cells[c], std::move(cell_records)));
    result.failures += result.cells.back().failures;
  }
  return result;
}

void write_sweep_outputs(const SweepSpec& spec, const SweepResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir / "plot");

  auto find_cell = [&](Method m, int d, double dil) -> const McResult& {
    for (const auto& c : result.cells)
      if (c.cell.method == m && c.cell.dim == d && c.cell.dilation == dil) return c;
    throw std::logic_error("missing sweep cell");
  };

  for (Method m : spec.methods) {
    std::string text = "dim";
    for (double dil : spec.dilations) text += ",dil" + format_number(dil) + cube_label(dil);
    text += '\n';
    for (int d : spec.dims) {
      text += std::to_string(d);
      for (double dil : spec.dilations) text += ',' + format_number(find_cell(m, d, dil).ancrci);
      text += '\n';
    }
    write_file(spec.out_dir / ("ancrci_" + std::string(method_name(m)) + ".csv"), text);
  }

  std::string longform = "dim,dilation,cube_half_width,method,replicate,correct,converged,data_hash\n";
  std::string timings = "dim,dilation,method,replicate,seconds\n";
  for (const auto& c : result.cells) {
    std::string plot = "replicate,correct\n";
    const std::string prefix = std::to_string(c.cell.dim) + ',' + format_number(c.cell.dilation) + ',';
    for (const auto& r : c.per_replicate) {
      longform += prefix + format_number(c.cell.dilation / 2.0) + ',' +
                  std::string(method_name(c.cell.method)) + ',' + std::to_string(r.replicate) + ',' +
                  std::to_string(r.correct) + ',' + (r.converged ? "1" : "0") + ',' + r.data_hash + '\n';
      timings += prefix + std::string(method_name(c.cell.method)) + ',' +
                 std::to_string(r.replicate) + ',' + format_number(r.seconds) + '\n';
      plot += std::to_string(r.replicate) + ',' + std::to_string(r.correct) + '\n';
    }
    write_file(spec.out_dir / "plot" / (cell_stem(c.cell) + ".csv"), plot);
  }
  write_file(spec.out_dir / "replicates.csv", longform);
  if (spec.record_timings) write_file(spec.out_dir / "timings.csv", timings);

  Json manifest;
  manifest["software_version"] = kSoftwareVersion;
  manifest["rng_version"] = kRngVersion;
  manifest["seed"] = spec.seed;
  manifest["centers"] = "resampled per replicate";
  manifest["config"] = spec_json(spec);
  Json cells = Json::array();
  Json failures = Json::array();
  for (const auto& c : result.cells) {
    Json cell;
    cell["method"] = method_name(c.cell.method);
    cell["dim"] = c.cell.dim;
    cell["dilation"] = c.cell.dilation;
    cell["cube_half_width"] = c.cell.dilation / 2.0;
    cell["ancrci"] = c.ancrci;
    cell["non_converged"] = c.non_converged;
    cell["failures"] = c.failures;
    cells.push_back(cell);
    for (const auto& r : c.per_replicate) {
      if (r.diagnostic.empty() || r.converged) continue;
      Json f;
      f["method"] = method_name(c.cell.method);
      f["dim"] = c.cell.dim;
      f["dilation"] = c.cell.dilation;
      f["replicate"] = r.replicate;
      f["diagnostic"] = r.diagnostic;
      failures.push_back(f);
    }
  }
  manifest["cells"] = cells;
  manifest["total_failures"] = result.failures;
  manifest["non_converged"] = failures;
  write_file(spec.out_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace sparsemix
