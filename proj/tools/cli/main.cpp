// bcm: command-line front end for the opinion model toolkit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bcm/agent_model.hpp"
#include "bcm/analysis.hpp"
#include "bcm/bounds.hpp"
#include "bcm/chaoticity.hpp"
#include "bcm/initial_conditions.hpp"
#include "bcm/io.hpp"
#include "bcm/kinetic_solver.hpp"
#include "json.hpp"

using namespace bcm;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string format = "csv";
};

struct ModelOpts {
  std::string init = "uniform";
  double delta = 0.5;
  double w = 0.5;
};

struct GridOpts {
  std::size_t grid = 200;
  double dt = 0.1;
  double horizon = 100.0;
  std::string negativity = "reject";
  double mass_threshold = 0.01;
};

struct Options {
  Common common;
  ModelOpts model;
  GridOpts grid;
  // simulate
  std::size_t n = 100;
  std::uint64_t max_steps = 1'000'000;
  std::uint64_t freeze_window = 1000;
  double freeze_tol = 1e-9;
  std::string clock = "discrete";
  // solve
  std::string snapshots;
  // scan
  std::string delta_grid = "0.1:1:0.01";
  std::string alpha_grid = "0:1:0.05";
  std::size_t cap = 0;
  // chaos
  std::string n_list = "100,1000,10000";
  double t_check = 5.0;
  std::size_t seeds = 20;
  // bounds
  std::string h;
  int h_n = 2;
  double q = 0.0;
  bool symmetric_q = false;
};

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir_ / name);
    if (!f) throw ConfigError("cannot write " + (dir_ / name).string());
    f.precision(17);
    files_.push_back(name);
    return f;
  }

  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.common.config, "JSON file with option values (flags take precedence)");
  sub->add_option("--out", o.common.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", o.common.seed, "Random seed")->capture_default_str();
  sub->add_option("--threads", o.common.threads, "Worker threads (0: all cores)")->capture_default_str();
  sub->add_option("--format", o.common.format, "Table format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

void add_model(CLI::App* sub, Options& o, bool with_delta = true) {
  sub->add_option("--init", o.model.init, "uniform | beta(a,b) | blocks([...]) | extremists(alpha) | csv(path)")
      ->capture_default_str();
  if (with_delta) sub->add_option("--delta", o.model.delta, "Deviation threshold")->capture_default_str();
  sub->add_option("--w", o.model.w, "Confidence factor")->capture_default_str();
}

void add_grid(CLI::App* sub, Options& o, bool with_horizon = true) {
  sub->add_option("--grid", o.grid.grid, "Number of cells")->capture_default_str();
  sub->add_option("--dt", o.grid.dt, "Time step")->capture_default_str();
  if (with_horizon) sub->add_option("--horizon", o.grid.horizon, "Final time")->capture_default_str();
  sub->add_option("--negativity", o.grid.negativity, "reject | clamp_renormalize")->capture_default_str();
  sub->add_option("--mass-threshold", o.grid.mass_threshold, "Smallest reported component mass")
      ->capture_default_str();
}

// Appends `--key value` for every config entry whose flag is absent from argv.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t k = 0; k + 1 < args.size(); ++k) {
    if (args[k] == "--config") path = args[k + 1];
  }
  for (const auto& a : args) {
    if (a.rfind("--config=", 0) == 0) path = a.substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw ConfigError("--config: cannot open " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("--config: " + std::string(e.what()));
  }
  // A manifest keeps its options under "config".
  if (j.contains("config") && j["config"].is_object()) j = j["config"];
  if (!j.is_object()) throw ConfigError("--config: expected a JSON object");
  const auto present = [&](const std::string& flag) {
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    if (key == "config" || present(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
      continue;
    }
    args.push_back(flag);
    if (value.is_string()) {
      args.push_back(value.get<std::string>());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ',';
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      args.push_back(joined);
    } else {
      args.push_back(value.dump());
    }
  }
  return args;
}

ordered_json resolved_options(const CLI::App* sub) {
  ordered_json j = ordered_json::object();
  for (const auto* opt : sub->get_options()) {
    const auto name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    if (opt->get_type_size() == 0) {
      j[name] = opt->count() > 0;
      continue;
    }
    std::string value = opt->count() > 0 ? opt->results().back() : opt->get_default_str();
    if (opt->count() > 1) {
      value.clear();
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    }
    j[name] = value;
  }
  return j;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : io::parse_grid(text)) {
    if (!(v >= 1.0) || v != std::floor(v)) throw std::invalid_argument("expected positive integers, got '" + text + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

// Converts the CSV emitted by a module into a JSON array of row objects.
void csv_to_json(const std::string& csv, std::ostream& out) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  const auto header = io::split(line, ',');
  ordered_json rows = ordered_json::array();
  while (std::getline(in, line)) {
    const auto cells = io::split(line, ',');
    ordered_json row = ordered_json::object();
    for (std::size_t k = 0; k < header.size(); ++k) {
      const std::string cell = k < cells.size() ? cells[k] : std::string();
      if (cell.empty()) {
        row[header[k]] = nullptr;
        continue;
      }
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used == cell.size()) {
          row[header[k]] = v;
          continue;
        }
      } catch (const std::exception&) {
      }
      row[header[k]] = cell;
    }
    rows.push_back(std::move(row));
  }
  out << rows.dump(2) << '\n';
}

template <class Writer>
void write_table(Outputs& outs, const std::string& stem, const std::string& format, Writer write) {
  std::ostringstream csv;
  write(csv);
  if (format == "json") {
    auto f = outs.open(stem + ".json");
    csv_to_json(csv.str(), f);
  } else {
    auto f = outs.open(stem + ".csv");
    f << csv.str();
  }
}

SolverConfig solver_config(const Options& o, double delta) {
  SolverConfig cfg;
  cfg.params = ModelParams(delta, o.model.w);
  cfg.cell_count = o.grid.grid;
  cfg.dt = o.grid.dt;
  cfg.horizon = o.grid.horizon;
  cfg.negativity_policy = parse_negativity_policy(o.grid.negativity);
  return cfg;
}

std::string time_label(double t) { return io::format_double(io::round_significant(t, 12)); }

void run_simulate(const Options& o, Outputs& outs) {
  const ModelParams params(o.model.delta, o.model.w);
  const auto ic = InitialCondition::parse(o.model.init);
  Rng sampler(o.common.seed, 0);
  const std::size_t n = ic.kind() == InitialCondition::Kind::atoms_csv ? 0 : o.n;
  OpinionState state(ic.sample(n, sampler), o.common.seed, 1);
  FreezeConfig fc;
  fc.max_steps = o.max_steps;
  fc.freeze_window = o.freeze_window;
  fc.freeze_tol = o.freeze_tol;
  fc.mass_threshold = o.grid.mass_threshold;
  if (o.clock != "discrete" && o.clock != "auxiliary") throw std::invalid_argument("--clock must be discrete or auxiliary");
  fc.clock = o.clock == "auxiliary" ? Clock::auxiliary : Clock::discrete;
  const auto run = run_until_frozen(std::move(state), params, fc);
  write_table(outs, "trajectory", o.common.format, [&](std::ostream& s) { write_trajectory_csv(s, run.trajectory); });
  {
    auto f = outs.open("final_opinions.csv");
    write_atoms_csv(f, run.state.opinions());
  }
  auto f = outs.open("report.json");
  f << run.report.to_json() << '\n';
  std::cout << run.report.classification.to_string() << " after " << run.report.steps << " steps\n";
}

void run_solve(const Options& o, Outputs& outs) {
  auto cfg = solver_config(o, o.model.delta);
  if (!o.snapshots.empty()) cfg.snapshot_times = io::parse_grid(o.snapshots);
  const auto ic = InitialCondition::parse(o.model.init);
  const auto f0 = ic.density(cfg.cell_count);
  const auto result = KineticSolver(cfg).solve(f0);
  for (const auto& snap : result.snapshots) {
    auto f = outs.open("density_t" + time_label(snap.requested_time) + ".csv");
    write_density_csv(f, snap.density);
  }
  if (result.snapshots.empty()) {
    auto f = outs.open("density_final.csv");
    write_density_csv(f, result.final_density);
  }
  write_table(outs, "diagnostics", o.common.format, [&](std::ostream& s) { write_diagnostics_csv(s, result.diagnostics); });
  auto report = classify(result.final_density, cfg.params, o.grid.mass_threshold);
  report.steps = cfg.step_count();
  auto f = outs.open("report.json");
  f << report.to_json() << '\n';
  std::cout << report.classification.to_string() << " at t=" << time_label(cfg.horizon) << "\n";
}

ScanSettings scan_settings(const Options& o, std::size_t default_cap) {
  ScanSettings s;
  s.cell_count = o.grid.grid;
  s.dt = o.grid.dt;
  s.horizon = o.grid.horizon;
  s.negativity_policy = parse_negativity_policy(o.grid.negativity);
  s.mass_threshold = o.grid.mass_threshold;
  s.component_cap = o.cap > 0 ? o.cap : default_cap;
  s.threads = o.common.threads;
  return s;
}

void emit_scan(const ScanResult& r, const Options& o, Outputs& outs) {
  write_table(outs, "scan", o.common.format, [&](std::ostream& s) { r.write_csv(s); });
  std::size_t failed = 0;
  for (const auto& p : r.points) failed += p.error.empty() ? 0 : 1;
  std::cout << r.points.size() << " points, " << failed << " failed\n";
}

void run_scan_delta(const Options& o, Outputs& outs) {
  const auto ic = InitialCondition::parse(o.model.init);
  const std::size_t cap = ic.kind() == InitialCondition::Kind::beta ? 5 : 7;
  emit_scan(scan_delta(ic.density(o.grid.grid), o.model.w, io::parse_grid(o.delta_grid), scan_settings(o, cap)), o, outs);
}

void run_scan_extremists(const Options& o, Outputs& outs) {
  emit_scan(scan_extremists(io::parse_grid(o.alpha_grid), io::parse_grid(o.delta_grid), o.model.w, scan_settings(o, 7)),
            o, outs);
}

void run_chaos(const Options& o, Outputs& outs) {
  ChaosSettings s;
  s.n_list = parse_sizes(o.n_list);
  s.t_check = o.t_check;
  s.seeds = o.seeds;
  s.base_seed = o.common.seed;
  s.cell_count = o.grid.grid;
  s.dt = o.grid.dt;
  s.threads = o.common.threads;
  if (o.clock == "discrete") {
    s.clocks = {Clock::discrete};
  } else if (o.clock == "auxiliary") {
    s.clocks = {Clock::auxiliary};
  } else if (o.clock == "both") {
    s.clocks = {Clock::auxiliary, Clock::discrete};
  } else {
    throw std::invalid_argument("--clock must be discrete, auxiliary or both");
  }
  const auto ic = InitialCondition::parse(o.model.init);
  const auto r = chaoticity_check(ic.density(o.grid.grid), ModelParams(o.model.delta, o.model.w), s);
  write_table(outs, "chaos", o.common.format, [&](std::ostream& st) { r.write_csv(st); });
  for (const auto& row : r.rows) {
    std::cout << "N=" << row.n << " " << (row.clock == Clock::auxiliary ? "auxiliary" : "discrete")
              << " median Kolmogorov " << io::format_double(row.median_kolmogorov) << "\n";
  }
}

void run_bounds(const Options& o, Outputs& outs) {
  const auto ic = InitialCondition::parse(o.model.init);
  BoundsInput in{ic.density(o.grid.grid), solver_config(o, o.model.delta), o.grid.mass_threshold, {}, {}};
  if (ic.kind() == InitialCondition::Kind::extremists) in.alpha = ic.alpha();
  if (!o.h.empty()) in.h = ConvexH::parse(o.h);
  in.n = o.h_n;
  in.q = o.q;
  in.symmetric_q = o.symmetric_q;
  const auto r = evaluate_bounds(in);
  {
    auto f = outs.open("bounds.jsonl");
    for (const auto& v : r.verdicts) f << v.to_json_line() << '\n';
  }
  auto f = outs.open("report.json");
  f << r.observed.to_json() << '\n';
  std::cout << "observed " << r.observed.classification.to_string() << "; "
            << (r.all_agree() ? "all criteria agree" : "DISAGREEMENT") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"Bounded-confidence opinion model toolkit", "bcm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", BCM_VERSION);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "Run the N-agent system until it freezes");
  add_common(simulate, o);
  add_model(simulate, o);
  simulate->add_option("--n", o.n, "Number of agents (ignored for csv atom lists)")->capture_default_str();
  simulate->add_option("--max-steps", o.max_steps, "Step budget")->capture_default_str();
  simulate->add_option("--freeze-window", o.freeze_window, "Steps between freeze tests")->capture_default_str();
  simulate->add_option("--freeze-tol", o.freeze_tol, "Cluster diameter counted as frozen")->capture_default_str();
  simulate->add_option("--mass-threshold", o.grid.mass_threshold, "Smallest reported cluster mass")
      ->capture_default_str();
  simulate->add_option("--clock", o.clock, "discrete | auxiliary")->capture_default_str();

  auto* solve = app.add_subcommand("solve", "Integrate the density equation");
  add_common(solve, o);
  add_model(solve, o);
  add_grid(solve, o);
  solve->add_option("--snapshots", o.snapshots, "Times to save, e.g. 0,20,100 or 0:100:10");

  auto* scan = app.add_subcommand("scan", "Parameter sweeps of the kinetic limit");
  scan->require_subcommand(1);
  auto* scan_d = scan->add_subcommand("delta", "Sweep delta for a fixed initial condition");
  add_common(scan_d, o);
  add_model(scan_d, o, false);
  add_grid(scan_d, o);
  scan_d->add_option("--delta", o.delta_grid, "Grid start:stop:step or list")->capture_default_str();
  scan_d->add_option("--cap", o.cap, "Component count cap (default 7, 5 for beta)");
  auto* scan_e = scan->add_subcommand("extremists", "Sweep (alpha, delta) for extremists and undecided");
  add_common(scan_e, o);
  scan_e->add_option("--w", o.model.w, "Confidence factor")->capture_default_str();
  add_grid(scan_e, o);
  scan_e->add_option("--alpha", o.alpha_grid, "Grid start:stop:step or list")->capture_default_str();
  scan_e->add_option("--delta", o.delta_grid, "Grid within [1/2, 1]")->default_str("0.5:1:0.01");
  scan_e->add_option("--cap", o.cap, "Component count cap (default 7)");

  auto* chaos = app.add_subcommand("chaos", "Compare N-agent empirical laws with the kinetic solution");
  add_common(chaos, o);
  add_model(chaos, o);
  add_grid(chaos, o, false);
  chaos->add_option("--n-list", o.n_list, "Agent counts")->capture_default_str();
  chaos->add_option("--t", o.t_check, "Comparison time")->capture_default_str();
  chaos->add_option("--seeds", o.seeds, "Runs per N")->capture_default_str();
  chaos->add_option("--clock", o.clock, "discrete | auxiliary | both")->default_str("auxiliary");

  auto* bounds = app.add_subcommand("bounds", "Check consensus criteria against a kinetic run");
  add_common(bounds, o);
  add_model(bounds, o);
  add_grid(bounds, o);
  bounds->add_option("--h-function", o.h, "Convex test function abs(c) or pow(c,p)");
  bounds->add_option("--n", o.h_n, "Component count n of the general criterion")->capture_default_str();
  bounds->add_option("--q", o.q, "Lower bound q of <h, nu> over n-component limits")->capture_default_str();
  bounds->add_flag("--symmetric-q", o.symmetric_q, "q bounds symmetric limits only");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = merge_config(std::move(args));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  // chaos defaults to the auxiliary clock.
  if (!args.empty() && args.front() == "chaos") o.clock = "auxiliary";
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  CLI::App* active = nullptr;
  std::string command;
  for (auto* sub : {simulate, solve, scan_d, scan_e, chaos, bounds}) {
    if (sub->parsed()) {
      active = sub;
      command = sub == scan_d ? "scan delta" : sub == scan_e ? "scan extremists" : sub->get_name();
    }
  }

  try {
    fs::create_directories(o.common.out);
  } catch (const std::exception& e) {
    std::cerr << "error: cannot create output directory " << o.common.out << ": " << e.what() << "\n";
    return kConfigError;
  }
  Outputs outs(o.common.out);
  int status = 0;
  std::string message;
  try {
    if (active == simulate) run_simulate(o, outs);
    if (active == solve) run_solve(o, outs);
    if (active == scan_d) run_scan_delta(o, outs);
    if (active == scan_e) run_scan_extremists(o, outs);
    if (active == chaos) run_chaos(o, outs);
    if (active == bounds) run_bounds(o, outs);
  } catch (const NumericalError& e) {
    status = kNumericalError;
    message = e.what();
  } catch (const std::exception& e) {
    status = kConfigError;
    message = e.what();
  }
  if (status != 0) std::cerr << "error: " << message << "\n";

  ordered_json manifest;
  manifest["command"] = command;
  manifest["version"] = BCM_VERSION;
  manifest["seed"] = o.common.seed;
  manifest["config"] = resolved_options(active);
  manifest["outputs"] = outs.files();
  manifest["exit_code"] = status;
  if (!message.empty()) manifest["error"] = message;
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream mf(outs.dir() / "manifest.json");
  mf << manifest.dump(2) << '\n';
  return status;
}
