// gridlock: reproducible experiment driver for the road-blockage toolkit.
// Every stochastic subcommand requires an explicit --seed, and every file
// output gets a .manifest.json sidecar with the fully resolved parameters.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "gridlock/city_graph.hpp"
#include "gridlock/csv.hpp"
#include "gridlock/errors.hpp"
#include "gridlock/graph_io.hpp"
#include "gridlock/manifest.hpp"
#include "gridlock/parallel.hpp"
#include "gridlock/percolation.hpp"
#include "gridlock/road_sim.hpp"
#include "gridlock/rng.hpp"
#include "gridlock/version.hpp"

namespace fs = std::filesystem;
using namespace gridlock;

namespace {

// ---------------------------------------------------------------------------
// Grid specifications: "start:stop:step" (inclusive) or "a,b,c".

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  auto parse_one = [&](const std::string& text) {
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw DomainError("bad number '" + text + "' in grid '" + spec + "'");
    }
  };
  if (spec.find(':') != std::string::npos) {
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 + 1);
    if (c2 == std::string::npos) {
      throw DomainError("grid '" + spec + "' must be start:stop:step or a comma list");
    }
    const double start = parse_one(spec.substr(0, c1));
    const double stop = parse_one(spec.substr(c1 + 1, c2 - c1 - 1));
    const double step = parse_one(spec.substr(c2 + 1));
    if (!(step > 0.0) || stop < start) {
      throw DomainError("grid '" + spec + "' needs step > 0 and stop >= start");
    }
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::string cell;
  std::istringstream ss(spec);
  while (std::getline(ss, cell, ',')) out.push_back(parse_one(cell));
  if (out.empty()) throw DomainError("empty grid specification");
  return out;
}

std::vector<int> parse_int_list(const std::string& spec) {
  std::vector<int> out;
  for (double v : parse_grid(spec)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) throw DomainError("expected integers in '" + spec + "'");
    out.push_back(i);
  }
  return out;
}

SingleLaneMode parse_single_lane_mode(const std::string& name) {
  if (name == "always-blocked") return SingleLaneMode::kAlwaysBlocked;
  if (name == "poisson") return SingleLaneMode::kPoisson;
  throw DomainError("single-lane mode must be always-blocked or poisson");
}

// Removes a file unless commit() was reached; keeps failed runs from
// leaving partial outputs around.
class OutputGuard {
 public:
  explicit OutputGuard(std::string path) : path_(std::move(path)) {}
  OutputGuard(const OutputGuard&) = delete;
  ~OutputGuard() {
    if (!committed_ && !path_.empty()) {
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }
  void commit() { committed_ = true; }

 private:
  std::string path_;
  bool committed_ = false;
};

// Writes the primary CSV (or stdout when no --out), then the manifest.
void emit(RunManifest& manifest, const std::string& out_path, const std::string& contents) {
  if (out_path.empty()) {
    std::fputs(contents.c_str(), stdout);
    return;
  }
  manifest.outputs.push_back(out_path);
  csv::write_file(out_path, contents);
  OutputGuard guard(out_path);
  write_manifest(manifest, out_path);
  guard.commit();
}

// ---------------------------------------------------------------------------
// Option groups shared by the road-simulation commands.

struct RoadOptions {
  RoadConfig config;
  IdmParams idm;
  MobilParams mobil;
};

void add_road_options(CLI::App* cmd, RoadOptions& opts) {
  cmd->add_option("--length-m", opts.config.length_m, "Ring road length [m]")
      ->capture_default_str();
  cmd->add_option("--lanes", opts.config.lanes, "Number of lanes")->capture_default_str();
  cmd->add_option("--dt", opts.config.dt, "Integration step [s]")->capture_default_str();
  cmd->add_option("--settle-steps", opts.config.settle_steps, "Steps before the hack")
      ->capture_default_str();
  cmd->add_option("--horizon-s", opts.config.posthack_horizon_s, "Post-hack horizon [s]")
      ->capture_default_str();
  cmd->add_option("--window-s", opts.config.flux_window_s, "Flux averaging window [s]")
      ->capture_default_str();
  cmd->add_option("--zero-flux-threshold", opts.config.zero_flux_threshold,
                  "Zero-flux classification threshold [veh/hr/lane]")
      ->capture_default_str();
  cmd->add_option("--v0-ms", opts.idm.v0, "Desired speed [m/s]")->capture_default_str();
  cmd->add_option("--s0-m", opts.idm.s0, "Minimum jam gap [m]")->capture_default_str();
  cmd->add_option("--t-headway", opts.idm.T, "Time headway [s]")->capture_default_str();
  cmd->add_option("--a-max", opts.idm.a, "Maximum acceleration [m/s^2]")->capture_default_str();
  cmd->add_option("--b-comf", opts.idm.b, "Comfortable deceleration [m/s^2]")
      ->capture_default_str();
  cmd->add_option("--d-m", opts.idm.d, "Effective vehicle length [m]")->capture_default_str();
  cmd->add_option("--politeness", opts.mobil.politeness, "MOBIL politeness factor")
      ->capture_default_str();
  cmd->add_option("--r-threshold", opts.mobil.r_threshold,
                  "Per-step lane-change attempt probability")
      ->capture_default_str();
  cmd->add_option("--b-safe", opts.mobil.b_safe, "Max deceleration imposed on new follower")
      ->capture_default_str();
}

void manifest_road_options(RunManifest& m, const RoadOptions& o) {
  m.set("length-m", o.config.length_m);
  m.set("lanes", o.config.lanes);
  m.set("dt", o.config.dt);
  m.set("settle-steps", o.config.settle_steps);
  m.set("horizon-s", o.config.posthack_horizon_s);
  m.set("window-s", o.config.flux_window_s);
  m.set("zero-flux-threshold", o.config.zero_flux_threshold);
  m.set("v0-ms", o.idm.v0);
  m.set("s0-m", o.idm.s0);
  m.set("t-headway", o.idm.T);
  m.set("a-max", o.idm.a);
  m.set("b-comf", o.idm.b);
  m.set("d-m", o.idm.d);
  m.set("politeness", o.mobil.politeness);
  m.set("r-threshold", o.mobil.r_threshold);
  m.set("b-safe", o.mobil.b_safe);
}

const std::vector<std::string> kFluxHeader = {"seed", "rho",   "fraction",
                                              "rho_H", "phi", "zero_flux"};

void add_flux_row(csv::Table& table, std::uint64_t seed, double fraction,
                  const FluxMeasurement& m) {
  table.begin_row()
      .add(static_cast<unsigned long long>(seed))
      .add(m.rho)
      .add(fraction)
      .add(m.rho_h)
      .add(m.phi)
      .add(m.zero_flux);
}

// ---------------------------------------------------------------------------
// Subcommand parameter blocks.

struct RoadSimArgs {
  RoadOptions road;
  double rho = 0.0;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  int trajectory_every = 1;
  std::string trajectory_out;
  std::string out;
};

void cmd_road_sim(const RoadSimArgs& args) {
  RunManifest manifest;
  manifest.command = "road-sim";
  manifest.set_seed(args.seed);
  manifest.set("rho", args.rho);
  manifest.set("fraction", args.fraction);
  manifest.set("seed", csv::format_int(static_cast<long long>(args.seed)));
  manifest_road_options(manifest, args.road);
  manifest.set("trajectory-every", args.trajectory_every);
  if (!args.trajectory_out.empty()) manifest.set("trajectory-out", args.trajectory_out);

  std::ofstream traj;
  OutputGuard traj_guard(args.trajectory_out);
  long step_index = 0;
  StepObserver observer = [&](const RoadState& state) {
    if (step_index++ % args.trajectory_every != 0) return;
    for (const auto& v : state.all_vehicles()) {
      traj << csv::format_double(state.t) << ',' << v.id << ',' << v.lane << ','
           << csv::format_double(v.x) << ',' << csv::format_double(v.v) << ','
           << (v.status == VehicleStatus::kCompromised ? "compromised" : "active") << '\n';
    }
  };
  const StepObserver* observer_ptr = nullptr;
  if (!args.trajectory_out.empty()) {
    traj.open(args.trajectory_out, std::ios::binary | std::ios::trunc);
    if (!traj) throw Error("cannot open trajectory file: " + args.trajectory_out);
    traj << "t,id,lane,x,v,status\n";
    observer_ptr = &observer;
    manifest.outputs.push_back(args.trajectory_out);
  }

  const FluxMeasurement m = run_flux_experiment(args.rho, args.fraction, args.road.config,
                                                args.road.idm, args.road.mobil, args.seed,
                                                observer_ptr);
  if (!args.trajectory_out.empty()) {
    traj.flush();
    if (!traj) throw Error("failed writing trajectory file: " + args.trajectory_out);
  }

  csv::Table table(kFluxHeader);
  add_flux_row(table, args.seed, args.fraction, m);
  emit(manifest, args.out, table.str());
  traj_guard.commit();
}

struct FluxSweepArgs {
  RoadOptions road;
  std::string rho_grid = "10:100:10";
  std::string fraction_grid = "0:1:0.1";
  int replicates = 1;
  int workers = 1;
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_flux_sweep(const FluxSweepArgs& args) {
  const auto rhos = parse_grid(args.rho_grid);
  const auto fractions = parse_grid(args.fraction_grid);
  if (args.replicates < 1) throw DomainError("replicates must be >= 1");

  RunManifest manifest;
  manifest.command = "flux-sweep";
  manifest.set_seed(args.seed);
  manifest.set("rho-grid", args.rho_grid);
  manifest.set("fraction-grid", args.fraction_grid);
  manifest.set("replicates", args.replicates);
  manifest.set("workers", args.workers);
  manifest.set("seed", csv::format_int(static_cast<long long>(args.seed)));
  manifest_road_options(manifest, args.road);

  const long long total =
      static_cast<long long>(rhos.size()) * static_cast<long long>(fractions.size()) *
      args.replicates;
  struct Row {
    std::uint64_t seed;
    double fraction;
    FluxMeasurement m;
  };
  std::vector<Row> rows(static_cast<std::size_t>(total));
  run_indexed(total, args.workers, [&](long long gi) {
    const auto cell = gi / args.replicates;
    const auto ri = static_cast<std::size_t>(cell) / fractions.size();
    const auto fi = static_cast<std::size_t>(cell) % fractions.size();
    const std::uint64_t run_seed = Rng::derive_seed(args.seed, static_cast<std::uint64_t>(gi));
    rows[static_cast<std::size_t>(gi)] =
        Row{run_seed, fractions[fi],
            run_flux_experiment(rhos[ri], fractions[fi], args.road.config, args.road.idm,
                                args.road.mobil, run_seed)};
  });

  csv::Table table(kFluxHeader);
  for (const auto& row : rows) add_flux_row(table, row.seed, row.fraction, row.m);
  emit(manifest, args.out, table.str());
}

struct PercolationArgs {
  int lanes = 2;
  std::string rho_grid = "0:20:1";
  double length_km = 1.0;
  double s_m = 14.0;
  std::string mode = "always-blocked";
  std::string out;
};

void cmd_percolation(const PercolationArgs& args) {
  const auto rhos = parse_grid(args.rho_grid);
  const SingleLaneMode mode = parse_single_lane_mode(args.mode);

  RunManifest manifest;
  manifest.command = "percolation";
  manifest.set("lanes", args.lanes);
  manifest.set("rho-h", args.rho_grid);
  manifest.set("length-km", args.length_km);
  manifest.set("s-m", args.s_m);
  manifest.set("single-lane-mode", args.mode);

  csv::Table table({"lanes", "rho_H", "length_km", "s_m", "single_lane_mode", "probability"});
  for (double rho_h : rhos) {
    PercolationQuery query{args.lanes, rho_h, args.length_km, args.s_m, mode};
    table.begin_row()
        .add(args.lanes)
        .add(rho_h)
        .add(args.length_km)
        .add(args.s_m)
        .add(args.mode)
        .add(percolation_prob(query));
  }
  emit(manifest, args.out, table.str());
}

struct McOracleArgs {
  int lanes = 2;
  std::string n_grid = "6";
  double length_m = 1000.0;
  double s_m = 14.0;
  long long trials = 10000;
  int workers = 1;
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_mc_oracle(const McOracleArgs& args) {
  const auto ns = parse_int_list(args.n_grid);

  RunManifest manifest;
  manifest.command = "mc-oracle";
  manifest.set_seed(args.seed);
  manifest.set("lanes", args.lanes);
  manifest.set("n-per-lane", args.n_grid);
  manifest.set("length-m", args.length_m);
  manifest.set("s-m", args.s_m);
  manifest.set("trials", args.trials);
  manifest.set("workers", args.workers);
  manifest.set("seed", csv::format_int(static_cast<long long>(args.seed)));

  csv::Table table({"lanes", "n_per_lane", "length_m", "s_m", "trials", "estimate", "std_error"});
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const auto est = mc_percolation_estimate(args.lanes, ns[i], args.length_m, args.s_m,
                                             args.trials, Rng::derive_seed(args.seed, i),
                                             args.workers);
    table.begin_row()
        .add(args.lanes)
        .add(ns[i])
        .add(args.length_m)
        .add(args.s_m)
        .add(est.trials)
        .add(est.value)
        .add(est.std_error);
  }
  emit(manifest, args.out, table.str());
}

struct SnapshotArgs {
  std::string snapshot_path;
  double length_m = 0.0;
  int lanes = 0;
  std::string fraction_grid = "0.1";
  double s_m = 14.0;
  long long trials = 10000;
  std::string mode = "always-blocked";
  int workers = 1;
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_snapshot(const SnapshotArgs& args) {
  const auto fractions = parse_grid(args.fraction_grid);
  const SingleLaneMode mode = parse_single_lane_mode(args.mode);
  const RoadSnapshot snapshot = load_snapshot(args.snapshot_path, args.length_m, args.lanes);
  if (snapshot.vehicle_count() == 0) {
    throw LoadError(args.snapshot_path + ": snapshot has no vehicles");
  }

  RunManifest manifest;
  manifest.command = "snapshot";
  manifest.set_seed(args.seed);
  manifest.set("snapshot", args.snapshot_path);
  manifest.set("length-m", args.length_m);
  manifest.set("lanes", args.lanes);
  manifest.set("fraction", args.fraction_grid);
  manifest.set("s-m", args.s_m);
  manifest.set("trials", args.trials);
  manifest.set("single-lane-mode", args.mode);
  manifest.set("workers", args.workers);
  manifest.set("seed", csv::format_int(static_cast<long long>(args.seed)));
  manifest.add_input(args.snapshot_path);

  const int lanes = snapshot.lanes();
  const double n_vehicles = static_cast<double>(snapshot.vehicle_count());
  const double lane_km = args.length_m / 1000.0;
  std::string per_lane_counts;
  for (int lane = 0; lane < lanes; ++lane) {
    if (lane > 0) per_lane_counts += ';';
    per_lane_counts += std::to_string(snapshot.lane_positions[static_cast<std::size_t>(lane)].size());
  }

  csv::Table table({"fraction", "n_hacked", "lanes", "per_lane_counts", "trials", "estimate",
                    "std_error", "rho_H", "analytic"});
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const auto est = empirical_snapshot_blockage(snapshot, fractions[i], args.s_m, args.trials,
                                                 Rng::derive_seed(args.seed, i), args.workers);
    const auto n_hacked = static_cast<long long>(std::nearbyint(fractions[i] * n_vehicles));
    const double rho_h = static_cast<double>(n_hacked) / (lane_km * lanes);
    PercolationQuery query{lanes, rho_h, lane_km, args.s_m, mode};
    table.begin_row()
        .add(fractions[i])
        .add(n_hacked)
        .add(lanes)
        .add(per_lane_counts)
        .add(est.trials)
        .add(est.value)
        .add(est.std_error)
        .add(rho_h)
        .add(percolation_prob(query));
  }
  emit(manifest, args.out, table.str());
}

struct CitySweepArgs {
  std::string graph_path;
  std::string rho_grid = "0:30:2";
  int replicates = 20;
  double s_m = 14.0;
  std::string mode = "always-blocked";
  int workers = 1;
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_city_sweep(const CitySweepArgs& args) {
  const auto rhos = parse_grid(args.rho_grid);
  const SingleLaneMode mode = parse_single_lane_mode(args.mode);
  const CityGraph graph = load_graph(args.graph_path);

  RunManifest manifest;
  manifest.command = "city-sweep";
  manifest.set_seed(args.seed);
  manifest.set("graph", args.graph_path);
  manifest.set("rho-grid", args.rho_grid);
  manifest.set("replicates", args.replicates);
  manifest.set("s-m", args.s_m);
  manifest.set("single-lane-mode", args.mode);
  manifest.set("workers", args.workers);
  manifest.set("seed", csv::format_int(static_cast<long long>(args.seed)));
  manifest.add_input(args.graph_path);

  const SweepResult result =
      sweep_density(graph, rhos, args.replicates, args.s_m, mode, args.seed, args.workers);

  csv::Table table({"rho_H", "mean_largest", "std_largest", "mean_second", "std_second"});
  for (std::size_t i = 0; i < result.rho_grid.size(); ++i) {
    table.begin_row()
        .add(result.rho_grid[i])
        .add(result.mean_largest[i])
        .add(result.std_largest[i])
        .add(result.mean_second[i])
        .add(result.std_second[i]);
  }
  emit(manifest, args.out, table.str());
  std::fprintf(stdout, "rho_critical=%s\n", csv::format_double(result.rho_critical).c_str());
}

struct CityAccessArgs {
  std::string graph_path;
  std::string services_path;
  std::string rho_grid = "0:30:2";
  int replicates = 20;
  double s_m = 14.0;
  std::string mode = "always-blocked";
  int workers = 1;
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_city_access(const CityAccessArgs& args) {
  const auto rhos = parse_grid(args.rho_grid);
  const SingleLaneMode mode = parse_single_lane_mode(args.mode);
  if (args.replicates < 1) throw DomainError("replicates must be >= 1");
  const CityGraph graph = load_graph(args.graph_path);
  const ServiceMap services = load_services(args.services_path, graph);

  RunManifest manifest;
  manifest.command = "city-access";
  manifest.set_seed(args.seed);
  manifest.set("graph", args.graph_path);
  manifest.set("services", args.services_path);
  manifest.set("rho-grid", args.rho_grid);
  manifest.set("replicates", args.replicates);
  manifest.set("s-m", args.s_m);
  manifest.set("single-lane-mode", args.mode);
  manifest.set("workers", args.workers);
  manifest.set("seed", csv::format_int(static_cast<long long>(args.seed)));
  manifest.add_input(args.graph_path);
  manifest.add_input(args.services_path);

  const long long total = static_cast<long long>(rhos.size()) * args.replicates;
  std::vector<std::map<std::string, double>> access(static_cast<std::size_t>(total));
  run_indexed(total, args.workers, [&](long long gi) {
    const std::size_t point = static_cast<std::size_t>(gi / args.replicates);
    const auto outcome = prune_network(graph, rhos[point], args.s_m, mode,
                                       Rng::derive_seed(args.seed, static_cast<std::uint64_t>(gi)));
    std::vector<std::uint8_t> blocked(graph.edges.size(), 0);
    for (auto e : outcome.blocked_edges) blocked[e] = 1;
    access[static_cast<std::size_t>(gi)] = service_accessibility(graph, blocked, services);
  });

  csv::Table table({"rho_H", "category", "access_fraction"});
  for (std::size_t point = 0; point < rhos.size(); ++point) {
    for (const auto& [category, unused] : services) {
      double mean = 0.0;
      for (int rep = 0; rep < args.replicates; ++rep) {
        mean += access[point * static_cast<std::size_t>(args.replicates) +
                       static_cast<std::size_t>(rep)].at(category);
      }
      mean /= args.replicates;
      table.begin_row().add(rhos[point]).add(category).add(mean);
    }
  }
  emit(manifest, args.out, table.str());
}

struct CityHeatmapArgs {
  std::string graph_path;
  std::string n_grid = "10000:100000:10000";
  std::string f_grid = "0:1:0.1";
  int replicates = 50;
  double s_m = 14.0;
  double d_m = 7.0;
  double frag_ratio = 0.5;
  std::string mode = "always-blocked";
  int workers = 1;
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_city_heatmap(const CityHeatmapArgs& args) {
  const auto n_grid = parse_grid(args.n_grid);
  const auto f_grid = parse_grid(args.f_grid);
  const SingleLaneMode mode = parse_single_lane_mode(args.mode);
  const CityGraph graph = load_graph(args.graph_path);

  RunManifest manifest;
  manifest.command = "city-heatmap";
  manifest.set_seed(args.seed);
  manifest.set("graph", args.graph_path);
  manifest.set("n-grid", args.n_grid);
  manifest.set("f-grid", args.f_grid);
  manifest.set("replicates", args.replicates);
  manifest.set("s-m", args.s_m);
  manifest.set("d-m", args.d_m);
  manifest.set("frag-ratio", args.frag_ratio);
  manifest.set("single-lane-mode", args.mode);
  manifest.set("workers", args.workers);
  manifest.set("seed", csv::format_int(static_cast<long long>(args.seed)));
  manifest.add_input(args.graph_path);

  const auto cells = fragmentation_heatmap(graph, n_grid, f_grid, args.replicates, args.s_m,
                                           mode, args.frag_ratio, args.d_m, args.seed,
                                           args.workers);
  csv::Table table({"N_total", "f", "rho_H", "frag_prob", "std_error"});
  for (const auto& cell : cells) {
    table.begin_row()
        .add(cell.n_total)
        .add(cell.fraction)
        .add(cell.rho_h)
        .add(cell.frag_prob)
        .add(cell.std_error);
  }
  emit(manifest, args.out, table.str());
}

struct GridGenArgs {
  int rows = 50;
  int cols = 50;
  double edge_len_min = 80.0;
  double edge_len_max = 200.0;
  std::string lanes_choices = "1,2,3";
  std::string lanes_weights = "0.25,0.5,0.25";
  std::string format = "csv";
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_grid_gen(const GridGenArgs& args) {
  LanesDistribution dist;
  dist.values = parse_int_list(args.lanes_choices);
  for (double w : parse_grid(args.lanes_weights)) dist.weights.push_back(w);
  dist.validate();
  if (args.format != "csv" && args.format != "graphml") {
    throw DomainError("format must be csv or graphml");
  }

  RunManifest manifest;
  manifest.command = "grid-gen";
  manifest.set_seed(args.seed);
  manifest.set("rows", args.rows);
  manifest.set("cols", args.cols);
  manifest.set("edge-length-min", args.edge_len_min);
  manifest.set("edge-length-max", args.edge_len_max);
  manifest.set("lanes-choices", args.lanes_choices);
  manifest.set("lanes-weights", args.lanes_weights);
  manifest.set("format", args.format);
  manifest.set("seed", csv::format_int(static_cast<long long>(args.seed)));

  const CityGraph graph = generate_grid(args.rows, args.cols, args.edge_len_min,
                                        args.edge_len_max, dist, args.seed);
  emit(manifest, args.out,
       args.format == "csv" ? graph_to_csv(graph) : graph_to_graphml(graph));
}

struct CapacityArgs {
  std::string graph_path;
  double d_m = 7.0;
  std::string out;
};

void cmd_capacity(const CapacityArgs& args) {
  const CityGraph graph = load_graph(args.graph_path);

  RunManifest manifest;
  manifest.command = "capacity";
  manifest.set("graph", args.graph_path);
  manifest.set("d-m", args.d_m);
  manifest.add_input(args.graph_path);

  csv::Table table({"nodes", "edges", "total_lane_m", "d_m", "capacity"});
  table.begin_row()
      .add(static_cast<long long>(graph.nodes.size()))
      .add(static_cast<long long>(graph.edges.size()))
      .add(graph.total_lane_m())
      .add(args.d_m)
      .add(network_capacity(graph, args.d_m));
  emit(manifest, args.out, table.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Road-blockage simulation and percolation analysis toolkit"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.set_config("--config", "", "Read options from an INI file ([subcommand] sections)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();  // lets --config appear after the subcommand name
  app.require_subcommand(1);

  // Commands run exactly once after a successful parse; a config-file
  // section and the command line may both mention the same subcommand.
  std::vector<std::pair<CLI::App*, std::function<void()>>> dispatch;

  RoadSimArgs road_args;
  auto* road = app.add_subcommand("road-sim", "Single seeded ring-road hack experiment");
  road->configurable();
  add_road_options(road, road_args.road);
  road->add_option("--rho", road_args.rho, "Total density [veh/km/lane]")->required();
  road->add_option("--fraction", road_args.fraction, "Compromised fraction")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  road->add_option("--seed", road_args.seed, "Master seed")->required();
  road->add_option("--trajectory-out", road_args.trajectory_out, "Optional trajectory CSV");
  road->add_option("--trajectory-every", road_args.trajectory_every,
                   "Keep every k-th step in the trajectory dump")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  road->add_option("--out", road_args.out, "Output CSV (stdout when omitted)");
  dispatch.emplace_back(road, [&]() { cmd_road_sim(road_args); });

  FluxSweepArgs sweep_args;
  auto* sweep = app.add_subcommand("flux-sweep", "Flux over a (rho, fraction) grid");
  sweep->configurable();
  add_road_options(sweep, sweep_args.road);
  sweep->add_option("--rho-grid", sweep_args.rho_grid, "Density grid (start:stop:step or list)")
      ->capture_default_str();
  sweep->add_option("--fraction-grid", sweep_args.fraction_grid, "Fraction grid")
      ->capture_default_str();
  sweep->add_option("--replicates", sweep_args.replicates, "Replicates per grid point")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--workers", sweep_args.workers, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sweep_args.seed, "Master seed")->required();
  sweep->add_option("--out", sweep_args.out, "Output CSV (stdout when omitted)");
  dispatch.emplace_back(sweep, [&]() { cmd_flux_sweep(sweep_args); });

  PercolationArgs perc_args;
  auto* perc = app.add_subcommand("percolation", "Closed-form blockage probability");
  perc->configurable();
  perc->add_option("--lanes", perc_args.lanes, "Lane count")->required()
      ->check(CLI::PositiveNumber);
  perc->add_option("--rho-h", perc_args.rho_grid, "Compromised density grid [veh/km/lane]")
      ->capture_default_str();
  perc->add_option("--length-km", perc_args.length_km, "Road length [km]")
      ->capture_default_str();
  perc->add_option("--s-m", perc_args.s_m, "Blocking distance [m]")->capture_default_str();
  perc->add_option("--single-lane-mode", perc_args.mode, "always-blocked | poisson")
      ->capture_default_str();
  perc->add_option("--out", perc_args.out, "Output CSV (stdout when omitted)");
  dispatch.emplace_back(perc, [&]() { cmd_percolation(perc_args); });

  McOracleArgs mc_args;
  auto* mc = app.add_subcommand("mc-oracle", "Monte Carlo geometric blockage estimate");
  mc->configurable();
  mc->add_option("--lanes", mc_args.lanes, "Lane count")->required()
      ->check(CLI::PositiveNumber);
  mc->add_option("--n-per-lane", mc_args.n_grid, "Hacked vehicles per lane (list)")
      ->capture_default_str();
  mc->add_option("--length-m", mc_args.length_m, "Road length [m]")->capture_default_str();
  mc->add_option("--s-m", mc_args.s_m, "Blocking distance [m]")->capture_default_str();
  mc->add_option("--trials", mc_args.trials, "Monte Carlo trials")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  mc->add_option("--workers", mc_args.workers, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  mc->add_option("--seed", mc_args.seed, "Master seed")->required();
  mc->add_option("--out", mc_args.out, "Output CSV (stdout when omitted)");
  dispatch.emplace_back(mc, [&]() { cmd_mc_oracle(mc_args); });

  SnapshotArgs snap_args;
  auto* snap = app.add_subcommand("snapshot", "Blockage analysis of an empirical snapshot");
  snap->configurable();
  snap->add_option("--snapshot", snap_args.snapshot_path, "Snapshot CSV")->required();
  snap->add_option("--length-m", snap_args.length_m, "Road length [m]")->required();
  snap->add_option("--lanes", snap_args.lanes, "Lane count (0 = infer from data)")
      ->capture_default_str();
  snap->add_option("--fraction", snap_args.fraction_grid, "Hacked fraction grid")
      ->capture_default_str();
  snap->add_option("--s-m", snap_args.s_m, "Blocking distance [m]")->capture_default_str();
  snap->add_option("--trials", snap_args.trials, "Trials per fraction")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  snap->add_option("--single-lane-mode", snap_args.mode, "always-blocked | poisson")
      ->capture_default_str();
  snap->add_option("--workers", snap_args.workers, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  snap->add_option("--seed", snap_args.seed, "Master seed")->required();
  snap->add_option("--out", snap_args.out, "Output CSV (stdout when omitted)");
  dispatch.emplace_back(snap, [&]() { cmd_snapshot(snap_args); });

  CitySweepArgs csweep_args;
  auto* csweep = app.add_subcommand("city-sweep", "Component sizes vs compromised density");
  csweep->configurable();
  csweep->add_option("--graph", csweep_args.graph_path, "GraphML or CSV edge list")->required();
  csweep->add_option("--rho-grid", csweep_args.rho_grid, "Density grid")->capture_default_str();
  csweep->add_option("--replicates", csweep_args.replicates, "Replicates per point")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  csweep->add_option("--s-m", csweep_args.s_m, "Blocking distance [m]")->capture_default_str();
  csweep->add_option("--single-lane-mode", csweep_args.mode, "always-blocked | poisson")
      ->capture_default_str();
  csweep->add_option("--workers", csweep_args.workers, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  csweep->add_option("--seed", csweep_args.seed, "Master seed")->required();
  csweep->add_option("--out", csweep_args.out, "Output CSV (stdout when omitted)");
  dispatch.emplace_back(csweep, [&]() { cmd_city_sweep(csweep_args); });

  CityAccessArgs access_args;
  auto* access = app.add_subcommand("city-access", "Service accessibility vs density");
  access->configurable();
  access->add_option("--graph", access_args.graph_path, "GraphML or CSV edge list")->required();
  access->add_option("--services", access_args.services_path, "Services CSV")->required();
  access->add_option("--rho-grid", access_args.rho_grid, "Density grid")->capture_default_str();
  access->add_option("--replicates", access_args.replicates, "Replicates per point")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  access->add_option("--s-m", access_args.s_m, "Blocking distance [m]")->capture_default_str();
  access->add_option("--single-lane-mode", access_args.mode, "always-blocked | poisson")
      ->capture_default_str();
  access->add_option("--workers", access_args.workers, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  access->add_option("--seed", access_args.seed, "Master seed")->required();
  access->add_option("--out", access_args.out, "Output CSV (stdout when omitted)");
  dispatch.emplace_back(access, [&]() { cmd_city_access(access_args); });

  CityHeatmapArgs heat_args;
  auto* heat = app.add_subcommand("city-heatmap", "Fragmentation probability heatmap");
  heat->configurable();
  heat->add_option("--graph", heat_args.graph_path, "GraphML or CSV edge list")->required();
  heat->add_option("--n-grid", heat_args.n_grid, "Total vehicle count grid")
      ->capture_default_str();
  heat->add_option("--f-grid", heat_args.f_grid, "Compromised fraction grid")
      ->capture_default_str();
  heat->add_option("--replicates", heat_args.replicates, "Replicates per cell")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  heat->add_option("--s-m", heat_args.s_m, "Blocking distance [m]")->capture_default_str();
  heat->add_option("--d-m", heat_args.d_m, "Effective vehicle length [m]")
      ->capture_default_str();
  heat->add_option("--frag-ratio", heat_args.frag_ratio,
                   "Fragmented when second >= ratio * largest")
      ->capture_default_str();
  heat->add_option("--single-lane-mode", heat_args.mode, "always-blocked | poisson")
      ->capture_default_str();
  heat->add_option("--workers", heat_args.workers, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  heat->add_option("--seed", heat_args.seed, "Master seed")->required();
  heat->add_option("--out", heat_args.out, "Output CSV (stdout when omitted)");
  dispatch.emplace_back(heat, [&]() { cmd_city_heatmap(heat_args); });

  GridGenArgs grid_args;
  auto* grid = app.add_subcommand("grid-gen", "Generate a lattice street network");
  grid->configurable();
  grid->add_option("--rows", grid_args.rows, "Lattice rows")->capture_default_str()
      ->check(CLI::Range(2, 100000));
  grid->add_option("--cols", grid_args.cols, "Lattice columns")->capture_default_str()
      ->check(CLI::Range(2, 100000));
  grid->add_option("--edge-length-min", grid_args.edge_len_min, "Min edge length [m]")
      ->capture_default_str();
  grid->add_option("--edge-length-max", grid_args.edge_len_max, "Max edge length [m]")
      ->capture_default_str();
  grid->add_option("--lanes-choices", grid_args.lanes_choices, "Lane count values")
      ->capture_default_str();
  grid->add_option("--lanes-weights", grid_args.lanes_weights, "Sampling weights")
      ->capture_default_str();
  grid->add_option("--format", grid_args.format, "csv | graphml")->capture_default_str();
  grid->add_option("--seed", grid_args.seed, "Master seed")->required();
  grid->add_option("--out", grid_args.out, "Output graph file")->required();
  dispatch.emplace_back(grid, [&]() { cmd_grid_gen(grid_args); });

  CapacityArgs cap_args;
  auto* cap = app.add_subcommand("capacity", "Bumper-to-bumper network capacity");
  cap->configurable();
  cap->add_option("--graph", cap_args.graph_path, "GraphML or CSV edge list")->required();
  cap->add_option("--d-m", cap_args.d_m, "Effective vehicle length [m]")->capture_default_str();
  cap->add_option("--out", cap_args.out, "Output CSV (stdout when omitted)");
  dispatch.emplace_back(cap, [&]() { cmd_capacity(cap_args); });

  try {
    app.parse(argc, argv);
    for (const auto& [sub, run] : dispatch) {
      if (sub->parsed()) {
        run();
        break;
      }
    }
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const LoadError& e) {
    std::fprintf(stderr, "gridlock: input error: %s\n", e.what());
    return 3;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "gridlock: %s\n", e.what());
    return 4;
  } catch (const CapacityError& e) {
    std::fprintf(stderr, "gridlock: %s\n", e.what());
    return 4;
  } catch (const StabilityError& e) {
    std::fprintf(stderr, "gridlock: %s\n", e.what());
    return 4;
  } catch (const Error& e) {
    std::fprintf(stderr, "gridlock: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gridlock: unexpected error: %s\n", e.what());
    return 1;
  }
  return 0;
}
