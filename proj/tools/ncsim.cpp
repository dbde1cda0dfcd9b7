// ncsim: networked dual-rate control workbench.
//
// Subcommands: simulate, stability, sweep, cost, live-local, live-remote.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ncs/cost.hpp"
#include "ncs/live.hpp"
#include "ncs/scenario.hpp"
#include "ncs/simulation.hpp"
#include "ncs/stability.hpp"
#include "ncs/trace.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::vector<std::string> set_overrides;
  std::string mode;
  std::string seed;
  std::string duration;
};

ncs::KeyValues overrides_from(const CommonArgs& args) {
  ncs::KeyValues kv;
  for (const auto& item : args.set_overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--set expects key=value, got: " + item);
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  if (!args.mode.empty()) kv["mode"] = args.mode;
  if (!args.seed.empty()) kv["seed"] = args.seed;
  if (!args.duration.empty()) kv["duration"] = args.duration;
  return kv;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_mode = true) {
  cmd->add_option("--config", args.config, "scenario config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", args.set_overrides,
                  "override a config key, e.g. --set dropout.p_lr=0.2");
  if (needs_mode)
    cmd->add_option("--mode", args.mode,
                    "nominal | no_prediction | delay_independent");
  cmd->add_option("--seed", args.seed, "random seed");
  cmd->add_option("--duration", args.duration, "run length in seconds");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

void print_matrix_csv(std::ostream& os, const ncs::Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.12g", m(r, c));
      os << buf;
    }
    os << '\n';
  }
}

int cmd_simulate(const CommonArgs& args, const std::string& out_path) {
  ncs::Scenario sc = ncs::load_scenario(args.config, overrides_from(args));
  ncs::SimulationTrace trace = ncs::run_simulation(sc);
  ncs::write_trace_csv(out_path, trace);
  std::cout << "mode=" << ncs::mode_name(sc.mode) << " seed=" << sc.seed
            << " rows=" << trace.rows.size()
            << (trace.diverged ? " DIVERGED" : "") << "\n";
  return trace.diverged ? 2 : 0;
}

int cmd_stability(const CommonArgs& args, bool full, int grid_points) {
  ncs::Scenario sc = ncs::load_scenario(args.config, overrides_from(args));
  const bool reduced = !full;
  if (full) {
    // The w-augmented dropout branch cannot satisfy the first LMI when the
    // plant is open-loop unstable; warn and proceed.
    const ncs::DiscretePlant dp =
        ncs::discretize(sc.plant, sc.timing.sensor_period());
    if (ncs::spectral_radius(dp.a) >= 1.0 - 1e-12)
      std::cerr << "warning: open-loop unstable plant; the full-form LMI "
                   "is expected to be infeasible (use the reduced form)\n";
  }
  ncs::ClosedLoopModel cl(sc.plant, sc.gains, sc.timing, reduced);
  ncs::DelayGrid grid = ncs::grid_delays(sc.delay, grid_points);
  ncs::FeasibilityResult res = ncs::check_feasibility(cl, grid);

  std::cout << (res.feasible ? "FEASIBLE" : "INFEASIBLE")
            << " dim=" << cl.dim() << " grid=" << grid_points
            << " iterations=" << res.iterations << "\n";
  std::cout << "min_eig_q=" << res.certificate.min_eig_q
            << " residual_dropout=" << res.certificate.residual_0
            << " residual_delivery=" << res.certificate.residual_1 << "\n";
  std::cout << "Q (csv):\n";
  print_matrix_csv(std::cout, res.certificate.q);
  return res.feasible ? 0 : 3;
}

int cmd_sweep(const CommonArgs& args, const std::string& q_list,
              const std::string& r_list, const std::string& out_path) {
  ncs::Scenario sc = ncs::load_scenario(args.config, overrides_from(args));
  const auto qs = parse_list(q_list);
  const auto rs = parse_list(r_list);
  const auto cells = ncs::sweep_mismatch(sc, qs, rs);
  ncs::write_sweep_csv(out_path, cells);
  for (const auto& c : cells)
    std::cout << "q=" << c.q << " r=" << c.r << " J3=" << c.j3
              << " J4=" << c.j4 << (c.diverged ? " DIVERGED" : "") << "\n";
  return 0;
}

int cmd_cost(const std::string& nominal_path,
             const std::string& candidates_list, const std::string& out_path) {
  const ncs::LoadedTrace nominal = ncs::read_trace_csv(nominal_path);
  std::vector<ncs::LoadedTrace> loaded;
  std::vector<std::string> labels;
  std::stringstream ss(candidates_list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    labels.push_back(item);
    loaded.push_back(ncs::read_trace_csv(item));
  }
  std::vector<std::pair<std::string, std::span<const double>>> candidates;
  for (std::size_t i = 0; i < loaded.size(); ++i)
    candidates.push_back({labels[i], loaded[i].y});
  const auto entries = ncs::cost_indexes(nominal.y, candidates, {});
  ncs::write_cost_csv(out_path, entries);
  for (const auto& e : entries)
    std::cout << e.label << ": E=" << e.e << " J1=" << e.j1 << " O=" << e.o
              << " J2=" << e.j2 << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"networked dual-rate PID control workbench"};
  app.require_subcommand(1);

  CommonArgs sim_args, stab_args, sweep_args, local_args, remote_args;
  std::string out_path = "trace.csv";
  bool full_form = false;
  int grid_points = 20;
  std::string q_list = "0,20,30", r_list = "0,8,12";
  std::string nominal_path, candidates_list;
  ncs::LiveConfig live;
  std::string bind_spec = "127.0.0.1:47301", peer_spec = "127.0.0.1:47302";
  bool no_inject = false;

  auto* sim = app.add_subcommand("simulate", "deterministic closed-loop run");
  add_common(sim, sim_args);
  sim->add_option("--out", out_path, "trace CSV path");

  auto* stab = app.add_subcommand("stability", "LMI feasibility check");
  add_common(stab, stab_args, false);
  stab->add_flag("--full", full_form, "use the w-augmented matrices");
  stab->add_option("--grid", grid_points, "number of delay grid points");

  auto* sweep = app.add_subcommand("sweep", "model-mismatch J3/J4 grid");
  add_common(sweep, sweep_args, false);
  sweep->add_option("--q", q_list, "gain mismatch percentages");
  sweep->add_option("--r", r_list, "time-constant mismatch percentages");
  sweep->add_option("--out", out_path, "report CSV path");

  auto* cost = app.add_subcommand("cost", "J1/J2 indexes from trace CSVs");
  cost->add_option("--nominal", nominal_path, "nominal trace CSV")
      ->required()
      ->check(CLI::ExistingFile);
  cost->add_option("--candidates", candidates_list,
                   "comma-separated candidate CSVs, worst first")
      ->required();
  cost->add_option("--out", out_path, "cost CSV path");

  std::string delay_eta, delay_phi, delay_max, drop_p;
  auto add_live = [&](CLI::App* cmd, CommonArgs& args) {
    add_common(cmd, args, false);
    cmd->add_option("--bind", bind_spec, "host:port to bind");
    cmd->add_option("--peer", peer_spec, "host:port of the peer");
    cmd->add_flag("--no-inject", no_inject,
                  "disable software delay/dropout injection");
    cmd->add_option("--delay-eta", delay_eta, "injected delay offset, s");
    cmd->add_option("--delay-phi", delay_phi, "injected delay scale, s");
    cmd->add_option("--delay-max", delay_max, "injected delay ceiling, s");
    cmd->add_option("--drop-p", drop_p, "injected dropout probability");
    cmd->add_option("--out", out_path, "trace CSV path");
  };
  auto* llocal = app.add_subcommand("live-local",
                                    "plant + fast-rate PD side over UDP");
  add_live(llocal, local_args);
  auto* lremote = app.add_subcommand("live-remote",
                                     "PI + prediction side over UDP");
  add_live(lremote, remote_args);

  CLI11_PARSE(app, argc, argv);

  auto parse_hostport = [](const std::string& spec, std::string& host,
                           int& port) {
    const auto colon = spec.rfind(':');
    if (colon == std::string::npos)
      throw CLI::ValidationError("expected host:port, got " + spec);
    host = spec.substr(0, colon);
    port = std::stoi(spec.substr(colon + 1));
  };

  try {
    if (sim->parsed()) return cmd_simulate(sim_args, out_path);
    if (stab->parsed()) return cmd_stability(stab_args, full_form, grid_points);
    if (sweep->parsed())
      return cmd_sweep(sweep_args, q_list, r_list, out_path);
    if (cost->parsed())
      return cmd_cost(nominal_path, candidates_list, out_path);
    if (llocal->parsed() || lremote->parsed()) {
      const CommonArgs& args = llocal->parsed() ? local_args : remote_args;
      ncs::KeyValues kv = overrides_from(args);
      if (!delay_eta.empty()) kv["delay.eta"] = delay_eta;
      if (!delay_phi.empty()) kv["delay.phi"] = delay_phi;
      if (!delay_max.empty()) kv["delay.tau_max"] = delay_max;
      if (!drop_p.empty()) {
        kv["dropout.p_lr"] = drop_p;
        kv["dropout.p_rl"] = drop_p;
      }
      ncs::Scenario sc = ncs::load_scenario(args.config, kv);
      parse_hostport(bind_spec, live.bind_host, live.bind_port);
      parse_hostport(peer_spec, live.peer_host, live.peer_port);
      live.inject = !no_inject;
      ncs::SimulationTrace trace = llocal->parsed()
                                       ? ncs::run_live_local(sc, live)
                                       : ncs::run_live_remote(sc, live);
      if (llocal->parsed()) ncs::write_trace_csv(out_path, trace);
      std::cout << "periods=" << trace.periods.size()
                << (trace.diverged ? " DIVERGED" : "") << "\n";
      return trace.diverged ? 2 : 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
