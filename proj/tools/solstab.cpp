// Command-line front end: simulation, spectrum reports, coupled modulation
// runs, the iteration-scheme experiment, and the norm/scaling probes.

#include "solstab/bourgain.hpp"
#include "solstab/experiments.hpp"
#include "solstab/imethod.hpp"
#include "solstab/kdv.hpp"
#include "solstab/modulation.hpp"
#include "solstab/soliton.hpp"
#include "solstab/spectral_ops.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using namespace solstab;

namespace {

void write_manifest(const std::string& dir,
                    const std::vector<std::pair<std::string, std::string>>& rows) {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / "manifest");
  for (const auto& [k, v] : rows) out << k << " = " << v << "\n";
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
  Grid grid(cfg.num_points, cfg.box_length);
  SolverConfig scfg;
  scfg.dt = cfg.dt;
  scfg.t_end = cfg.T;
  KdvSolver solver(grid, scfg);

  RealField bump = build_seed_perturbation(grid, cfg.seed);
  const double bump_l2 = l2_norm(bump);
  if (bump_l2 > 0.0) bump.samples *= cfg.eps1 / bump_l2;
  RealField u0 = sample_soliton(grid, SolitonParams(cfg.c0));
  u0.samples += bump.samples;

  fs::create_directories(out_dir);
  TimeSeries series;
  int status = 0;
  try {
    series = solver.run(u0, cfg.delta);
  } catch (const InstabilityError& err) {
    series = err.partial;
    status = 2;
    std::cerr << "simulate: " << err.what() << " at t=" << err.time << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "series.csv");
    out << "t,mass,hamiltonian,h1_norm\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
      out << format_double(series.times[i]);
      for (double v : series.values[i]) out << "," << format_double(v);
      out << "\n";
    }
  }
  write_manifest(out_dir, {{"command", "simulate"},
                           {"c0", format_double(cfg.c0)},
                           {"eps1", format_double(cfg.eps1)},
                           {"seed", std::to_string(cfg.seed)},
                           {"dt", format_double(cfg.dt)},
                           {"T", format_double(cfg.T)},
                           {"status", status == 0 ? "completed" : "aborted"}});
  return status;
}

int cmd_spectrum(const RunConfig& cfg, const std::string& out_dir, int points, double box) {
  Grid grid(points, box);
  const LinearizedOperator op = build_operator(grid, cfg.a, cfg.c0);
  const SpectrumSummary summary = discrete_spectrum(op);
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "spectrum.txt");
  write_spectrum_report(out, summary, cfg.a, cfg.c0, grid);
  std::cout << "b = " << summary.bound_b
            << ", |lambda| nearest zero: " << std::abs(summary.nearest_zero[0]) << ", "
            << std::abs(summary.nearest_zero[1])
            << ", max Re(remainder) = " << summary.max_re_remainder << "\n";
  return 0;
}

int cmd_modulate(const RunConfig& cfg, const std::string& out_dir) {
  Grid grid(cfg.num_points, cfg.box_length);
  const WeightParams weight(cfg.a, cfg.c0, cfg.trunc_radius);
  ModulationOptions opts;
  opts.gamma_sign_s4 = cfg.gamma_sign_s4;
  opts.recalibrate_at_c = cfg.recalibrate_at_c;
  CoupledEvolver evolver(grid, cfg.c0, weight, IMultiplier(1.0, cfg.s), cfg.dt, opts);

  PerturbationState state = evolver.make_state(build_seed_perturbation(grid, cfg.seed));
  for (int pass = 0; pass < 2; ++pass) {
    const double nw = evolver.weighted_h1(state);
    if (nw > 0.0) state.v.samples *= 0.9 * cfg.eps1 / nw;
    evolver.reanchor(state);
  }

  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "trace.csv");
  out << "t,w_h1,v_h1,c,gamma,c_dot,gamma_dot,P_resid,N\n";
  auto record = [&]() {
    const auto& diag = evolver.last_diagnostics();
    out << format_double(state.t) << "," << format_double(evolver.weighted_h1(state)) << ","
        << format_double(sobolev_norm(state.v_tilde, 1.0)) << "," << format_double(state.c)
        << "," << format_double(state.gamma) << "," << format_double(diag.rates.c_dot) << ","
        << format_double(diag.rates.gamma_dot) << "," << format_double(diag.p_resid_pre) << ","
        << format_double(evolver.cutoff()) << "\n";
  };

  const long total = std::lround(cfg.T / cfg.dt);
  const long cadence = std::max(1L, std::lround(cfg.delta / cfg.dt));
  int status = 0;
  try {
    evolver.solve_modulation(state);
    record();
    for (long i = 0; i < total; ++i) {
      evolver.step(state);
      if ((i + 1) % cadence == 0) record();
    }
  } catch (const NumericalError& err) {
    status = 2;
    std::cerr << "modulate: " << err.what() << " at t=" << err.time << "\n";
  }
  write_manifest(out_dir, {{"command", "modulate"},
                           {"a", format_double(cfg.a)},
                           {"c0", format_double(cfg.c0)},
                           {"eps1", format_double(cfg.eps1)},
                           {"seed", std::to_string(cfg.seed)},
                           {"status", status == 0 ? "completed" : "aborted"}});
  return status;
}

int cmd_norms(const RunConfig& cfg, const std::string& out_dir, int trials) {
  ProbeConfig pc;
  pc.s = std::min(cfg.s, 0.99);
  pc.a = std::min(cfg.a, std::min(1.0, cfg.c0));
  pc.c0 = cfg.c0;
  pc.seed = cfg.seed;
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "probes.csv");
  out << "kind,trial,lhs,rhs,ratio\n";
  for (ProbeKind kind :
       {ProbeKind::W1Hom, ProbeKind::W1Inhom, ProbeKind::W2Hom, ProbeKind::W2Inhom}) {
    const ProbeStats stats = linear_estimate_probe(kind, trials, pc);
    for (const auto& row : stats.rows)
      out << probe_kind_name(kind) << "," << row.trial << "," << format_double(row.lhs) << ","
          << format_double(row.rhs) << "," << format_double(row.ratio) << "\n";
    std::cout << probe_kind_name(kind) << ": max ratio " << stats.max_ratio << ", mean "
              << stats.mean_ratio << "\n";
  }
  write_manifest(out_dir, {{"command", "norms"},
                           {"trials", std::to_string(trials)},
                           {"seed", std::to_string(cfg.seed)},
                           {"status", "completed"}});
  return 0;
}

int cmd_commutator_scaling(RunConfig cfg, const std::string& out_dir) {
  cfg.num_points = std::max(cfg.num_points, 4096);
  const std::vector<double> n_list = {8, 16, 32, 64};
  const ScalingResult result = commutator_scaling_experiment(cfg, n_list);
  fs::create_directories(out_dir);
  write_table_csv((fs::path(out_dir) / "scaling.csv").string(), result.table);
  write_manifest(out_dir, {{"command", "commutator-scaling"},
                           {"slope", format_double(result.slope)},
                           {"degenerate", result.degenerate ? "1" : "0"},
                           {"status", "completed"}});
  std::cout << "log-log slope: " << result.slope << (result.degenerate ? " (degenerate)" : "")
            << "\n";
  return 0;
}

int cmd_hamiltonian_increment(const RunConfig& cfg, const std::string& out_dir) {
  const std::vector<double> n_list = {8, 16, 32, 64};
  const Table table = hamiltonian_increment_experiment(cfg, n_list);
  fs::create_directories(out_dir);
  write_table_csv((fs::path(out_dir) / "increments.csv").string(), table);
  write_manifest(out_dir, {{"command", "hamiltonian-increment"},
                           {"seed", std::to_string(cfg.seed)},
                           {"status", "completed"}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KdV soliton stability toolkit"};
  app.require_subcommand(1);

  std::string config_path = "default";
  std::string out_dir = "runs/out";
  long long seed_override = -1;
  app.add_option("--config", config_path, "config file (key = value) or 'default'");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed_override, "override the config seed");

  auto* sim = app.add_subcommand("simulate", "full KdV runs with conservation observers");
  auto* spec = app.add_subcommand("spectrum", "eigenvalue report for the weighted linearization");
  int spectrum_points = kSpectrumNumPoints;
  double spectrum_box = kSpectrumBoxLength;
  spec->add_option("--points", spectrum_points, "spectrum grid size (power of two)");
  spec->add_option("--box", spectrum_box, "spectrum grid box length");
  auto* mod = app.add_subcommand("modulate", "coupled perturbation evolution at fixed N");
  auto* iter = app.add_subcommand("iterate", "iteration-scheme decay experiment");
  auto* norms = app.add_subcommand("norms", "dyadic-norm linear estimate probes");
  int trials = 50;
  norms->add_option("--trials", trials, "probe trials per kind");
  auto* comm = app.add_subcommand("commutator-scaling", "weighted commutator norm vs N");
  auto* ham = app.add_subcommand("hamiltonian-increment", "Hamiltonian increment vs N");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = load_run_config(config_path);
    if (seed_override >= 0) cfg.seed = static_cast<unsigned long long>(seed_override);
    cfg.validate();

    if (sim->parsed()) return cmd_simulate(cfg, out_dir);
    if (spec->parsed()) return cmd_spectrum(cfg, out_dir, spectrum_points, spectrum_box);
    if (mod->parsed()) return cmd_modulate(cfg, out_dir);
    if (iter->parsed()) {
      run_iteration_scheme(cfg, &out_dir);
      return 0;
    }
    if (norms->parsed()) return cmd_norms(cfg, out_dir, trials);
    if (comm->parsed()) return cmd_commutator_scaling(cfg, out_dir);
    if (ham->parsed()) return cmd_hamiltonian_increment(cfg, out_dir);
    return 1;
  } catch (const ValidationError& err) {
    std::cerr << "validation error: " << err.what() << "\n";
    return 1;
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << " (t=" << err.time << ")\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
