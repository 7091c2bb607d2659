#include "solstab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace solstab {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void RunConfig::validate() const {
  if (!(c0 > 0.0)) throw ValidationError("RunConfig: c0 must be positive");
  if (!(a > 0.0 && a < std::sqrt(c0 / 3.0)))
    throw ValidationError("RunConfig: require 0 < a < sqrt(c0/3) = " +
                          format_double(std::sqrt(c0 / 3.0)));
  if (!(s > 0.875 && s < 1.0)) throw ValidationError("RunConfig: s must lie in (7/8, 1)");
  if (!(eps1 > 0.0 && eps2 > 0.0)) throw ValidationError("RunConfig: eps1, eps2 must be positive");
  if (!(delta > 0.0 && T > 0.0)) throw ValidationError("RunConfig: delta, T must be positive");
  if (!(kappa > 0.0 && kappa < 1.0)) throw ValidationError("RunConfig: kappa must lie in (0,1)");
  if (!(eta1 > 0.0)) throw ValidationError("RunConfig: eta1 must be positive");
  if (!(dt > 0.0 && dt <= delta)) throw ValidationError("RunConfig: need 0 < dt <= delta");
  if (!(trunc_radius > 0.0 && trunc_radius <= box_length / 2.0))
    throw ValidationError("RunConfig: trunc_radius must lie in (0, box_length/2]");
  Grid probe(num_points, box_length);  // validates the grid parameters
  ISchedule sched{kappa, eta1, s, schedule_exponent_override};
  if (sched.exponent_coefficient() >= 0.0)
    throw ValidationError("RunConfig: schedule exponent coefficient must be negative");
}

std::map<std::string, std::string> parse_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      const auto e = v.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) out[key] = value;
  }
  return out;
}

RunConfig load_run_config(const std::string& path_or_default) {
  RunConfig cfg;
  if (path_or_default == "default" || path_or_default.empty()) return cfg;
  auto kv = parse_key_value_file(path_or_default);
  auto get_d = [&](const char* key, double& slot) {
    if (auto it = kv.find(key); it != kv.end()) slot = std::stod(it->second);
  };
  auto get_b = [&](const char* key, bool& slot) {
    if (auto it = kv.find(key); it != kv.end())
      slot = it->second == "1" || it->second == "true";
  };
  get_d("s", cfg.s);
  get_d("a", cfg.a);
  get_d("c0", cfg.c0);
  get_d("eps1", cfg.eps1);
  get_d("eps2", cfg.eps2);
  get_d("delta", cfg.delta);
  get_d("T", cfg.T);
  get_d("kappa", cfg.kappa);
  get_d("eta1", cfg.eta1);
  get_d("dt", cfg.dt);
  get_d("box_length", cfg.box_length);
  get_d("trunc_radius", cfg.trunc_radius);
  if (auto it = kv.find("num_points"); it != kv.end()) cfg.num_points = std::stoi(it->second);
  if (auto it = kv.find("seed"); it != kv.end()) cfg.seed = std::stoull(it->second);
  get_b("gamma_sign_s4", cfg.gamma_sign_s4);
  get_b("pa_paper_form", cfg.pa_paper_form);
  get_b("recalibrate_at_c", cfg.recalibrate_at_c);
  if (auto it = kv.find("schedule_exponent_override"); it != kv.end())
    cfg.schedule_exponent_override = std::stod(it->second);
  return cfg;
}

void RunRecord::save(const std::string& dir) const {
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "manifest");
    for (const auto& [k, v] : manifest) out << k << " = " << v << "\n";
  }
  {
    std::ofstream out(fs::path(dir) / "steps.csv");
    out << "t_n,N,K_n,v_h1,c,gamma,c_dot,gamma_dot,P_resid,ledger_ok\n";
    for (std::size_t i = 0; i < steps.size(); ++i) {
      out << format_double(steps.times[i]);
      for (double v : steps.values[i]) out << "," << format_double(v);
      out << "\n";
    }
  }
  {
    std::ofstream out(fs::path(dir) / "fit.csv");
    out << "decay_rate,r_estimate,window\n";
    out << format_double(decay_rate) << "," << format_double(r_estimate) << ","
        << fit_window << "\n";
  }
}

RunRecord RunRecord::load(const std::string& dir) {
  RunRecord rec;
  {
    std::ifstream in(fs::path(dir) / "manifest");
    if (!in) throw ValidationError("RunRecord::load: missing manifest in " + dir);
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) continue;
      rec.manifest.emplace_back(line.substr(0, eq), line.substr(eq + 3));
    }
  }
  {
    std::ifstream in(fs::path(dir) / "steps.csv");
    if (!in) throw ValidationError("RunRecord::load: missing steps.csv in " + dir);
    std::string line;
    std::getline(in, line);  // header
    rec.steps.columns = {"N", "K_n", "v_h1", "c", "gamma", "c_dot", "gamma_dot",
                         "P_resid", "ledger_ok"};
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> row;
      double t = 0.0;
      for (int col = 0; std::getline(ss, cell, ','); ++col) {
        const double v = std::stod(cell);
        if (col == 0)
          t = v;
        else
          row.push_back(v);
      }
      rec.steps.append(t, row);
    }
  }
  {
    std::ifstream in(fs::path(dir) / "fit.csv");
    if (!in) throw ValidationError("RunRecord::load: missing fit.csv in " + dir);
    std::string line;
    std::getline(in, line);  // header
    if (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string cell;
      std::getline(ss, cell, ',');
      rec.decay_rate = std::stod(cell);
      std::getline(ss, cell, ',');
      rec.r_estimate = std::stod(cell);
      std::getline(ss, rec.fit_window);
    }
  }
  return rec;
}

std::string RunRecord::manifest_value(const std::string& key) const {
  for (const auto& [k, v] : manifest)
    if (k == key) return v;
  throw ValidationError("RunRecord: no manifest key " + key);
}

RealField build_seed_perturbation(const Grid& g, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> center(-10.0, 10.0);
  std::uniform_real_distribution<double> width(1.0, 3.0);
  RealField out(g);
  for (int b = 0; b < 6; ++b) {
    const double a0 = amp(rng), y0 = center(rng), w0 = width(rng);
    out.samples += a0 * (-((g.points - y0) / w0).square()).exp();
  }
  return out;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  bool valid = false;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit fit;
  const std::size_t n = x.size();
  if (n < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) return fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.valid = true;
  return fit;
}

void push_config(RunRecord& rec, const RunConfig& cfg) {
  auto& m = rec.manifest;
  m.emplace_back("s", format_double(cfg.s));
  m.emplace_back("a", format_double(cfg.a));
  m.emplace_back("c0", format_double(cfg.c0));
  m.emplace_back("eps1", format_double(cfg.eps1));
  m.emplace_back("eps2", format_double(cfg.eps2));
  m.emplace_back("delta", format_double(cfg.delta));
  m.emplace_back("T", format_double(cfg.T));
  m.emplace_back("kappa", format_double(cfg.kappa));
  m.emplace_back("eta1", format_double(cfg.eta1));
  m.emplace_back("num_points", std::to_string(cfg.num_points));
  m.emplace_back("box_length", format_double(cfg.box_length));
  m.emplace_back("dt", format_double(cfg.dt));
  m.emplace_back("trunc_radius", format_double(cfg.trunc_radius));
  m.emplace_back("seed", std::to_string(cfg.seed));
  m.emplace_back("gamma_sign_s4", cfg.gamma_sign_s4 ? "1" : "0");
  m.emplace_back("pa_paper_form", cfg.pa_paper_form ? "1" : "0");
  m.emplace_back("recalibrate_at_c", cfg.recalibrate_at_c ? "1" : "0");
  if (cfg.schedule_exponent_override)
    m.emplace_back("schedule_exponent_override", format_double(*cfg.schedule_exponent_override));
  m.emplace_back("code_version", "solstab 1.0");
}

}  // namespace

RunRecord run_iteration_scheme(const RunConfig& cfg, const std::string* out_dir) {
  cfg.validate();
  Grid grid(cfg.num_points, cfg.box_length);
  const WeightParams weight(cfg.a, cfg.c0, cfg.trunc_radius);
  ModulationOptions opts;
  opts.gamma_sign_s4 = cfg.gamma_sign_s4;
  opts.recalibrate_at_c = cfg.recalibrate_at_c;
  CoupledEvolver evolver(grid, cfg.c0, weight, IMultiplier(1.0, cfg.s), cfg.dt, opts);
  const ISchedule sched{cfg.kappa, cfg.eta1, cfg.s, cfg.schedule_exponent_override};

  RunRecord rec;
  push_config(rec, cfg);
  rec.steps.columns = {"N", "K_n", "v_h1", "c", "gamma", "c_dot", "gamma_dot",
                       "P_resid", "ledger_ok"};

  // Initial data: seeded bump scaled so the weighted/unweighted I_1 norms sit
  // strictly below eps1/eps2, with the orthogonality anchored at t = 0.
  PerturbationState state = evolver.make_state(build_seed_perturbation(grid, cfg.seed));
  for (int pass = 0; pass < 2; ++pass) {
    const double nw = evolver.weighted_h1(state);
    const double nv = sobolev_norm(state.v_tilde, 1.0);
    if (nw > 0.0) {
      const double scale = std::min(0.9 * cfg.eps1 / nw, 0.9 * cfg.eps2 / nv);
      state.v.samples *= scale;
    }
    evolver.reanchor(state);
  }

  // Ledger constant C = 2 max{(2 + ||u||_inf + ||u_y||_inf)(||eta1|| + ||eta2||), 1},
  // with the sup norms measured on the initial u = psi + v.
  double ledger_c;
  {
    const RealField psi = sample_soliton(grid, SolitonParams(cfg.c0));
    const RealField u(grid, psi.samples + state.v.samples);
    const double uinf = u.samples.abs().maxCoeff();
    const double uyinf = derivative(u, 1).samples.abs().maxCoeff();
    const double etas = l2_norm(evolver.pair().eta1) + l2_norm(evolver.pair().eta2);
    ledger_c = 2.0 * std::max((2.0 + uinf + uyinf) * etas, 1.0);
  }
  rec.manifest.emplace_back("ledger_C", format_double(ledger_c));

  const int n0 = static_cast<int>(std::lround(cfg.T / cfg.delta));
  const long steps_per_interval = std::lround(cfg.delta / cfg.dt);
  int first_clamp = -1;

  auto persist_partial = [&](const std::string& reason) {
    if (!out_dir) return;
    RunRecord partial = rec;
    partial.manifest.emplace_back("status", "aborted");
    partial.manifest.emplace_back("abort_reason", reason);
    partial.save(*out_dir);
  };

  try {
    for (int n = 0; n <= n0; ++n) {
      const double t_n = n * cfg.delta;
      double n_cut = schedule_N(sched, n);
      const double nyq = grid.nyquist_frequency();
      if (n_cut > nyq) {
        n_cut = nyq;
        if (first_clamp < 0) first_clamp = n;
      }
      evolver.set_cutoff(n_cut, &state);
      evolver.reanchor(state);

      const ModulationRates rates = evolver.solve_modulation(state);
      const double w_h1 = evolver.weighted_h1(state);
      const double k_n = w_h1 * w_h1;
      const double v_h1 = sobolev_norm(state.v_tilde, 1.0);
      const double p_resid = evolver.p_residual(state);
      const double kap_n = std::pow(cfg.kappa, n);
      const bool ledger_ok =
          std::abs(rates.c_dot) < ledger_c * cfg.eps1 * kap_n &&
          std::abs(state.c - cfg.c0) <
              ledger_c * cfg.eps1 * (1.0 - kap_n) / (1.0 - cfg.kappa) + 1e-30 &&
          w_h1 < cfg.eps1 * kap_n;
      rec.steps.append(t_n, {n_cut, k_n, v_h1, state.c, state.gamma, rates.c_dot,
                             rates.gamma_dot, p_resid, ledger_ok ? 1.0 : 0.0});

      if (n == n0) break;
      for (long i = 0; i < steps_per_interval; ++i) evolver.step(state);
    }
  } catch (const NumericalError& err) {
    persist_partial(err.what());
    throw;
  }

  // Decay fits over the post-transient window.
  const auto k_col = rec.steps.column("K_n");
  const auto v_col = rec.steps.column("v_h1");
  const auto cd_col = rec.steps.column("c_dot");
  const auto gd_col = rec.steps.column("gamma_dot");
  const std::size_t skip = std::max<std::size_t>(1, rec.steps.size() / 8);
  std::vector<double> tw, lw, lv, lr;
  for (std::size_t i = skip; i < rec.steps.size(); ++i) {
    if (k_col[i] <= 0.0) continue;
    tw.push_back(rec.steps.times[i]);
    lw.push_back(0.5 * std::log(k_col[i]));
    lv.push_back(std::log(std::max(v_col[i], 1e-300)));
    lr.push_back(std::log(std::max(std::abs(cd_col[i]) + std::abs(gd_col[i]), 1e-300)));
  }
  const LineFit wfit = fit_line(tw, lw);
  const LineFit vfit = fit_line(tw, lv);
  const LineFit rfit = fit_line(tw, lr);
  rec.decay_rate = wfit.valid ? wfit.slope : 0.0;
  rec.r_estimate = std::exp(rec.decay_rate);
  rec.fit_window = tw.empty() ? "degenerate"
                              : "t=" + format_double(tw.front()) + ".." + format_double(tw.back());
  rec.manifest.emplace_back("decay_rate_weighted", format_double(rec.decay_rate));
  rec.manifest.emplace_back("r_weighted", format_double(rec.r_estimate));
  rec.manifest.emplace_back("decay_rate_unweighted", format_double(vfit.valid ? vfit.slope : 0.0));
  rec.manifest.emplace_back("r_unweighted", format_double(std::exp(vfit.valid ? vfit.slope : 0.0)));
  rec.manifest.emplace_back("rates_envelope_rate", format_double(rfit.valid ? rfit.slope : 0.0));
  rec.manifest.emplace_back("first_clamped_n", std::to_string(first_clamp));
  rec.manifest.emplace_back("status", "completed");

  if (out_dir) rec.save(*out_dir);
  return rec;
}

void write_table_csv(const std::string& path, const Table& table) {
  std::ofstream out(path);
  for (std::size_t j = 0; j < table.columns.size(); ++j)
    out << table.columns[j] << (j + 1 < table.columns.size() ? "," : "\n");
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j)
      out << format_double(row[j]) << (j + 1 < row.size() ? "," : "\n");
  }
}

ScalingResult commutator_scaling_experiment(const RunConfig& cfg,
                                            const std::vector<double>& n_list) {
  Grid grid(cfg.num_points, cfg.box_length);
  const double beta = 8.0;  // narrow profiles keep spectral tails above N
  const RealField u = sample(grid, [&](double y) { return 1.0 / std::cosh(beta * (y + 1.5)); });
  const RealField v = sample(grid, [&](double y) { return 1.0 / std::cosh(beta * (y - 1.5)); });
  const double r_cut = std::min(20.0, cfg.box_length / 4.0);
  ArrayX omega(grid.num_points);
  for (int j = 0; j < grid.num_points; ++j) {
    const double y = grid.points[j];
    omega[j] = y > r_cut ? 0.0 : std::exp(cfg.a * y);
  }

  const double probe_delta = 0.5;
  const int q = 128;
  ScalingResult result;
  result.table.columns = {"N", "y1_norm", "l2t_norm"};
  std::vector<double> logn, logy;
  for (double n_cut : n_list) {
    if (n_cut > grid.nyquist_frequency())
      throw ValidationError("commutator_scaling_experiment: N beyond grid Nyquist");
    const IMultiplier im(n_cut, cfg.s);
    const RealField comm = commutator(im, u, v);
    const ArrayX weighted = omega * derivative(comm, 1).samples;

    SpacetimeField field = make_window(grid, -2.0 * probe_delta, 2.0 * probe_delta, q);
    for (int i = 0; i < q; ++i)
      field.values.row(i) = rho_cutoff(field.t_grid[i] / probe_delta) * weighted.matrix().transpose();
    const double y1 = xsb1_norm(field, 1.0, -0.5);
    double l2t = 0.0;
    for (int i = 0; i < q; ++i) {
      const double cut = rho_cutoff(field.t_grid[i] / probe_delta);
      l2t += cut * cut;
    }
    l2t = std::sqrt(l2t * field.t_spacing()) * std::sqrt(weighted.square().sum() * grid.spacing);
    result.table.rows.push_back({n_cut, y1, l2t});
    if (y1 > 0.0) {
      logn.push_back(std::log(n_cut));
      logy.push_back(std::log(y1));
    }
  }
  if (logn.size() < n_list.size() || logn.size() < 2) {
    result.degenerate = true;
    return result;
  }
  const LineFit fit = fit_line(logn, logy);
  result.slope = fit.slope;
  result.degenerate = !fit.valid;
  return result;
}

Table hamiltonian_increment_experiment(const RunConfig& cfg,
                                       const std::vector<double>& n_list) {
  cfg.validate();
  Grid grid(cfg.num_points, cfg.box_length);
  const WeightParams weight(cfg.a, cfg.c0, cfg.trunc_radius);
  Table table;
  table.columns = {"N", "dH", "comparison", "ratio"};
  for (double n_cut : n_list) {
    CoupledEvolver evolver(grid, cfg.c0, weight, IMultiplier(n_cut, cfg.s), cfg.dt);
    PerturbationState state = evolver.make_state(build_seed_perturbation(grid, cfg.seed));
    for (int pass = 0; pass < 2; ++pass) {
      const double nw = evolver.weighted_h1(state);
      if (nw > 0.0) state.v.samples *= 0.9 * cfg.eps1 / nw;
      evolver.reanchor(state);
    }
    auto total_h = [&](const PerturbationState& st) {
      const RealField psi = sample_soliton(grid, SolitonParams(st.c));
      return hamiltonian(RealField(grid, psi.samples + st.v_tilde.samples));
    };
    const double h0 = total_h(state);
    const double v_h1 = sobolev_norm(state.v_tilde, 1.0);
    const long steps = std::lround(cfg.delta / cfg.dt);
    for (long i = 0; i < steps; ++i) evolver.step(state);
    const double dh = total_h(state) - h0;
    const double cmp = v_h1 * v_h1 / n_cut;
    table.rows.push_back({n_cut, dh, cmp, cmp != 0.0 ? dh / cmp : 0.0});
  }
  return table;
}

}  // namespace solstab
