#ifndef SOLSTAB_EXPERIMENTS_HPP
#define SOLSTAB_EXPERIMENTS_HPP

#include "solstab/bourgain.hpp"
#include "solstab/imethod.hpp"
#include "solstab/kdv.hpp"
#include "solstab/modulation.hpp"
#include "solstab/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace solstab {

/// Configuration for the iteration-scheme experiments. Config-file keys match
/// the field names exactly.
struct RunConfig {
  double s = 0.9;            // regularity, in (7/8, 1)
  double a = 0.5;            // weight rate, 0 < a < sqrt(c0/3)
  double c0 = 1.0;
  double eps1 = 1e-3;        // weighted smallness target
  double eps2 = 1e-2;        // unweighted smallness target
  double delta = 0.5;        // iteration step length
  double T = 20.0;           // horizon
  double kappa = 0.9;
  double eta1 = 0.01;
  int num_points = kModulationNumPoints;
  double box_length = kModulationBoxLength;
  double dt = 5e-4;
  double trunc_radius = 50.0;  // weight truncation R (defaults to the box edge)
  unsigned long long seed = 1;
  bool gamma_sign_s4 = false;
  bool pa_paper_form = false;
  bool recalibrate_at_c = false;
  std::optional<double> schedule_exponent_override;

  void validate() const;
};

/// key = value config text; "default" yields the built-in defaults.
RunConfig load_run_config(const std::string& path_or_default);
std::map<std::string, std::string> parse_key_value_file(const std::string& path);

/// Persisted outcome of one iteration run. save() writes manifest (key-value
/// text), steps.csv and fit.csv; load() reads them back field-identically.
struct RunRecord {
  std::vector<std::pair<std::string, std::string>> manifest;
  TimeSeries steps;  // columns: N,K_n,v_h1,c,gamma,c_dot,gamma_dot,P_resid,ledger_ok
  double decay_rate = 0.0;   // fitted d/dt log ||w~||_{H1}
  double r_estimate = 1.0;   // exp(decay_rate)
  std::string fit_window;

  void save(const std::string& dir) const;
  static RunRecord load(const std::string& dir);
  std::string manifest_value(const std::string& key) const;
};

/// Deterministic seeded bump: a handful of Gaussians with seeded centers,
/// widths and amplitudes, band-limited by the run grid.
RealField build_seed_perturbation(const Grid& g, unsigned long long seed);

/// The iteration ladder t_n = n delta with the growing cutoff N(n) (clamped at
/// the grid Nyquist, clamping recorded), evolving the coupled system on each
/// J_n, recording K_n = ||w~_n(t_n)||_{H1}^2 and the per-step ledger checks,
/// then fitting the decay rate of the weighted norm. Partial records are
/// persisted to out_dir (when given) before numerical errors propagate.
RunRecord run_iteration_scheme(const RunConfig& cfg, const std::string* out_dir = nullptr);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
void write_table_csv(const std::string& path, const Table& table);

struct ScalingResult {
  Table table;        // columns: N, y1_norm, l2t_norm
  double slope = 0.0; // d log(y1_norm) / d log N, least squares
  bool degenerate = false;
};

/// Weighted commutator norm surrogate against N for fixed smooth profiles,
/// time-localized by rho_delta; slope of the log-log fit.
ScalingResult commutator_scaling_experiment(const RunConfig& cfg,
                                            const std::vector<double>& n_list);

/// Hamiltonian increment of psi + v~ over one iteration interval against the
/// comparison quantity ||v~||_{H1}^2 / N, for a sweep of cutoffs. Diagnostic
/// ratios only; no hard assertion.
Table hamiltonian_increment_experiment(const RunConfig& cfg,
                                       const std::vector<double>& n_list);

/// Round-trippable double formatting used by every persisted file.
std::string format_double(double x);

}  // namespace solstab

#endif
