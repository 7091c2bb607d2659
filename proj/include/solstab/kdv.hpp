#ifndef SOLSTAB_KDV_HPP
#define SOLSTAB_KDV_HPP

#include "solstab/grid.hpp"
#include "solstab/types.hpp"

#include <functional>

namespace solstab {

enum class Scheme { IntegratingFactorRk4, Etdrk4 };

/// Time-stepping configuration for u_t + u_xxx + d_x(u^2) = 0. The linear
/// part is exact in Fourier space under both schemes; the constructor checks
/// dt against the explicit-nonlinearity bound 2.82/(u_ref * xi_cut).
struct SolverConfig {
  double dt = 1e-4;
  double t_end = 1.0;
  bool dealias_enabled = true;
  Scheme scheme = Scheme::IntegratingFactorRk4;
  bool nonlinear_enabled = true;
  double u_ref = 8.0;  // amplitude estimate entering the stability bound
};

struct InstabilityError : NumericalError {
  InstabilityError(double t, TimeSeries partial_series)
      : NumericalError("kdv: coefficient magnitude exceeded blow-up guard", t),
        partial(std::move(partial_series)) {}
  TimeSeries partial;
};

/// Pseudospectral KdV integrator; owns the per-grid multiplier tables for one
/// (grid, cfg). A solver instance is single-owner while stepping; distinct
/// instances may run concurrently.
class KdvSolver {
 public:
  using Observer = std::function<void(double t, const RealField& u)>;

  KdvSolver(const Grid& g, const SolverConfig& cfg);

  /// Advance one dt. Throws NumericalError if any coefficient passes 1e8.
  RealField step(const RealField& u) const;

  /// Iterate step over [0, t_end], recording (t, mass, hamiltonian, h1_norm)
  /// every observe_dt. On blow-up throws InstabilityError carrying the
  /// partial series and failure time. The final state lands in *final if given.
  TimeSeries run(const RealField& u0, double observe_dt, RealField* final = nullptr,
                 const Observer& extra = nullptr) const;

  const SolverConfig& config() const { return cfg_; }

 private:
  SpectralField step_spectral(const SpectralField& u) const;
  ArrayXc nonlinear_rhs(const ArrayXc& coeffs) const;

  const Grid* grid_;
  SolverConfig cfg_;
  ArrayXc lin_half_, lin_full_;            // e^{L dt/2}, e^{L dt}
  ArrayXc etd_q_, etd_f1_, etd_f2_, etd_f3_;
  ArrayXc deriv_;                          // -i xi with dealias mask folded in
};

/// H(u) = integral |u_x|^2 - (2/3) u^3, spectral derivative + grid quadrature.
double hamiltonian(const RealField& u);
/// integral u^2.
double mass(const RealField& u);

}  // namespace solstab

#endif
