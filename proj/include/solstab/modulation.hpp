#ifndef SOLSTAB_MODULATION_HPP
#define SOLSTAB_MODULATION_HPP

#include "solstab/grid.hpp"
#include "solstab/imethod.hpp"
#include "solstab/soliton.hpp"
#include "solstab/spectral_ops.hpp"
#include "solstab/types.hpp"
#include "solstab/weights.hpp"

#include <Eigen/Dense>

namespace solstab {

// Default grid for coupled perturbation runs.
inline constexpr int kModulationNumPoints = 2048;
inline constexpr double kModulationBoxLength = 100.0;

/// Coupled perturbation state in the co-moving frame y = x - int_0^t c - gamma.
/// The weighted field w_tilde = e^{ay} I_N v is the evolved variable (its
/// equation carries the damping that makes a periodic box faithful to the
/// whole-line dynamics); v_tilde = I_N v and v are derived through the inverse
/// transform path v = I_N^{-1}(e^{-ay} w_tilde), with the far-left zone - where
/// the weighted field sits below its own round-off floor - smoothly blended to
/// zero before inverting.
struct PerturbationState {
  const Grid* grid = nullptr;
  RealField v;
  RealField v_tilde;
  RealField w_tilde;
  double c = 1.0;
  double gamma = 0.0;
  double c0 = 1.0;
  double t = 0.0;
};

struct ModulationRates {
  double c_dot = 0.0;
  double gamma_dot = 0.0;
};

struct ModulationOptions {
  bool gamma_sign_s4 = false;     // F-tilde display with (c - c0 + gamma_dot)
  bool recalibrate_at_c = false;  // refresh the biorthogonal pair at c(t)
};

/// Per-step diagnostics captured by the evolver.
struct StepDiagnostics {
  ModulationRates rates;
  double g_norm_l2 = 0.0;     // ||G~||_{L2} for the last solve
  double rate_bound = 0.0;    // 2 max_j ||eta_j||_{H1} ||G~||_{L2}
  double p_resid_pre = 0.0;   // ||P w~|| before the projection correction
  double ainv_norm = 0.0;     // ||A^{-1}||_2 of the displayed modulation matrix
};

/// Advances w~ one step of
///   w~_t = L w~ - 2(d_y - a)(psi_c w~) + (c - c0 + gamma_dot)(d_y - a) w~
///          - e^{ay} I_N d_y(v^2) - 2 e^{ay} d_y(I_N(psi_c v) - psi_c I_N v)
///          + gamma_dot e^{ay} I_N d_y psi_c - c_dot e^{ay} I_N d_c psi_c
/// with the constant-coefficient part L (symbol -p_a(xi) + i(xi^3 + (c0-3a^2)xi))
/// integrated exactly and everything else explicit (RK4). The rates are solved
/// each step from the discrete orthogonality condition d/dt <w~, eta_j> = 0;
/// after the step Q is re-applied and the removed P-component logged. gamma is
/// tracked in the frame y = x - int c - gamma, under which the equation above
/// is the exact conjugation of the KdV perturbation flow.
class CoupledEvolver {
 public:
  CoupledEvolver(const Grid& g, double c0, const WeightParams& weight, IMultiplier im,
                 double dt, ModulationOptions opts = {});

  /// Builds the state from an unweighted perturbation sample: w~ = e^{ay} I_N v0.
  PerturbationState make_state(const RealField& v0) const;
  /// Re-derives v_tilde and v from w_tilde.
  void refresh(PerturbationState& state) const;

  /// Displayed diagnostic G~ = (c-c0)(d_y - a) w~ - e^{ay} I_N d_y(v^2)
  /// - e^{ay} d_y(I_N(psi v) - psi I_N v), truncated weight applied last.
  RealField gtilde(const PerturbationState& state) const;
  /// Displayed diagnostic F~; the gamma_sign_s4 option switches the shift
  /// coefficient between (c - c0 - gamma_dot) and (c - c0 + gamma_dot).
  RealField ftilde(const PerturbationState& state, const ModulationRates& rates) const;

  /// The displayed 2x2 modulation matrix (identity at c = c0, w~ = 0).
  Eigen::Matrix2d modulation_matrix(const PerturbationState& state) const;
  /// Solves the modulation system for (gamma_dot, c_dot). The discrete system
  /// zeroes d/dt <w~, eta_j> under the full evolution right-hand side; its
  /// matrix agrees with the displayed one up to O(I_N - 1) soliton corrections.
  /// gamma_dot is reported in the y = x - int c - gamma frame convention.
  /// Throws NumericalError when the matrix determinant falls below 1e-8.
  ModulationRates solve_modulation(const PerturbationState& state) const;

  /// Newton refinement of (c, gamma) driving <w~, eta_j> to zero; w~ moves by
  /// the exact translation/rescale identity, v is re-derived.
  void reanchor(PerturbationState& state) const;

  /// One dt of the coupled evolution.
  void step(PerturbationState& state) const;

  /// Switches the I_N cutoff, mapping w~ through the multiplier ratio.
  void set_cutoff(double n_cutoff, PerturbationState* state = nullptr);
  double cutoff() const { return im_.N; }

  double p_residual(const PerturbationState& state) const;   // ||P w~||_{L2}
  double weighted_h1(const PerturbationState& state) const;  // ||w~||_{H1}
  const StepDiagnostics& last_diagnostics() const { return diag_; }
  const SpectralPair& pair() const { return pair_; }
  const WeightParams& weight() const { return weight_; }
  const IMultiplier& multiplier() const { return im_; }
  double dt() const { return dt_; }

 private:
  struct SolitonFields {
    double c = -1.0;
    ArrayX psi, dypsi, dcpsi;
    ArrayX i_psi;                  // I_N psi
    ArrayX w_i_dypsi, w_i_dcpsi;   // e^{ay} I_N d_y psi, e^{ay} I_N d_c psi
  };
  const SolitonFields& soliton_fields(double c) const;
  void rebuild_multiplier();
  void install_pair(SpectralPair pair) const;
  void maybe_recalibrate(double c) const;
  /// Implied I_N v from a weighted sample: blend * e^{-ay} * w (physical).
  ArrayX implied_v_tilde(const ArrayX& w_phys) const;
  /// Full explicit right-hand side (everything except L w~), in spectral space.
  ArrayXc explicit_rhs(const ArrayXc& w_hat, const SolitonFields& sol,
                       double c, const ModulationRates& rates) const;
  Eigen::Vector2d eta_components(const RealField& w) const;
  void project_out_kernel(PerturbationState& state) const;

  const Grid* grid_;
  double c0_;
  WeightParams weight_;
  IMultiplier im_;
  double dt_;
  ModulationOptions opts_;
  mutable SpectralPair pair_;
  mutable RealField deta1_, deta2_;  // d_y eta_j
  mutable double eta_h1_max_ = 0.0;
  ArrayX omega_;                     // truncated weight for the G~/F~ displays
  ArrayX w_plus_, w_minus_;          // e^{ay}, e^{-ay}
  ArrayX w_fwd_;                     // e^{ay} with the far-right blend folded in
  ArrayX inv_blend_;                 // smooth far-left cutoff for the inverse path
  ArrayXc lin_half_, lin_full_;      // exact integrating factors for L
  ArrayXc mask_;                     // dealias + Nyquist mask
  ArrayXc ixi_;                      // i xi with mask folded in
  ArrayXc mI_, mI_inv_;              // m_N and 1/m_N at the grid wavenumbers
  mutable SolitonFields sol_cache_;
  mutable StepDiagnostics diag_;
};

}  // namespace solstab

#endif
