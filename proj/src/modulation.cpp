#include "solstab/modulation.hpp"

#include <cmath>

namespace solstab {

namespace {
constexpr double kBlowupGuard = 1e8;
constexpr double kSingularDet = 1e-8;

struct SolitonArrays {
  ArrayX psi, dypsi, dcpsi;
};

// Vectorized soliton family sampling at arbitrary coordinates.
SolitonArrays soliton_arrays(double c, const ArrayX& y) {
  const double rc = std::sqrt(c);
  ArrayX u = 0.5 * rc * y;
  ArrayX e = u.exp();
  ArrayX einv = (-u).exp();
  ArrayX ch = e + einv;
  ArrayX sech2 = 4.0 * (1.0 / ch).square();
  ArrayX th = (e - einv) / ch;
  SolitonArrays out;
  out.psi = 1.5 * c * sech2;
  out.dypsi = -1.5 * std::pow(c, 1.5) * sech2 * th;
  out.dcpsi = 1.5 * sech2 - 0.75 * rc * y * sech2 * th;
  return out;
}

// C^inf step from 0 (x <= lo) to 1 (x >= hi).
double smooth_step(double x, double lo, double hi) {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  const double u = (x - lo) / (hi - lo);
  const double g1 = std::exp(-1.0 / u);
  const double g2 = std::exp(-1.0 / (1.0 - u));
  return g1 / (g1 + g2);
}

}  // namespace

CoupledEvolver::CoupledEvolver(const Grid& g, double c0, const WeightParams& weight,
                               IMultiplier im, double dt, ModulationOptions opts)
    : grid_(&g), c0_(c0), weight_(weight), im_(im), dt_(dt), opts_(opts) {
  if (!(dt > 0.0)) throw ValidationError("CoupledEvolver: dt must be positive");
  omega_ = weight_values(weight, g);  // blended below, after w_fwd_ exists

  const double a = weight.a;
  const int n = g.num_points;
  w_plus_.resize(n);
  w_minus_.resize(n);
  w_fwd_.resize(n);
  inv_blend_.resize(n);
  // The inverse path trusts e^{-ay} w~ only where the weighted field stands
  // above its transport-damping floor; blend to zero over [lo, hi] near the
  // left edge. Symmetrically, the forward weight in the coupling terms is
  // blended off over the far-right zone, where nothing ahead of the soliton
  // survives e^{-ay} but the interpolants' cancellation floor would be
  // amplified by e^{a y} ~ e^{aL/2}.
  const double half = 0.5 * g.box_length;
  const double hi = -0.78 * half;
  const double lo = -0.88 * half;
  for (int j = 0; j < n; ++j) {
    const double y = g.points[j];
    w_plus_[j] = std::exp(a * y);
    w_minus_[j] = std::exp(-a * y);
    inv_blend_[j] = smooth_step(y, lo, hi);
    w_fwd_[j] = w_plus_[j] * (1.0 - smooth_step(y, 0.48 * half, 0.78 * half));
  }
  omega_ *= w_fwd_ / w_plus_;  // same edge blend on the display evaluators

  ArrayXc lin(n);
  mask_.resize(n);
  ixi_.resize(n);
  const Complex i_unit(0.0, 1.0);
  for (int k = 0; k < n; ++k) {
    const double xi = g.wavenumbers[k];
    const int m = g.mode_index(k);
    // symbol of -[d^3 - 3a d^2 + (3a^2 - c0) d + a(c0 - a^2)]
    lin[k] = Complex(-pa_symbol(a, c0, xi), xi * xi * xi + (c0 - 3.0 * a * a) * xi);
    const bool cut = std::abs(m) > g.dealias_mode() || m == -n / 2;
    mask_[k] = cut ? Complex(0.0) : Complex(1.0);
    ixi_[k] = cut ? Complex(0.0) : i_unit * xi;
  }
  lin_half_ = (lin * (0.5 * dt)).exp();
  lin_full_ = (lin * dt).exp();
  install_pair(calibrate_thetas(g, weight.a, c0));
  rebuild_multiplier();
}

void CoupledEvolver::rebuild_multiplier() {
  const int n = grid_->num_points;
  mI_.resize(n);
  mI_inv_.resize(n);
  for (int k = 0; k < n; ++k) {
    const double m = m_eval(im_, grid_->wavenumbers[k]);
    mI_[k] = m;
    mI_inv_[k] = 1.0 / m;
  }
  sol_cache_.c = -1.0;  // invalidate the I_N psi caches
}

void CoupledEvolver::set_cutoff(double n_cutoff, PerturbationState* state) {
  ArrayXc ratio;
  if (state) {
    ratio = mI_;  // old multiplier values
  }
  im_ = IMultiplier(n_cutoff, im_.s);
  rebuild_multiplier();
  if (state) {
    // w~_new = e^{ay} I_new I_old^{-1} e^{-ay} w~_old through the implied
    // v~-spectrum; the forward weight re-application injects only
    // round-off at the (unweighted) v~ scale.
    const ArrayX tv = implied_v_tilde(state->w_tilde.samples);
    ArrayXc tv_hat = mask_ * spectral_of(*grid_, tv);
    tv_hat *= mI_ / ratio;
    state->w_tilde.samples = w_fwd_ * physical_of(*grid_, tv_hat);
    refresh(*state);
  }
}

// The pair fields carry slow exponential tails (e.g. zeta2 ~ y e^{-(sqrt(c)-a)y})
// that reach the box seam at the 1e-9 level; blending both edges keeps the
// projection from seeding seam ringing into the state, and the exact Gram
// correction restores biorthogonality of the blended system.
void CoupledEvolver::install_pair(SpectralPair pair) const {
  // Wide blend zones keep the truncated tails' beyond-band content at
  // round-off, so the band-limiting below removes nothing and rings nowhere.
  const double half = 0.5 * grid_->box_length;
  ArrayX edge_blend(grid_->num_points);
  for (int j = 0; j < grid_->num_points; ++j) {
    const double y = grid_->points[j];
    edge_blend[j] = smooth_step(y, -0.88 * half, -0.68 * half) *
                    (1.0 - smooth_step(y, 0.48 * half, 0.78 * half));
  }
  auto band_limit = [&](RealField& f) {
    f.samples *= edge_blend;
    f.samples = physical_of(*grid_, ArrayXc(mask_ * spectral_of(*grid_, f.samples)));
  };
  band_limit(pair.zeta1);
  band_limit(pair.zeta2);
  band_limit(pair.eta1);
  band_limit(pair.eta2);
  Eigen::Matrix2d gram;
  gram << inner(pair.zeta1, pair.eta1), inner(pair.zeta1, pair.eta2),
      inner(pair.zeta2, pair.eta1), inner(pair.zeta2, pair.eta2);
  const Eigen::Matrix2d ginv = gram.inverse();
  ArrayX e1 = ginv(0, 0) * pair.eta1.samples + ginv(1, 0) * pair.eta2.samples;
  ArrayX e2 = ginv(0, 1) * pair.eta1.samples + ginv(1, 1) * pair.eta2.samples;
  pair.eta1.samples = std::move(e1);
  pair.eta2.samples = std::move(e2);
  pair_ = std::move(pair);
  deta1_ = derivative(pair_.eta1, 1);
  deta2_ = derivative(pair_.eta2, 1);
  eta_h1_max_ = std::max(sobolev_norm(pair_.eta1, 1.0), sobolev_norm(pair_.eta2, 1.0));
}

void CoupledEvolver::maybe_recalibrate(double c) const {
  if (!opts_.recalibrate_at_c || std::abs(c - pair_.c) <= 1e-7) return;
  install_pair(calibrate_thetas(*grid_, weight_.a, c));
}

const CoupledEvolver::SolitonFields& CoupledEvolver::soliton_fields(double c) const {
  if (sol_cache_.c == c) return sol_cache_;
  SolitonArrays arr = soliton_arrays(c, grid_->points);
  sol_cache_.c = c;
  sol_cache_.psi = std::move(arr.psi);
  sol_cache_.dypsi = std::move(arr.dypsi);
  sol_cache_.dcpsi = std::move(arr.dcpsi);
  sol_cache_.i_psi =
      physical_of(*grid_, mI_ * mask_ * spectral_of(*grid_, sol_cache_.psi));
  sol_cache_.w_i_dypsi =
      w_fwd_ * physical_of(*grid_, mI_ * mask_ * spectral_of(*grid_, sol_cache_.dypsi));
  sol_cache_.w_i_dcpsi =
      w_fwd_ * physical_of(*grid_, mI_ * mask_ * spectral_of(*grid_, sol_cache_.dcpsi));
  return sol_cache_;
}

ArrayX CoupledEvolver::implied_v_tilde(const ArrayX& w_phys) const {
  return inv_blend_ * w_minus_ * w_phys;
}

PerturbationState CoupledEvolver::make_state(const RealField& v0) const {
  PerturbationState state;
  state.grid = grid_;
  state.c = c0_;
  state.c0 = c0_;
  state.gamma = 0.0;
  state.t = 0.0;
  const ArrayXc v_hat = mask_ * spectral_of(*grid_, v0.samples);
  state.w_tilde = RealField(*grid_, w_fwd_ * physical_of(*grid_, mI_ * v_hat));
  if (!state.w_tilde.samples.isFinite().all())
    throw NumericalError("make_state: weighted samples exceed overflow guard");
  refresh(state);
  return state;
}

void CoupledEvolver::refresh(PerturbationState& state) const {
  const ArrayXc tv_hat = mask_ * spectral_of(*grid_, implied_v_tilde(state.w_tilde.samples));
  state.v_tilde = RealField(*grid_, physical_of(*grid_, tv_hat));
  state.v = RealField(*grid_, physical_of(*grid_, mI_inv_ * tv_hat));
}

Eigen::Vector2d CoupledEvolver::eta_components(const RealField& w) const {
  return {inner(w, pair_.eta1), inner(w, pair_.eta2)};
}

RealField CoupledEvolver::gtilde(const PerturbationState& state) const {
  const SolitonFields& sol = soliton_fields(state.c);
  // (c - c0)(d_y - a) w~ evaluated as (c - c0) omega d_y(I_N v).
  ArrayX acc = (state.c - c0_) * (omega_ * derivative(state.v_tilde, 1).samples);
  // - e^{ay} I_N d_y(v^2)
  const ArrayXc q = mI_ * ixi_ * spectral_of(*grid_, state.v.samples.square());
  acc -= omega_ * physical_of(*grid_, q);
  // - e^{ay} d_y (I_N(psi v) - psi I_N v)
  const ArrayXc comm_hat = mI_ * mask_ * spectral_of(*grid_, sol.psi * state.v.samples) -
                           mask_ * spectral_of(*grid_, sol.psi * state.v_tilde.samples);
  acc -= omega_ * physical_of(*grid_, ixi_ * comm_hat);
  RealField out(*grid_, std::move(acc));
  if (!out.samples.isFinite().all())
    throw NumericalError("gtilde: weighted samples exceed overflow guard", state.t);
  return out;
}

RealField CoupledEvolver::ftilde(const PerturbationState& state,
                                 const ModulationRates& rates) const {
  const SolitonFields& sol = soliton_fields(state.c);
  const double shift = opts_.gamma_sign_s4 ? rates.gamma_dot : -rates.gamma_dot;
  ArrayX acc = (state.c - c0_ + shift) * (omega_ * derivative(state.v_tilde, 1).samples);
  const ArrayXc q = mI_ * ixi_ * spectral_of(*grid_, state.v.samples.square());
  acc -= omega_ * physical_of(*grid_, q);
  // - e^{ay} (c_dot d_c + gamma_dot d_y) I_N psi_c
  acc -= (omega_ / w_plus_) * (rates.c_dot * sol.w_i_dcpsi + rates.gamma_dot * sol.w_i_dypsi);
  const ArrayXc comm_hat = mI_ * mask_ * spectral_of(*grid_, sol.psi * state.v.samples) -
                           mask_ * spectral_of(*grid_, sol.psi * state.v_tilde.samples);
  acc -= omega_ * physical_of(*grid_, ixi_ * comm_hat);
  RealField out(*grid_, std::move(acc));
  if (!out.samples.isFinite().all())
    throw NumericalError("ftilde: weighted samples exceed overflow guard", state.t);
  return out;
}

Eigen::Matrix2d CoupledEvolver::modulation_matrix(const PerturbationState& state) const {
  const SolitonFields& sol = soliton_fields(state.c);
  const SolitonArrays at_c0 = soliton_arrays(c0_, grid_->points);
  const RealField wdy_diff(*grid_, omega_ * (sol.dypsi - at_c0.dypsi));
  const RealField wdc_diff(*grid_, omega_ * (sol.dcpsi - at_c0.dcpsi));
  Eigen::Matrix2d m;
  m(0, 0) = 1.0 + inner(wdy_diff, pair_.eta1) - inner(state.w_tilde, deta1_);
  m(0, 1) = inner(wdc_diff, pair_.eta1);
  m(1, 0) = inner(wdy_diff, pair_.eta2) - inner(state.w_tilde, deta2_);
  m(1, 1) = 1.0 + inner(wdc_diff, pair_.eta2);
  return m;
}

ArrayXc CoupledEvolver::explicit_rhs(const ArrayXc& w_hat, const SolitonFields& sol,
                                     double c, const ModulationRates& rates) const {
  const double a = weight_.a;
  const ArrayX w_phys = physical_of(*grid_, w_hat);
  const ArrayX tv = implied_v_tilde(w_phys);
  const ArrayXc tv_hat = mask_ * spectral_of(*grid_, tv);
  const ArrayX iv = physical_of(*grid_, tv_hat);            // I_N v
  const ArrayX v = physical_of(*grid_, mI_inv_ * tv_hat);   // v

  // e^{ay} I_N d_y(v^2)
  const ArrayX term_v2 =
      w_fwd_ * physical_of(*grid_, mI_ * ixi_ * spectral_of(*grid_, v * v));
  // e^{ay} d_y(I_N(psi v) - (I_N psi)(I_N v)), dealiased products
  const ArrayXc comm_hat = mI_ * mask_ * spectral_of(*grid_, sol.psi * v) -
                           mask_ * spectral_of(*grid_, sol.i_psi * iv);
  const ArrayX term_comm = w_fwd_ * physical_of(*grid_, ixi_ * comm_hat);

  const ArrayX phys = -term_v2 - 2.0 * term_comm + rates.gamma_dot * sol.w_i_dypsi -
                      rates.c_dot * sol.w_i_dcpsi;

  // The weighted physical sources stay unmasked: their beyond-band part is
  // round-off-sized and the damping of the high modes removes it; a hard
  // truncation here would turn it into global ringing instead.
  const ArrayXc psi_w_hat = mask_ * spectral_of(*grid_, sol.psi * w_phys);
  return (c - c0_ + rates.gamma_dot) * (ixi_ * w_hat - a * w_hat) -
         2.0 * (ixi_ * psi_w_hat - a * psi_w_hat) + spectral_of(*grid_, phys);
}

ModulationRates CoupledEvolver::solve_modulation(const PerturbationState& state) const {
  const SolitonFields& sol = soliton_fields(state.c);
  const double a = weight_.a;
  const ArrayXc w_hat = mask_ * spectral_of(*grid_, state.w_tilde.samples);

  // Base drift: full right-hand side at zero rates, including the linear part
  // (its adjoint-kernel pairings vanish to discretization error).
  ArrayXc base_hat = explicit_rhs(w_hat, sol, state.c, ModulationRates{0.0, 0.0});
  for (int k = 0; k < grid_->num_points; ++k) {
    const double xi = grid_->wavenumbers[k];
    base_hat[k] += Complex(-pa_symbol(a, c0_, xi),
                           xi * xi * xi + (c0_ - 3.0 * a * a) * xi) *
                   w_hat[k];
  }
  const RealField base(*grid_, physical_of(*grid_, base_hat));
  const Eigen::Vector2d rhs = -eta_components(base);

  // Rate couplings: gamma_dot -> (d_y - a) w~ + e^{ay} I_N d_y psi_c,
  //                 c_dot     -> -e^{ay} I_N d_c psi_c.
  const RealField col_g(*grid_,
                        physical_of(*grid_, ixi_ * w_hat - a * w_hat) + sol.w_i_dypsi);
  Eigen::Matrix2d m;
  const Eigen::Vector2d jg = eta_components(col_g);
  const Eigen::Vector2d jc = -eta_components(RealField(*grid_, sol.w_i_dcpsi));
  m.col(0) = jg;
  m.col(1) = jc;
  const double det = m.determinant();
  if (std::abs(det) < kSingularDet)
    throw NumericalError("solve_modulation: modulation matrix is singular", state.t);
  const Eigen::Vector2d sol_rates = m.inverse() * rhs;

  ModulationRates rates{sol_rates[1], sol_rates[0]};
  diag_.rates = rates;
  const RealField g = gtilde(state);
  diag_.g_norm_l2 = l2_norm(g);
  diag_.rate_bound = 2.0 * eta_h1_max_ * diag_.g_norm_l2;
  diag_.ainv_norm = modulation_matrix(state).inverse().jacobiSvd().singularValues()(0);
  return rates;
}

double CoupledEvolver::p_residual(const PerturbationState& state) const {
  const Eigen::Vector2d r = eta_components(state.w_tilde);
  return l2_norm(RealField(*grid_, r[0] * pair_.zeta1.samples + r[1] * pair_.zeta2.samples));
}

double CoupledEvolver::weighted_h1(const PerturbationState& state) const {
  return sobolev_norm(state.w_tilde, 1.0);
}

void CoupledEvolver::project_out_kernel(PerturbationState& state) const {
  const Eigen::Vector2d r = eta_components(state.w_tilde);
  state.w_tilde.samples -= r[0] * pair_.zeta1.samples + r[1] * pair_.zeta2.samples;
}

void CoupledEvolver::reanchor(PerturbationState& state) const {
  for (int it = 0; it < 6; ++it) {
    const Eigen::Vector2d r = eta_components(state.w_tilde);
    const double scale = std::max(l2_norm(state.w_tilde), 1e-300);
    if (r.norm() <= 1e-13 * scale) break;

    const SolitonFields& sol = soliton_fields(state.c);
    const ArrayXc w_hat = mask_ * spectral_of(*grid_, state.w_tilde.samples);
    // d w~/d gamma = (d_y - a) w~ + e^{ay} I_N d_y psi_c (exact translation
    // identity), d w~/d c = -e^{ay} I_N d_c psi_c.
    const double a = weight_.a;
    const RealField col_g(*grid_,
                          physical_of(*grid_, ixi_ * w_hat - a * w_hat) + sol.w_i_dypsi);
    Eigen::Matrix2d jac;
    jac.col(0) = eta_components(col_g);
    jac.col(1) = -eta_components(RealField(*grid_, sol.w_i_dcpsi));
    if (std::abs(jac.determinant()) < kSingularDet)
      throw NumericalError("reanchor: singular orthogonality Jacobian", state.t);
    const Eigen::Vector2d delta = jac.inverse() * (-r);
    const double dgamma = delta[0], dc = delta[1];
    if (!(state.c + dc > 0.0))
      throw NumericalError("reanchor: speed update left the soliton family", state.t);

    // w~(y) -> e^{-a dgamma} w~(y + dgamma) + e^{ay} I_N[psi_c(. + dgamma) - psi_{c+dc}]
    RealField shifted = translate(state.w_tilde, dgamma);
    const SolitonArrays old_shifted = soliton_arrays(state.c, ArrayX(grid_->points + dgamma));
    const SolitonArrays fresh = soliton_arrays(state.c + dc, grid_->points);
    const ArrayXc diff_hat =
        mI_ * mask_ * spectral_of(*grid_, ArrayX(old_shifted.psi - fresh.psi));
    state.w_tilde.samples = std::exp(-weight_.a * dgamma) * shifted.samples +
                            w_fwd_ * physical_of(*grid_, diff_hat);
    state.c += dc;
    state.gamma += dgamma;
  }
  refresh(state);
}

void CoupledEvolver::step(PerturbationState& state) const {
  const ModulationRates rates = solve_modulation(state);
  const SolitonFields& sol = soliton_fields(state.c);
  const double c = state.c;

  const ArrayXc w = mask_ * spectral_of(*grid_, state.w_tilde.samples);
  const ArrayXc n1 = explicit_rhs(w, sol, c, rates);
  const ArrayXc n2 = explicit_rhs(lin_half_ * (w + 0.5 * dt_ * n1), sol, c, rates);
  const ArrayXc n3 = explicit_rhs(lin_half_ * w + 0.5 * dt_ * n2, sol, c, rates);
  const ArrayXc n4 = explicit_rhs(lin_full_ * w + dt_ * lin_half_ * n3, sol, c, rates);
  ArrayXc next =
      lin_full_ * w + (dt_ / 6.0) * (lin_full_ * n1 + 2.0 * lin_half_ * (n2 + n3) + n4);
  if (!next.isFinite().all() || next.abs().maxCoeff() > kBlowupGuard)
    throw NumericalError("evolve_coupled: blow-up guard tripped", state.t + dt_);

  state.w_tilde.samples = physical_of(*grid_, next);
  state.c += rates.c_dot * dt_;
  state.gamma += rates.gamma_dot * dt_;
  state.t += dt_;
  maybe_recalibrate(state.c);

  diag_.p_resid_pre = p_residual(state);
  project_out_kernel(state);
  refresh(state);
}

}  // namespace solstab
