#include "solstab/kdv.hpp"

#include <cmath>

namespace solstab {

namespace {
constexpr double kBlowupGuard = 1e8;
constexpr int kContourPoints = 32;
}  // namespace

KdvSolver::KdvSolver(const Grid& g, const SolverConfig& cfg) : grid_(&g), cfg_(cfg) {
  if (!(cfg.dt > 0.0)) throw ValidationError("SolverConfig: dt must be positive");
  if (!(cfg.t_end > 0.0)) throw ValidationError("SolverConfig: t_end must be positive");
  const double xi_cut = cfg.dealias_enabled ? g.dealias_frequency() : g.nyquist_frequency();
  const double dt_bound = 2.82 / (cfg.u_ref * xi_cut);
  if (cfg.nonlinear_enabled && cfg.dt > dt_bound)
    throw ValidationError("SolverConfig: dt exceeds the stability bound at this grid");

  const int n = g.num_points;
  const Complex i_unit(0.0, 1.0);
  ArrayXc lin(n);
  deriv_.resize(n);
  for (int k = 0; k < n; ++k) {
    const double xi = g.wavenumbers[k];
    const int m = g.mode_index(k);
    lin[k] = i_unit * xi * xi * xi;  // u_t = i xi^3 u_hat - i xi (u^2)_hat
    const bool cut = (cfg.dealias_enabled && std::abs(m) > g.dealias_mode()) ||
                     m == -n / 2;
    deriv_[k] = cut ? Complex(0.0) : -i_unit * xi;
  }
  lin_half_ = (lin * (0.5 * cfg.dt)).exp();
  lin_full_ = (lin * cfg.dt).exp();

  if (cfg.scheme == Scheme::Etdrk4) {
    // phi-function weights by complex contour averaging (Kassam-Trefethen);
    // the linear symbol is purely imaginary so the averages stay complex.
    etd_q_.resize(n);
    etd_f1_.resize(n);
    etd_f2_.resize(n);
    etd_f3_.resize(n);
    for (int k = 0; k < n; ++k) {
      const Complex z = lin[k] * cfg.dt;
      Complex q = 0.0, f1 = 0.0, f2 = 0.0, f3 = 0.0;
      for (int m = 0; m < kContourPoints; ++m) {
        const double ang = M_PI * (m + 0.5) / kContourPoints;
        const Complex lr = z + std::exp(Complex(0.0, 2.0 * ang));
        const Complex elr = std::exp(lr);
        const Complex elr2 = std::exp(0.5 * lr);
        const Complex lr3 = lr * lr * lr;
        q += (elr2 - 1.0) / lr;
        f1 += (-4.0 - lr + elr * (4.0 - 3.0 * lr + lr * lr)) / lr3;
        f2 += (2.0 + lr + elr * (-2.0 + lr)) / lr3;
        f3 += (-4.0 - 3.0 * lr - lr * lr + elr * (4.0 - lr)) / lr3;
      }
      const double scale = cfg.dt / kContourPoints;
      etd_q_[k] = q * scale;
      etd_f1_[k] = f1 * scale;
      etd_f2_[k] = f2 * scale;
      etd_f3_[k] = f3 * scale;
    }
  }
}

ArrayXc KdvSolver::nonlinear_rhs(const ArrayXc& coeffs) const {
  if (!cfg_.nonlinear_enabled) return ArrayXc::Zero(grid_->num_points);
  const ArrayX u = physical_of(*grid_, coeffs);
  return deriv_ * spectral_of(*grid_, u * u);
}

SpectralField KdvSolver::step_spectral(const SpectralField& u) const {
  const ArrayXc& v = u.coeffs;
  ArrayXc next;
  if (cfg_.scheme == Scheme::IntegratingFactorRk4) {
    const double dt = cfg_.dt;
    const ArrayXc n1 = nonlinear_rhs(v);
    const ArrayXc n2 = nonlinear_rhs(lin_half_ * (v + 0.5 * dt * n1));
    const ArrayXc n3 = nonlinear_rhs(lin_half_ * v + 0.5 * dt * n2);
    const ArrayXc n4 = nonlinear_rhs(lin_full_ * v + dt * lin_half_ * n3);
    next = lin_full_ * v +
           (dt / 6.0) * (lin_full_ * n1 + 2.0 * lin_half_ * (n2 + n3) + n4);
  } else {
    const ArrayXc nv = nonlinear_rhs(v);
    const ArrayXc a = lin_half_ * v + etd_q_ * nv;
    const ArrayXc na = nonlinear_rhs(a);
    const ArrayXc b = lin_half_ * v + etd_q_ * na;
    const ArrayXc nb = nonlinear_rhs(b);
    const ArrayXc c = lin_half_ * a + etd_q_ * (2.0 * nb - nv);
    const ArrayXc nc = nonlinear_rhs(c);
    next = lin_full_ * v + etd_f1_ * nv + 2.0 * etd_f2_ * (na + nb) + etd_f3_ * nc;
  }
  if (!next.isFinite().all() || next.abs().maxCoeff() > kBlowupGuard)
    throw NumericalError("kdv: coefficient magnitude exceeded blow-up guard");
  return SpectralField(*grid_, std::move(next));
}

RealField KdvSolver::step(const RealField& u) const {
  SpectralField uh = forward_transform(u);
  if (cfg_.dealias_enabled) uh = dealias(uh);
  return inverse_transform(step_spectral(uh));
}

TimeSeries KdvSolver::run(const RealField& u0, double observe_dt, RealField* final,
                          const Observer& extra) const {
  TimeSeries series;
  series.columns = {"mass", "hamiltonian", "h1_norm"};
  SpectralField uh = forward_transform(u0);
  if (cfg_.dealias_enabled) uh = dealias(uh);

  const long total = std::lround(cfg_.t_end / cfg_.dt);
  const long cadence = std::max(1L, std::lround(observe_dt / cfg_.dt));
  auto observe = [&](double t) {
    RealField u = inverse_transform(uh);
    series.append(t, {mass(u), hamiltonian(u), sobolev_norm(u, 1.0)});
    if (extra) extra(t, u);
  };

  observe(0.0);
  for (long i = 0; i < total; ++i) {
    try {
      SpectralField next = step_spectral(uh);
      uh.coeffs.swap(next.coeffs);
    } catch (const NumericalError&) {
      throw InstabilityError((i + 1) * cfg_.dt, std::move(series));
    }
    if ((i + 1) % cadence == 0 || i + 1 == total) observe((i + 1) * cfg_.dt);
  }
  if (final) *final = inverse_transform(uh);
  return series;
}

double hamiltonian(const RealField& u) {
  const RealField ux = derivative(u, 1);
  const double dx = u.grid->spacing;
  return (ux.samples.square().sum() - (2.0 / 3.0) * u.samples.cube().sum()) * dx;
}

double mass(const RealField& u) { return u.samples.square().sum() * u.grid->spacing; }

}  // namespace solstab
