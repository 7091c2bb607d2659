#include "solstab/bourgain.hpp"

#include <cmath>
#include <random>

namespace solstab {

SpacetimeField make_window(const Grid& g, double t_lo, double t_hi, int q) {
  if (!(t_hi > t_lo) || q < 2) throw ValidationError("make_window: bad window");
  const double dt = (t_hi - t_lo) / q;
  ArrayX times(q);
  for (int i = 0; i < q; ++i) times[i] = t_lo + i * dt;
  return SpacetimeField(std::move(times), g);
}

int DyadicDecomposition::block_of(double v) {
  if (!(v >= 1.0)) throw ValidationError("block_of: bracket values are >= 1");
  if (v <= 2.0) return 0;
  int j = static_cast<int>(std::ceil(std::log2(v))) - 1;
  while (std::exp2(j + 1) < v) ++j;             // float-noise guards
  while (j > 0 && std::exp2(j) >= v) --j;
  return j;
}

namespace {

// Full 2-D transform with 1/(QP) normalization; offsets/phases are dropped
// since every consumer only uses |coeff|.
MatrixXc spacetime_transform(const SpacetimeField& f) {
  const int q = static_cast<int>(f.t_grid.size());
  const int p = f.x_grid->num_points;
  MatrixXc hat(q, p);
  ArrayXc buf(p), out(p);
  for (int i = 0; i < q; ++i) {
    for (int k = 0; k < p; ++k) buf[k] = f.values(i, k);
    dft(p, buf.data(), out.data(), -1);
    hat.row(i) = out.matrix().transpose();
  }
  ArrayXc tbuf(q), tout(q);
  for (int k = 0; k < p; ++k) {
    for (int i = 0; i < q; ++i) tbuf[i] = hat(i, k);
    dft(q, tbuf.data(), tout.data(), -1);
    for (int i = 0; i < q; ++i) hat(i, k) = tout[i] / double(q * p);
  }
  return hat;
}

double tau_of(const SpacetimeField& f, int idx) {
  const int q = static_cast<int>(f.t_grid.size());
  const int m = idx < q / 2 ? idx : idx - q;
  return 2.0 * M_PI / f.t_length() * m;
}

}  // namespace

double xsb1_norm(const SpacetimeField& f, double s, double b) {
  const MatrixXc hat = spacetime_transform(f);
  const int q = static_cast<int>(f.t_grid.size());
  const int p = f.x_grid->num_points;
  const double measure = f.t_length() * f.x_grid->box_length;

  // Accumulate block sums S[j][k] of |coeff|^2.
  std::vector<std::vector<double>> blocks;
  auto at = [&](int j, int k) -> double& {
    if (j >= static_cast<int>(blocks.size())) blocks.resize(j + 1);
    auto& row = blocks[j];
    if (k >= static_cast<int>(row.size())) row.resize(k + 1, 0.0);
    return row[k];
  };
  for (int i = 0; i < q; ++i) {
    const double tau = tau_of(f, i);
    for (int k = 0; k < p; ++k) {
      const double n2 = std::norm(hat(i, k));
      if (n2 == 0.0) continue;
      const double xi = f.x_grid->wavenumbers[k];
      const int jb = DyadicDecomposition::block_of(std::sqrt(1.0 + xi * xi));
      const double d = tau - xi * xi * xi;
      const int kb = DyadicDecomposition::block_of(std::sqrt(1.0 + d * d));
      at(jb, kb) += n2;
    }
  }

  double total = 0.0;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    double inner_sum = 0.0;
    for (std::size_t k = 0; k < blocks[j].size(); ++k) {
      if (blocks[j][k] == 0.0) continue;
      inner_sum += std::exp2(b * k) * std::sqrt(measure * blocks[j][k]);
    }
    total += std::exp2(2.0 * s * j) * inner_sum * inner_sum;
  }
  return std::sqrt(total);
}

EmbeddingReport embedding_check(const SpacetimeField& f, double s) {
  EmbeddingReport rep;
  for (Eigen::Index i = 0; i < f.t_grid.size(); ++i) {
    RealField slice(*f.x_grid, f.values.row(i).array().transpose());
    rep.lhs = std::max(rep.lhs, sobolev_norm(slice, s));
  }
  rep.rhs = xsb1_norm(f, s, 0.5);
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  return rep;
}

double rho_cutoff(double t) {
  const double u = std::abs(t);
  if (u <= 1.0) return 1.0;
  if (u >= 2.0) return 0.0;
  // smooth partition bridge on (1, 2)
  const double x = 2.0 - u;  // in (0, 1)
  const double g1 = std::exp(-1.0 / x);
  const double g2 = std::exp(-1.0 / (1.0 - x));
  return g1 / (g1 + g2);
}

SpacetimeField apply_time_cutoff(const SpacetimeField& f, double delta) {
  if (!(delta > 0.0)) throw ValidationError("apply_time_cutoff: delta must be positive");
  SpacetimeField out = f;
  for (Eigen::Index i = 0; i < f.t_grid.size(); ++i)
    out.values.row(i) *= rho_cutoff(f.t_grid[i] / delta);
  return out;
}

const char* probe_kind_name(ProbeKind kind) {
  switch (kind) {
    case ProbeKind::W1Hom: return "W1-hom";
    case ProbeKind::W1Inhom: return "W1-inhom";
    case ProbeKind::W2Hom: return "W2-hom";
    case ProbeKind::W2Inhom: return "W2-inhom";
  }
  return "?";
}

namespace {

// Random real band-limited field with an H^s-flat spectrum profile.
RealField random_band_limited(const Grid& g, double band, double s, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpectralField hat(g);
  for (int k = 1; k < g.num_points / 2; ++k) {
    const double xi = g.wavenumbers[k];
    if (std::abs(xi) > band) continue;
    const Complex z(gauss(rng), gauss(rng));
    const Complex coeff = z / std::pow(1.0 + xi * xi, 0.5 * (s + 0.5));
    hat.coeffs[k] = coeff;
    hat.coeffs[g.num_points - k] = std::conj(coeff);
  }
  return inverse_transform(hat);
}

}  // namespace

ProbeStats linear_estimate_probe(ProbeKind kind, int trials, const ProbeConfig& cfg) {
  if (trials < 1) throw ValidationError("linear_estimate_probe: trials must be >= 1");
  ProbeStats stats;
  stats.kind = kind;
  Grid grid(cfg.x_points, cfg.x_length);
  const int q = cfg.t_points;
  const int p = cfg.x_points;
  const bool damped = kind == ProbeKind::W2Hom || kind == ProbeKind::W2Inhom;
  const bool inhom = kind == ProbeKind::W1Inhom || kind == ProbeKind::W2Inhom;

  auto symbol = [&](double xi, double dt_pos) {
    // e^{i xi^3 t} with the W2 damping e^{-p_a(xi) |t|} when requested
    Complex exponent(0.0, xi * xi * xi * dt_pos);
    if (damped) exponent.real(-pa_symbol(cfg.a, cfg.c0, xi) * std::abs(dt_pos));
    return std::exp(exponent);
  };

  std::mt19937_64 rng(cfg.seed + 1000003ULL * static_cast<unsigned long long>(kind));

  for (int trial = 0; trial < trials; ++trial) {
    SpacetimeField field = make_window(grid, -2.0 * cfg.delta, 2.0 * cfg.delta, q);
    double rhs = 0.0;

    if (!inhom) {
      const RealField f0 = random_band_limited(grid, cfg.band, cfg.s, rng);
      const SpectralField f0h = forward_transform(f0);
      for (int i = 0; i < q; ++i) {
        const double t = field.t_grid[i];
        const double cut = rho_cutoff(t / cfg.delta);
        if (cut == 0.0) continue;
        if (damped && t < 0.0) continue;  // W2 is probed on t >= 0
        SpectralField slice(grid);
        for (int k = 0; k < p; ++k)
          slice.coeffs[k] = f0h.coeffs[k] * symbol(grid.wavenumbers[k], t);
        field.values.row(i) = cut * inverse_transform(slice).samples.matrix().transpose();
      }
      rhs = sobolev_norm(f0, cfg.s);
    } else {
      // Random forcing, band-limited in xi and smooth in t, cut by rho.
      SpacetimeField forcing = make_window(grid, -2.0 * cfg.delta, 2.0 * cfg.delta, q);
      std::normal_distribution<double> gauss(0.0, 1.0);
      const int t_modes = 6;
      std::vector<double> omegas(t_modes);
      std::vector<RealField> profiles;
      for (int m = 0; m < t_modes; ++m) {
        omegas[m] = 2.0 * gauss(rng) / cfg.delta;
        profiles.push_back(random_band_limited(grid, cfg.band, cfg.s, rng));
      }
      for (int i = 0; i < q; ++i) {
        const double t = forcing.t_grid[i];
        const double cut = rho_cutoff(t / cfg.delta);
        if (cut == 0.0) continue;
        ArrayX row = ArrayX::Zero(p);
        for (int m = 0; m < t_modes; ++m) row += std::cos(omegas[m] * t) * profiles[m].samples;
        forcing.values.row(i) = cut * row.matrix().transpose();
      }
      // Duhamel sum u(t) = rho(t/delta) int_0^t W(t - s) F(s) ds (trapezoid).
      std::vector<ArrayXc> forcing_hat(q);
      for (int i = 0; i < q; ++i)
        forcing_hat[i] = spectral_of(grid, forcing.values.row(i).array().transpose());
      const double dts = field.t_spacing();
      for (int i = 0; i < q; ++i) {
        const double t = field.t_grid[i];
        const double cut = rho_cutoff(t / cfg.delta);
        if (cut == 0.0) continue;
        if (damped && t < 0.0) continue;  // chi_{R+} factor
        const int i0 = static_cast<int>(std::lround(-field.t_grid[0] / dts));  // index of t=0
        const int lo = std::min(i, i0), hi = std::max(i, i0);
        if (hi == lo) continue;
        const double sign = t >= field.t_grid[i0] ? 1.0 : -1.0;
        ArrayXc acc = ArrayXc::Zero(p);
        for (int l = lo; l <= hi; ++l) {
          const double w = (l == lo || l == hi) ? 0.5 : 1.0;
          const double lag = t - field.t_grid[l];
          ArrayXc term(p);
          for (int k = 0; k < p; ++k)
            term[k] = forcing_hat[l][k] * symbol(grid.wavenumbers[k], lag);
          acc += w * term;
        }
        acc *= sign * dts;
        field.values.row(i) = cut * physical_of(grid, acc).matrix().transpose();
      }
      rhs = xsb1_norm(forcing, cfg.s, -0.5);
    }

    const double lhs = xsb1_norm(field, cfg.s, 0.5);
    ProbeRow row{trial, lhs, rhs, rhs > 0.0 ? lhs / rhs : 0.0};
    stats.rows.push_back(row);
    stats.max_ratio = std::max(stats.max_ratio, row.ratio);
    stats.mean_ratio += row.ratio;
  }
  stats.mean_ratio /= trials;
  return stats;
}

}  // namespace solstab
