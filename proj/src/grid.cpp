#include "solstab/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace solstab {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// One forward and one backward c2c plan per size, created once under a lock
// and executed through the new-array interface (thread-safe). Plans are built
// with FFTW_ESTIMATE so the algorithm choice is deterministic, and with
// FFTW_UNALIGNED so they accept caller buffers of any alignment.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

PlanPair& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  PlanPair pair;
  fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(n));
  pair.fwd = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  pair.bwd = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  return cache.emplace(n, pair).first->second;
}

}  // namespace

void dft(int n, const Complex* in, Complex* out, int sign) {
  PlanPair& pair = plans_for(n);
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in));
  auto* dst = reinterpret_cast<fftw_complex*>(out);
  fftw_execute_dft(sign < 0 ? pair.fwd : pair.bwd, src, dst);
}

Grid::Grid(int n, double length) : num_points(n), box_length(length) {
  if (!is_power_of_two(n)) throw ValidationError("Grid: num_points must be a power of two");
  if (!(length > 0.0)) throw ValidationError("Grid: box_length must be positive");
  spacing = length / n;
  points.resize(n);
  wavenumbers.resize(n);
  const double dxi = 2.0 * M_PI / length;
  for (int j = 0; j < n; ++j) {
    points[j] = -0.5 * length + j * spacing;
    wavenumbers[j] = dxi * mode_index(j);
  }
}

RealField sample(const Grid& g, const std::function<double(double)>& fn) {
  RealField out(g);
  for (int j = 0; j < g.num_points; ++j) out.samples[j] = fn(g.points[j]);
  return out;
}

// The x_j = -L/2 offset turns exp(-i xi_k x_j) into (-1)^k times the plain
// index DFT; the sign alternates with the array index because P is even.
namespace {
void alternating_scale(ArrayXc& a, double scale) {
  const auto n = a.size();
  for (Eigen::Index i = 0; i < n; i += 2) a[i] *= scale;
  for (Eigen::Index i = 1; i < n; i += 2) a[i] *= -scale;
}
}  // namespace

ArrayXc spectral_of(const Grid& g, const ArrayX& samples) {
  ArrayXc buf = samples.cast<Complex>();
  ArrayXc out(g.num_points);
  dft(g.num_points, buf.data(), out.data(), -1);
  alternating_scale(out, 1.0 / g.num_points);
  return out;
}

ArrayX physical_of(const Grid& g, const ArrayXc& coeffs) {
  ArrayXc buf = coeffs;
  alternating_scale(buf, 1.0);
  ArrayXc res(g.num_points);
  dft(g.num_points, buf.data(), res.data(), +1);
  return res.real();
}

SpectralField forward_transform(const RealField& f) {
  return SpectralField(*f.grid, spectral_of(*f.grid, f.samples));
}

RealField inverse_transform(const SpectralField& f) {
  return RealField(*f.grid, physical_of(*f.grid, f.coeffs));
}

RealField translate(const RealField& f, double delta) {
  const Grid& g = *f.grid;
  SpectralField hat = forward_transform(f);
  for (int k = 0; k < g.num_points; ++k) {
    const double phase = g.wavenumbers[k] * delta;
    if (g.mode_index(k) == -g.num_points / 2)
      hat.coeffs[k] *= std::cos(phase);
    else
      hat.coeffs[k] *= Complex(std::cos(phase), std::sin(phase));
  }
  return inverse_transform(hat);
}

SpectralField apply_multiplier(const SpectralField& f,
                               const std::function<Complex(double)>& m) {
  const Grid& g = *f.grid;
  SpectralField out(g);
  for (int k = 0; k < g.num_points; ++k) out.coeffs[k] = m(g.wavenumbers[k]) * f.coeffs[k];
  return out;
}

SpectralField apply_multiplier(const SpectralField& f, const ArrayXc& m) {
  if (m.size() != f.coeffs.size())
    throw ValidationError("apply_multiplier: multiplier length does not match grid");
  return SpectralField(*f.grid, f.coeffs * m);
}

SpectralField derivative(const SpectralField& f, int order) {
  const Grid& g = *f.grid;
  SpectralField out(g);
  const Complex i_unit(0.0, 1.0);
  for (int k = 0; k < g.num_points; ++k) {
    if (order % 2 == 1 && g.mode_index(k) == -g.num_points / 2) {
      out.coeffs[k] = 0.0;  // odd derivative of the unpaired Nyquist mode
      continue;
    }
    out.coeffs[k] = std::pow(i_unit * g.wavenumbers[k], order) * f.coeffs[k];
  }
  return out;
}

RealField derivative(const RealField& f, int order) {
  return inverse_transform(derivative(forward_transform(f), order));
}

SpectralField dealias(const SpectralField& f) {
  const Grid& g = *f.grid;
  SpectralField out(g);
  const int cut = g.dealias_mode();
  for (int k = 0; k < g.num_points; ++k)
    out.coeffs[k] = std::abs(g.mode_index(k)) > cut ? Complex(0.0) : f.coeffs[k];
  return out;
}

RealField dealias(const RealField& f) {
  return inverse_transform(dealias(forward_transform(f)));
}

double l2_norm(const RealField& f) {
  return std::sqrt(f.samples.square().sum() * f.grid->spacing);
}

double inner(const RealField& f, const RealField& g) {
  if (!(*f.grid == *g.grid)) throw ValidationError("inner: fields on different grids");
  return (f.samples * g.samples).sum() * f.grid->spacing;
}

double sobolev_norm(const SpectralField& f, double s) {
  if (s < -2.0 || s > 2.0) throw ValidationError("sobolev_norm: s outside [-2, 2]");
  const Grid& g = *f.grid;
  double acc = 0.0;
  for (int k = 0; k < g.num_points; ++k) {
    const double xi2 = g.wavenumbers[k] * g.wavenumbers[k];
    acc += std::pow(1.0 + xi2, s) * std::norm(f.coeffs[k]);
  }
  return std::sqrt(g.box_length * acc);
}

double sobolev_norm(const RealField& f, double s) {
  return sobolev_norm(forward_transform(f), s);
}

}  // namespace solstab
