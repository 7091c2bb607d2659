#ifndef SOLSTAB_GRID_HPP
#define SOLSTAB_GRID_HPP

#include "solstab/types.hpp"

#include <functional>

namespace solstab {

// Default resolution for time-stepping work: box [-100, 100], 4096 points.
// Wide enough that every tracked field is below 1e-12 at the boundary.
inline constexpr int kDefaultNumPoints = 4096;
inline constexpr double kDefaultBoxLength = 200.0;

/// Uniform periodic grid on [-L/2, L/2). num_points must be a power of two.
/// wavenumbers are stored in FFT order: 0, 1, ..., P/2-1, -P/2, ..., -1,
/// scaled by 2*pi/L.
struct Grid {
  int num_points = 0;
  double box_length = 0.0;
  double spacing = 0.0;
  ArrayX points;       // x_j = -L/2 + j*spacing
  ArrayX wavenumbers;  // xi_k, FFT order

  Grid(int n, double length);

  int mode_index(int array_index) const {
    return array_index < num_points / 2 ? array_index : array_index - num_points;
  }
  double nyquist_frequency() const { return M_PI * num_points / box_length; }
  /// Largest integer mode kept by the 2/3 rule.
  int dealias_mode() const { return num_points / 3; }
  double dealias_frequency() const { return 2.0 * M_PI / box_length * dealias_mode(); }

  bool operator==(const Grid& other) const {
    return num_points == other.num_points && box_length == other.box_length;
  }
};

/// Spatial samples of a real function on a Grid. The grid must outlive the field.
struct RealField {
  const Grid* grid = nullptr;
  ArrayX samples;

  RealField() = default;
  explicit RealField(const Grid& g) : grid(&g), samples(ArrayX::Zero(g.num_points)) {}
  RealField(const Grid& g, ArrayX data) : grid(&g), samples(std::move(data)) {
    if (samples.size() != g.num_points)
      throw ValidationError("RealField: sample count does not match grid");
  }
};

/// Fourier coefficients of a field, same ordering as Grid::wavenumbers.
/// Convention: coeff(xi_k) = (1/P) sum_j f(x_j) exp(-i xi_k x_j), so a real
/// field has Hermitian-symmetric coefficients.
struct SpectralField {
  const Grid* grid = nullptr;
  ArrayXc coeffs;

  SpectralField() = default;
  explicit SpectralField(const Grid& g) : grid(&g), coeffs(ArrayXc::Zero(g.num_points)) {}
  SpectralField(const Grid& g, ArrayXc data) : grid(&g), coeffs(std::move(data)) {
    if (coeffs.size() != g.num_points)
      throw ValidationError("SpectralField: coefficient count does not match grid");
  }
};

SpectralField forward_transform(const RealField& f);
RealField inverse_transform(const SpectralField& f);

/// Sample a callable y -> value on the grid.
RealField sample(const Grid& g, const std::function<double(double)>& fn);

SpectralField apply_multiplier(const SpectralField& f,
                               const std::function<Complex(double)>& m);
SpectralField apply_multiplier(const SpectralField& f, const ArrayXc& m);

/// Spectral derivative of given order; Nyquist mode is zeroed for odd orders.
RealField derivative(const RealField& f, int order = 1);
SpectralField derivative(const SpectralField& f, int order = 1);

/// Zero every coefficient with integer mode |k| > num_points/3 (2/3 rule).
SpectralField dealias(const SpectralField& f);
RealField dealias(const RealField& f);

/// L2 norm with the grid measure: sqrt(sum f^2 * dx).
double l2_norm(const RealField& f);
/// L2 inner product with the grid measure.
double inner(const RealField& f, const RealField& g);
/// H^s norm, s in [-2, 2]: sqrt(L * sum (1 + xi^2)^s |coeff|^2).
double sobolev_norm(const RealField& f, double s);
double sobolev_norm(const SpectralField& f, double s);

/// Spatial shift f(y) -> f(y + delta) through the spectral phase e^{i xi delta}
/// (the Nyquist mode keeps only the symmetric cos part).
RealField translate(const RealField& f, double delta);

/// Raw-array transforms with the library convention, for hot loops.
ArrayXc spectral_of(const Grid& g, const ArrayX& samples);
ArrayX physical_of(const Grid& g, const ArrayXc& coeffs);

/// Low-level DFT used by the spacetime modules; length-n unnormalized
/// transform, sign = -1 forward / +1 backward. Thread-safe.
void dft(int n, const Complex* in, Complex* out, int sign);

}  // namespace solstab

#endif
