#ifndef SOLSTAB_SOLITON_HPP
#define SOLSTAB_SOLITON_HPP

#include "solstab/grid.hpp"
#include "solstab/types.hpp"

#include <cmath>

namespace solstab {

/// Travelling-wave family psi_c(y) = (3c/2) sech^2(sqrt(c)/2 * y), speed c > 0.
struct SolitonParams {
  double c = 1.0;
  double x0 = 0.0;

  SolitonParams() = default;
  explicit SolitonParams(double speed, double center = 0.0) : c(speed), x0(center) {
    if (!(c > 0.0)) throw ValidationError("SolitonParams: c must be positive");
  }
};

/// psi_c at the co-moving coordinate y.
inline double eval_soliton(const SolitonParams& p, double y) {
  const double sech = 1.0 / std::cosh(0.5 * std::sqrt(p.c) * y);
  return 1.5 * p.c * sech * sech;
}

/// d/dy psi_c(y) = -(3/2) c^{3/2} sech^2(u) tanh(u), u = sqrt(c)/2 * y.
inline double soliton_dy(const SolitonParams& p, double y) {
  const double u = 0.5 * std::sqrt(p.c) * y;
  const double sech = 1.0 / std::cosh(u);
  return -1.5 * std::pow(p.c, 1.5) * sech * sech * std::tanh(u);
}

/// d/dc psi_c(y) = (3/2) sech^2(u) - (3/4) sqrt(c) y sech^2(u) tanh(u).
inline double soliton_dc(const SolitonParams& p, double y) {
  const double u = 0.5 * std::sqrt(p.c) * y;
  const double sech = 1.0 / std::cosh(u);
  const double sech2 = sech * sech;
  return 1.5 * sech2 - 0.75 * std::sqrt(p.c) * y * sech2 * std::tanh(u);
}

inline RealField sample_soliton(const Grid& g, const SolitonParams& p) {
  return sample(g, [&](double y) { return eval_soliton(p, y - p.x0); });
}

inline RealField sample_soliton_dy(const Grid& g, const SolitonParams& p) {
  return sample(g, [&](double y) { return soliton_dy(p, y - p.x0); });
}

inline RealField sample_soliton_dc(const Grid& g, const SolitonParams& p) {
  return sample(g, [&](double y) { return soliton_dc(p, y - p.x0); });
}

}  // namespace solstab

#endif
