#ifndef SOLSTAB_WEIGHTS_HPP
#define SOLSTAB_WEIGHTS_HPP

#include "solstab/grid.hpp"
#include "solstab/types.hpp"

#include <limits>
#include <vector>

namespace solstab {

/// Exponential weight e^{ay} truncated at y = R: omega_{a,R}(y) = e^{ay} for
/// y <= R and 0 beyond. Admissibility 0 <= a < sqrt(c_ref/3); a = 0 is the
/// identity weight.
struct WeightParams {
  double a = 0.0;
  double R = std::numeric_limits<double>::infinity();
  double c_ref = 1.0;

  WeightParams() = default;
  WeightParams(double rate, double c_reference,
               double truncation = std::numeric_limits<double>::infinity())
      : a(rate), R(truncation), c_ref(c_reference) {
    if (!(c_ref > 0.0)) throw ValidationError("WeightParams: c_ref must be positive");
    if (a < 0.0 || a >= std::sqrt(c_ref / 3.0))
      throw ValidationError("WeightParams: require 0 <= a < sqrt(c_ref/3)");
    if (!(R > 0.0)) throw ValidationError("WeightParams: R must be positive");
  }
};

/// omega_{a,R} sampled on the grid.
ArrayX weight_values(const WeightParams& p, const Grid& g);

/// Pointwise multiplication by omega_{a,R}. Throws NumericalError if any
/// weighted sample exceeds the 1e300 overflow guard.
RealField apply_weight(const WeightParams& p, const RealField& f);

/// H1 norm of the weighted field via the identity
///   ||w f||_{H1}^2 = ||w f||_{L2}^2 + ||w (a f + f_y)||_{L2}^2,
/// which never differentiates the weight. f_y is the spectral derivative.
double weighted_h1_norm(const WeightParams& p, const RealField& f);

/// ||omega_{a,R} f||_{H1} swept over increasing truncation radii; the series
/// is nondecreasing and approaches the untruncated value.
TimeSeries truncation_convergence_check(const WeightParams& p, const RealField& f,
                                        const std::vector<double>& r_list);

}  // namespace solstab

#endif
