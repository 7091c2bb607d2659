#ifndef SOLSTAB_IMETHOD_HPP
#define SOLSTAB_IMETHOD_HPP

#include "solstab/grid.hpp"
#include "solstab/types.hpp"
#include "solstab/weights.hpp"

#include <optional>

namespace solstab {

/// Smoothing multiplier m_N: equal to 1 for |xi| < N, |xi/N|^{s-1} for
/// |xi| > 10N, bridged in between by a monotone C^1 interpolation that is
/// linear-with-matched-end-slopes in log-log coordinates.
struct IMultiplier {
  double N = 1.0;
  double s = 0.875;

  IMultiplier() = default;
  IMultiplier(double cutoff, double regularity) : N(cutoff), s(regularity) {
    if (!(N >= 1.0)) throw ValidationError("IMultiplier: N must be >= 1");
    if (!(s > 0.75 && s < 1.0)) throw ValidationError("IMultiplier: s must lie in (3/4, 1)");
  }
};

double m_eval(const IMultiplier& im, double xi);

/// Fourier-multiplier application of m_N. Self-adjoint on L2.
RealField apply_I(const IMultiplier& im, const RealField& f);
SpectralField apply_I(const IMultiplier& im, const SpectralField& f);

/// I_N(u v) - (I_N u)(I_N v), with 2/3-dealiased pointwise products.
RealField commutator(const IMultiplier& im, const RealField& u, const RealField& v);

/// Step-indexed cutoff ladder N(n) = kappa^{(-1/(7/4-s)+eta1) n}; the default
/// exponent coefficient can be overridden through exponent_override.
struct ISchedule {
  double kappa = 0.9;
  double eta1 = 0.01;
  double s = 0.875;
  std::optional<double> exponent_override;

  double exponent_coefficient() const {
    return exponent_override ? *exponent_override : -1.0 / (1.75 - s) + eta1;
  }
};

double schedule_N(const ISchedule& sch, int n);

struct ProductRuleReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
};

/// Checks ||e^{ay} I_N d_y(f1 f2)||_{L2} against
/// 2||I_N f1||_{H1} ||e^{ay} I_N d_y f2||_{L2} + 2||I_N f2||_{H1} ||e^{ay} I_N d_y f1||_{L2}.
/// The weight is truncated at R (pointwise, applied last).
ProductRuleReport product_rule_check(const IMultiplier& im, double a, const RealField& f1,
                                     const RealField& f2,
                                     double R = std::numeric_limits<double>::infinity());

}  // namespace solstab

#endif
