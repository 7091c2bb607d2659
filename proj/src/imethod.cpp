#include "solstab/imethod.hpp"

#include <cmath>

namespace solstab {

double m_eval(const IMultiplier& im, double xi) {
  const double r = std::abs(xi) / im.N;
  if (r <= 1.0) return 1.0;
  if (r >= 10.0) return std::pow(r, im.s - 1.0);
  // Log-log linear ramp modulated by a C^inf smoothstep: p(l) = l * sigma(l)
  // joins the plateau and the power law to all orders, so I_N leaves no
  // algebraic far-field tails for the exponential weight to amplify.
  const double l = std::log10(r);
  const double g1 = std::exp(-1.0 / l);
  const double g2 = std::exp(-1.0 / (1.0 - l));
  const double p = l * g1 / (g1 + g2);
  return std::pow(10.0, (im.s - 1.0) * p);
}

SpectralField apply_I(const IMultiplier& im, const SpectralField& f) {
  const Grid& g = *f.grid;
  SpectralField out(g);
  for (int k = 0; k < g.num_points; ++k)
    out.coeffs[k] = m_eval(im, g.wavenumbers[k]) * f.coeffs[k];
  return out;
}

RealField apply_I(const IMultiplier& im, const RealField& f) {
  return inverse_transform(apply_I(im, forward_transform(f)));
}

RealField commutator(const IMultiplier& im, const RealField& u, const RealField& v) {
  if (!(*u.grid == *v.grid)) throw ValidationError("commutator: fields on different grids");
  const Grid& g = *u.grid;
  const RealField uv = dealias(RealField(g, u.samples * v.samples));
  const RealField iu = apply_I(im, u);
  const RealField iv = apply_I(im, v);
  const RealField iuiv = dealias(RealField(g, iu.samples * iv.samples));
  return RealField(g, apply_I(im, uv).samples - iuiv.samples);
}

double schedule_N(const ISchedule& sch, int n) {
  if (!(sch.kappa > 0.0 && sch.kappa < 1.0))
    throw ValidationError("ISchedule: kappa must lie in (0, 1)");
  if (n < 0) throw ValidationError("schedule_N: n must be nonnegative");
  const double e = sch.exponent_coefficient();
  if (e >= 0.0)
    throw ValidationError("ISchedule: exponent coefficient must be negative (N nondecreasing)");
  return std::pow(sch.kappa, e * n);
}

ProductRuleReport product_rule_check(const IMultiplier& im, double a, const RealField& f1,
                                     const RealField& f2, double R) {
  if (!(*f1.grid == *f2.grid))
    throw ValidationError("product_rule_check: fields on different grids");
  const Grid& g = *f1.grid;
  ArrayX w(g.num_points);
  for (int j = 0; j < g.num_points; ++j) {
    const double y = g.points[j];
    w[j] = y > R ? 0.0 : std::exp(a * y);
  }
  const double dx = g.spacing;
  auto weighted_l2 = [&](const RealField& f) {
    ArrayX wf = w * f.samples;
    if (!wf.isFinite().all()) throw NumericalError("product_rule_check: weighted overflow");
    return std::sqrt(wf.square().sum() * dx);
  };

  const RealField prod = dealias(RealField(g, f1.samples * f2.samples));
  const RealField lhs_field = inverse_transform(derivative(apply_I(im, forward_transform(prod)), 1));
  const double lhs = weighted_l2(lhs_field);

  auto i_dy = [&](const RealField& f) {
    return inverse_transform(derivative(apply_I(im, forward_transform(f)), 1));
  };
  const double rhs = 2.0 * sobolev_norm(apply_I(im, f1), 1.0) * weighted_l2(i_dy(f2)) +
                     2.0 * sobolev_norm(apply_I(im, f2), 1.0) * weighted_l2(i_dy(f1));
  return {lhs, rhs, lhs <= rhs};
}

}  // namespace solstab
