#include "solstab/weights.hpp"

#include <cmath>

namespace solstab {

namespace {
constexpr double kOverflowGuard = 1e300;
}

ArrayX weight_values(const WeightParams& p, const Grid& g) {
  ArrayX w(g.num_points);
  for (int j = 0; j < g.num_points; ++j) {
    const double y = g.points[j];
    w[j] = y > p.R ? 0.0 : std::exp(p.a * y);
  }
  return w;
}

RealField apply_weight(const WeightParams& p, const RealField& f) {
  const Grid& g = *f.grid;
  ArrayX out = weight_values(p, g) * f.samples;
  if (!out.isFinite().all() || out.abs().maxCoeff() > kOverflowGuard)
    throw NumericalError("apply_weight: weighted samples exceed overflow guard");
  return RealField(g, std::move(out));
}

double weighted_h1_norm(const WeightParams& p, const RealField& f) {
  const Grid& g = *f.grid;
  const ArrayX w = weight_values(p, g);
  const RealField fy = derivative(f, 1);
  ArrayX wf = w * f.samples;
  ArrayX wg = w * (p.a * f.samples + fy.samples);
  if (!wf.isFinite().all() || !wg.isFinite().all() ||
      wf.abs().maxCoeff() > kOverflowGuard || wg.abs().maxCoeff() > kOverflowGuard)
    throw NumericalError("weighted_h1_norm: weighted samples exceed overflow guard");
  const double dx = g.spacing;
  return std::sqrt((wf.square().sum() + wg.square().sum()) * dx);
}

TimeSeries truncation_convergence_check(const WeightParams& p, const RealField& f,
                                        const std::vector<double>& r_list) {
  TimeSeries out;
  out.columns = {"weighted_h1"};
  for (double r : r_list) {
    WeightParams truncated(p.a, p.c_ref, r);
    out.append(r, {weighted_h1_norm(truncated, f)});
  }
  return out;
}

}  // namespace solstab
