#include "solstab/spectral_ops.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace solstab {

namespace {

void check_admissible(double a, double c) {
  if (!(c > 0.0)) throw ValidationError("spectral_ops: c must be positive");
  if (a < 0.0 || a >= std::sqrt(c / 3.0))
    throw ValidationError("spectral_ops: require 0 <= a < sqrt(c/3)");
}

}  // namespace

MatrixX differentiation_matrix(const Grid& g, int order) {
  const int n = g.num_points;
  MatrixX d(n, n);
  ArrayXc col(n), hat(n);
  const Complex i_unit(0.0, 1.0);
  ArrayXc symbol(n);
  for (int k = 0; k < n; ++k) {
    if (order % 2 == 1 && g.mode_index(k) == -n / 2)
      symbol[k] = 0.0;
    else
      symbol[k] = std::pow(i_unit * g.wavenumbers[k], order);
  }
  for (int j = 0; j < n; ++j) {
    col.setZero();
    col[j] = 1.0;
    dft(n, col.data(), hat.data(), -1);
    hat *= symbol / static_cast<double>(n);
    dft(n, hat.data(), col.data(), +1);
    d.col(j) = col.real().matrix();
  }
  return d;
}

LinearizedOperator build_operator(const Grid& g, double a, double c) {
  check_admissible(a, c);
  const int n = g.num_points;
  const MatrixX d1 = differentiation_matrix(g, 1);
  const MatrixX d2 = differentiation_matrix(g, 2);
  const MatrixX d3 = differentiation_matrix(g, 3);
  const RealField psi = sample_soliton(g, SolitonParams(c));

  LinearizedOperator op;
  op.a = a;
  op.c = c;
  op.grid = &g;
  op.matrix = -(d3 - 3.0 * a * d2 + (3.0 * a * a - c) * d1 +
                a * (c - a * a) * MatrixX::Identity(n, n) +
                2.0 * (d1 - a * MatrixX::Identity(n, n)) * psi.samples.matrix().asDiagonal());
  return op;
}

SpectralPair calibrate_thetas(const Grid& g, double a, double c) {
  check_admissible(a, c);
  const SolitonParams p(c);
  const RealField psi = sample_soliton(g, p);
  const RealField dypsi = sample_soliton_dy(g, p);
  const RealField dcpsi = sample_soliton_dc(g, p);

  ArrayX w_plus(g.num_points), w_minus(g.num_points);
  for (int j = 0; j < g.num_points; ++j) {
    w_plus[j] = std::exp(a * g.points[j]);
    w_minus[j] = std::exp(-a * g.points[j]);
  }

  SpectralPair pair;
  pair.a = a;
  pair.c = c;
  pair.zeta1 = RealField(g, w_plus * dypsi.samples);
  pair.zeta2 = RealField(g, w_plus * dcpsi.samples);

  // eta basis: b1 = (d_y + a)^{-1}(e^{-ay} d_c psi), b2 = e^{-ay} psi.
  RealField b1(g);
  {
    SpectralField rhs = forward_transform(RealField(g, w_minus * dcpsi.samples));
    SpectralField sol(g);
    for (int k = 0; k < g.num_points; ++k)
      sol.coeffs[k] = rhs.coeffs[k] / Complex(a, g.wavenumbers[k]);
    b1 = inverse_transform(sol);
  }
  const RealField b2(g, w_minus * psi.samples);

  // Least squares for (theta1, theta2, theta3) over the four biorthogonality
  // conditions <zeta_j, eta_k> = delta_jk; the system is consistent up to
  // quadrature round-off.
  Eigen::Matrix<double, 4, 3> sys = Eigen::Matrix<double, 4, 3>::Zero();
  Eigen::Vector4d rhs;
  sys(0, 0) = inner(pair.zeta1, b1);
  sys(0, 1) = inner(pair.zeta1, b2);
  sys(1, 0) = inner(pair.zeta2, b1);
  sys(1, 1) = inner(pair.zeta2, b2);
  sys(2, 2) = inner(pair.zeta1, b2);
  sys(3, 2) = inner(pair.zeta2, b2);
  rhs << 1.0, 0.0, 0.0, 1.0;

  Eigen::JacobiSVD<Eigen::Matrix<double, 4, 3>> svd(sys, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double cond = svd.singularValues()(0) / svd.singularValues()(2);
  if (!(cond < 1e10))
    throw NumericalError("calibrate_thetas: Gram system condition number exceeds 1e10");
  const Eigen::Vector3d theta = svd.solve(rhs);
  pair.theta1 = theta[0];
  pair.theta2 = theta[1];
  pair.theta3 = theta[2];

  pair.eta1 = RealField(g, pair.theta1 * b1.samples + pair.theta2 * b2.samples);
  pair.eta2 = RealField(g, pair.theta3 * b2.samples);

  // Exact discrete re-biorthogonalization: eta <- eta * G^{-1} with
  // G_jk = <zeta_j, eta_k>, a near-identity 2x2 correction that makes the
  // projector idempotent to round-off.
  Eigen::Matrix2d gram;
  gram << inner(pair.zeta1, pair.eta1), inner(pair.zeta1, pair.eta2),
      inner(pair.zeta2, pair.eta1), inner(pair.zeta2, pair.eta2);
  const Eigen::Matrix2d ginv = gram.inverse();
  ArrayX e1 = ginv(0, 0) * pair.eta1.samples + ginv(1, 0) * pair.eta2.samples;
  ArrayX e2 = ginv(0, 1) * pair.eta1.samples + ginv(1, 1) * pair.eta2.samples;
  pair.eta1.samples = std::move(e1);
  pair.eta2.samples = std::move(e2);
  return pair;
}

RealField project_P(const Projector& pr, const RealField& w) {
  const SpectralPair& pair = *pr.pair;
  const double c1 = inner(w, pair.eta1);
  const double c2 = inner(w, pair.eta2);
  return RealField(*w.grid, c1 * pair.zeta1.samples + c2 * pair.zeta2.samples);
}

RealField project_Q(const Projector& pr, const RealField& w) {
  RealField pw = project_P(pr, w);
  return RealField(*w.grid, w.samples - pw.samples);
}

SpectrumSummary discrete_spectrum(const LinearizedOperator& op, MatrixXc* eigenvectors) {
  Eigen::EigenSolver<MatrixX> solver(op.matrix, eigenvectors != nullptr);
  if (solver.info() != Eigen::Success) {
    Eigen::JacobiSVD<MatrixX> svd(op.matrix);
    const double cond =
        svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
    throw NumericalError("discrete_spectrum: eigensolver failed (matrix condition ~" +
                         std::to_string(cond) + ")");
  }
  SpectrumSummary out;
  out.eigenvalues = solver.eigenvalues();
  if (eigenvectors) *eigenvectors = solver.eigenvectors();
  out.bound_b = spectral_bound(op.a, op.c);

  const int n = static_cast<int>(out.eigenvalues.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return std::abs(out.eigenvalues[i]) < std::abs(out.eigenvalues[j]);
  });
  out.nearest_zero = {out.eigenvalues[order[0]], out.eigenvalues[order[1]]};
  double max_re = -std::numeric_limits<double>::infinity();
  for (int i = 2; i < n; ++i) max_re = std::max(max_re, out.eigenvalues[order[i]].real());
  out.max_re_remainder = max_re;
  return out;
}

Complex continuous_spectrum_curve(double a, double c, double tau) {
  const Complex i_unit(0.0, 1.0);
  return i_unit * tau * tau * tau - 3.0 * a * tau * tau + (c - 3.0 * a * a) * i_unit * tau -
         a * (c - a * a);
}

double pa_symbol(double a, double c0, double xi, PaForm form) {
  const double zero_order = form == PaForm::ConsistentWithBound ? a * (c0 - a * a)
                                                                : a * (c0 * c0 - a);
  return 3.0 * a * xi * xi + zero_order;
}

RealField semigroup_w1(double t, const RealField& f) {
  SpectralField hat = forward_transform(f);
  const Grid& g = *f.grid;
  for (int k = 0; k < g.num_points; ++k) {
    const double xi = g.wavenumbers[k];
    hat.coeffs[k] *= std::exp(Complex(0.0, xi * xi * xi * t));
  }
  return inverse_transform(hat);
}

RealField semigroup_w2(double t, const RealField& f, double a, double c0, PaForm form) {
  SpectralField hat = forward_transform(f);
  const Grid& g = *f.grid;
  for (int k = 0; k < g.num_points; ++k) {
    const double xi = g.wavenumbers[k];
    hat.coeffs[k] *= std::exp(Complex(-pa_symbol(a, c0, xi, form) * std::abs(t), xi * xi * xi * t));
  }
  return inverse_transform(hat);
}

void write_spectrum_report(std::ostream& os, const SpectrumSummary& summary, double a,
                           double c, const Grid& g) {
  os << "# a=" << a << " c=" << c << " b=" << summary.bound_b
     << " num_points=" << g.num_points << " box_length=" << g.box_length << "\n";
  os << "re_lambda,im_lambda\n";
  char line[64];
  for (Eigen::Index i = 0; i < summary.eigenvalues.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g\n", summary.eigenvalues[i].real(),
                  summary.eigenvalues[i].imag());
    os << line;
  }
}

}  // namespace solstab
