#ifndef SOLSTAB_SPECTRAL_OPS_HPP
#define SOLSTAB_SPECTRAL_OPS_HPP

#include "solstab/grid.hpp"
#include "solstab/soliton.hpp"
#include "solstab/types.hpp"

#include <array>
#include <iosfwd>

namespace solstab {

// Default grid for dense-operator spectrum studies (separate from, and
// coarser than, the time-stepping grid). The box is sized so the family
// fields stay resolved for c up to ~2 without inflating xi_max^3 round-off.
inline constexpr int kSpectrumNumPoints = 512;
inline constexpr double kSpectrumBoxLength = 120.0;

/// Spectral bound b = -a(c - a^2) from the weighted linearization.
inline double spectral_bound(double a, double c) { return -a * (c - a * a); }

/// Dense discretization of A_a = e^{ay} d_y(-d_y^2 + c - 2 psi_c) e^{-ay} in
/// expanded form: -(D3 - 3a D2 + (3a^2 - c) D1 + a(c - a^2) I + 2(D1 - aI) psi).
struct LinearizedOperator {
  double a = 0.0;
  double c = 1.0;
  const Grid* grid = nullptr;
  MatrixX matrix;
};

/// Periodic spectral differentiation matrix of the given order (assembled by
/// transforming the identity columns; odd orders zero the Nyquist mode).
MatrixX differentiation_matrix(const Grid& g, int order);

LinearizedOperator build_operator(const Grid& g, double a, double c);

/// The biorthogonal system for A_a and its adjoint:
///   zeta1 = e^{ay} d_y psi_c,  zeta2 = e^{ay} d_c psi_c,
///   eta1  = e^{-ay}[theta1 d_y^{-1} d_c psi_c + theta2 psi_c],
///   eta2  = e^{-ay} theta3 psi_c,
/// with thetas calibrated so <zeta_j, eta_k> = delta_jk. The weighted
/// antiderivative is realized as (d_y + a)^{-1}(e^{-ay} d_c psi_c), solved
/// spectrally, which equals e^{-ay} * integral_{-inf}^y without amplifying
/// quadrature round-off under the weight.
struct SpectralPair {
  RealField zeta1, zeta2, eta1, eta2;
  double theta1 = 0.0, theta2 = 0.0, theta3 = 0.0;
  double a = 0.0, c = 1.0;
};

SpectralPair calibrate_thetas(const Grid& g, double a, double c);

/// Rank-two spectral projection P w = <w, eta1> zeta1 + <w, eta2> zeta2 and
/// its complement Q = Id - P. The pair must outlive the projector.
struct Projector {
  const SpectralPair* pair = nullptr;
};

RealField project_P(const Projector& pr, const RealField& w);
RealField project_Q(const Projector& pr, const RealField& w);

struct SpectrumSummary {
  VectorXc eigenvalues;                  // full discrete set
  std::array<Complex, 2> nearest_zero;   // the two eigenvalues closest to 0
  double max_re_remainder = 0.0;         // max Re over the other eigenvalues
  double bound_b = 0.0;                  // -a(c - a^2)
};

/// Full dense eigensolve; eigenvectors are returned on request.
SpectrumSummary discrete_spectrum(const LinearizedOperator& op,
                                  MatrixXc* eigenvectors = nullptr);

/// tau -> i tau^3 - 3a tau^2 + (c - 3a^2) i tau - a(c - a^2).
Complex continuous_spectrum_curve(double a, double c, double tau);

/// Zeroth-order coefficient of the damping symbol p_a: the default
/// a(c0 - a^2) is consistent with the expanded operator and the spectral
/// bound; PaperPrinted selects the alternative a(c0^2 - a).
enum class PaForm { ConsistentWithBound, PaperPrinted };

double pa_symbol(double a, double c0, double xi, PaForm form = PaForm::ConsistentWithBound);

/// Airy evolution: multiplier e^{i xi^3 t}; an L2 isometry for every t.
RealField semigroup_w1(double t, const RealField& f);
/// Damped evolution: multiplier e^{i xi^3 t - p_a(xi) |t|}.
RealField semigroup_w2(double t, const RealField& f, double a, double c0,
                       PaForm form = PaForm::ConsistentWithBound);

/// Delimited-text spectrum report: one header line with (a, c, b, grid size),
/// then re_lambda,im_lambda rows.
void write_spectrum_report(std::ostream& os, const SpectrumSummary& summary,
                           double a, double c, const Grid& g);

}  // namespace solstab

#endif
