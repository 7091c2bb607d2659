#ifndef SOLSTAB_BOURGAIN_HPP
#define SOLSTAB_BOURGAIN_HPP

#include "solstab/grid.hpp"
#include "solstab/spectral_ops.hpp"
#include "solstab/types.hpp"

#include <string>
#include <vector>

namespace solstab {

/// Real samples on a uniform (t, x) lattice; the time window is treated as
/// periodic with extent t_length, so fields should vanish smoothly at the
/// window edges (the rho cutoff guarantees this for every probe).
struct SpacetimeField {
  ArrayX t_grid;
  const Grid* x_grid = nullptr;
  MatrixX values;  // row = time sample, col = space sample

  SpacetimeField() = default;
  SpacetimeField(ArrayX times, const Grid& g)
      : t_grid(std::move(times)), x_grid(&g),
        values(MatrixX::Zero(t_grid.size(), g.num_points)) {
    if (t_grid.size() < 2) throw ValidationError("SpacetimeField: need at least 2 time samples");
  }
  double t_spacing() const { return t_grid[1] - t_grid[0]; }
  double t_length() const { return t_spacing() * t_grid.size(); }
};

/// Uniform window [t_lo, t_hi) with q samples.
SpacetimeField make_window(const Grid& g, double t_lo, double t_hi, int q);

/// Dyadic block bookkeeping for A_j = {<xi> in [2^j, 2^{j+1}]} and
/// B_k = {<tau - xi^3> in [2^k, 2^{k+1}]}; boundary ties go to the lower block.
struct DyadicDecomposition {
  int j_max = 0;
  int k_max = 0;
  /// Block index of a Japanese-bracket value v >= 1: the j with v in (2^j, 2^{j+1}].
  static int block_of(double v);
};

/// ||f||_{X^{s,b,1}} on the lattice: sqrt(sum_j 2^{2sj} (sum_k 2^{bk} ||f~||_{L2(Aj^Bk)})^2)
/// with the Parseval-consistent block measure L_t * L_x * sum |coeff|^2.
double xsb1_norm(const SpacetimeField& f, double s, double b);

struct EmbeddingReport {
  double lhs = 0.0;   // sup_t ||f(t)||_{H^s}
  double rhs = 0.0;   // ||f||_{X^{s,1/2,1}}
  double ratio = 0.0; // lhs / rhs, 0 when rhs vanishes
};
EmbeddingReport embedding_check(const SpacetimeField& f, double s);

/// Smooth cutoff: rho in C_c^inf, supp rho in [-2,2], rho == 1 on [-1,1].
double rho_cutoff(double t);
/// Pointwise multiplication by rho(t/delta).
SpacetimeField apply_time_cutoff(const SpacetimeField& f, double delta);

enum class ProbeKind { W1Hom, W1Inhom, W2Hom, W2Inhom };
const char* probe_kind_name(ProbeKind kind);

struct ProbeConfig {
  int x_points = 512;
  double x_length = 50.0;
  int t_points = 256;
  double delta = 0.5;     // window is [-2 delta, 2 delta)
  double band = 3.0;      // max |xi| carried by random data
  double s = 0.875;
  double a = 0.5;         // W2 weight rate
  double c0 = 1.0;
  unsigned long long seed = 1;
};

struct ProbeRow {
  int trial = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

struct ProbeStats {
  ProbeKind kind = ProbeKind::W1Hom;
  std::vector<ProbeRow> rows;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
};

/// Measures lhs/rhs of the homogeneous/inhomogeneous linear estimates for
/// W1/W2 on random band-limited data. Pass criterion is stability of the
/// observed ratios, not any specific constant.
ProbeStats linear_estimate_probe(ProbeKind kind, int trials, const ProbeConfig& cfg);

}  // namespace solstab

#endif
