#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdlvq/assignment.hpp"

namespace mdlvq {

// zeta1 = 1 - p^K - (1-p)^K; zeta2 weights the description spread; both exact
// binomial sums. zeta = zeta1/zeta2 (1 when p is degenerate).
struct ZetaWeights {
  Frac z1, z2, zeta;
};
ZetaWeights zetas_exact(const Frac& p, int K);

struct RateReport {
  double R_c, R_s, R_t;  // bits per dimension
};
RateReport rates(double nu, double N, int K, const SourceModel& src, int L);

// Phi_{n,L} = (1 + 2/L)/(n + 2/L) * Gamma(nL/2+1)^{2/(nL)} / Gamma(L/2+1)^{2/L}
double phi_moment(int n, int L);
// psi_hat = sqrt(2 K^{-1/(K-1)} Phi_{K-1,L})
double psi_hat(int K, int L);
// Published comparison constants for K = 3 (finite L rows and the limit).
std::optional<double> psi_reference_k3(i64 L);

struct DistortionReport {
  int K = 2;
  int dim = 1;
  double p = 0;
  double nu = 0, g_lat = 0, n_index = 0;
  double d_c = 0;
  double side_term1 = 0, side_term2 = 0, d_s = 0;
  std::vector<double> d_k;  // k = 0..K received descriptions
  double D = 0;
  double zeta1 = 0, zeta2 = 0, zeta = 0;
  double ex2 = 0, h_bits = 0;
  std::string flavor;  // enumerated | exact | asymptotic
  // exact unnormalized sums over the fundamental region, canonical units
  std::optional<Frac> term1_sum, term2_sum;
  std::string units = "per-dimension; lengths in scaled lattice units";
};

// Exact enumeration of d_s over the N fundamental labels with uniform
// P(lambda) = 1/N.
DistortionReport enumerate_ds(const IndexAssignment& asg, const Frac& p, const SourceModel& src);

struct ExactK2 {
  DistortionReport report;
  Frac sum_ai;  // sum of squared distances of V_s(0) members, canonical units
  bool preconditions_ok = false;
  std::string note;
};
// Closed-form K=2 distortion from the cell population around the origin;
// requires clean + S-similar + centric (computed and flagged either way).
ExactK2 exact_D_K2(const SimilarSublattice& s, const Frac& p, const SourceModel& src);

struct AsymptoticReport {
  double side_ds = 0;  // first-term approximation of d_s
  double D = 0;
  std::optional<double> D_star;  // comparison value from an external psi_L
};
AsymptoticReport asymptotic_D(double nu, double N, int K, double p, int L, double G_lat,
                              const SourceModel& src,
                              std::optional<double> psi_external = std::nullopt);

struct OptimizeResult {
  double eta = 0;
  double nu_opt = 0, n_opt = 0, d_opt = 0;
  // admissible-index rounding at pinned total rate
  i64 n_lo = 0, n_hi = 0;
  double d_lo = 0, d_hi = 0;
  i64 n_rounded = 0;
  double nu_rounded = 0, d_rounded = 0;
};
// Closed-form (nu, N) optimum at fixed K; throws std::domain_error for
// p in {0, 1}.
OptimizeResult optimize(double p, int K, double R_t, int L, double G_lat, const SourceModel& src,
                        Family family = Family::Z, int dim_for_admissible = 0);

struct KSweepEntry {
  int K;
  double nu_opt, n_opt, D;
};
struct KSweepResult {
  int K_opt;
  std::vector<KSweepEntry> table;  // K = 1 is the single-description baseline
};
KSweepResult optimize_K(double p, double R_t, int L, double G_lat, const SourceModel& src,
                        int K_max);

struct LimitGainsRow {
  double R;
  i64 N;  // admissible odd index used
  double nu;
  double scaled_dc, dc_target, dc_ratio;
  double scaled_dk, dk_target, dk_ratio;
};
struct LimitGainsReport {
  double a;
  std::vector<LimitGainsRow> rows;
  bool dc_within_5pct_final = false;
  bool dk_ratio_monotone = false;
};
// K = 2 resolution-split check along N = 2^{aR+1} for the Z lattice (L = 1);
// exact cell sums at the nearest odd admissible index, side rate pinned to R.
LimitGainsReport limit_gains_check(double a, const std::vector<double>& Rs,
                                   const SourceModel& src);

struct ConstantsRow {
  i64 L;
  double g_sphere, ball_vol, phi, psi_hat_v;
  std::optional<double> psi_ext;
};
std::vector<ConstantsRow> constants_table(int K, const std::vector<i64>& Ls);

}  // namespace mdlvq
