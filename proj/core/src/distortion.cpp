#include "mdlvq/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mdlvq {

namespace {

Frac frac_pow(const Frac& x, int e) {
  Frac r(1);
  for (int i = 0; i < e; ++i) r = r * x;
  return r;
}

i64 binomial(int n, int k) {
  i64 r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

ZetaWeights zetas_exact(const Frac& p, int K) {
  if (p < Frac(0) || Frac(1) < p) throw std::domain_error("loss probability outside [0,1]");
  if (K < 1) throw std::domain_error("K must be >= 1");
  Frac q = Frac(1) - p;
  ZetaWeights z;
  z.z1 = Frac(1) - frac_pow(p, K) - frac_pow(q, K);
  z.z2 = Frac(0);
  for (int k = 1; k <= K - 1; ++k) {
    Frac term = Frac(binomial(K, k)) * frac_pow(q, k) * frac_pow(p, K - k) *
                Frac(K - k, static_cast<i64>(K - 1) * k);
    z.z2 = z.z2 + term;
  }
  z.zeta = z.z2.num == 0 ? Frac(1) : z.z1 / z.z2;
  return z;
}

RateReport rates(double nu, double N, int K, const SourceModel& src, int L) {
  if (nu <= 0 || N < 1) throw std::domain_error("need nu > 0 and N >= 1");
  RateReport r;
  r.R_c = src.h_bits - std::log2(nu) / L;
  r.R_s = src.h_bits - std::log2(N * nu) / L;
  r.R_t = K * r.R_s;
  return r;
}

double phi_moment(int n, int L) {
  if (n < 1 || L < 1) throw std::domain_error("phi needs n >= 1, L >= 1");
  double nd = n, Ld = L;
  double lg = 2.0 / (nd * Ld) * std::lgamma(nd * Ld / 2.0 + 1.0) -
              2.0 / Ld * std::lgamma(Ld / 2.0 + 1.0);
  return (1.0 + 2.0 / Ld) / (nd + 2.0 / Ld) * std::exp(lg);
}

double psi_hat(int K, int L) {
  if (K < 2) throw std::domain_error("psi_hat needs K >= 2");
  return std::sqrt(2.0 * std::pow(K, -1.0 / (K - 1)) * phi_moment(K - 1, L));
}

std::optional<double> psi_reference_k3(i64 L) {
  static const std::map<i64, double> table = {
      {1, 1.1547}, {2, 1.1481}, {3, 1.1346},  {5, 1.1241},  {7, 1.1173},
      {9, 1.1125}, {11, 1.1089}, {13, 1.1060}, {15, 1.1036}, {17, 1.1017},
      {19, 1.1000}, {21, 1.0986}, {51, 1.0884}, {71, 1.0856}, {101, 1.0832}};
  auto it = table.find(L);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

static void fill_dk(DistortionReport& r, double t1_per_dim, double t2_per_dim) {
  const int K = r.K;
  r.d_k.assign(static_cast<size_t>(K) + 1, 0.0);
  r.d_k[0] = r.ex2;
  r.d_k[static_cast<size_t>(K)] = r.d_c;
  for (int k = 1; k < K; ++k) {
    double w = static_cast<double>(K - k) / (static_cast<double>(K - 1) * k);
    r.d_k[static_cast<size_t>(k)] = r.d_c + t2_per_dim + w * t1_per_dim;
  }
}

DistortionReport enumerate_ds(const IndexAssignment& asg, const Frac& p, const SourceModel& src) {
  DistortionReport r;
  r.K = asg.K;
  r.dim = asg.lat.dim;
  r.p = p.value();
  r.n_index = static_cast<double>(asg.index_n());
  auto consts = lattice_constants(asg.lat);
  r.nu = consts.nu;
  r.g_lat = consts.second_moment;
  r.ex2 = src.ex2;
  r.h_bits = src.h_bits;
  r.flavor = "enumerated";

  ZetaWeights z = zetas_exact(p, asg.K);
  r.zeta1 = z.z1.value();
  r.zeta2 = z.z2.value();
  r.zeta = z.zeta.value();

  SideSums s = asg.side_sums();
  r.term1_sum = s.term1_sum;
  r.term2_sum = s.term2_sum;
  double unit = asg.lat.scale * asg.lat.scale;
  double f = unit / (r.n_index * r.dim);
  double t1 = s.term1_sum.value() * f;
  double t2 = s.term2_sum.value() * f;
  r.side_term1 = t1;
  r.side_term2 = t2;
  r.d_s = t1 + r.zeta * t2;
  r.d_c = r.g_lat * std::pow(r.nu, 2.0 / r.dim);
  fill_dk(r, t1, t2);

  double pk = std::pow(r.p, asg.K);
  r.D = (1.0 - pk) * r.d_c + r.zeta1 * t2 + r.zeta2 * t1 + pk * r.ex2;
  return r;
}

ExactK2 exact_D_K2(const SimilarSublattice& s, const Frac& p, const SourceModel& src) {
  ExactK2 out;
  const int L = s.parent.dim;
  auto preds = predicates(s);
  out.preconditions_ok = preds.clean.clean && preds.centric.centric && preds.s_similar.s_similar;
  if (!out.preconditions_ok) {
    out.note = "formula preconditions violated (need clean + S-similar + centric); value unreliable";
    if (!preds.clean.clean) out.note += " [not clean]";
    if (!preds.centric.centric) out.note += " [not centric]";
    if (!preds.s_similar.s_similar) out.note += " [not S-similar]";
  }

  auto members = origin_cell_members(s);
  i64 sum_q2 = 0;
  for (const auto& m : members) sum_q2 += m.q2;
  out.sum_ai = Frac(sum_q2, 2);

  DistortionReport& r = out.report;
  r.K = 2;
  r.dim = L;
  r.p = p.value();
  r.n_index = static_cast<double>(s.index_n);
  auto consts = lattice_constants(s.parent);
  r.nu = consts.nu;
  r.g_lat = consts.second_moment;
  r.ex2 = src.ex2;
  r.h_bits = src.h_bits;
  r.flavor = "exact";
  ZetaWeights z = zetas_exact(p, 2);
  r.zeta1 = z.z1.value();
  r.zeta2 = z.z2.value();
  r.zeta = 1.0;

  double unit = s.parent.scale * s.parent.scale;
  double N = r.n_index;
  double n2l = std::pow(N, 2.0 / L);
  double sum_ai_scaled = out.sum_ai.value() * unit;
  double t2 = sum_ai_scaled / (4.0 * L * N);
  double t1 = n2l * t2;
  r.side_term1 = t1;
  r.side_term2 = t2;
  r.d_s = t1 + t2;
  r.d_c = r.g_lat * std::pow(r.nu, 2.0 / L);
  fill_dk(r, t1, t2);
  double pd = r.p;
  r.D = (1.0 - pd * pd) * r.d_c +
        0.5 * pd * (1.0 - pd) / L * (1.0 + n2l) / N * sum_ai_scaled + pd * pd * r.ex2;

  // exact unnormalized sums when N^{2/L} is integral
  double root = std::round(n2l);
  if (std::fabs(root - n2l) < 1e-9) {
    i64 n2 = static_cast<i64>(root);
    out.report.term2_sum = Frac(sum_q2, 8);           // sum_ai / 4
    out.report.term1_sum = Frac(sum_q2 * n2, 8);      // N^{2/L} times term2
  }
  return out;
}

AsymptoticReport asymptotic_D(double nu, double N, int K, double p, int L, double G_lat,
                              const SourceModel& src, std::optional<double> psi_external) {
  AsymptoticReport r;
  double GL = sphere_second_moment(L);
  double phi = phi_moment(K - 1, L);
  double side = GL * phi * (K - 1) * std::pow(K, -static_cast<double>(K) / (K - 1)) *
                std::pow(N, 2.0 * K / (L * (K - 1.0))) * std::pow(nu, 2.0 / L);
  r.side_ds = side;
  double pk = std::pow(p, K);
  double z2 = 0;
  for (int k = 1; k <= K - 1; ++k)
    z2 += binomial(K, k) * std::pow(1 - p, k) * std::pow(p, K - k) *
          static_cast<double>(K - k) / (static_cast<double>(K - 1) * k);
  r.D = (1.0 - pk) * G_lat * std::pow(nu, 2.0 / L) + z2 * side + pk * src.ex2;
  if (psi_external) {
    double khat = 0;
    for (int k = 1; k <= K - 1; ++k)
      khat += binomial(K, k) * std::pow(1 - p, k) * std::pow(p, K - k) *
              static_cast<double>(K - k) / (2.0 * k * K);
    double star_side = khat * GL * (*psi_external) * (*psi_external) *
                       std::pow(N, 2.0 * K / (L * (K - 1.0))) * std::pow(nu, 2.0 / L);
    r.D_star = (1.0 - pk) * G_lat * std::pow(nu, 2.0 / L) + star_side + pk * src.ex2;
  }
  return r;
}

OptimizeResult optimize(double p, int K, double R_t, int L, double G_lat, const SourceModel& src,
                        Family family, int dim_for_admissible) {
  if (p <= 0.0 || p >= 1.0)
    throw std::domain_error(
        "no interior optimum for p in {0,1}: N_opt -> infinity as p -> 0 (side term free) and "
        "D -> E|X|^2 as p -> 1");
  if (K < 2) throw std::domain_error("optimize needs K >= 2");

  OptimizeResult r;
  r.eta = std::pow(2.0, L * (src.h_bits - R_t / K));
  double GL = sphere_second_moment(L);
  double phi = phi_moment(K - 1, L);
  double pk = std::pow(p, K);
  double z2 = 0;
  for (int k = 1; k <= K - 1; ++k)
    z2 += binomial(K, k) * std::pow(1 - p, k) * std::pow(p, K - k) *
          static_cast<double>(K - k) / (static_cast<double>(K - 1) * k);

  double expo = L * (K - 1.0) / (2.0 * K);
  double core = z2 / (1.0 - pk) * GL / G_lat * phi / std::pow(K, static_cast<double>(K) / (K - 1));
  r.nu_opt = r.eta * std::pow(core, expo);
  r.n_opt = std::pow(1.0 / core, expo);
  r.d_opt = asymptotic_D(r.nu_opt, r.n_opt, K, p, L, G_lat, src).D;

  int adim = dim_for_admissible > 0 ? dim_for_admissible : L;
  i64 cap = std::max<i64>(16, static_cast<i64>(std::ceil(r.n_opt * 4.0)) + 4);
  auto adm = admissible_indices(family, adim, cap);
  r.n_lo = 1;
  r.n_hi = adm.empty() ? 1 : adm.back();
  for (i64 n : adm) {
    if (n <= r.n_opt) r.n_lo = n;
    if (n >= r.n_opt) {
      r.n_hi = n;
      break;
    }
  }
  auto d_at = [&](i64 n) {
    double nu = r.eta / static_cast<double>(n);
    return asymptotic_D(nu, static_cast<double>(n), K, p, L, G_lat, src).D;
  };
  r.d_lo = d_at(r.n_lo);
  r.d_hi = d_at(r.n_hi);
  if (r.d_lo <= r.d_hi) {
    r.n_rounded = r.n_lo;
    r.d_rounded = r.d_lo;
  } else {
    r.n_rounded = r.n_hi;
    r.d_rounded = r.d_hi;
  }
  r.nu_rounded = r.eta / static_cast<double>(r.n_rounded);
  return r;
}

KSweepResult optimize_K(double p, double R_t, int L, double G_lat, const SourceModel& src,
                        int K_max) {
  if (K_max < 1) throw std::domain_error("empty K range");
  KSweepResult out;
  // single-description baseline
  {
    KSweepEntry e;
    e.K = 1;
    e.nu_opt = std::pow(2.0, L * (src.h_bits - R_t));
    e.n_opt = 1;
    e.D = (1.0 - p) * G_lat * std::pow(e.nu_opt, 2.0 / L) + p * src.ex2;
    out.table.push_back(e);
  }
  for (int K = 2; K <= K_max; ++K) {
    KSweepEntry e;
    e.K = K;
    if (p <= 0.0 || p >= 1.0) {
      e.nu_opt = std::pow(2.0, L * (src.h_bits - R_t / K));
      e.n_opt = 1;
      e.D = p <= 0.0 ? G_lat * std::pow(e.nu_opt, 2.0 / L) : src.ex2;
    } else {
      auto r = optimize(p, K, R_t, L, G_lat, src);
      e.nu_opt = r.nu_opt;
      e.n_opt = r.n_opt;
      e.D = r.d_opt;
    }
    out.table.push_back(e);
  }
  out.K_opt = 1;
  double best = out.table.front().D;
  for (const auto& e : out.table)
    if (e.D < best * (1.0 - 1e-12)) {
      best = e.D;
      out.K_opt = e.K;
    }
  return out;
}

LimitGainsReport limit_gains_check(double a, const std::vector<double>& Rs,
                                   const SourceModel& src) {
  if (a <= 0.0 || a >= 1.0) throw std::domain_error("a must lie in (0,1)");
  LimitGainsReport rep;
  rep.a = a;
  const double h = src.h_bits;
  const double G_lat = 1.0 / 12.0;  // Z lattice, L = 1
  const double GL = sphere_second_moment(1);
  double prev_ratio = 1e300;
  bool monotone = true;
  for (double R : Rs) {
    double Nt = std::pow(2.0, a * R + 1.0);
    i64 N = static_cast<i64>(std::llround(Nt)) + 1;
    if (N % 2 == 0) ++N;  // nearest odd index above
    double nu = std::pow(2.0, h - R) / static_cast<double>(N);  // side rate pinned to R
    // exact Z cell sums: sum a_i = (N^3 - N)/12 for odd N
    double sum_ai = (std::pow(static_cast<double>(N), 3.0) - N) / 12.0;
    double t2 = sum_ai / (4.0 * N) * nu * nu;
    double t1 = static_cast<double>(N) * N * t2;
    double d_c = G_lat * nu * nu;
    double d_k = d_c + t1 + t2;

    LimitGainsRow row;
    row.R = R;
    row.N = N;
    row.nu = nu;
    row.dc_target = 0.25 * G_lat * std::pow(2.0, 2.0 * h);
    row.scaled_dc = d_c * std::pow(2.0, 2.0 * R * (1.0 + a));
    row.dc_ratio = row.scaled_dc / row.dc_target;
    row.dk_target = GL * std::pow(2.0, 2.0 * h);
    row.scaled_dk = d_k * std::pow(2.0, 2.0 * R * (1.0 - a));
    row.dk_ratio = row.scaled_dk / row.dk_target;
    if (row.dk_ratio > prev_ratio + 1e-12) monotone = false;
    prev_ratio = row.dk_ratio;
    rep.rows.push_back(row);
  }
  if (!rep.rows.empty())
    rep.dc_within_5pct_final = std::fabs(rep.rows.back().dc_ratio - 1.0) <= 0.05;
  rep.dk_ratio_monotone = monotone;
  return rep;
}

std::vector<ConstantsRow> constants_table(int K, const std::vector<i64>& Ls) {
  std::vector<ConstantsRow> out;
  for (i64 L : Ls) {
    ConstantsRow r;
    r.L = L;
    r.g_sphere = sphere_second_moment(static_cast<int>(L));
    r.ball_vol = ball_volume(static_cast<int>(L));
    r.phi = phi_moment(K - 1, static_cast<int>(L));
    r.psi_hat_v = psi_hat(K, static_cast<int>(L));
    if (K == 3) r.psi_ext = psi_reference_k3(L);
    out.push_back(r);
  }
  return out;
}

}  // namespace mdlvq
