#include "mdlvq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace mdlvq {

MatchResult min_cost_matching(const std::vector<std::vector<i64>>& cost) {
  const int n = static_cast<int>(cost.size());
  const int m = static_cast<int>(cost.front().size());
  if (m < n) throw std::invalid_argument("matching needs at least as many columns as rows");
  const i64 INF = INT64_MAX / 4;

  std::vector<i64> u(static_cast<size_t>(n) + 1, 0), v(static_cast<size_t>(m) + 1, 0);
  std::vector<int> p(static_cast<size_t>(m) + 1, 0), way(static_cast<size_t>(m) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<i64> minv(static_cast<size_t>(m) + 1, INF);
    std::vector<char> used(static_cast<size_t>(m) + 1, 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      int i0 = p[static_cast<size_t>(j0)], j1 = -1;
      i64 delta = INF;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        i64 cur = cost[static_cast<size_t>(i0) - 1][static_cast<size_t>(j) - 1] -
                  u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<size_t>(j0)];
      p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0);
  }

  MatchResult r;
  r.match_left.assign(static_cast<size_t>(n), -1);
  for (int j = 1; j <= m; ++j)
    if (p[static_cast<size_t>(j)] > 0) r.match_left[static_cast<size_t>(p[static_cast<size_t>(j)]) - 1] = j - 1;
  r.total = 0;
  for (int i = 0; i < n; ++i) r.total += cost[static_cast<size_t>(i)][static_cast<size_t>(r.match_left[static_cast<size_t>(i)])];
  r.left_potential.assign(u.begin() + 1, u.end());
  return r;
}

namespace {

// coords of a sublattice point wrt G_s; exact (duplicated from assignment.cpp
// on purpose: the matcher is an independent verification path)
IVec z_wrt_sub(const SimilarSublattice& s, const IVec& parent) {
  IMat adj = iadjugate(s.U);
  i64 det = idet(s.U);
  IVec w = parent * adj;
  IVec z(parent.dim());
  for (int i = 0; i < parent.dim(); ++i) {
    if (w[i] % det != 0) throw std::logic_error("not a sublattice point");
    z[i] = w[i] / det;
  }
  return z;
}

struct SecondTerm {
  i64 q2;     // min over translates
  IVec shift;  // argmin z: the tuple is translated by K z in u-coordinates
};

SecondTerm nearest_class_translate(const Lattice& lat, const SimilarSublattice& s, int K,
                                   const IVec& central, const IVec& rep_u) {
  IMat KU(lat.dim);
  for (int i = 0; i < lat.dim; ++i)
    for (int j = 0; j < lat.dim; ++j) KU.at(i, j) = K * s.U.at(i, j);
  IVec off = static_cast<i64>(K) * central - rep_u * s.U;
  // seed at the rounded coefficients
  DMat KUinv = dinverse(to_dmat(KU));
  DVec w = to_dvec(off) * KUinv;
  IVec seed(lat.dim);
  for (int i = 0; i < lat.dim; ++i) seed[i] = static_cast<i64>(std::llround(w[i]));
  i64 bound = lat.q2(seed * KU - off);
  auto cands = enum_ball(lat, KU, off, bound);
  SecondTerm st;
  st.q2 = cands.front().q2;
  st.shift = cands.front().u;
  return st;
}

}  // namespace

OracleResult bruteforce_assign(const SimilarSublattice& s, int K, const Frac& p) {
  const Lattice& lat = s.parent;
  if (s.index_n > 240)
    throw std::domain_error("oracle matching is desk-scale only (index too large)");
  ZetaWeights zw = zetas_exact(p, K);
  const Frac zeta = zw.zeta;
  const i64 k2 = static_cast<i64>(K) * K;

  auto reps = coset_representatives(s, K);
  struct Left {
    IVec central;
    int home_class;
  };
  std::vector<Left> lefts;
  i64 max_cell = 0;
  for (size_t c = 0; c < reps.size(); ++c) {
    FractionCell cell = fraction_cell(s, reps[c]);
    max_cell = std::max<i64>(max_cell, static_cast<i64>(cell.members.size()));
    for (const IVec& m : cell.members) lefts.push_back({m, static_cast<int>(c)});
  }
  const int n = static_cast<int>(lefts.size());

  // per-(left, class) translate cache
  std::vector<std::vector<SecondTerm>> sec(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (size_t c = 0; c < reps.size(); ++c)
      sec[static_cast<size_t>(i)].push_back(
          nearest_class_translate(lat, s, K, lefts[static_cast<size_t>(i)].central, reps[c].u));
  }

  std::vector<SiteTuples> pools;
  for (const auto& r : reps) pools.emplace_back(&s, K, r.u);

  OracleResult out;
  i64 M = max_cell + 4;
  const i64 cap = 8 * s.index_n + 8;
  while (true) {
    for (auto& pool : pools) pool.ensure(M + 1);
    const int classes = static_cast<int>(reps.size());
    const int m_cols = classes * static_cast<int>(M);
    std::vector<std::vector<i64>> cost(static_cast<size_t>(n),
                                       std::vector<i64>(static_cast<size_t>(m_cols), 0));
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < classes; ++c)
        for (i64 r = 1; r <= M; ++r) {
          i64 first = pools[static_cast<size_t>(c)].cost(r);
          i64 s2 = sec[static_cast<size_t>(i)][static_cast<size_t>(c)].q2;
          cost[static_cast<size_t>(i)][static_cast<size_t>(c * M + r - 1)] =
              first * zeta.den + K * zeta.num * s2;
        }
    MatchResult mr = min_cost_matching(cost);
    i64 max_u = 0;
    for (i64 ui : mr.left_potential) max_u = std::max(max_u, ui);
    i64 min_excluded = INT64_MAX;
    for (int c = 0; c < classes; ++c)
      min_excluded = std::min(min_excluded, pools[static_cast<size_t>(c)].cost(M + 1) * zeta.den);
    bool certified = min_excluded >= max_u;

    if (certified || M >= cap) {
      out.certified = certified;
      out.pool_per_class = M;
      out.max_left_potential = max_u;
      if (!certified)
        out.note = "candidate growth cap reached before the dual certificate held";

      IndexAssignment asg;
      asg.lat = lat;
      asg.sub = s;
      asg.K = K;
      asg.reps = reps;
      for (int i = 0; i < n; ++i) {
        int col = mr.match_left[static_cast<size_t>(i)];
        int c = col / static_cast<int>(M);
        i64 rank = col % M + 1;
        const SecondTerm& st = sec[static_cast<size_t>(i)][static_cast<size_t>(c)];
        Label l;
        l.central = lefts[static_cast<size_t>(i)].central;
        l.site_u = reps[static_cast<size_t>(c)].u + static_cast<i64>(K) * st.shift;
        l.site_micro = l.site_u * s.U;
        const SiteTuples::Rel& rel = pools[static_cast<size_t>(c)].at(rank);
        l.tuple.cost_q2 = rel.cost_q2;
        for (const IVec& rm : rel.micro_rel) {
          IVec micro = rm + l.site_micro;
          IVec parent(micro.dim());
          for (int j = 0; j < micro.dim(); ++j) {
            if (micro[j] % K != 0) throw std::logic_error("tuple point off the sublattice");
            parent[j] = micro[j] / K;
          }
          l.tuple.points.push_back(parent);
          l.tuple.zs.push_back(z_wrt_sub(s, parent));
        }
        asg.labels.push_back(std::move(l));
      }
      asg.rebuild_lookup();
      out.assignment = std::move(asg);
      out.sums = out.assignment.side_sums();
      out.ds_weighted = out.sums.term1_sum + zeta * out.sums.term2_sum;

      // the matching total and the assembled sums must agree exactly
      Frac total_frac = Frac(mr.total, 2 * k2 * K * zeta.den);
      if (!(total_frac == out.ds_weighted))
        throw std::logic_error("matcher total disagrees with assembled assignment");
      return out;
    }
    M *= 2;
  }
}

namespace {

struct TrialRng {
  std::uint64_t s;
  explicit TrialRng(std::uint64_t seed) : s(seed) {}
  std::uint64_t next() {
    s += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double unif() { return (next() >> 11) * 0x1.0p-53; }
};

struct Acc {
  double sum = 0, sumsq = 0;
  i64 count = 0;
  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++count;
  }
  double mean() const { return count ? sum / count : 0.0; }
  double se() const {
    if (count < 2) return 0.0;
    double m = mean();
    double var = std::max(sumsq / count - m * m, 0.0);
    return std::sqrt(var / count);
  }
};

}  // namespace

SimResult simulate(const IndexAssignment& asg, const SimConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
  const Lattice& lat = asg.lat;
  const int L = lat.dim;
  const int K = asg.K;
  const double p = cfg.p.value();
  const double side = cfg.source.box_side;

  int threads = cfg.threads;
  if (threads <= 0) {
    if (const char* env = std::getenv("MDLVQ_THREADS")) threads = std::atoi(env);
  }
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, 16);

  // a fixed shard layout keeps the accumulation order, and therefore the
  // reported estimates, independent of the worker count
  const int kShards = 64;
  struct Shard {
    Acc dc, overall;
    std::vector<Acc> per_k;
  };
  std::vector<Shard> shards(kShards);
  for (auto& sh : shards) sh.per_k.assign(static_cast<size_t>(K) + 1, Acc{});

  auto run_shard = [&](int t) {
    Shard& sh = shards[static_cast<size_t>(t)];
    i64 lo = cfg.trials * t / kShards, hi = cfg.trials * (t + 1) / kShards;
    for (i64 i = lo; i < hi; ++i) {
      TrialRng rng(cfg.seed ^ (0xd1342543de82ef95ull * static_cast<std::uint64_t>(i) + 1));
      DVec x(L);
      for (int d = 0; d < L; ++d) x[d] = (rng.unif() - 0.5) * side;
      IVec lambda = lat.nearest(x);
      DVec xl = lat.cartesian(lambda);
      double dc_err = (x - xl).norm2() / L;
      sh.dc.add(dc_err);

      auto tuple = asg.encode_point(lambda);
      int got = 0;
      DVec acc(L);
      for (int k = 0; k < K; ++k) {
        bool lost = rng.unif() < p;
        if (!lost) {
          acc = acc + lat.cartesian(tuple[static_cast<size_t>(k)]);
          ++got;
        }
      }
      double err;
      if (got == K) {
        err = dc_err;
      } else if (got == 0) {
        err = x.norm2() / L;
      } else {
        DVec xhat = (1.0 / got) * acc;
        err = (x - xhat).norm2() / L;
      }
      sh.per_k[static_cast<size_t>(got)].add(err);
      sh.overall.add(err);
    }
  };

  if (threads == 1) {
    for (int t = 0; t < kShards; ++t) run_shard(t);
  } else {
    std::atomic<int> next_shard{0};
    auto worker = [&]() {
      while (true) {
        int t = next_shard.fetch_add(1);
        if (t >= kShards) break;
        run_shard(t);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // merge
  Acc dc, overall;
  std::vector<Acc> per_k(static_cast<size_t>(K) + 1);
  for (const auto& sh : shards) {
    dc.sum += sh.dc.sum;
    dc.sumsq += sh.dc.sumsq;
    dc.count += sh.dc.count;
    overall.sum += sh.overall.sum;
    overall.sumsq += sh.overall.sumsq;
    overall.count += sh.overall.count;
    for (size_t k = 0; k < per_k.size(); ++k) {
      per_k[k].sum += sh.per_k[k].sum;
      per_k[k].sumsq += sh.per_k[k].sumsq;
      per_k[k].count += sh.per_k[k].count;
    }
  }

  SimResult r;
  r.trials = cfg.trials;
  r.seed = cfg.seed;
  r.d_c_hat = dc.mean();
  r.d_c_se = dc.se();
  r.D_hat = overall.mean();
  r.D_se = overall.se();
  for (size_t k = 0; k < per_k.size(); ++k) {
    r.d_k_hat.push_back(per_k[k].mean());
    r.d_k_se.push_back(per_k[k].se());
    r.d_k_count.push_back(per_k[k].count);
  }
  return r;
}

CompareReport compare(const IndexAssignment& a, const IndexAssignment& b, const Frac& p,
                      const SourceModel& src) {
  CompareReport r;
  r.same_design = a.K == b.K && a.sub.U == b.sub.U && a.lat.family == b.lat.family &&
                  a.lat.dim == b.lat.dim;
  if (!r.same_design) throw std::invalid_argument("assignments use different design parameters");
  ZetaWeights z = zetas_exact(p, a.K);
  SideSums sa = a.side_sums(), sb = b.side_sums();
  r.ds_a = sa.term1_sum + z.zeta * sa.term2_sum;
  r.ds_b = sb.term1_sum + z.zeta * sb.term2_sum;
  r.ds_diff = r.ds_a - r.ds_b;
  r.ds_a_per_dim = a.ds_per_dim(z.zeta);
  r.ds_b_per_dim = b.ds_per_dim(z.zeta);
  r.D_a = enumerate_ds(a, p, src).D;
  r.D_b = enumerate_ds(b, p, src).D;

  SiteGraph ga = build_site_graph(a), gb = build_site_graph(b);
  r.site_count_a = ga.counts;
  r.site_count_b = gb.counts;
  r.labels_differing = 0;
  for (const Label& la : a.labels) {
    bool found = false;
    for (const Label& lb : b.labels)
      if (la.central == lb.central) {
        found = true;
        if (!(la.tuple.points == lb.tuple.points)) r.labels_differing++;
        break;
      }
    if (!found) r.labels_differing++;
  }
  return r;
}

}  // namespace mdlvq
