#include "mdlvq/assignment.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <map>

namespace mdlvq {

namespace {

// coords of a sublattice point wrt G_s; exact
IVec z_of_parent(const SimilarSublattice& s, const IVec& parent) {
  IMat adj = iadjugate(s.U);
  i64 det = idet(s.U);
  IVec w = parent * adj;
  IVec z(parent.dim());
  for (int i = 0; i < parent.dim(); ++i) {
    if (w[i] % det != 0) throw std::logic_error("point is not in the sublattice");
    z[i] = w[i] / det;
  }
  return z;
}

bool rel_lex_less(const std::vector<IVec>& a, const std::vector<IVec>& b) {
  for (size_t k = 0; k < a.size(); ++k) {
    if (a[k] == b[k]) continue;
    return a[k] < b[k];
  }
  return false;
}

}  // namespace

SiteTuples::SiteTuples(const SimilarSublattice* s, int K, IVec rep_u)
    : sub_(s), K_(K), rep_u_(std::move(rep_u)) {
  bound_ = 0;
}

void SiteTuples::grow() {
  const Lattice& lat = sub_->parent;
  const int d = lat.dim;
  if (bound_ == 0) {
    // start near the scale of the first sublattice shells around the site
    i64 nn = lat.q2(sub_->U.row(0));
    bound_ = 4 * nn + 4;
  } else {
    bound_ *= 2;
  }

  IMat KU(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) KU.at(i, j) = K_ * sub_->U.at(i, j);
  IVec off = rep_u_ * sub_->U;
  auto shell = enum_ball(lat, KU, off, bound_);  // rel = (K z - u_c) U

  std::vector<Rel> found;
  std::vector<IVec> rel(K_);
  std::vector<IVec> zfree(K_);
  std::function<void(int, i64, IVec)> rec = [&](int k, i64 partial, IVec zsum) {
    if (k == K_ - 1) {
      IVec zk = rep_u_ - zsum;
      IVec relk = zk * KU - off;
      i64 cost = partial + lat.q2(relk);
      if (cost > bound_) return;
      rel[K_ - 1] = relk;
      zfree[K_ - 1] = zk;
      Rel r;
      r.micro_rel = rel;
      r.cost_q2 = cost;
      found.push_back(std::move(r));
      return;
    }
    for (const auto& e : shell) {
      if (partial + e.q2 > bound_) break;  // shell sorted by q2
      rel[k] = e.u * KU - off;
      zfree[k] = e.u;
      rec(k + 1, partial + e.q2, zsum + e.u);
    }
  };
  rec(0, 0, IVec(d));

  std::sort(found.begin(), found.end(), [](const Rel& a, const Rel& b) {
    if (a.cost_q2 != b.cost_q2) return a.cost_q2 < b.cost_q2;
    return rel_lex_less(a.micro_rel, b.micro_rel);
  });
  tuples_ = std::move(found);
}

void SiteTuples::ensure(i64 count) {
  while (static_cast<i64>(tuples_.size()) < count) grow();
}

const SiteTuples::Rel& SiteTuples::at(i64 rank) {
  ensure(rank);
  return tuples_[static_cast<size_t>(rank - 1)];
}

static KTuple materialize(const SimilarSublattice& s, int K, const SiteTuples::Rel& rel,
                          const IVec& site_micro) {
  KTuple t;
  t.cost_q2 = rel.cost_q2;
  for (const IVec& r : rel.micro_rel) {
    IVec micro = r + site_micro;
    IVec parent(micro.dim());
    for (int i = 0; i < micro.dim(); ++i) {
      if (micro[i] % K != 0) throw std::logic_error("tuple point is not a sublattice point");
      parent[i] = micro[i] / K;
    }
    t.points.push_back(parent);
    t.zs.push_back(z_of_parent(s, parent));
  }
  return t;
}

std::vector<KTuple> tuples_with_centroid(const SimilarSublattice& s, const FractionPoint& tau,
                                         i64 count) {
  if (count < 0) throw std::invalid_argument("count must be >= 0");
  std::vector<KTuple> out;
  if (count == 0) return out;
  IVec umod(tau.u.dim());
  IVec shift(tau.u.dim());
  for (int i = 0; i < tau.u.dim(); ++i) {
    i64 m = tau.u[i] % tau.K;
    if (m < 0) m += tau.K;
    umod[i] = m;
    shift[i] = (tau.u[i] - m) / tau.K;
  }
  SiteTuples st(&s, tau.K, umod);
  st.ensure(count);
  IVec rep_micro = umod * s.U;
  IVec shift_parent = shift * s.U;
  for (i64 r = 1; r <= count; ++r) {
    KTuple t = materialize(s, tau.K, st.at(r), rep_micro);
    for (auto& p : t.points) p = p + shift_parent;
    for (size_t k = 0; k < t.zs.size(); ++k) t.zs[k] = z_of_parent(s, t.points[k]);
    out.push_back(std::move(t));
  }
  return out;
}

int IndexAssignment::coset_of(const IVec& u) const {
  IVec id(u.dim());
  for (int i = 0; i < u.dim(); ++i) {
    i64 m = u[i] % K;
    id[i] = m < 0 ? m + K : m;
  }
  return coset_index(id, K);
}

SideSums IndexAssignment::side_sums() const {
  i64 t1 = 0, t2 = 0;
  for (const Label& l : labels) {
    t1 += l.tuple.cost_q2;
    IVec delta = static_cast<i64>(K) * l.central - l.site_micro;
    t2 += lat.q2(delta);
  }
  const i64 k2 = static_cast<i64>(K) * K;
  SideSums s;
  s.term1_sum = Frac(t1, 2 * k2 * K);
  s.term2_sum = Frac(t2, 2 * k2);
  return s;
}

double IndexAssignment::ds_per_dim(const Frac& zeta) const {
  SideSums s = side_sums();
  Frac total = s.term1_sum + zeta * s.term2_sum;
  double unit = lat.scale * lat.scale;
  return total.value() / (static_cast<double>(index_n()) * lat.dim) * unit;
}

std::vector<i64> IndexAssignment::tuple_key(const std::vector<IVec>& tuple) const {
  // canonicalize by translating the centroid into the representative coset
  IVec centroid = tuple.front();
  for (size_t i = 1; i < tuple.size(); ++i) centroid = centroid + tuple[i];
  IVec uf = z_of_parent(sub, centroid);  // centroid micro = uf * U
  IVec shift(uf.dim());
  for (int i = 0; i < uf.dim(); ++i) {
    i64 m = uf[i] % K;
    if (m < 0) m += K;
    shift[i] = (uf[i] - m) / K;
  }
  IVec sp = shift * sub.U;
  std::vector<i64> key;
  key.reserve(tuple.size() * static_cast<size_t>(lat.dim));
  for (const IVec& p : tuple)
    for (int i = 0; i < p.dim(); ++i) key.push_back(p[i] - sp[i]);
  return key;
}

void IndexAssignment::rebuild_lookup() {
  central_index_.clear();
  tuple_index_.clear();
  for (size_t i = 0; i < labels.size(); ++i) {
    central_index_[labels[i].central] = static_cast<int>(i);
    tuple_index_[tuple_key(labels[i].tuple.points)] = static_cast<int>(i);
  }
  if (tuple_index_.size() != labels.size())
    throw std::logic_error("index assignment is not injective");
  uinv_d_ = dinverse(to_dmat(sub.U));
}

FractionPoint IndexAssignment::nearest_site_fast(const IVec& central) const {
  // rounded seed plus a +/-1 neighborhood, exact comparisons; the caller
  // falls back to the rigorous search when the derived base misses
  IVec micro_c = static_cast<i64>(K) * central;
  DVec w = to_dvec(micro_c) * uinv_d_;
  IVec seed(lat.dim);
  for (int i = 0; i < lat.dim; ++i) seed[i] = static_cast<i64>(std::llround(w[i]));

  IVec best = seed;
  IVec best_micro = seed * sub.U;
  i64 best_q2 = lat.q2(best_micro - micro_c);
  IVec delta(lat.dim);
  std::function<void(int)> rec = [&](int i) {
    if (i == lat.dim) {
      if (delta.is_zero()) return;
      IVec cand = seed + delta;
      IVec cm = cand * sub.U;
      i64 q = lat.q2(cm - micro_c);
      if (q < best_q2 || (q == best_q2 && cm < best_micro)) {
        best = cand;
        best_micro = cm;
        best_q2 = q;
      }
      return;
    }
    for (i64 t = -1; t <= 1; ++t) {
      delta[i] = t;
      rec(i + 1);
    }
  };
  rec(0);
  return fraction_point(sub, K, best);
}

std::vector<IVec> IndexAssignment::encode_point(const IVec& central) const {
  if (central.dim() != lat.dim) throw std::invalid_argument("dimension mismatch");
  for (int attempt = 0; attempt < 2; ++attempt) {
    FractionPoint sigma =
        attempt == 0 ? nearest_site_fast(central) : nearest_fraction_point(sub, K, central);
    IVec shift(lat.dim);
    for (int i = 0; i < lat.dim; ++i) {
      i64 m = sigma.u[i] % K;
      if (m < 0) m += K;
      shift[i] = (sigma.u[i] - m) / K;
    }
    IVec sp = shift * sub.U;
    IVec base = central - sp;
    auto it = central_index_.find(base);
    if (it == central_index_.end()) continue;  // fast seed missed the cell
    std::vector<IVec> out = labels[static_cast<size_t>(it->second)].tuple.points;
    for (auto& p : out) p = p + sp;
    return out;
  }
  throw std::logic_error("fundamental label missing");
}

std::vector<IVec> IndexAssignment::encode(const DVec& x) const {
  return encode_point(lat.nearest(x));
}

std::optional<IVec> IndexAssignment::decode_all(const std::vector<IVec>& tuple) const {
  if (static_cast<int>(tuple.size()) != K) return std::nullopt;
  auto it = tuple_index_.find(tuple_key(tuple));
  if (it == tuple_index_.end()) return std::nullopt;
  // equal keys mean the query is the stored tuple translated by one
  // sublattice vector, shared across components
  const Label& l = labels[static_cast<size_t>(it->second)];
  IVec delta = tuple.front() - l.tuple.points.front();
  for (size_t k = 1; k < tuple.size(); ++k)
    if (!(tuple[k] == l.tuple.points[k] + delta)) return std::nullopt;
  return l.central + delta;
}

DVec IndexAssignment::decode(const std::vector<std::optional<IVec>>& received) const {
  if (static_cast<int>(received.size()) != K)
    throw std::invalid_argument("expected one slot per description");
  std::vector<IVec> present;
  for (const auto& r : received)
    if (r) {
      if (r->dim() != lat.dim) throw std::invalid_argument("dimension mismatch");
      present.push_back(*r);
    }
  if (present.empty()) return DVec(lat.dim);
  if (static_cast<int>(present.size()) == K) {
    std::vector<IVec> tuple;
    for (const auto& r : received) tuple.push_back(*r);
    if (auto central = decode_all(tuple)) return lat.cartesian(*central);
  }
  DVec acc(lat.dim);
  for (const IVec& p : present) acc = acc + lat.cartesian(p);
  return (1.0 / static_cast<double>(present.size())) * acc;
}

IndexAssignment greedy_assign(const SimilarSublattice& s, int K) {
  if (K < 2) throw std::invalid_argument("K must be >= 2");
  IndexAssignment asg;
  asg.lat = s.parent;
  asg.sub = s;
  asg.K = K;
  asg.reps = coset_representatives(s, K);
  for (const FractionPoint& rep : asg.reps) {
    FractionCell cell = fraction_cell(s, rep);
    SiteTuples st(&s, K, rep.u);
    st.ensure(static_cast<i64>(cell.members.size()));
    for (size_t i = 0; i < cell.members.size(); ++i) {
      Label l;
      l.central = cell.members[i];
      l.site_u = rep.u;
      l.site_micro = rep.micro;
      l.tuple = materialize(s, K, st.at(static_cast<i64>(i) + 1), rep.micro);
      asg.labels.push_back(std::move(l));
    }
  }
  if (static_cast<i64>(asg.labels.size()) != s.index_n)
    throw std::logic_error("fundamental region does not hold N points");
  asg.rebuild_lookup();
  return asg;
}

bool SiteGraph::neighbors(const FractionPoint& a, const FractionPoint& b) const {
  IVec d = b.u - a.u;
  for (const IVec& z : directions)
    if (z == d) return true;
  return false;
}

SiteGraph build_site_graph(const IndexAssignment& asg) {
  SiteGraph g;
  g.sites = asg.reps;
  g.counts.assign(g.sites.size(), 0);
  for (const Label& l : asg.labels) g.counts[static_cast<size_t>(asg.coset_of(l.site_u))]++;
  g.directions = relevant_vectors(asg.lat, asg.sub.U);
  return g;
}

namespace {

struct AdjustState {
  const IndexAssignment* base;
  std::vector<IVec> site_u;  // per label
  std::vector<i64> counts;   // per coset class
  std::vector<SiteTuples> tuples;

  int classes() const { return static_cast<int>(counts.size()); }

  IVec offset(size_t label) const {
    const Label& l = base->labels[label];
    IVec site_micro = site_u[label] * base->sub.U;
    return static_cast<i64>(base->K) * l.central - site_micro;
  }

  Frac total(const Frac& zeta) {
    const int K = base->K;
    const i64 k2 = static_cast<i64>(K) * K;
    i64 t1 = 0, t2 = 0;
    for (int c = 0; c < classes(); ++c)
      for (i64 i = 1; i <= counts[static_cast<size_t>(c)]; ++i)
        t1 += tuples[static_cast<size_t>(c)].cost(i);
    for (size_t i = 0; i < site_u.size(); ++i) t2 += base->lat.q2(offset(i));
    return Frac(t1, 2 * k2 * K) + zeta * Frac(t2, 2 * k2);
  }
};

struct Move {
  bool found = false;
  Frac value;
  double closed_form = 0;
  bool consistent = true;
  size_t label = 0;
  int class_a = 0, class_b = 0;
  IVec dir_z;
};

Move scan_moves(AdjustState& st, const Frac& zeta, const std::vector<IVec>& directions,
                double consistency_tol) {
  const IndexAssignment& asg = *st.base;
  const Lattice& lat = asg.lat;
  const int K = asg.K;
  const i64 k2 = static_cast<i64>(K) * K;
  Move best;

  for (int ca = 0; ca < st.classes(); ++ca) {
    if (st.counts[static_cast<size_t>(ca)] == 0) continue;
    for (const IVec& z : directions) {
      IVec nb_u = asg.reps[static_cast<size_t>(ca)].u + z;
      int cb = asg.coset_of(nb_u);
      if (cb == ca) continue;
      IVec d_micro = z * asg.sub.U;

      // max projection point of class ca toward the direction
      bool have = false;
      size_t arg = 0;
      i64 best_ip = 0;
      IVec best_off;
      for (size_t i = 0; i < st.site_u.size(); ++i) {
        if (asg.coset_of(st.site_u[i]) != ca) continue;
        IVec off = st.offset(i);
        i64 ip = lat.ip2(off, d_micro);
        if (!have || ip > best_ip || (ip == best_ip && off < best_off)) {
          have = true;
          arg = i;
          best_ip = ip;
          best_off = off;
        }
      }
      if (!have) continue;

      i64 m = st.counts[static_cast<size_t>(ca)];
      i64 n = st.counts[static_cast<size_t>(cb)];
      i64 fa = st.tuples[static_cast<size_t>(ca)].cost(m);
      i64 fb = st.tuples[static_cast<size_t>(cb)].cost(n + 1);
      i64 d2 = lat.q2(best_off - d_micro) - lat.q2(best_off);
      Frac value = Frac(fb - fa, 2 * k2 * K) + zeta * Frac(d2, 2 * k2);

      // projection form of the second-term change, evaluated in floating point
      DVec dd = (1.0 / lat.scale) * lat.cartesian_frac(d_micro, K);
      DVec od = (1.0 / lat.scale) * lat.cartesian_frac(best_off, K);
      double dn = std::sqrt(dd.norm2());
      double J = 0;
      for (int i = 0; i < lat.dim; ++i) J += od[i] * dd[i];
      J /= dn;
      double closed = zeta.value() * ((J - dn) * (J - dn) - J * J) +
                      static_cast<double>(fb - fa) / (2.0 * k2 * K);
      bool consistent =
          std::fabs(value.value() - closed) <= consistency_tol * std::max(1.0, std::fabs(value.value()));

      if (!best.found || value < best.value) {
        best.found = true;
        best.value = value;
        best.closed_form = closed;
        best.consistent = consistent;
        best.label = arg;
        best.class_a = ca;
        best.class_b = cb;
        best.dir_z = z;
      }
    }
  }
  return best;
}

}  // namespace

DeltaResult delta(const IndexAssignment& asg, const FractionPoint& a, const FractionPoint& b,
                  const Frac& zeta, double consistency_tol) {
  SiteGraph g = build_site_graph(asg);
  if (!g.neighbors(a, b)) throw std::invalid_argument("sites are not neighbors");

  AdjustState st;
  st.base = &asg;
  for (const Label& l : asg.labels) st.site_u.push_back(l.site_u);
  st.counts.assign(asg.reps.size(), 0);
  for (const Label& l : asg.labels) st.counts[static_cast<size_t>(asg.coset_of(l.site_u))]++;
  for (const FractionPoint& r : asg.reps) st.tuples.emplace_back(&asg.sub, asg.K, r.u);

  const Lattice& lat = asg.lat;
  const int K = asg.K;
  const i64 k2 = static_cast<i64>(K) * K;
  int ca = asg.coset_of(a.u);
  int cb = asg.coset_of(b.u);
  if (st.counts[static_cast<size_t>(ca)] == 0) throw std::domain_error("site attracts no points");
  IVec d_micro = b.micro - a.micro;

  bool have = false;
  i64 best_ip = 0;
  IVec best_off;
  for (size_t i = 0; i < st.site_u.size(); ++i) {
    if (asg.coset_of(st.site_u[i]) != ca) continue;
    IVec off = st.offset(i);
    i64 ip = lat.ip2(off, d_micro);
    if (!have || ip > best_ip || (ip == best_ip && off < best_off)) {
      have = true;
      best_ip = ip;
      best_off = off;
    }
  }

  i64 m = st.counts[static_cast<size_t>(ca)];
  i64 n = st.counts[static_cast<size_t>(cb)];
  i64 fa = st.tuples[static_cast<size_t>(ca)].cost(m);
  i64 fb = st.tuples[static_cast<size_t>(cb)].cost(n + 1);
  i64 d2 = lat.q2(best_off - d_micro) - lat.q2(best_off);

  DeltaResult r;
  r.value = Frac(fb - fa, 2 * k2 * K) + zeta * Frac(d2, 2 * k2);
  DVec dd = (1.0 / lat.scale) * lat.cartesian_frac(d_micro, K);
  DVec od = (1.0 / lat.scale) * lat.cartesian_frac(best_off, K);
  double dn = std::sqrt(dd.norm2());
  double J = 0;
  for (int i = 0; i < lat.dim; ++i) J += od[i] * dd[i];
  J /= dn;
  r.closed_form = zeta.value() * ((J - dn) * (J - dn) - J * J) +
                  static_cast<double>(fb - fa) / (2.0 * k2 * K);
  r.consistent = std::fabs(r.value.value() - r.closed_form) <=
                 consistency_tol * std::max(1.0, std::fabs(r.value.value()));
  r.moved_offset = best_off;
  r.m_before = m;
  r.n_before = n;
  return r;
}

IndexAssignment local_adjust(const IndexAssignment& asg, const Frac& zeta, AdjustStats* stats,
                             double consistency_tol) {
  AdjustState st;
  st.base = &asg;
  for (const Label& l : asg.labels) st.site_u.push_back(l.site_u);
  st.counts.assign(asg.reps.size(), 0);
  for (const Label& l : asg.labels) st.counts[static_cast<size_t>(asg.coset_of(l.site_u))]++;
  for (const FractionPoint& r : asg.reps) st.tuples.emplace_back(&asg.sub, asg.K, r.u);

  auto directions = relevant_vectors(asg.lat, asg.sub.U);
  Frac current = st.total(zeta);
  i64 guard = 1000 * asg.sub.index_n + 1000;
  i64 steps = 0;

  while (true) {
    Move mv = scan_moves(st, zeta, directions, consistency_tol);
    if (stats && mv.found && !mv.consistent) stats->closed_form_defect = true;
    if (!mv.found || !(mv.value < Frac(0))) break;
    // apply: shift the chosen label's site by the direction
    IVec old_site = st.site_u[mv.label];
    st.site_u[mv.label] = old_site + mv.dir_z;
    st.counts[static_cast<size_t>(mv.class_a)]--;
    st.counts[static_cast<size_t>(mv.class_b)]++;
    Frac next = st.total(zeta);
    if (!(next < current)) throw std::logic_error("adjustment failed to decrease d_s");
    if (stats) {
      stats->steps++;
      stats->delta_trace.push_back(mv.value);
      stats->moves.emplace_back(old_site * asg.sub.U, st.site_u[mv.label] * asg.sub.U);
    }
    current = next;
    if (++steps > guard) throw std::logic_error("adjustment did not terminate");
  }

  // canonical re-pairing: per class, i-th nearest offset gets the i-th tuple
  IndexAssignment out = asg;
  struct Entry {
    i64 q2;
    IVec off;
    size_t label;
  };
  for (int c = 0; c < st.classes(); ++c) {
    std::vector<Entry> entries;
    for (size_t i = 0; i < st.site_u.size(); ++i) {
      if (asg.coset_of(st.site_u[i]) != c) continue;
      IVec off = st.offset(i);
      entries.push_back({asg.lat.q2(off), off, i});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.q2 != b.q2) return a.q2 < b.q2;
      return a.off < b.off;
    });
    for (size_t r = 0; r < entries.size(); ++r) {
      size_t i = entries[r].label;
      IVec site_micro = st.site_u[i] * asg.sub.U;
      out.labels[i].site_u = st.site_u[i];
      out.labels[i].site_micro = site_micro;
      out.labels[i].tuple = materialize(
          asg.sub, asg.K, st.tuples[static_cast<size_t>(c)].at(static_cast<i64>(r) + 1), site_micro);
    }
  }
  out.rebuild_lookup();
  return out;
}

}  // namespace mdlvq
