#include "mdlvq/sublattice.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <set>

namespace mdlvq {

SimilarSublattice make_similar(const Lattice& parent, const IMat& U, std::string construction,
                               std::vector<i64> params) {
  if (U.n != parent.dim) throw std::invalid_argument("sublattice basis dimension mismatch");
  i64 det = idet(U);
  if (det <= 0) throw std::invalid_argument("sublattice basis must have positive determinant");
  double beta = std::pow(static_cast<double>(det), 1.0 / parent.dim);
  // A = Gc^-1 U Gc / beta must be orthogonal with det +1
  DMat A = dinverse(parent.gen_canon) * (to_dmat(U) * parent.gen_canon);
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) A.at(i, j) /= beta;
  DMat AAt = A * A.transposed();
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) {
      double want = i == j ? 1.0 : 0.0;
      if (std::fabs(AAt.at(i, j) - want) > 1e-9)
        throw std::invalid_argument("basis is not geometrically similar to the parent lattice");
    }
  if (std::fabs(ddet(A) - 1.0) > 1e-9)
    throw std::invalid_argument("similarity requires a rotation (det +1)");

  SimilarSublattice s;
  s.parent = parent;
  s.U = U;
  s.index_n = det;
  s.beta = beta;
  s.rotation = A;
  s.construction = std::move(construction);
  s.params = std::move(params);
  return s;
}

SimilarSublattice construct_a2(i64 a, i64 b, double scale) {
  if (a == 0 && b == 0) throw std::invalid_argument("(a, b) must be nonzero");
  IMat U(2);
  U.at(0, 0) = a;
  U.at(0, 1) = b;
  U.at(1, 0) = -b;
  U.at(1, 1) = a - b;
  return make_similar(Lattice::a2(scale), U, "a2", {a, b});
}

SimilarSublattice construct_z2(i64 a, i64 b, double scale) {
  if (a == 0 && b == 0) throw std::invalid_argument("(a, b) must be nonzero");
  IMat U(2);
  U.at(0, 0) = a;
  U.at(0, 1) = b;
  U.at(1, 0) = -b;
  U.at(1, 1) = a;
  return make_similar(Lattice::zn(2, scale), U, "z2", {a, b});
}

SimilarSublattice construct_scaled(const Lattice& lat, i64 m) {
  if (m < 1) throw std::invalid_argument("scaling factor must be >= 1");
  IMat U(lat.dim);
  for (int i = 0; i < lat.dim; ++i) U.at(i, i) = m;
  return make_similar(lat, U, "scaled", {m});
}

SimilarSublattice construct_quaternion_z4(i64 a, i64 b, i64 c, i64 d, bool require_s_certificate,
                                          double scale) {
  i64 m = a * a + b * b + c * c + d * d;
  if (m == 0) throw std::invalid_argument("quaternion must be nonzero");
  if (require_s_certificate) {
    int odd = (a & 1) + (b & 1) + (c & 1) + (d & 1);
    if (odd != 1)
      throw std::invalid_argument(
          "S-similarity certificate requires exactly one odd component (m = 1 mod 4)");
  }
  IMat U(4);
  const i64 rows[4][4] = {
      {a, b, c, d}, {-b, a, d, -c}, {-c, -d, a, b}, {-d, c, -b, a}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) U.at(i, j) = rows[i][j];
  return make_similar(Lattice::zn(4, scale), U, "quaternion", {a, b, c, d});
}

// Central points whose nearest sublattice point could be the origin, with the
// full list of nearest sublattice points for each (exact).
namespace {

struct NearScan {
  IVec central;
  i64 dist_q2;
  std::vector<IVec> nearest_subl;  // coefficient vectors z
};

std::vector<NearScan> scan_origin_cell(const SimilarSublattice& s) {
  const Lattice& lat = s.parent;
  double rcov = covering_radius_bound(lat, s.U);
  i64 bound = static_cast<i64>(std::ceil(2.0 * rcov * rcov * (1.0 + 1e-9))) + 2;
  auto cands = enum_ball(lat, IMat::identity(lat.dim), IVec(lat.dim), bound);

  std::vector<NearScan> out;
  for (const auto& e : cands) {
    // nearest sublattice points to e.u; its distance to 0 bounds the search
    auto subl = enum_ball(lat, s.U, e.u, e.q2);
    i64 best = subl.front().q2;
    NearScan ns;
    ns.central = e.u;
    ns.dist_q2 = best;
    for (const auto& t : subl) {
      if (t.q2 != best) break;
      ns.nearest_subl.push_back(t.u);
    }
    out.push_back(std::move(ns));
  }
  return out;
}

}  // namespace

CleanReport is_clean(const SimilarSublattice& s) {
  CleanReport r;
  r.clean = true;
  auto scan = scan_origin_cell(s);
  for (const auto& ns : scan) {
    bool zero_nearest = false;
    for (const auto& z : ns.nearest_subl)
      if (z.is_zero()) zero_nearest = true;
    if (!zero_nearest) continue;
    if (ns.nearest_subl.size() > 1) {
      if (r.clean) {
        r.clean = false;
        r.witness = ns.central;
      }
      // boundary rule: the point belongs to the cell with lexicographically
      // smallest center
      IVec best = ns.nearest_subl.front() * s.U;
      for (const auto& z : ns.nearest_subl) {
        IVec m = z * s.U;
        if (m < best) best = m;
      }
      if (best.is_zero()) ++r.cell_points;
    } else {
      ++r.cell_points;
    }
  }
  return r;
}

CentricReport is_centric(const SimilarSublattice& s) {
  CentricReport r;
  auto scan = scan_origin_cell(s);
  // members of V_s(0) under the boundary rule
  std::vector<std::pair<i64, IVec>> members;
  for (const auto& ns : scan) {
    bool zero_nearest = false;
    for (const auto& z : ns.nearest_subl)
      if (z.is_zero()) zero_nearest = true;
    if (!zero_nearest) continue;
    IVec best = ns.nearest_subl.front() * s.U;
    for (const auto& z : ns.nearest_subl) {
      IVec m = z * s.U;
      if (m < best) best = m;
    }
    if (best.is_zero()) members.emplace_back(ns.dist_q2, ns.central);
  }
  i64 dmax = 0;
  for (const auto& [q, u] : members) dmax = std::max(dmax, q);

  // any central point strictly closer than dmax that is not a member breaks
  // centricity
  std::set<IVec> member_set;
  for (const auto& [q, u] : members) member_set.insert(u);
  auto near = enum_ball(s.parent, IMat::identity(s.parent.dim), IVec(s.parent.dim), dmax);
  r.centric = true;
  for (const auto& e : near) {
    if (e.q2 >= dmax) continue;
    if (!member_set.count(e.u)) {
      r.centric = false;
      r.witness = e.u;
      break;
    }
  }
  return r;
}

SSimilarReport is_s_similar(const SimilarSublattice& s) {
  SSimilarReport r;
  const int d = s.parent.dim;

  auto mod2_is_identity = [&](const IMat& M) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        i64 want = i == j ? 1 : 0;
        if (((M.at(i, j) - want) & 1) != 0) return false;
      }
    return true;
  };

  if (s.parent.family == Family::Z) {
    // U P = I (mod 2) with P a signed permutation reduces to: U mod 2 is a
    // permutation matrix. Signs then fix det(P) = +1 without changing parity.
    std::vector<int> col(d, -1);
    bool ok = true;
    for (int i = 0; i < d && ok; ++i) {
      int ones = 0, where = -1;
      for (int j = 0; j < d; ++j)
        if (s.U.at(i, j) & 1) {
          ++ones;
          where = j;
        }
      if (ones != 1 || col[where] != -1)
        ok = false;
      else
        col[where] = i;
    }
    r.route = "z-parity";
    if (ok) {
      IMat P(d);
      for (int j = 0; j < d; ++j) P.at(j, col[j]) = 1;
      // a column sign flip fixes det(P) = +1 and leaves parity unchanged
      if (idet(P) == -1)
        for (int i = 0; i < d; ++i) P.at(i, 0) = -P.at(i, 0);
      if (mod2_is_identity(s.U * P) && idet(P) == 1) {
        r.s_similar = true;
        r.rotation_coeff = P;
      }
    }
    return r;
  }

  r.route = "automorphism-scan";
  for (const IMat& P : rotation_automorphisms(s.parent)) {
    if (mod2_is_identity(s.U * P)) {
      r.s_similar = true;
      r.rotation_coeff = P;
      return r;
    }
  }
  return r;
}

bool verify_s_certificate(const SimilarSublattice& s, const IMat& P) {
  const int d = s.parent.dim;
  IMat T = P * s.U;
  IMat adj = iadjugate(s.U);
  i64 det = idet(s.U);
  // doubled coordinates: y2 = (2 e_i - ut U) T + ut U must lie in 2 Z^L U
  IVec ut(d);
  std::function<bool(int)> rec = [&](int i) -> bool {
    if (i == d) {
      for (int b = 0; b < d; ++b) {
        IVec e2(d);
        e2[b] = 2;
        IVec y2 = (e2 - ut * s.U) * T + ut * s.U;
        IVec w = y2 * adj;  // = 2 z det if y2 = 2 z U
        for (int j = 0; j < d; ++j)
          if (w[j] % (2 * det) != 0) return false;
      }
      return true;
    }
    for (i64 t = 0; t <= 1; ++t) {
      ut[i] = t;
      if (!rec(i + 1)) return false;
    }
    return true;
  };
  return rec(0);
}

SublatticePredicates predicates(const SimilarSublattice& s) {
  return {is_clean(s), is_centric(s), is_s_similar(s)};
}

std::vector<BallEntry> origin_cell_members(const SimilarSublattice& s) {
  std::vector<BallEntry> out;
  for (const auto& ns : scan_origin_cell(s)) {
    bool zero_nearest = false;
    for (const auto& z : ns.nearest_subl)
      if (z.is_zero()) zero_nearest = true;
    if (!zero_nearest) continue;
    IVec best = ns.nearest_subl.front() * s.U;
    for (const auto& z : ns.nearest_subl) {
      IVec m = z * s.U;
      if (m < best) best = m;
    }
    if (best.is_zero()) out.push_back({ns.central, ns.dist_q2});
  }
  std::sort(out.begin(), out.end(), [](const BallEntry& a, const BallEntry& b) {
    if (a.q2 != b.q2) return a.q2 < b.q2;
    return a.u < b.u;
  });
  return out;
}

std::vector<i64> admissible_indices(Family family, int dim, i64 max_n) {
  std::set<i64> out;
  i64 lim = static_cast<i64>(std::ceil(std::sqrt(static_cast<double>(max_n) * 4.0 / 3.0))) + 1;
  if (family == Family::A2) {
    for (i64 a = -lim; a <= lim; ++a)
      for (i64 b = -lim; b <= lim; ++b) {
        i64 n = a * a - a * b + b * b;
        if (n >= 1 && n <= max_n) out.insert(n);
      }
  } else if (family == Family::Z && dim == 2) {
    for (i64 a = 0; a <= lim; ++a)
      for (i64 b = 0; b <= lim; ++b) {
        i64 n = a * a + b * b;
        if (n >= 1 && n <= max_n) out.insert(n);
      }
  } else if (family == Family::Z && dim == 4) {
    // quaternion construction: N = m^2 for any m >= 1
    for (i64 m = 1; m * m <= max_n; ++m) out.insert(m * m);
  } else {
    for (i64 m = 1;; ++m) {
      i64 n = 1;
      bool over = false;
      for (int i = 0; i < dim; ++i) {
        n *= m;
        if (n > max_n) { over = true; break; }
      }
      if (over) break;
      out.insert(n);
    }
  }
  return {out.begin(), out.end()};
}

}  // namespace mdlvq
