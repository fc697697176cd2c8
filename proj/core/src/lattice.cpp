#include "mdlvq/lattice.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <numbers>

namespace mdlvq {

std::string family_name(Family f) {
  switch (f) {
    case Family::Z: return "z";
    case Family::A2: return "a2";
    case Family::Custom: return "custom";
  }
  return "?";
}

Family family_from_name(const std::string& s) {
  if (s == "z" || s == "zn" || s == "z1" || s == "z2" || s == "z3" || s == "z4") return Family::Z;
  if (s == "a2" || s == "A2" || s == "hex") return Family::A2;
  if (s == "custom") return Family::Custom;
  throw std::invalid_argument("unknown lattice family: " + s);
}

static void finish(Lattice& L) {
  L.gen = DMat(L.dim);
  for (int i = 0; i < L.dim; ++i)
    for (int j = 0; j < L.dim; ++j) L.gen.at(i, j) = L.scale * L.gen_canon.at(i, j);
  L.gen_canon_inv = dinverse(L.gen_canon);
  L.cell_volume = std::fabs(ddet(L.gen));
}

Lattice Lattice::zn(int dim, double scale) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("unsupported dimension");
  Lattice L;
  L.family = Family::Z;
  L.dim = dim;
  L.scale = scale;
  L.gen_canon = DMat::identity(dim);
  L.form2 = IMat(dim);
  for (int i = 0; i < dim; ++i) L.form2.at(i, i) = 2;
  finish(L);
  return L;
}

Lattice Lattice::a2(double scale) {
  Lattice L;
  L.family = Family::A2;
  L.dim = 2;
  L.scale = scale;
  L.gen_canon = DMat(2);
  // basis 1 and w = -1/2 + i sqrt(3)/2; |a + b w|^2 = a^2 - a b + b^2
  L.gen_canon.at(0, 0) = 1.0;
  L.gen_canon.at(0, 1) = 0.0;
  L.gen_canon.at(1, 0) = -0.5;
  L.gen_canon.at(1, 1) = std::sqrt(3.0) / 2.0;
  L.form2 = IMat(2);
  L.form2.at(0, 0) = 2;
  L.form2.at(0, 1) = -1;
  L.form2.at(1, 0) = -1;
  L.form2.at(1, 1) = 2;
  finish(L);
  return L;
}

Lattice Lattice::make(Family f, int dim, double scale) {
  switch (f) {
    case Family::Z: return zn(dim, scale);
    case Family::A2:
      if (dim != 2) throw std::invalid_argument("a2 is two-dimensional");
      return a2(scale);
    case Family::Custom: break;
  }
  throw std::invalid_argument("custom lattices need an explicit generator");
}

DVec Lattice::cartesian(const IVec& coords) const {
  DVec u = to_dvec(coords);
  return u * gen;
}

DVec Lattice::cartesian_frac(const IVec& num, i64 den) const {
  DVec u = to_dvec(num);
  DVec x = u * gen;
  return (1.0 / static_cast<double>(den)) * x;
}

DVec Lattice::coords_of(const DVec& x) const {
  DVec y = (1.0 / scale) * x;
  return y * gen_canon_inv;
}

IVec Lattice::nearest(const DVec& x) const {
  if (x.dim() != dim) throw std::invalid_argument("dimension mismatch");
  DVec u = coords_of(x);
  IVec seed(dim);
  for (int i = 0; i < dim; ++i) seed[i] = static_cast<i64>(std::llround(u[i]));

  IVec best = seed;
  double best_d2 = (x - cartesian(seed)).norm2();
  std::vector<IVec> near;
  near.push_back(seed);

  IVec delta(dim);
  // walk the +/-1 coefficient neighborhood
  std::function<void(int)> rec = [&](int i) {
    if (i == dim) {
      if (delta.is_zero()) return;
      IVec cand = seed + delta;
      double d2 = (x - cartesian(cand)).norm2();
      double tol = 1e-9 * (1.0 + best_d2);
      if (d2 < best_d2 - tol) {
        best_d2 = d2;
        near.clear();
        near.push_back(cand);
      } else if (d2 <= best_d2 + tol) {
        near.push_back(cand);
      }
      return;
    }
    for (i64 s = -1; s <= 1; ++s) {
      delta[i] = s;
      rec(i + 1);
    }
  };
  rec(0);

  double tol = 1e-9 * (1.0 + best_d2);
  best = near.front();
  double bd = (x - cartesian(best)).norm2();
  for (const IVec& c : near) {
    double d2 = (x - cartesian(c)).norm2();
    if (d2 <= bd + tol && (d2 < bd - tol || c < best)) {
      best = c;
      bd = std::min(bd, d2);
    }
  }
  return best;
}

IVec Lattice::nearest_exact(const IVec& num, i64 den) const {
  DVec u(dim);
  for (int i = 0; i < dim; ++i) u[i] = static_cast<double>(num[i]) / static_cast<double>(den);
  IVec seed(dim);
  for (int i = 0; i < dim; ++i) seed[i] = static_cast<i64>(std::llround(u[i]));
  IVec diff = den * seed - num;
  i64 bound = q2(diff);
  IMat B(dim);
  for (int i = 0; i < dim; ++i) B.at(i, i) = den;
  auto cands = enum_ball(*this, B, num, bound);
  return cands.front().u;  // sorted by (q2, lex)
}

std::vector<BallEntry> enum_ball(const Lattice& lat, const IMat& B, const IVec& off, i64 q2_bound) {
  const int d = lat.dim;
  if (q2_bound < 0) return {};
  DMat Beff = to_dmat(B) * lat.gen_canon;
  DMat Binv = dinverse(Beff);
  DVec offc = to_dvec(off) * lat.gen_canon;
  DVec center = offc * Binv;
  double r = std::sqrt(static_cast<double>(q2_bound) / 2.0) * (1.0 + 1e-12) + 1e-9;

  std::array<i64, kMaxDim> lo{}, hi{};
  for (int i = 0; i < d; ++i) {
    double colnorm = 0;
    for (int j = 0; j < d; ++j) colnorm += Binv.at(j, i) * Binv.at(j, i);
    colnorm = std::sqrt(colnorm);
    lo[i] = static_cast<i64>(std::floor(center[i] - r * colnorm)) - 1;
    hi[i] = static_cast<i64>(std::ceil(center[i] + r * colnorm)) + 1;
  }

  std::vector<BallEntry> out;
  IVec u(d);
  std::function<void(int)> rec = [&](int i) {
    if (i == d) {
      IVec v = u * B - off;
      i64 q = lat.q2(v);
      if (q <= q2_bound) out.push_back({u, q});
      return;
    }
    for (i64 t = lo[i]; t <= hi[i]; ++t) {
      u[i] = t;
      rec(i + 1);
    }
  };
  rec(0);
  std::sort(out.begin(), out.end(), [](const BallEntry& a, const BallEntry& b) {
    if (a.q2 != b.q2) return a.q2 < b.q2;
    return a.u < b.u;
  });
  return out;
}

std::vector<LatticePoint> points_in_ball(const Lattice& lat, const DVec& center, double radius) {
  if (center.dim() != lat.dim) throw std::invalid_argument("dimension mismatch");
  if (radius < 0) return {};
  const int d = lat.dim;
  DVec u0 = lat.coords_of(center);
  std::array<i64, kMaxDim> lo{}, hi{};
  DMat ginv = dinverse(lat.gen);
  for (int i = 0; i < d; ++i) {
    double colnorm = 0;
    for (int j = 0; j < d; ++j) colnorm += ginv.at(j, i) * ginv.at(j, i);
    colnorm = std::sqrt(colnorm);
    lo[i] = static_cast<i64>(std::floor(u0[i] - radius * colnorm)) - 1;
    hi[i] = static_cast<i64>(std::ceil(u0[i] + radius * colnorm)) + 1;
  }
  struct Hit {
    IVec u;
    double d2;
  };
  std::vector<Hit> hits;
  IVec u(d);
  double r2 = radius * radius;
  std::function<void(int)> rec = [&](int i) {
    if (i == d) {
      double d2 = (center - lat.cartesian(u)).norm2();
      if (d2 <= r2) hits.push_back({u, d2});
      return;
    }
    for (i64 t = lo[i]; t <= hi[i]; ++t) {
      u[i] = t;
      rec(i + 1);
    }
  };
  rec(0);
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    return a.u < b.u;
  });
  std::vector<LatticePoint> out;
  out.reserve(hits.size());
  for (const Hit& h : hits) out.push_back({h.u, lat.cartesian(h.u)});
  return out;
}

std::vector<BallEntry> points_in_ball_exact(const Lattice& lat, const IVec& center_num, i64 den,
                                            const Frac& r2) {
  IMat B(lat.dim);
  for (int i = 0; i < lat.dim; ++i) B.at(i, i) = den;
  // q2(den*u - num) <= 2 den^2 r2
  i128 num = static_cast<i128>(2) * den * den * r2.num;
  i64 bound = static_cast<i64>(num / r2.den);  // floor for num >= 0
  return enum_ball(lat, B, center_num, bound);
}

double sphere_second_moment(int dim) {
  double lg = std::lgamma(dim / 2.0 + 1.0);
  return std::exp(2.0 * lg / dim) / ((dim + 2) * std::numbers::pi);
}

double ball_volume(int dim) {
  return std::exp(0.5 * dim * std::log(std::numbers::pi) - std::lgamma(dim / 2.0 + 1.0));
}

std::vector<IVec> relevant_vectors(const Lattice& lat, const IMat& basis) {
  const int d = lat.dim;
  std::vector<IVec> out;
  // A vector v is Voronoi-relevant iff +/-v are the unique minima of its
  // coset mod 2*Lambda.
  IVec s(d);
  std::function<void(int)> rec = [&](int i) {
    if (i == d) {
      if (s.is_zero()) return;
      // minimize q2((s + 2z) basis) over z
      IMat B2(d);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) B2.at(r, c) = 2 * basis.at(r, c);
      IVec off = -(s * basis);
      i64 bound = lat.q2(s * basis);
      auto cands = enum_ball(lat, B2, off, bound);
      // entries are z with vector (s + 2z) basis
      i64 best = cands.front().q2;
      std::vector<IVec> mins;
      for (const auto& e : cands) {
        if (e.q2 != best) break;
        mins.push_back(s + 2 * e.u);
      }
      if (mins.size() == 2 && mins[0] == -mins[1]) {
        out.push_back(mins[0]);
        out.push_back(mins[1]);
      }
      return;
    }
    for (i64 t = 0; t <= 1; ++t) {
      s[i] = t;
      rec(i + 1);
    }
  };
  rec(0);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double covering_radius_bound(const Lattice& lat, const IMat& basis) {
  double sum = 0;
  for (int i = 0; i < lat.dim; ++i) {
    IVec row = basis.row(i);
    sum += std::sqrt(static_cast<double>(lat.q2(row)) / 2.0);
  }
  return 0.5 * sum;
}

// Second moment of a 2-D Voronoi cell by exact polygon integration.
static LatticeConstants polygon_constants(const Lattice& lat) {
  auto rel = relevant_vectors(lat, IMat::identity(2));
  struct Facet {
    DVec v;
    double angle;
  };
  std::vector<Facet> fs;
  for (const IVec& z : rel) {
    DVec v = to_dvec(z) * lat.gen_canon;
    fs.push_back({v, std::atan2(v[1], v[0])});
  }
  std::sort(fs.begin(), fs.end(), [](const Facet& a, const Facet& b) { return a.angle < b.angle; });
  const int m = static_cast<int>(fs.size());
  std::vector<DVec> verts;
  for (int i = 0; i < m; ++i) {
    const DVec& a = fs[i].v;
    const DVec& b = fs[(i + 1) % m].v;
    // intersect <x,a> = |a|^2/2 with <x,b> = |b|^2/2
    double det = a[0] * b[1] - a[1] * b[0];
    double ra = a.norm2() / 2.0, rb = b.norm2() / 2.0;
    DVec p(2);
    p[0] = (ra * b[1] - rb * a[1]) / det;
    p[1] = (rb * a[0] - ra * b[0]) / det;
    verts.push_back(p);
  }
  double area = 0, second = 0;
  for (int i = 0; i < m; ++i) {
    const DVec& p = verts[i];
    const DVec& q = verts[(i + 1) % m];
    double tri = 0.5 * std::fabs(p[0] * q[1] - p[1] * q[0]);
    area += tri;
    double dot = p[0] * q[0] + p[1] * q[1];
    second += tri / 6.0 * (p.norm2() + q.norm2() + dot);
  }
  LatticeConstants c;
  c.nu = lat.cell_volume;
  c.second_moment = 0.5 * second / (area * area);
  c.tolerance = 1e-12;
  c.method = "polygon";
  return c;
}

static LatticeConstants monte_carlo_constants(const Lattice& lat) {
  const int d = lat.dim;
  const int trials = 2'000'000;
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  auto next = [&]() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  auto unif = [&]() { return (next() >> 11) * 0x1.0p-53; };
  double sum = 0, sumsq = 0;
  for (int t = 0; t < trials; ++t) {
    DVec u(d);
    for (int i = 0; i < d; ++i) u[i] = unif() - 0.5;
    DVec x = u * lat.gen;  // uniform over a fundamental cell, folded below
    IVec q = lat.nearest(x);
    DVec r = x - lat.cartesian(q);
    double n2 = r.norm2();
    sum += n2;
    sumsq += n2 * n2;
  }
  double mean = sum / trials;
  double var = sumsq / trials - mean * mean;
  double se = std::sqrt(std::max(var, 0.0) / trials);
  double denom = d * std::pow(lat.cell_volume, 2.0 / d);
  LatticeConstants c;
  c.nu = lat.cell_volume;
  c.second_moment = mean / denom;
  c.tolerance = 3.0 * se / denom;
  c.method = "monte-carlo";
  return c;
}

LatticeConstants lattice_constants(const Lattice& lat) {
  LatticeConstants c;
  c.nu = lat.cell_volume;
  if (lat.family == Family::Z || lat.dim == 1) {
    c.second_moment = 1.0 / 12.0;
    c.tolerance = 0.0;
    c.method = "closed-form";
    return c;
  }
  if (lat.dim == 2) return polygon_constants(lat);
  return monte_carlo_constants(lat);
}

std::vector<IMat> rotation_automorphisms(const Lattice& lat) {
  std::vector<IMat> out;
  const int d = lat.dim;
  if (lat.family == Family::A2) {
    // multiplication by the six Eisenstein units, coords in basis (1, w)
    const i64 units[6][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}};
    for (auto& u : units) {
      i64 a = u[0], b = u[1];
      IMat P(2);
      P.at(0, 0) = a;
      P.at(0, 1) = b;
      P.at(1, 0) = -b;
      P.at(1, 1) = a - b;
      out.push_back(P);
    }
    return out;
  }
  if (lat.family == Family::Z && d <= 4) {
    // signed permutations with determinant +1
    std::array<int, kMaxDim> perm{};
    for (int i = 0; i < d; ++i) perm[i] = i;
    do {
      for (int signs = 0; signs < (1 << d); ++signs) {
        IMat P(d);
        for (int i = 0; i < d; ++i) P.at(i, perm[i]) = (signs >> i) & 1 ? -1 : 1;
        if (idet(P) == 1) out.push_back(P);
      }
    } while (std::next_permutation(perm.begin(), perm.begin() + d));
    return out;
  }
  out.push_back(IMat::identity(d));
  return out;
}

}  // namespace mdlvq
