#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdlvq/lattice.hpp"

namespace mdlvq {

// A geometrically similar sublattice: U G = beta G A with U integral and A a
// rotation. Points are handled in parent coordinates throughout.
struct SimilarSublattice {
  Lattice parent;
  IMat U;        // rows = sublattice basis in parent coordinates
  i64 index_n;   // det U = beta^L
  double beta;
  DMat rotation;
  std::string construction;  // a2 | z2 | scaled | quaternion | custom
  std::vector<i64> params;

  i64 q2s(const IVec& z) const { return parent.q2(z * U); }
};

// Validates similarity (throws std::invalid_argument when U is not similar
// with a det +1 rotation).
SimilarSublattice make_similar(const Lattice& parent, const IMat& U,
                               std::string construction = "custom", std::vector<i64> params = {});

// A2 sublattice generated by a+bw and w(a+bw); N = a^2 - a*b + b^2.
SimilarSublattice construct_a2(i64 a, i64 b, double scale = 1.0);
// Z^2 sublattice with rows (a, b), (-b, a); N = a^2 + b^2.
SimilarSublattice construct_z2(i64 a, i64 b, double scale = 1.0);
// Pure scaling G_s = m G; N = m^L.
SimilarSublattice construct_scaled(const Lattice& lat, i64 m);
// Z^4 sublattice from a Lipschitz quaternion a+bi+cj+dk; N = m^2 with
// m = a^2+b^2+c^2+d^2. When a certificate is required, exactly one of
// a,b,c,d must be odd (m = 1 mod 4).
SimilarSublattice construct_quaternion_z4(i64 a, i64 b, i64 c, i64 d,
                                          bool require_s_certificate = false, double scale = 1.0);

struct CleanReport {
  bool clean = false;
  // a central point equidistant from two nearest sublattice points
  std::optional<IVec> witness;
  i64 cell_points = 0;  // |V_s(0) and Lambda| under the boundary rule
};
CleanReport is_clean(const SimilarSublattice& s);

struct CentricReport {
  bool centric = false;
  // one of the N nearest central points that falls outside V_s(0)
  std::optional<IVec> witness;
};
CentricReport is_centric(const SimilarSublattice& s);

struct SSimilarReport {
  bool s_similar = false;
  // coefficient-space rotation P with U P = I (mod 2); the scaling +
  // rotation about every tau in Lambda_{s/2} is then beta, Gc^-1 P U Gc / beta
  std::optional<IMat> rotation_coeff;
  std::string route;
};
SSimilarReport is_s_similar(const SimilarSublattice& s);

// Re-checks a certificate: x -> (x - tau) P U + tau must map the parent basis
// into the sublattice for every coset representative tau of
// Lambda_{s/2} / Lambda_s. Exact integer arithmetic.
bool verify_s_certificate(const SimilarSublattice& s, const IMat& P);

struct SublatticePredicates {
  CleanReport clean;
  CentricReport centric;
  SSimilarReport s_similar;
};
SublatticePredicates predicates(const SimilarSublattice& s);

// Central lattice points of V_s(0) (boundary points resolved toward the
// lexicographically smallest cell center), sorted by (q2, lex). q2 is twice
// the squared distance to the origin in canonical units.
std::vector<BallEntry> origin_cell_members(const SimilarSublattice& s);

// Sublattice indices admissible for a family (similar sublattices exist).
std::vector<i64> admissible_indices(Family family, int dim, i64 max_n);

}  // namespace mdlvq
