#pragma once

#include <string>
#include <vector>

#include "mdlvq/sublattice.hpp"

namespace mdlvq {

// A point of the K-fraction lattice (1/K) Lambda_s. `u` are coordinates with
// respect to G_s (denominator K); `micro` = u U are parent coordinates scaled
// by K, which is the exact representation all geometry runs on.
struct FractionPoint {
  IVec u;
  IVec micro;
  int K = 2;

  IVec coset_id() const {
    IVec r(u.dim());
    for (int i = 0; i < u.dim(); ++i) {
      i64 m = u[i] % K;
      r[i] = m < 0 ? m + K : m;
    }
    return r;
  }
};

FractionPoint fraction_point(const SimilarSublattice& s, int K, const IVec& u);

// The K^L coset representatives with u in {0..K-1}^L, in mixed-radix order.
std::vector<FractionPoint> coset_representatives(const SimilarSublattice& s, int K);

// Mixed-radix index of a coset id vector.
int coset_index(const IVec& id, int K);

struct FractionCell {
  FractionPoint tau;
  std::vector<IVec> members;  // central points (parent coords), sorted by
                              // (distance to tau, lex)
  bool boundary_tie = false;  // some member needed the boundary rule
};

// Central lattice points whose nearest K-fraction point is tau; exact, with
// boundary points assigned to the lexicographically smallest center.
FractionCell fraction_cell(const SimilarSublattice& s, const FractionPoint& tau);

// Nearest K-fraction point to a central lattice point (exact) or to a real
// vector in scaled cartesian units.
FractionPoint nearest_fraction_point(const SimilarSublattice& s, int K, const IVec& central);
FractionPoint nearest_fraction_point(const SimilarSublattice& s, int K, const DVec& x);

struct PropertyCheck {
  std::string name;
  bool applicable = true;
  bool passed = false;
  std::string detail;
};

// Finite-window checks of the structural properties of Lambda_{s/K}:
// centroid closure/onto, coset count, no central point on a cell boundary
// (when the sublattice is clean), and point symmetry about Lambda_{s/2}.
std::vector<PropertyCheck> verify_properties(const SimilarSublattice& s, int K);

}  // namespace mdlvq
