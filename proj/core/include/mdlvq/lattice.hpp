#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdlvq/geom.hpp"

namespace mdlvq {

enum class Family { Z, A2, Custom };

std::string family_name(Family f);
Family family_from_name(const std::string& s);

// A full-rank lattice { u G : u in Z^L }. The generator is a scaled copy of a
// canonical basis whose doubled Gram matrix has integer entries, so squared
// distances between lattice points are compared exactly as integers.
struct Lattice {
  Family family = Family::Z;
  int dim = 1;
  double scale = 1.0;  // length multiplier on the canonical basis
  DMat gen;            // scaled generator, rows are basis vectors
  DMat gen_canon;      // generator at scale 1
  DMat gen_canon_inv;
  IMat form2;          // doubled Gram matrix of the canonical basis
  double cell_volume = 1.0;  // nu = |det gen|

  static Lattice zn(int dim, double scale = 1.0);
  static Lattice a2(double scale = 1.0);
  static Lattice make(Family f, int dim, double scale = 1.0);

  // 2 |v Gc|^2 for an integer coefficient vector v (canonical units).
  i64 q2(const IVec& v) const {
    i64 s = 0;
    for (int i = 0; i < dim; ++i) {
      s += form2.at(i, i) * v[i] * v[i];
      for (int j = i + 1; j < dim; ++j) s += 2 * form2.at(i, j) * v[i] * v[j];
    }
    return s;
  }
  // 2 <a Gc, b Gc>
  i64 ip2(const IVec& a, const IVec& b) const {
    i64 s = 0;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) s += form2.at(i, j) * a[i] * b[j];
    return s;
  }

  DVec cartesian(const IVec& coords) const;                 // scaled units
  DVec cartesian_frac(const IVec& num, i64 den) const;      // (num/den) Gc * scale
  DVec coords_of(const DVec& x) const;                      // x gen^-1

  // Nearest lattice point to a real x (scaled cartesian units). Near-ties
  // within 1e-9 relative are broken toward lexicographically smaller coords.
  IVec nearest(const DVec& x) const;
  // Exact variant for rational inputs given in canonical coordinate space:
  // minimizes q2(den*u - num) with exact lexicographic tie-break.
  IVec nearest_exact(const IVec& num, i64 den) const;
};

struct LatticePoint {
  IVec coords;
  DVec cart;
};

// All coefficient vectors u with q2(u B - off) <= q2_bound, sorted by
// (q2, lex u). B is an integer row basis, off an integer offset vector, both
// expressed in the lattice's canonical coordinate space.
struct BallEntry {
  IVec u;
  i64 q2;
};
std::vector<BallEntry> enum_ball(const Lattice& lat, const IMat& B, const IVec& off, i64 q2_bound);

// Lattice points within `radius` of a real center, sorted by (distance, lex).
std::vector<LatticePoint> points_in_ball(const Lattice& lat, const DVec& center, double radius);
// Exact version: center = num/den in canonical coordinates, r2 = squared
// radius in canonical length units.
std::vector<BallEntry> points_in_ball_exact(const Lattice& lat, const IVec& center_num, i64 den,
                                            const Frac& r2);

struct LatticeConstants {
  double nu = 0.0;             // Voronoi cell volume (scaled units)
  double second_moment = 0.0;  // dimensionless normalized second moment
  double tolerance = 0.0;      // achieved accuracy of the second moment
  std::string method;          // closed-form | polygon | monte-carlo
};
LatticeConstants lattice_constants(const Lattice& lat);

// Dimensionless normalized second moment of an L-sphere and unit ball volume.
double sphere_second_moment(int dim);
double ball_volume(int dim);

// Source description: differential entropy and second moment, both per
// dimension. A centered uniform box is supported natively for sampling.
struct SourceModel {
  double h_bits = 0.0;
  double ex2 = 1.0 / 12.0;
  bool is_box = true;
  double box_side = 1.0;

  static SourceModel uniform_box(double side) {
    SourceModel s;
    s.h_bits = std::log2(side);
    s.ex2 = side * side / 12.0;
    s.is_box = true;
    s.box_side = side;
    return s;
  }
  static SourceModel custom(double h_bits, double ex2) {
    SourceModel s;
    s.h_bits = h_bits;
    s.ex2 = ex2;
    s.is_box = false;
    return s;
  }
};

// Determinant +1 automorphisms of the lattice, as coefficient-space matrices
// P with q2(u P) = q2(u). Covers the shipped families.
std::vector<IMat> rotation_automorphisms(const Lattice& lat);

// Voronoi-relevant vectors of the sublattice generated by rows of `basis`
// (parent coordinates), returned as coefficient vectors z (vector = z basis).
// Includes both members of each +/- pair.
std::vector<IVec> relevant_vectors(const Lattice& lat, const IMat& basis);

// Upper bound R with every point of space within R of the sublattice
// generated by `basis`; canonical length units.
double covering_radius_bound(const Lattice& lat, const IMat& basis);

}  // namespace mdlvq
