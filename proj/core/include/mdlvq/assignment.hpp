#pragma once

#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mdlvq/kfraction.hpp"

namespace mdlvq {

// An ordered K-tuple of sublattice points. `points` are parent coordinates,
// `zs` the same points with respect to G_s. The centroid in micro coordinates
// (denominator K) is the sum of the parent coordinate vectors.
struct KTuple {
  std::vector<IVec> points;
  std::vector<IVec> zs;
  i64 cost_q2 = 0;  // sum_k q2(K p_k - centroid_micro); denominator 2 K^2

  IVec centroid_micro() const {
    IVec s = points.front();
    for (size_t i = 1; i < points.size(); ++i) s = s + points[i];
    return s;
  }
};

// Lazily extended list of the tuples with a fixed centroid, sorted by
// (cost, lexicographic points). Tuples are stored relative to the site in
// micro coordinates, so one list serves every site of the coset class.
class SiteTuples {
 public:
  SiteTuples() = default;
  SiteTuples(const SimilarSublattice* s, int K, IVec rep_u);

  struct Rel {
    std::vector<IVec> micro_rel;  // K vectors, sum = 0, denominator K
    i64 cost_q2 = 0;
  };

  // tuples are 1-indexed by rank
  const Rel& at(i64 rank);
  i64 cost(i64 rank) { return at(rank).cost_q2; }
  void ensure(i64 count);
  i64 available() const { return static_cast<i64>(tuples_.size()); }

 private:
  const SimilarSublattice* sub_ = nullptr;
  int K_ = 2;
  IVec rep_u_;
  i64 bound_ = 0;
  std::vector<Rel> tuples_;
  void grow();
};

// The `count` cheapest ordered K-tuples with centroid tau, absolute
// coordinates.
std::vector<KTuple> tuples_with_centroid(const SimilarSublattice& s, const FractionPoint& tau,
                                         i64 count);

struct Label {
  IVec central;     // parent coordinates
  IVec site_u;      // attracting site, coords wrt G_s (denominator K)
  IVec site_micro;  // site_u * U
  KTuple tuple;
};

struct SideSums {
  Frac term1_sum;  // sum over labels of (1/K) sum_k |p_k - centroid|^2
  Frac term2_sum;  // sum over labels of |central - centroid|^2
  // canonical length units, unnormalized
};

class IndexAssignment {
 public:
  Lattice lat;
  SimilarSublattice sub;
  int K = 2;
  std::vector<FractionPoint> reps;
  std::vector<Label> labels;  // the N fundamental labels

  i64 index_n() const { return sub.index_n; }
  int coset_of(const IVec& u) const;

  SideSums side_sums() const;
  // d_s in the analytic convention: per dimension, scaled units
  double ds_per_dim(const Frac& zeta) const;

  // alpha extended to the whole lattice by sublattice translation
  std::vector<IVec> encode_point(const IVec& central) const;
  std::vector<IVec> encode(const DVec& x) const;
  // exact inverse for a complete tuple
  std::optional<IVec> decode_all(const std::vector<IVec>& tuple) const;
  // average decoding; nullopt entries are lost descriptions; returns scaled
  // cartesian reconstruction (origin for the empty subset)
  DVec decode(const std::vector<std::optional<IVec>>& received) const;

  void rebuild_lookup();

 private:
  std::unordered_map<IVec, int, IVecHash> central_index_;
  std::map<std::vector<i64>, int> tuple_index_;  // canonicalized tuple key
  DMat uinv_d_;                                  // cached U^-1 for encoding
  std::vector<i64> tuple_key(const std::vector<IVec>& tuple) const;
  FractionPoint nearest_site_fast(const IVec& central) const;
};

IndexAssignment greedy_assign(const SimilarSublattice& s, int K);

struct SiteGraph {
  std::vector<FractionPoint> sites;  // coset representatives
  std::vector<i64> counts;           // attracted points per coset class
  std::vector<IVec> directions;      // relevant coeff vectors z of Lambda_s;
                                     // neighbor of site u is u + z
  bool neighbors(const FractionPoint& a, const FractionPoint& b) const;
};
SiteGraph build_site_graph(const IndexAssignment& asg);

struct DeltaResult {
  Frac value;              // exact change of sum_F d(lambda), unnormalized
  double closed_form = 0;  // projection form of the second-term change
  bool consistent = true;
  IVec moved_offset;       // offset of the moved point from site a (micro)
  i64 m_before = 0, n_before = 0;
};

// Cost change of relabeling the max-projection point of site a toward
// neighbor site b. `zeta` is the exact weight zeta1/zeta2 of the channel;
// `consistency_tol` bounds the allowed disagreement with the projection form.
DeltaResult delta(const IndexAssignment& asg, const FractionPoint& a, const FractionPoint& b,
                  const Frac& zeta, double consistency_tol = 1e-9);

struct AdjustStats {
  i64 steps = 0;
  bool closed_form_defect = false;
  std::vector<Frac> delta_trace;
  std::vector<std::pair<IVec, IVec>> moves;  // (site a micro, site b micro)
};

// Greedy repair loop: repeatedly apply the most negative Delta move until
// none remains. Exact arithmetic; d_s strictly decreases every step.
IndexAssignment local_adjust(const IndexAssignment& asg, const Frac& zeta,
                             AdjustStats* stats = nullptr, double consistency_tol = 1e-9);

}  // namespace mdlvq
