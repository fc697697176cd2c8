#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdlvq/distortion.hpp"

namespace mdlvq {

// Exact rectangular min-cost assignment (rows <= columns), integer costs.
// Returns the per-row match, the optimal total and the final row potentials;
// any column outside the matrix whose cheapest conceivable edge is >= the
// maximum row potential cannot improve the matching.
struct MatchResult {
  std::vector<int> match_left;
  i64 total = 0;
  std::vector<i64> left_potential;
};
MatchResult min_cost_matching(const std::vector<std::vector<i64>>& cost);

struct OracleResult {
  IndexAssignment assignment;
  SideSums sums;
  Frac ds_weighted;  // term1 + zeta * term2, unnormalized canonical units
  bool certified = false;
  i64 pool_per_class = 0;
  i64 max_left_potential = 0;
  std::string note;
};
// Globally optimal index assignment by minimum-cost matching between the N
// fundamental central points and translation classes of candidate K-tuples.
// Candidate pools grow until the dual certificate covers every excluded
// tuple; an uncertified result is flagged, never silently truncated.
OracleResult bruteforce_assign(const SimilarSublattice& s, int K, const Frac& p);

struct SimConfig {
  i64 trials = 1'000'000;
  std::uint64_t seed = 1;
  SourceModel source;
  Frac p = Frac(1, 10);
  int threads = 0;  // 0: MDLVQ_THREADS env var, then hardware concurrency
};

struct SimResult {
  i64 trials = 0;
  std::uint64_t seed = 0;
  double d_c_hat = 0, d_c_se = 0;
  std::vector<double> d_k_hat, d_k_se;  // conditioned on k received, k = 0..K
  std::vector<i64> d_k_count;
  double D_hat = 0, D_se = 0;  // overall expected distortion per dimension
};
// i.i.d. source draws over the box, i.i.d. Bernoulli(p) losses per
// description, average decoding. Counter-based per-trial randomness: results
// are identical for any thread count.
SimResult simulate(const IndexAssignment& asg, const SimConfig& cfg);

struct CompareReport {
  bool same_design = false;
  Frac ds_a, ds_b, ds_diff;  // weighted side sums, unnormalized
  double ds_a_per_dim = 0, ds_b_per_dim = 0;
  double D_a = 0, D_b = 0;
  std::vector<i64> site_count_a, site_count_b;
  i64 labels_differing = 0;
};
CompareReport compare(const IndexAssignment& a, const IndexAssignment& b, const Frac& p,
                      const SourceModel& src);

}  // namespace mdlvq
