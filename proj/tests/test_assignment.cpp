#include <doctest.h>

#include <algorithm>
#include <set>

#include "mdlvq/assignment.hpp"
#include "mdlvq/distortion.hpp"

using namespace mdlvq;

namespace {

std::uint64_t rng_state = 77;
i64 rint(i64 lo, i64 hi) {
  rng_state ^= rng_state << 13;
  rng_state ^= rng_state >> 7;
  rng_state ^= rng_state << 17;
  return lo + static_cast<i64>(rng_state % static_cast<std::uint64_t>(hi - lo + 1));
}

// splits an ordered 3-tuple into the origin plus the two remaining points
bool split_origin(const std::vector<IVec>& pts, std::vector<IVec>& rest) {
  bool has_zero = false;
  rest.clear();
  for (const IVec& p : pts) {
    if (p.is_zero() && !has_zero)
      has_zero = true;
    else
      rest.push_back(p);
  }
  return has_zero && rest.size() == 2;
}

// permutation of {O, A, C}: two nearest neighbors of the origin sitting one
// lattice angle apart (|A - C|^2 = 3), centered on an edge-third site
bool is_origin_path(const Lattice& lat, const SimilarSublattice& s, const std::vector<IVec>& pts) {
  i64 nn = lat.q2(s.U.row(0));
  std::vector<IVec> rest;
  if (!split_origin(pts, rest)) return false;
  return lat.q2(rest[0]) == nn && lat.q2(rest[1]) == nn && lat.q2(rest[0] - rest[1]) == 3 * nn;
}

// permutation of {B, O, A}: a nearest-neighbor triangle through the origin,
// centered on a deep hole
bool is_origin_triangle(const Lattice& lat, const SimilarSublattice& s,
                        const std::vector<IVec>& pts) {
  i64 nn = lat.q2(s.U.row(0));
  std::vector<IVec> rest;
  if (!split_origin(pts, rest)) return false;
  return lat.q2(rest[0]) == nn && lat.q2(rest[1]) == nn && lat.q2(rest[0] - rest[1]) == nn;
}

}  // namespace

TEST_SUITE("assignment") {

TEST_CASE("cheapest tuples with centroid at a sublattice point") {
  auto s = construct_a2(5, -1);
  auto tups = tuples_with_centroid(s, fraction_point(s, 2, IVec{0, 0}), 7);
  REQUIRE(tups.size() == 7);
  // (O, O) first
  CHECK(tups[0].points[0].is_zero());
  CHECK(tups[0].points[1].is_zero());
  CHECK(tups[0].cost_q2 == 0);
  // then the six nearest sublattice points paired with their antipodes
  std::set<std::pair<i64, i64>> firsts;
  for (size_t i = 1; i < 7; ++i) {
    CHECK(tups[i].points[1] == -tups[i].points[0]);
    CHECK(s.parent.q2(tups[i].points[0]) == 2 * 31);  // q2 = 2 |.|^2
    firsts.insert({tups[i].points[0][0], tups[i].points[0][1]});
  }
  CHECK(firsts.size() == 6);
  // the 8th tuple is strictly more expensive (no tie at the cut)
  auto more = tuples_with_centroid(s, fraction_point(s, 2, IVec{0, 0}), 8);
  CHECK(more[7].cost_q2 > more[6].cost_q2);
}

TEST_CASE("cheapest tuples with centroid at a half point") {
  auto s = construct_a2(5, -1);
  FractionPoint m = fraction_point(s, 2, IVec{1, 0});
  auto tups = tuples_with_centroid(s, m, 8);
  REQUIRE(tups.size() == 8);
  std::multiset<i64> edges;
  for (const auto& t : tups) {
    // midpoint is the site for every pair
    CHECK(t.points[0] + t.points[1] == m.micro);
    edges.insert(s.parent.q2(t.points[0] - t.points[1]) / 2);
  }
  CHECK(edges.count(31) == 2);        // (O,A), (A,O)
  CHECK(edges.count(3 * 31) == 2);    // (B,F), (F,B)
  CHECK(edges.count(7 * 31) == 4);    // (C,H), (H,C), (E,G), (G,E)
}

TEST_CASE("N=91 tuple ranks reproduce the published edge lengths") {
  auto s = construct_a2(9, -1);
  auto at_o = tuples_with_centroid(s, fraction_point(s, 2, IVec{0, 0}), 20);
  auto edge2 = [&](const KTuple& t) { return s.parent.q2(t.points[0] - t.points[1]) / 2; };
  CHECK(edge2(at_o[18]) == 16 * 91);  // edge 4, in sublattice units
  CHECK(edge2(at_o[19]) == 28 * 91);  // edge 2 sqrt 7
  auto at_m = tuples_with_centroid(s, fraction_point(s, 2, IVec{1, 0}), 25);
  CHECK(edge2(at_m[23]) == 25 * 91);  // edge 5
  CHECK(edge2(at_m[24]) == 27 * 91);  // edge 3 sqrt 3
}

TEST_CASE("greedy assignment on A2 N=31 K=2") {
  auto s = construct_a2(5, -1);
  auto asg = greedy_assign(s, 2);
  REQUIRE(asg.labels.size() == 31);
  auto sums = asg.side_sums();
  CHECK(sums.term1_sum == Frac(1023));
  CHECK(sums.term2_sum == Frac(33));
  CHECK(sums.term1_sum == Frac(31) * sums.term2_sum);
  CHECK(asg.ds_per_dim(Frac(1)) == doctest::Approx(528.0 / 31).epsilon(1e-14));
  // greedy postcondition: used tuples are the cheapest per site
  for (const auto& rep : asg.reps) {
    i64 count = 0, max_used = 0;
    for (const Label& l : asg.labels)
      if (l.site_u == rep.u) {
        ++count;
        max_used = std::max(max_used, l.tuple.cost_q2);
      }
    auto next = tuples_with_centroid(s, rep, count + 1);
    CHECK(max_used <= next.back().cost_q2);
  }
}

TEST_CASE("index one labels every point with K copies of itself") {
  auto s = construct_scaled(Lattice::a2(), 1);
  for (int K : {2, 3}) {
    auto asg = greedy_assign(s, K);
    REQUIRE(asg.labels.size() == 1);
    CHECK(asg.side_sums().term1_sum == Frac(0));
    CHECK(asg.side_sums().term2_sum == Frac(0));
    auto tuple = asg.encode_point(IVec{3, -2});
    REQUIRE(tuple.size() == static_cast<size_t>(K));
    for (const auto& p : tuple) CHECK(p == IVec{3, -2});
  }
}

TEST_CASE("labeling extends to the whole lattice by translation") {
  auto s = construct_a2(5, -1);
  auto asg = greedy_assign(s, 2);
  for (int t = 0; t < 100; ++t) {
    IVec lam{rint(-40, 40), rint(-40, 40)};
    IVec z{rint(-3, 3), rint(-3, 3)};
    IVec shift = z * s.U;
    auto base = asg.encode_point(lam);
    auto moved = asg.encode_point(lam + shift);
    for (size_t k = 0; k < base.size(); ++k) CHECK(moved[k] == base[k] + shift);
  }
}

TEST_CASE("bijectivity: distinct centrals get translation-distinct tuples") {
  auto s = construct_a2(5, -1);
  auto asg = greedy_assign(s, 3);
  // rebuild_lookup throws if two labels share a canonicalized tuple
  CHECK_NOTHROW(asg.rebuild_lookup());
}

TEST_CASE("encode and decode round trips") {
  auto s = construct_a2(5, -1);
  auto asg = greedy_assign(s, 2);
  for (int t = 0; t < 200; ++t) {
    IVec lam{rint(-30, 30), rint(-30, 30)};
    auto tuple = asg.encode_point(lam);
    // all received: exact inverse
    auto back = asg.decode_all(tuple);
    REQUIRE(back.has_value());
    CHECK(*back == lam);
    // one description received: that point verbatim
    DVec one = asg.decode({std::optional<IVec>(tuple[0]), std::nullopt});
    DVec want = s.parent.cartesian(tuple[0]);
    CHECK((one - want).norm2() == 0.0);
    // both received through the average decoder: the pair midpoint is the
    // tuple centroid, a fraction point
    DVec avg = asg.decode({std::optional<IVec>(tuple[0]), std::optional<IVec>(tuple[1])});
    DVec lamc = s.parent.cartesian(lam);
    CHECK((avg - lamc).norm2() < 1e-18);
  }
  // the empty subset decodes to the source mean
  CHECK(asg.decode({std::nullopt, std::nullopt}).norm2() == 0.0);
}

TEST_CASE("pairs decode to the fraction point of their cell") {
  auto s = construct_a2(5, -1);
  auto asg = greedy_assign(s, 2);
  for (const Label& l : asg.labels) {
    IVec sum = l.tuple.points[0] + l.tuple.points[1];
    CHECK(sum == l.site_micro);  // midpoint = attracting site
  }
}

TEST_CASE("site graph adjacency") {
  SUBCASE("Z1: two neighbors per site") {
    auto s = construct_scaled(Lattice::zn(1), 3);
    auto g = build_site_graph(greedy_assign(s, 2));
    CHECK(g.directions.size() == 2);
  }
  SUBCASE("A2 K=2: the solid cell touches six cells") {
    auto s = construct_a2(5, -1);
    auto g = build_site_graph(greedy_assign(s, 2));
    CHECK(g.directions.size() == 6);
  }
  SUBCASE("A2 K=3: deep-hole sites are not neighbors of the origin site") {
    auto s = construct_a2(5, -1);
    auto asg = greedy_assign(s, 3);
    auto g = build_site_graph(asg);
    FractionPoint origin = fraction_point(s, 3, IVec{0, 0});
    std::set<int> neighbor_classes;
    for (const IVec& d : g.directions)
      neighbor_classes.insert(asg.coset_of(origin.u + d));
    CHECK(neighbor_classes.size() == 6);
    // the two deep-hole classes are exactly the missing ones
    int m1 = asg.coset_of(IVec{1, 2});
    int m2 = asg.coset_of(IVec{2, 1});
    CHECK(neighbor_classes.count(m1) == 0);
    CHECK(neighbor_classes.count(m2) == 0);
    // edge-third sites neighbor the origin site
    CHECK(g.neighbors(origin, fraction_point(s, 3, IVec{0, 1})));
    CHECK(!g.neighbors(origin, fraction_point(s, 3, IVec{1, 2})));
  }
}

TEST_CASE("delta finds the documented improving move for K=3, N=31") {
  auto s = construct_a2(5, -1);
  auto asg = greedy_assign(s, 3);
  auto g = build_site_graph(asg);
  Frac zeta = zetas_exact(Frac(1, 10), 3).zeta;

  FractionPoint origin = fraction_point(s, 3, IVec{0, 0});
  std::set<int> neighbor_classes;
  for (const IVec& d : g.directions) neighbor_classes.insert(asg.coset_of(origin.u + d));

  bool found = false;
  Frac best(0);
  FractionPoint best_a = origin, best_b = origin;
  DeltaResult best_r;
  for (size_t c = 0; c < g.sites.size(); ++c) {
    if (g.counts[c] == 0) continue;
    for (const IVec& d : g.directions) {
      FractionPoint b = fraction_point(s, 3, g.sites[c].u + d);
      auto r = delta(asg, g.sites[c], b, zeta);
      CHECK(r.consistent);  // closed form agrees with the direct evaluation
      if (r.value < best) {
        best = r.value;
        best_a = g.sites[c];
        best_b = b;
        best_r = r;
        found = true;
      }
    }
  }
  REQUIRE(found);
  CHECK(best < Frac(0));
  // source: an edge-third site (neighbor of the origin site), whose last used
  // tuple is a triangle through the origin (the O-A-C label)
  int ca = asg.coset_of(best_a.u);
  int cb = asg.coset_of(best_b.u);
  CHECK(neighbor_classes.count(ca) == 1);
  CHECK(neighbor_classes.count(cb) == 0);  // target is a deep-hole site
  auto from_tuples = tuples_with_centroid(s, fraction_point(s, 3, best_a.coset_id()),
                                          best_r.m_before);
  CHECK(is_origin_path(s.parent, s, from_tuples.back().points));
  auto to_tuples = tuples_with_centroid(s, fraction_point(s, 3, best_b.coset_id()),
                                        best_r.n_before + 1);
  CHECK(is_origin_triangle(s.parent, s, to_tuples.back().points));
}

TEST_CASE("no improving move exists for an optimal K=2 design") {
  auto s = construct_a2(5, -1);
  auto asg = greedy_assign(s, 2);
  auto g = build_site_graph(asg);
  Frac zeta = zetas_exact(Frac(1, 10), 2).zeta;
  for (size_t c = 0; c < g.sites.size(); ++c) {
    if (g.counts[c] == 0) continue;
    for (const IVec& d : g.directions) {
      FractionPoint b = fraction_point(s, 2, g.sites[c].u + d);
      auto r = delta(asg, g.sites[c], b, zeta);
      CHECK(r.value >= Frac(0));
    }
  }
}

TEST_CASE("a symmetric configuration yields an exactly zero delta") {
  auto s = construct_a2(3, 0);  // scaled by 3, N = 9
  auto asg = greedy_assign(s, 2);
  auto g = build_site_graph(asg);
  Frac zeta = zetas_exact(Frac(1, 10), 2).zeta;
  bool zero_found = false;
  for (size_t c = 0; c < g.sites.size() && !zero_found; ++c) {
    if (g.counts[c] == 0) continue;
    for (const IVec& d : g.directions) {
      FractionPoint b = fraction_point(s, 2, g.sites[c].u + d);
      if (asg.coset_of(b.u) == asg.coset_of(g.sites[c].u)) continue;
      auto r = delta(asg, g.sites[c], b, zeta);
      if (!(r.value == Frac(0))) continue;
      // the moved point sits exactly on the bisector of the two sites
      if (s.parent.q2(r.moved_offset) !=
          s.parent.q2(r.moved_offset - (b.micro - g.sites[c].micro)))
        continue;
      zero_found = true;
      CHECK(r.consistent);
      // and the marginal tuple costs coincide: f_b(n+1) = f_a(m)
      auto fa = tuples_with_centroid(s, fraction_point(s, 2, g.sites[c].coset_id()), r.m_before);
      auto fb = tuples_with_centroid(s, fraction_point(s, 2, b.coset_id()), r.n_before + 1);
      CHECK(fa.back().cost_q2 == fb.back().cost_q2);
      break;
    }
  }
  CHECK(zero_found);
}

TEST_CASE("delta rejects non-neighbors and empty sites") {
  auto s = construct_a2(5, -1);
  auto asg = greedy_assign(s, 2);
  Frac one(1);
  FractionPoint a = fraction_point(s, 2, IVec{0, 0});
  FractionPoint far = fraction_point(s, 2, IVec{4, 4});
  CHECK_THROWS_AS(delta(asg, a, far, one), std::invalid_argument);

  auto tiny = greedy_assign(construct_scaled(Lattice::a2(), 1), 2);
  auto g = build_site_graph(tiny);
  FractionPoint empty_site = fraction_point(tiny.sub, 2, IVec{0, 1});
  FractionPoint target = fraction_point(tiny.sub, 2, IVec{0, 2});
  REQUIRE(g.neighbors(empty_site, target));
  CHECK_THROWS_AS(delta(tiny, empty_site, target, one), std::domain_error);
}

TEST_CASE("local adjustment") {
  Frac zeta3 = zetas_exact(Frac(1, 10), 3).zeta;
  SUBCASE("improves the K=3, N=31 greedy labeling monotonically") {
    auto s = construct_a2(5, -1);
    auto asg = greedy_assign(s, 3);
    AdjustStats st;
    auto adj = local_adjust(asg, zeta3, &st);
    CHECK(st.steps == 6);
    CHECK(!st.closed_form_defect);
    for (const Frac& d : st.delta_trace) CHECK(d < Frac(0));
    auto sa = asg.side_sums(), sb = adj.side_sums();
    Frac before = sa.term1_sum + zeta3 * sa.term2_sum;
    Frac after = sb.term1_sum + zeta3 * sb.term2_sum;
    CHECK(after < before);
    // adjusted labeling still bijective and translation-consistent
    CHECK_NOTHROW(adj.rebuild_lookup());
  }
  SUBCASE("leaves an already optimal design untouched") {
    auto s = construct_a2(5, -1);
    auto asg = greedy_assign(s, 2);
    AdjustStats st;
    auto adj = local_adjust(asg, Frac(1), &st);
    CHECK(st.steps == 0);
    CHECK(adj.side_sums().term1_sum == asg.side_sums().term1_sum);
  }
  SUBCASE("index one is a fixed point") {
    auto asg = greedy_assign(construct_scaled(Lattice::a2(), 1), 3);
    AdjustStats st;
    local_adjust(asg, zeta3, &st);
    CHECK(st.steps == 0);
  }
}

TEST_CASE("adjusted labelings keep exact inverses and translation structure") {
  auto s = construct_a2(5, -1);
  Frac zeta = zetas_exact(Frac(1, 10), 3).zeta;
  auto adj = local_adjust(greedy_assign(s, 3), zeta);
  for (const Label& l : adj.labels) {
    auto back = adj.decode_all(l.tuple.points);
    REQUIRE(back.has_value());
    CHECK(*back == l.central);
    // the attraction site is always the tuple centroid
    IVec centroid = l.tuple.points[0] + l.tuple.points[1] + l.tuple.points[2];
    CHECK(centroid == l.site_micro);
  }
  for (int t = 0; t < 50; ++t) {
    IVec lam{rint(-30, 30), rint(-30, 30)};
    IVec z{rint(-2, 2), rint(-2, 2)};
    IVec shift = z * s.U;
    auto base = adj.encode_point(lam);
    auto moved = adj.encode_point(lam + shift);
    for (size_t k = 0; k < base.size(); ++k) CHECK(moved[k] == base[k] + shift);
  }
}

TEST_CASE("encode agrees with the rigorous site search") {
  auto s = construct_a2(9, -1);
  auto asg = greedy_assign(s, 2);
  for (int t = 0; t < 300; ++t) {
    IVec lam{rint(-50, 50), rint(-50, 50)};
    auto tuple = asg.encode_point(lam);
    // the tuple centroid is the nearest fraction point of lambda
    FractionPoint sigma = nearest_fraction_point(s, 2, lam);
    CHECK(tuple[0] + tuple[1] == sigma.micro);
  }
}

}  // TEST_SUITE
