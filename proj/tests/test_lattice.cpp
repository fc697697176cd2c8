#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mdlvq/lattice.hpp"

using namespace mdlvq;

namespace {

// independent oracle: exhaustive integer-coordinate scan with the exact
// quadratic form q(a,b) = a^2 - a b + b^2 (A2) or sum of squares (Z^L)
struct ScanHit {
  IVec u;
  i64 q2;
};
std::vector<ScanHit> exhaustive_scan_a2(i64 window, double radius) {
  std::vector<ScanHit> out;
  for (i64 a = -window; a <= window; ++a)
    for (i64 b = -window; b <= window; ++b) {
      i64 q2 = 2 * (a * a - a * b + b * b);
      if (static_cast<double>(q2) <= 2.0 * radius * radius) out.push_back({IVec{a, b}, q2});
    }
  return out;
}

std::uint64_t rng_state = 0x1234abcd;
double unif() {
  rng_state ^= rng_state << 13;
  rng_state ^= rng_state >> 7;
  rng_state ^= rng_state << 17;
  return (rng_state >> 11) * 0x1.0p-53;
}

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("nearest point rounds on Z^2") {
  Lattice z2 = Lattice::zn(2);
  CHECK(z2.nearest(DVec{0.4, 0.6}) == IVec{0, 1});
  CHECK(z2.nearest(DVec{-1.2, 3.9}) == IVec{-1, 4});
}

TEST_CASE("lattice points are fixed points of the quantizer") {
  for (Lattice lat : {Lattice::a2(), Lattice::zn(3), Lattice::a2(0.25)}) {
    for (int t = 0; t < 200; ++t) {
      IVec u(lat.dim);
      for (int i = 0; i < lat.dim; ++i) u[i] = static_cast<i64>(unif() * 20) - 10;
      CHECK(lat.nearest(lat.cartesian(u)) == u);
    }
  }
}

TEST_CASE("exact midpoint ties break toward lexicographically smaller coords") {
  Lattice a2 = Lattice::a2();
  // midpoint of (0,0) and (1,0): both at squared distance 1/4
  IVec mid{1, 0};
  CHECK(a2.q2(2 * IVec{0, 0} - mid) == a2.q2(2 * IVec{1, 0} - mid));
  CHECK(a2.nearest_exact(mid, 2) == IVec{0, 0});
  // midpoint of (2,1) and (3,1)
  IVec mid2{5, 2};
  CHECK(a2.nearest_exact(mid2, 2) == IVec{2, 1});
  // non-tie sanity: exact nearest of a lattice point is itself
  CHECK(a2.nearest_exact(IVec{6, -4}, 2) == IVec{3, -2});
}

TEST_CASE("ball contents on Z^1") {
  Lattice z1 = Lattice::zn(1);
  auto pts = points_in_ball(z1, DVec{0.0}, 2.5);
  REQUIRE(pts.size() == 5);
  std::set<i64> got;
  for (const auto& p : pts) got.insert(p.coords[0]);
  CHECK(got == std::set<i64>{-2, -1, 0, 1, 2});
}

TEST_CASE("ball contents on A2 match the exhaustive scan") {
  Lattice a2 = Lattice::a2();
  SUBCASE("radius 1.01 captures the kissing number") {
    CHECK(points_in_ball(a2, DVec{0.0, 0.0}, 1.01).size() == 7);
    CHECK(exhaustive_scan_a2(5, 1.01).size() == 7);
  }
  SUBCASE("radius 2.7 captures the 31 nearest with squared distances summing to 132") {
    auto scan = exhaustive_scan_a2(8, 2.7);
    CHECK(scan.size() == 31);
    i64 sum2 = 0;
    for (const auto& h : scan) sum2 += h.q2;
    CHECK(sum2 == 2 * 132);
    auto pts = points_in_ball(a2, DVec{0.0, 0.0}, 2.7);
    CHECK(pts.size() == 31);
  }
  SUBCASE("radius 3.01 also captures the six points at distance 3") {
    CHECK(exhaustive_scan_a2(8, 3.01).size() == 37);
    CHECK(points_in_ball(a2, DVec{0.0, 0.0}, 3.01).size() == 37);
  }
}

TEST_CASE("balls are monotone in the radius") {
  Lattice a2 = Lattice::a2();
  for (int t = 0; t < 20; ++t) {
    DVec c{4.0 * unif() - 2.0, 4.0 * unif() - 2.0};
    double r1 = 3.0 * unif(), r2 = r1 + 2.0 * unif();
    auto small = points_in_ball(a2, c, r1);
    auto big = points_in_ball(a2, c, r2);
    std::set<std::pair<i64, i64>> bigset;
    for (const auto& p : big) bigset.insert({p.coords[0], p.coords[1]});
    for (const auto& p : small) CHECK(bigset.count({p.coords[0], p.coords[1]}) == 1);
  }
}

TEST_CASE("point density approaches 1/nu") {
  Lattice a2 = Lattice::a2();
  double R = 20.0;
  auto pts = points_in_ball(a2, DVec{0.0, 0.0}, R);
  double expected = 3.14159265358979 * R * R / lattice_constants(a2).nu;
  CHECK(std::fabs(pts.size() / expected - 1.0) < 0.01);
}

TEST_CASE("nearest point agrees with exhaustive ball search") {
  for (Lattice lat : {Lattice::a2(), Lattice::zn(2), Lattice::zn(3)}) {
    for (int t = 0; t < 500; ++t) {
      DVec x(lat.dim);
      for (int i = 0; i < lat.dim; ++i) x[i] = 12.0 * unif() - 6.0;
      IVec got = lat.nearest(x);
      double d = std::sqrt((x - lat.cartesian(got)).norm2());
      auto ball = points_in_ball(lat, x, d + 1e-9);
      REQUIRE(!ball.empty());
      double best = (x - ball.front().cart).norm2();
      CHECK((x - lat.cartesian(got)).norm2() <= best + 1e-9);
    }
  }
}

TEST_CASE("second moments") {
  SUBCASE("Z^L is exactly 1/12") {
    for (int L = 1; L <= 4; ++L) {
      auto c = lattice_constants(Lattice::zn(L));
      CHECK(c.second_moment == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
      CHECK(c.method == "closed-form");
    }
  }
  SUBCASE("A2 matches the closed form 5/(36 sqrt 3)") {
    auto c = lattice_constants(Lattice::a2());
    CHECK(std::fabs(c.second_moment - 5.0 / (36.0 * std::sqrt(3.0))) < 1e-9);
    CHECK(c.method == "polygon");
    // scale invariance of the dimensionless constant
    auto c2 = lattice_constants(Lattice::a2(7.5));
    CHECK(std::fabs(c2.second_moment - c.second_moment) < 1e-12);
    CHECK(c2.nu == doctest::Approx(7.5 * 7.5 * c.nu));
  }
  SUBCASE("sphere constant via the gamma formula") {
    CHECK(std::fabs(sphere_second_moment(2) - 1.0 / (4.0 * 3.14159265358979324)) < 1e-12);
    CHECK(sphere_second_moment(1) == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
    // B_L cross-check: G_L = B_L^{-2/L} / (L+2)
    for (int L = 1; L <= 8; ++L) {
      double b = ball_volume(L);
      CHECK(std::fabs(std::pow(b, -2.0 / L) / (L + 2) - sphere_second_moment(L)) < 1e-12);
    }
  }
}

TEST_CASE("relevant vector counts match the cell facet counts") {
  CHECK(relevant_vectors(Lattice::a2(), IMat::identity(2)).size() == 6);
  CHECK(relevant_vectors(Lattice::zn(2), IMat::identity(2)).size() == 4);
  CHECK(relevant_vectors(Lattice::zn(1), IMat::identity(1)).size() == 2);
  CHECK(relevant_vectors(Lattice::zn(4), IMat::identity(4)).size() == 8);
}

TEST_CASE("dimension mismatches are rejected") {
  Lattice a2 = Lattice::a2();
  CHECK_THROWS_AS(points_in_ball(a2, DVec{1.0}, 1.0), std::invalid_argument);
}

}  // TEST_SUITE
