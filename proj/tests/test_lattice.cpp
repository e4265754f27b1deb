#include <doctest.h>

#include <algorithm>

#include "alb/lattice.hpp"
#include "alb/rng.hpp"

using namespace alb;
using namespace alb::lattice;

namespace {

// brute-force oracle: min over site pairs of the sup-norm distance
Coord box_distance_oracle(const Box& a, const Box& b) {
  Coord best = -1;
  for (const Site& x : box_sites(a))
    for (const Site& y : box_sites(b)) {
      Coord d = sup_dist(x, y);
      if (best < 0 || d < best) best = d;
    }
  return best;
}

Site random_site(rng::Stream& st, int d, Coord range) {
  Site s = Site::zero(d);
  for (int i = 0; i < d; ++i)
    s[i] = static_cast<Coord>(st.next() % static_cast<std::uint64_t>(2 * range + 1)) - range;
  return s;
}

}  // namespace

TEST_CASE("sup and one norms") {
  CHECK(sup_norm(Site({0, 0})) == 0);
  CHECK(sup_norm(Site({3, -5})) == 5);
  CHECK(sup_norm(Site({-2, 2, 1})) == 2);
  CHECK(one_norm(Site({0, 0})) == 0);
  CHECK(one_norm(Site({3, -5})) == 8);
  CHECK(one_norm(Site({1, 1, 1})) == 3);
}

TEST_CASE("norm inequality sup <= one <= d*sup") {
  rng::Stream st(7);
  for (int trial = 0; trial < 200; ++trial) {
    int d = 1 + static_cast<int>(st.next() % 3);
    Site s = random_site(st, d, 50);
    CHECK(sup_norm(s) <= one_norm(s));
    CHECK(one_norm(s) <= d * sup_norm(s));
  }
}

TEST_CASE("box_sites examples") {
  auto single = box_sites(Box::centered(2, 0));
  REQUIRE(single.size() == 1);
  CHECK(single[0] == Site({0, 0}));

  auto line = box_sites(Box::centered(1, 1));
  REQUIRE(line.size() == 3);
  CHECK(line[0] == Site({-1}));
  CHECK(line[1] == Site({0}));
  CHECK(line[2] == Site({1}));

  auto shifted = box_sites(Box(Site({2}), 1));
  REQUIRE(shifted.size() == 3);
  CHECK(shifted[0] == Site({1}));
  CHECK(shifted[2] == Site({3}));
}

TEST_CASE("index map is a lexicographic bijection") {
  rng::Stream st(11);
  for (int trial = 0; trial < 20; ++trial) {
    int d = 1 + static_cast<int>(st.next() % 3);
    Coord r = static_cast<Coord>(st.next() % 3);
    Box b(random_site(st, d, 10), r);
    IndexMap m(b);
    auto sites = box_sites(b);
    REQUIRE(sites.size() == b.volume());
    CHECK(std::is_sorted(sites.begin(), sites.end()));
    for (std::size_t i = 0; i < sites.size(); ++i) CHECK(m.index_of(sites[i]) == i);
  }
}

TEST_CASE("box_distance examples and brute-force oracle") {
  CHECK(box_distance(Box::centered(1, 3), Box::centered(1, 3)) == 0);
  CHECK(box_distance(Box(Site({0}), 2), Box(Site({10}), 2)) == 6);
  CHECK(box_distance(Box(Site({0, 0}), 3), Box(Site({7, 0}), 3)) == 1);

  rng::Stream st(13);
  for (int trial = 0; trial < 40; ++trial) {
    int d = 1 + static_cast<int>(st.next() % 2);
    Box a(random_site(st, d, 8), static_cast<Coord>(st.next() % 3));
    Box b(random_site(st, d, 8), static_cast<Coord>(st.next() % 3));
    Coord dist = box_distance(a, b);
    CHECK(dist == box_distance_oracle(a, b));
    CHECK(dist == box_distance(b, a));
    CHECK((dist == 0) == boxes_intersect(a, b));
  }
}

TEST_CASE("box_distance rejects dimension mismatch") {
  CHECK_THROWS_AS(box_distance(Box::centered(1, 1), Box::centered(2, 1)), std::invalid_argument);
}
