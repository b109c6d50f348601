#include <random>
#include <set>

#include "doctest.h"
#include "ness/lattice.hpp"
#include "oracles.hpp"

using namespace ness;

TEST_CASE("darken core sizes") {
  CHECK(LatticeDomain::darken(1).size() == 16);
  CHECK(LatticeDomain::darken(2).size() == 128);
  for (int n = 1; n <= 4; ++n) CHECK(LatticeDomain::darken(n).size() == 4 * n * (2 * n) * (2 * n));
  CHECK_THROWS_AS(LatticeDomain::darken(0), std::invalid_argument);
  CHECK_THROWS_AS(LatticeDomain::darken(-3), std::invalid_argument);
}

TEST_CASE("channel core sizes and limits") {
  CHECK(LatticeDomain::channel(4, 1).size() == 63);
  CHECK(LatticeDomain::channel(8, 2).size() == 15 * 25);
  CHECK_THROWS_AS(LatticeDomain::channel(4, 4), std::invalid_argument);
  CHECK_THROWS_AS(LatticeDomain::channel(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(LatticeDomain::channel(4, 0), std::invalid_argument);
  CHECK_FALSE(channel_scale_warning(8, 2));
  CHECK(channel_scale_warning(4, 2));
}

TEST_CASE("degree examples") {
  const auto d1 = LatticeDomain::darken(1);
  CHECK(d1.ambient_degree({-2, -1, -1}) == 4);
  CHECK(d1.core_degree({-2, -1, -1}) == 3);
  // x2, x3 range over {-1, 0} at N=1, so (0,1,0) and (0,0,1) are excluded.
  CHECK(d1.ambient_degree({0, 0, 0}) == 4);
  CHECK(d1.core_degree({0, 0, 0}) == 4);

  const auto c = LatticeDomain::channel(4, 1);
  CHECK(c.ambient_degree({0, 0, 0}) == 6);
  CHECK(c.core_degree({0, 0, 0}) == 6);
  CHECK(c.ambient_degree({3, 0, 0}) == 6);
  CHECK(c.core_degree({3, 0, 0}) == 5);
  CHECK(c.ambient_degree({4, 0, 0}) == 6);
  CHECK(c.ambient_degree({4, 2, 0}) == 5);  // (3,2,0) is in the excluded slab

  const auto f = LatticeDomain::full_space();
  CHECK(f.ambient_degree({17, -3, 5}) == 6);
  CHECK(f.size() == 0);
}

TEST_CASE("neighbors flags and errors") {
  const auto c = LatticeDomain::channel(4, 1);
  int reservoir = 0;
  for (const auto& nb : c.neighbors({3, 1, -1})) reservoir += nb.kind == NeighborKind::reservoir ? 1 : 0;
  CHECK(reservoir == 1);
  CHECK_THROWS_AS((void)c.neighbors({0, 5, 0}), std::invalid_argument);
  CHECK_THROWS_AS((void)LatticeDomain::darken(1).neighbors({0, 3, 0}), std::invalid_argument);
}

TEST_CASE("property: degrees match the enumeration oracle") {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 3; ++n) {
    const auto dom = LatticeDomain::darken(n);
    for (const Site& x : dom.sites()) {
      const auto d = oracle::count_neighbors(
          x, [n](const Site& y) { return oracle::darken_core(n, y); },
          [n](const Site& y) { return oracle::darken_ambient(n, y); });
      REQUIRE(dom.ambient_degree(x) == d.ambient);
      REQUIRE(dom.core_degree(x) == d.core);
      REQUIRE(d.core <= d.ambient);
      REQUIRE(d.ambient <= 6);
      int res = 0;
      for (const auto& nb : dom.neighbors(x)) res += dom.in_reservoir(nb.site) ? 1 : 0;
      REQUIRE(res == d.ambient - d.core);
    }
  }
  for (auto [n, m] : {std::pair{2, 1}, {4, 1}, {5, 2}, {8, 2}}) {
    const auto dom = LatticeDomain::channel(n, m);
    std::uniform_int_distribution<int> c1(-n - 3, n + 3);
    std::uniform_int_distribution<int> ct(-m - 3, m + 3);
    for (int k = 0; k < 2000; ++k) {
      const Site x{c1(rng), ct(rng), ct(rng)};
      REQUIRE(dom.in_core(x) == oracle::channel_core(n, m, x));
      REQUIRE(dom.in_ambient(x) == oracle::channel_ambient(n, m, x));
      if (!dom.in_ambient(x)) continue;
      const auto d = oracle::count_neighbors(
          x, [&](const Site& y) { return oracle::channel_core(n, m, y); },
          [&](const Site& y) { return oracle::channel_ambient(n, m, y); });
      REQUIRE(dom.ambient_degree(x) == d.ambient);
      REQUIRE(dom.core_degree(x) == d.core);
    }
  }
}

TEST_CASE("property: random membership and reflection symmetry") {
  std::mt19937_64 rng(5);
  for (int n = 1; n <= 3; ++n) {
    const auto dom = LatticeDomain::darken(n);
    std::uniform_int_distribution<int> c(-3 * n - 2, 3 * n + 2);
    for (int k = 0; k < 3000; ++k) {
      const Site x{c(rng), c(rng), c(rng)};
      REQUIRE(dom.in_core(x) == oracle::darken_core(n, x));
      REQUIRE(dom.in_ambient(x) == oracle::darken_ambient(n, x));
      REQUIRE(dom.in_core(x) == dom.in_core({-1 - x.x1, x.x2, x.x3}));
    }
  }
  const auto ch = LatticeDomain::channel(6, 2);
  std::uniform_int_distribution<int> c(-12, 12);
  for (int k = 0; k < 3000; ++k) {
    const Site x{c(rng), c(rng), c(rng)};
    REQUIRE(ch.in_ambient(x) == ch.in_ambient({-x.x1, x.x2, x.x3}));
  }
}

TEST_CASE("property: neighbor relation is symmetric") {
  std::mt19937_64 rng(9);
  const auto ch = LatticeDomain::channel(5, 1);
  std::uniform_int_distribution<int> c(-8, 8);
  for (int k = 0; k < 2000; ++k) {
    const Site x{c(rng), c(rng), c(rng)};
    if (!ch.in_ambient(x)) continue;
    for (const auto& nb : ch.neighbors(x)) {
      bool back = false;
      for (const auto& nb2 : ch.neighbors(nb.site)) back = back || nb2.site == x;
      REQUIRE(back);
    }
  }
}

TEST_CASE("core is connected") {
  for (const auto& dom : {LatticeDomain::darken(2), LatticeDomain::channel(4, 1)}) {
    std::set<Site> seen{dom.site(0)};
    std::vector<Site> stack{dom.site(0)};
    while (!stack.empty()) {
      const Site x = stack.back();
      stack.pop_back();
      for (const auto& nb : dom.neighbors(x))
        if (nb.kind == NeighborKind::core && seen.insert(nb.site).second) stack.push_back(nb.site);
    }
    CHECK(static_cast<Index>(seen.size()) == dom.size());
  }
}

TEST_CASE("indexing is lexicographic and invertible") {
  const auto dom = LatticeDomain::darken(2);
  const auto expected = oracle::darken_sites(2);
  REQUIRE(static_cast<std::size_t>(dom.size()) == expected.size());
  for (Index i = 0; i < dom.size(); ++i) {
    CHECK(dom.site(i) == expected[static_cast<std::size_t>(i)]);
    CHECK(dom.index(dom.site(i)) == i);
  }
  CHECK_FALSE(dom.index_of({9, 0, 0}).has_value());
  CHECK_THROWS_AS((void)dom.index({9, 0, 0}), std::out_of_range);
}

TEST_CASE("bonds") {
  const auto dom = LatticeDomain::darken(1);
  // 3 e1-bonds per line of 4 sites * 4 lines, plus 1 bond per transverse pair: 4 * 2 * 2 each.
  CHECK(dom.bonds().size() == 12 + 8 + 8);
  for (const Bond& b : dom.bonds()) {
    CHECK(are_neighbors(dom.site(b.from), dom.site(b.to)));
    CHECK(dom.site(b.to) - dom.site(b.from) == kUnitSteps[static_cast<std::size_t>(2 * b.axis)]);
  }
}

TEST_CASE("site sets") {
  const auto d1 = site_sets(LatticeDomain::darken(1));
  REQUIRE(d1.size() == 2);
  CHECK(d1[0].label == SiteSetLabel::left_face);
  CHECK(d1[0].sites.size() == 4);
  for (const Site& s : d1[0].sites) CHECK(s.x1 == -2);

  const auto d2 = site_sets(LatticeDomain::darken(2));
  CHECK(d2[1].label == SiteSetLabel::right_face);
  CHECK(d2[1].x1 == 3);
  CHECK(d2[1].sites.size() == 16);

  const auto dom = LatticeDomain::channel(4, 1);
  const auto sets = site_sets(dom);
  int sections = 0;
  for (const auto& s : sets) {
    if (s.label == SiteSetLabel::sigma_plus || s.label == SiteSetLabel::sigma_minus) {
      CHECK(s.sites.size() == 9);
      CHECK(std::abs(s.x1) == 4);
      for (const Site& x : s.sites) {
        CHECK(dom.in_ambient(x));
        CHECK_FALSE(dom.in_core(x));
      }
    }
    if (s.label == SiteSetLabel::section) {
      ++sections;
      for (const Site& x : s.sites) CHECK(x.x1 == s.x1);
    }
  }
  CHECK(sections == 7);
  CHECK_THROWS_AS(site_sets(LatticeDomain::full_space()), std::invalid_argument);
}

TEST_CASE("neighbor predicate") {
  CHECK(are_neighbors({0, 0, 0}, {0, -1, 0}));
  CHECK_FALSE(are_neighbors({0, 0, 0}, {1, 1, 0}));
  CHECK_FALSE(are_neighbors({0, 0, 0}, {0, 0, 0}));
  CHECK_FALSE(are_neighbors({0, 0, 0}, {2, 0, 0}));
}
