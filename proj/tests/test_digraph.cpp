#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ccdos/digraph.hpp"
#include "ccdos/error.hpp"
#include "ccdos/rng.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace ccdos;

namespace {

RadiusStrategy fixed_k(std::size_t k) {
  RadiusStrategy s;
  s.kind = RadiusStrategy::Kind::fixed_k;
  s.k = k;
  return s;
}

CatchDigraph line_digraph() {
  const NeighborIndex idx(testing::line({0, 1, 3}));
  return build_catch_digraph(idx, {1, 1, 2});
}

}  // namespace

TEST_CASE("fixed-k radii on a line") {
  const NeighborIndex idx(testing::line({0, 1, 3}));
  CHECK(estimate_radii(idx, fixed_k(1)) == std::vector<double>{1, 1, 2});
}

TEST_CASE("default k") {
  RadiusStrategy s;
  CHECK(s.resolved_k(100) == 10);
  CHECK(s.resolved_k(3) == 2);
  CHECK(s.resolved_k(2) == 1);
}

TEST_CASE("coincident points get a positive radius") {
  const NeighborIndex idx(testing::line({0, 0, 1, 2, 4}));
  for (auto kind : {RadiusStrategy::Kind::fixed_k, RadiusStrategy::Kind::rk_approx,
                    RadiusStrategy::Kind::un_approx}) {
    RadiusStrategy s;
    s.kind = kind;
    s.k = 1;
    const auto r = estimate_radii(idx, s);
    for (double v : r) CHECK(v > 0.0);
  }
  const auto r = estimate_radii(idx, fixed_k(1));
  CHECK(r[0] == 1.0);
  CHECK(r[1] == 1.0);
}

TEST_CASE("all-coincident data is rejected") {
  const NeighborIndex idx(testing::line({2, 2, 2}));
  CHECK_THROWS_AS(estimate_radii(idx, fixed_k(1)), DegenerateData);
  const NeighborIndex one(testing::line({2}));
  CHECK_THROWS_AS(estimate_radii(one, fixed_k(1)), DegenerateData);
}

TEST_CASE("rk-approx radii on uniform data sit near the CSR scale") {
  const auto ps = testing::random_points(17, 500, 2);
  const NeighborIndex idx(ps);
  RadiusStrategy s;
  s.kind = RadiusStrategy::Kind::rk_approx;
  auto r = estimate_radii(idx, s);
  std::sort(r.begin(), r.end());
  const double med = r[r.size() / 2];
  // Bounding box of a 500-point unit-square sample is close to 1; use it exactly.
  double lo0 = 1, hi0 = 0, lo1 = 1, hi1 = 0;
  for (std::size_t i = 0; i < 500; ++i) {
    lo0 = std::min(lo0, ps.at(i, 0));
    hi0 = std::max(hi0, ps.at(i, 0));
    lo1 = std::min(lo1, ps.at(i, 1));
    hi1 = std::max(hi1, ps.at(i, 1));
  }
  const double lambda = 500.0 / ((hi0 - lo0) * (hi1 - lo1));
  const double ref = std::sqrt(22.0 / (lambda * M_PI));
  CHECK(med >= 0.5 * ref);
  CHECK(med <= 2.0 * ref);
}

TEST_CASE("un-approx radius is the scaled median neighbor NND") {
  // 1-NN distances: 1, 1, 2, 2, 3 (points 0, 1, 3, 5, 8 on a line).
  const NeighborIndex idx(testing::line({0, 1, 3, 5, 8}));
  RadiusStrategy s;
  s.kind = RadiusStrategy::Kind::un_approx;
  s.k = 2;
  const auto r = estimate_radii(idx, s);
  // Point 2 (x=3): neighbors 1 (x=1, nnd 1) and 3 (x=5, nnd 2) -> median 1.5.
  CHECK(r[2] == doctest::Approx(3.0));
}

TEST_CASE("catch digraph on the line fixture") {
  const auto dg = line_digraph();
  CHECK(dg.covers[0] == std::vector<std::size_t>{1});
  CHECK(dg.covers[1] == std::vector<std::size_t>{0});
  CHECK(dg.covers[2] == std::vector<std::size_t>{1});
  CHECK(dg.catches(2, 1));
  CHECK_FALSE(dg.catches(1, 2));
  CHECK(dg.covered_count == std::vector<std::size_t>{2, 2, 2});
}

TEST_CASE("single point digraph") {
  const NeighborIndex idx(PointSet(1, 2, {0, 0}));
  const auto dg = build_catch_digraph(idx, {1.0});
  CHECK(dg.covers[0].empty());
  CHECK(dg.covered_count[0] == 1);
}

TEST_CASE("digraph rejects bad radii") {
  const NeighborIndex idx(testing::line({0, 1}));
  CHECK_THROWS_AS(build_catch_digraph(idx, {1.0}), ConfigError);
  CHECK_THROWS_AS(build_catch_digraph(idx, {1.0, 0.0}), ConfigError);
}

TEST_CASE("inbound neighbors respect clusters") {
  const auto dg = line_digraph();
  const auto one = single_cluster(3);
  CHECK(inbound_neighbors(dg, one, 1) == std::vector<std::size_t>{0, 2});
  CHECK(inbound_neighbors(dg, one, 2).empty());
  const auto split = clustering_from_labels({0, 0, 1});
  CHECK(inbound_neighbors(dg, split, 1) == std::vector<std::size_t>{0});
  CHECK(outbound_neighbors(dg, 2) == std::vector<std::size_t>{1});
}

TEST_CASE("adjacency and inbound sets match brute force") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto ps = testing::random_points(seed, 60, 1 + seed % 3);
    const NeighborIndex idx(ps);
    const auto radii = estimate_radii(idx, fixed_k(1 + seed % 9));
    const auto dg = build_catch_digraph(idx, radii);
    const auto want = oracle::covers(ps, radii);
    CHECK(dg.covers == want);
    for (std::size_t i = 0; i < 60; ++i) CHECK(dg.covered_count[i] == want[i].size() + 1);

    std::vector<std::size_t> mask(60);
    for (std::size_t i = 0; i < 60; ++i) mask[i] = (i * 7 + seed) % 3;
    const auto cl = clustering_from_labels(mask);
    const auto all = all_inbound_neighbors(dg, cl);
    for (std::size_t i = 0; i < 60; ++i) {
      std::vector<std::size_t> in;
      for (std::size_t j = 0; j < 60; ++j)
        if (j != i && mask[j] == mask[i] &&
            std::find(want[j].begin(), want[j].end(), i) != want[j].end())
          in.push_back(j);
      CHECK(inbound_neighbors(dg, cl, i) == in);
      CHECK(all[i] == in);
    }
  }
}

TEST_CASE("clustering examples") {
  SUBCASE("two separated blobs") {
    CounterRng rng(3);
    std::vector<double> c;
    for (int b = 0; b < 2; ++b)
      for (int i = 0; i < 20; ++i) {
        c.push_back(10.0 * b + rng.uniform());
        c.push_back(rng.uniform());
      }
    const PointSet ps(40, 2, c);
    const NeighborIndex idx(ps);
    const auto dg = build_catch_digraph(idx, estimate_radii(idx, fixed_k(5)));
    const auto cl = cluster(dg, ps);
    REQUIRE(cl.cluster_count() == 2);
    CHECK(cl.cluster_size(0) == 20);
    CHECK(cl.cluster_size(1) == 20);
  }
  SUBCASE("mutual pair and a distant isolated point") {
    const PointSet ps = testing::line({0, 1, 10});
    const NeighborIndex idx(ps);
    const auto dg = build_catch_digraph(idx, {1, 1, 2});
    const auto cl = cluster(dg, ps);
    REQUIRE(cl.cluster_count() == 2);
    CHECK(cl.members[0] == std::vector<std::size_t>{0, 1});
    CHECK(cl.members[1] == std::vector<std::size_t>{2});
  }
  SUBCASE("isolated point near a cluster is attached") {
    const PointSet ps = testing::line({0, 1, 4});
    const NeighborIndex idx(ps);
    const auto dg = build_catch_digraph(idx, {1, 1, 1.5});
    const auto cl = cluster(dg, ps);
    CHECK(cl.cluster_count() == 1);
  }
  SUBCASE("mutually covering triangle") {
    const PointSet ps(3, 2, {0, 0, 1, 0, 0.5, 0.8});
    const NeighborIndex idx(ps);
    const auto dg = build_catch_digraph(idx, {2, 2, 2});
    CHECK(cluster(dg, ps).cluster_count() == 1);
  }
}

TEST_CASE("clustering is a partition refining no mutual component") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto ps = testing::random_points(seed, 25 + seed, 2);
    const NeighborIndex idx(ps);
    const auto dg = build_catch_digraph(idx, estimate_radii(idx, fixed_k(1 + seed % 5)));
    const auto cl = cluster(dg, ps);
    std::size_t total = 0;
    for (std::size_t c = 0; c < cl.cluster_count(); ++c) {
      total += cl.cluster_size(c);
      CHECK(std::is_sorted(cl.members[c].begin(), cl.members[c].end()));
      for (auto i : cl.members[c]) CHECK(cl.cluster_of[i] == c);
      if (c > 0) CHECK(cl.cluster_size(c - 1) >= cl.cluster_size(c));
    }
    CHECK(total == ps.size());
    const auto comp = oracle::mutual_components(dg.covers);
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (std::size_t j = 0; j < ps.size(); ++j)
        if (comp[i] == comp[j]) CHECK(cl.cluster_of[i] == cl.cluster_of[j]);
  }
}

TEST_CASE("radius kind names") {
  CHECK(parse_radius_kind("rk-approx") == RadiusStrategy::Kind::rk_approx);
  CHECK(parse_radius_kind("un-approx") == RadiusStrategy::Kind::un_approx);
  CHECK(parse_radius_kind("fixed-k") == RadiusStrategy::Kind::fixed_k);
  CHECK_THROWS_AS(parse_radius_kind("ripley"), ConfigError);
}
